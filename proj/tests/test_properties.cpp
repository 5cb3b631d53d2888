// Seeded property sweeps, 100+ draws each.
#include <random>

#include "bchain/bose_hubbard.hpp"
#include "bchain/entanglement.hpp"
#include "bchain/free_boson.hpp"
#include "bchain/kicked_gp.hpp"
#include "bchain/linalg.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace bchain;

namespace {

constexpr int kSeeds = 100;

CMat random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CMat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(nd(rng), nd(rng));
  return 0.5 * (a + a.adjoint());
}

}  // namespace

TEST_SUITE("properties") {
  TEST_CASE("random circuits keep norm, charge and Schmidt normalization") {
    for (int seed = 0; seed < kSeeds; ++seed) {
      std::mt19937_64 pick(seed);
      const int n = 2 + static_cast<int>(pick() % 4), m = 1 + static_cast<int>(pick() % 4);
      const auto c = testing::random_circuit(n, m, 20, 1000 + seed);
      double charge = 0.0;
      for (int k = 0; k < n; ++k) charge += expectation_number(c.mps, k);
      CHECK(std::abs(charge - m) < 1e-8);
      CHECK(std::abs(overlap(c.mps, c.mps) - 1.0) < 1e-10);
      for (int b = 0; b + 1 < n; ++b) {
        double s = 0.0;
        for (double l : schmidt_spectrum(c.mps, b)) s += l * l;
        CHECK(std::abs(s - 1.0) < 1e-10);
      }
    }
  }

  TEST_CASE("partial transpose is an involution and keeps hermiticity") {
    for (int seed = 0; seed < kSeeds; ++seed) {
      std::mt19937_64 pick(seed);
      const int n = 2 + static_cast<int>(pick() % 3), m = 1 + static_cast<int>(pick() % 3);
      const auto c = testing::random_circuit(n, m, 12, 5000 + seed);
      const EndPairRdm rho = end_pair_rdm(c.mps);
      CHECK(std::abs(rho.trace() - 1.0) < 1e-10);
      const PartialTransposeRdm pt = partial_transpose(rho);
      double diag = 0.0;
      for (const auto& [q, blk] : pt.blocks) {
        CHECK((blk - blk.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
        diag += blk.trace().real();
      }
      CHECK(std::abs(diag - 1.0) < 1e-10);
      const EndPairRdm back = partial_transpose_back(pt, m);
      for (const auto& [q, blk] : rho.blocks) {
        REQUIRE(back.blocks.count(q) == 1);
        CHECK((back.blocks.at(q) - blk).cwiseAbs().maxCoeff() < 1e-14);
      }
    }
  }

  TEST_CASE("bond gates invert under z -> -z") {
    for (int seed = 0; seed < kSeeds; ++seed) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      const int n = 2 + static_cast<int>(rng() % 4), d = 2 + static_cast<int>(rng() % 3);
      std::vector<double> j(n - 1);
      for (auto& x : j) x = u(rng);
      BhChainSpec s = BhChainSpec::make(n, j, 2.0 * std::abs(u(rng)), u(rng));
      const int bond = static_cast<int>(rng() % (n - 1));
      const cplx z(0.3 * u(rng), 0.3 * u(rng));
      const TwoSiteGate prod = build_gate(s, bond, d, z) * build_gate(s, bond, d, -z);
      const CMat dense = prod.to_dense();
      CHECK((dense - CMat::Identity(d * d, d * d)).cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  TEST_CASE("Hermitian eigensolver and exponential") {
    for (int seed = 0; seed < kSeeds; ++seed) {
      std::mt19937_64 rng(seed);
      const int n = 1 + static_cast<int>(rng() % 12);
      const CMat a = random_hermitian(n, rng);
      const auto e = eig_hermitian(a);
      CHECK(std::abs(e.values.sum() - a.trace().real()) < 1e-10 * n);
      const CMat p = expm_hermitian_scaled(a, cplx(0.0, -0.7)) * expm_hermitian_scaled(a, cplx(0.0, 0.7));
      CHECK((p - CMat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  TEST_CASE("ring FFT roundtrip and Parseval") {
    for (int seed = 0; seed < kSeeds; ++seed) {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> nd;
      const std::size_t n = std::size_t(1) << (1 + rng() % 9);
      std::vector<cplx> x(n);
      for (auto& v : x) v = cplx(nd(rng), nd(rng));
      const auto f = fft_ring(x);
      const auto y = ifft_ring(f);
      double nx = 0.0, nf = 0.0, dev = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        nx += std::norm(x[i]);
        nf += std::norm(f[i]);
        dev = std::max(dev, std::abs(x[i] - y[i]));
      }
      CHECK(dev < 1e-12);
      CHECK(std::abs(std::sqrt(nf) - std::sqrt(nx)) < 1e-12 * std::sqrt(nx) * std::log2(2.0 * n));
    }
  }

  TEST_CASE("free propagator is unitary") {
    const RVariant kinds[] = {RVariant::pth, RVariant::pth_central, RVariant::trap, RVariant::barrier};
    for (int seed = 0; seed < kSeeds; ++seed) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      RParams p;
      p.n_sites = 4 + 2 * static_cast<int>(rng() % 10);
      p.center = 0.5 * (p.n_sites + 1);
      p.barrier_lo = p.n_sites / 3;
      p.barrier_hi = 2 * p.n_sites / 3 + 1;
      p.barrier_height = 10.0;
      p.mu = u(rng);
      p.lambda = 0.5 + u(rng);
      const RMatrix r = build_r(kinds[seed % 4], p);
      const double t = 3.0 * u(rng);
      const CMat a = propagate(r, t), b = propagate(r, -t);
      CHECK((a * b - CMat::Identity(p.n_sites, p.n_sites)).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((a.colwise().norm().array() - 1.0).abs().maxCoeff() < 1e-10);
    }
  }

  TEST_CASE("condensate norm and reflection symmetry under kicks") {
    for (int seed = 0; seed < kSeeds; ++seed) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      KickSchedule s;
      s.k = 3.0 * u(rng);
      s.eps = 0.01 + 0.1 * u(rng);
      s.beta = s.eps + 0.2 * u(rng) + 0.01;
      s.pairs = 3;
      const double g = 10.0 * u(rng);
      const auto tr = gp_evolve(GpField::uniform(32, g), s);
      for (const auto& f : tr.snapshots) {
        CHECK(std::abs(f.norm2() - 1.0) < 1e-10);
        for (int m = 1; m < 32; ++m) CHECK(std::abs(f.psi[m] - f.psi[32 - m]) < 1e-8);
      }
    }
  }

  TEST_CASE("BdG global norm under the Hermitian kick") {
    for (int seed = 0; seed < kSeeds; ++seed) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      KickSchedule s;
      s.k = 3.0 * u(rng);
      s.eps = 0.01 + 0.1 * u(rng);
      s.beta = s.eps + 0.2 * u(rng) + 0.01;
      s.pairs = 3;
      const double g = 20.0 * u(rng);
      BdgOptions o;
      o.model = KickModel::raw;
      const BdgRun r = bdg_evolve(GpField::uniform(32, g), initial_modes({-2, -1, 1, 2}, 32, g), s, o);
      CHECK(r.max_global_norm_drift < 1e-8);
    }
  }
}
