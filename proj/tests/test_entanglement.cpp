#include <cmath>

#include "bchain/entanglement.hpp"
#include "bchain/errors.hpp"
#include "bchain/free_boson.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"

using namespace bchain;

namespace {

oracle::Mat lib_rho(const EndPairRdm& r, int m) {
  const int d = m + 1;
  oracle::Mat out = oracle::Mat::Zero(d * d, d * d);
  for (int a = 0; a <= m; ++a)
    for (int b = 0; b <= m; ++b)
      for (int c = 0; c <= m; ++c)
        for (int e = 0; e <= m; ++e) out(a * d + b, c * d + e) = r.entry(a, b, c, e);
  return out;
}

// (a+_1 + a+_N)^M |0> on N sites
CanonicalMps end_binomial(int n, int m) {
  CVec c = CVec::Zero(n);
  c[0] = c[n - 1] = std::sqrt(0.5);
  return unfold_into_mps(fold_single(c), m, n);
}

}  // namespace

TEST_SUITE("entanglement") {
  TEST_CASE("Fock product state") {
    const CanonicalMps s = from_product_fock({2, 1, 0, 1});
    const EndPairRdm r = end_pair_rdm(s);
    CHECK(r.blocks.size() == 1);
    CHECK(r.blocks.begin()->first == 1);
    CHECK(r.trace() == doctest::Approx(1.0));
    const CMat& b = r.blocks.begin()->second;
    CHECK(std::abs((b * b).trace() - cplx(1.0)) < 1e-12);
    CHECK(std::abs(r.entry(2, 1, 2, 1) - cplx(1.0)) < 1e-12);
    CHECK(log_negativity(r) == doctest::Approx(0.0));
    CHECK(epsilon_ab(r) == doctest::Approx(0.0));
    CHECK(zeta(s) == doctest::Approx(0.75));
  }

  TEST_CASE("zeta examples") {
    CHECK(zeta(from_product_fock({5, 0, 0, 0})) == doctest::Approx(1.0));
    CHECK(zeta(from_product_fock({1, 1, 1, 1, 1, 1})) == doctest::Approx(2.0 / 6));
  }

  TEST_CASE("end Bell pair") {
    const CanonicalMps s = end_binomial(3, 1);
    const EndPairRdm r = end_pair_rdm(s);
    CHECK(log_negativity(r) == doctest::Approx(1.0));
    const PartialTransposeRdm pt = partial_transpose(r);
    double lo = 1.0;
    for (const auto& [q, b] : pt.blocks) {
      Eigen::SelfAdjointEigenSolver<CMat> es(b);
      lo = std::min(lo, es.eigenvalues().minCoeff());
    }
    CHECK(lo == doctest::Approx(-0.5));
    CHECK(epsilon_ab(r) == doctest::Approx(0.5));
  }

  TEST_CASE("binomial end state") {
    for (int m = 1; m <= 6; ++m) {
      const CanonicalMps s = end_binomial(4, m);
      const EndPairRdm r = end_pair_rdm(s);
      REQUIRE(r.blocks.count(0) == 1);
      for (const auto& [q, blk] : r.blocks)
        if (q != 0) CHECK(blk.cwiseAbs().maxCoeff() < 1e-20);
      const CMat& b = r.blocks.at(0);
      for (int k = 0; k <= m; ++k) {
        const double w = std::exp(std::lgamma(m + 1) - std::lgamma(k + 1) - std::lgamma(m - k + 1)) / std::pow(2.0, m);
        CHECK(std::abs(r.entry(k, m - k, k, m - k) - cplx(w)) < 1e-10);
      }
      CHECK(b.rows() == m + 1);
      CHECK(epsilon_ab(r) == doctest::Approx(m / 2.0));
      CHECK(log_negativity(r) == doctest::Approx(binomial_entanglement(m)).epsilon(1e-10));
    }
  }

  TEST_CASE("random circuits match the dense pipeline") {
    for (int n = 3; n <= 4; ++n)
      for (int m = 1; m <= 3; ++m)
        for (std::uint64_t seed = 1; seed <= 6; ++seed) {
          auto c = testing::random_circuit(n, m, 15, 100 * n + 10 * m + seed);
          const EndPairRdm r = end_pair_rdm(c.mps);
          const oracle::Mat ref = oracle::end_pair_rdm(c.basis, c.dense);
          CHECK((lib_rho(r, m) - ref).cwiseAbs().maxCoeff() < 1e-9);
          CHECK(std::abs(log_negativity(r) - oracle::log_negativity(ref, m + 1)) < 1e-8);
          const PartialTransposeRdm pt = partial_transpose(r);
          const oracle::Mat ptref = oracle::partial_transpose(ref, m + 1);
          for (int a = 0; a <= m; ++a)
            for (int b = 0; b <= m; ++b)
              for (int x = 0; x <= m; ++x)
                for (int y = 0; y <= m; ++y)
                  CHECK(std::abs(pt.entry(a, b, x, y) - ptref(a * (m + 1) + b, x * (m + 1) + y)) < 1e-9);
        }
  }

  TEST_CASE("block invariants") {
    auto c = testing::random_circuit(5, 3, 25, 77);
    const EndPairRdm r = end_pair_rdm(c.mps);
    CHECK(r.trace() == doctest::Approx(1.0).epsilon(1e-10));
    for (const auto& [q, b] : r.blocks) {
      CHECK((b - b.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
      Eigen::SelfAdjointEigenSolver<CMat> es(b);
      CHECK(es.eigenvalues().minCoeff() > -1e-10);
      for (const auto& [n1, nn] : r.labels.at(q)) CHECK(n1 + nn == 3 - q);
    }
    const PartialTransposeRdm pt = partial_transpose(r);
    double tr = 0.0;
    for (const auto& [q, b] : pt.blocks) {
      CHECK((b - b.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
      tr += b.trace().real();
    }
    CHECK(tr == doctest::Approx(1.0).epsilon(1e-10));
    const EndPairRdm back = partial_transpose_back(pt, 3);
    CHECK((lib_rho(back, 3) - lib_rho(r, 3)).cwiseAbs().maxCoeff() < 1e-14);
  }

  TEST_CASE("separable mixtures of Fock products") {
    // Fock product states on the ends with a random middle give diagonal rdms
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      std::mt19937_64 rng(seed);
      const int m = 3;
      auto c = testing::random_circuit(5, m, 0, seed);
      // entangle only the middle sites
      for (int g = 0; g < 6; ++g)
        apply_two_site(c.mps, 1 + g % 2, TwoSiteGate::from_dense(oracle::random_pair_unitary(m + 1, rng), m + 1, 1e-10));
      const PartialTransposeRdm pt = partial_transpose(end_pair_rdm(c.mps));
      for (const auto& [q, b] : pt.blocks) {
        Eigen::SelfAdjointEigenSolver<CMat> es(b);
        CHECK(es.eigenvalues().minCoeff() > -1e-10);
      }
      CHECK(std::abs(log_negativity(pt)) < 1e-10);
    }
  }

  TEST_CASE("memory budget") {
    auto c = testing::random_circuit(5, 3, 25, 5);
    RdmBudget tiny;
    tiny.max_bytes = 16;
    CHECK_THROWS_AS(end_pair_rdm(c.mps, tiny), ResourceError);
  }

  TEST_CASE("two-site chain is its own end pair") {
    auto c = testing::random_circuit(2, 3, 4, 8);
    const EndPairRdm r = end_pair_rdm(c.mps);
    CHECK((lib_rho(r, 3) - oracle::end_pair_rdm(c.basis, c.dense)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK_THROWS_AS(end_pair_rdm(from_product_fock({3})), ValidationError);
  }

  TEST_CASE("json export") {
    const EndPairRdm r = end_pair_rdm(end_binomial(3, 2));
    const auto j = nlohmann::json::parse(rdm_json(r));
    CHECK(j.contains("blocks"));
    CHECK(j["total_bosons"] == 2);
  }
}
