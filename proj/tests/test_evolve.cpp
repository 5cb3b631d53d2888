#include <cmath>

#include "bchain/entanglement.hpp"
#include "bchain/errors.hpp"
#include "bchain/evolve.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace bchain;

namespace {

oracle::Chain chain_of(const BhChainSpec& s) { return {s.U, s.J, s.mu, s.onsite}; }

oracle::Vec product_vector(const oracle::Basis& b, const std::vector<int>& occ) {
  oracle::Vec v = oracle::Vec::Zero(b.size());
  v[b.index.at(occ)] = 1.0;
  return v;
}

}  // namespace

TEST_SUITE("evolve") {
  TEST_CASE("ground state of a small chain matches dense diagonalization") {
    const BhChainSpec s = BhChainSpec::make(4, {0.14, 0.14, 0.14}, 2.0);
    const auto b = oracle::make_basis(4, 4);
    REQUIRE(b.size() == 35);
    const oracle::Mat h = oracle::hamiltonian(b, chain_of(s));
    const double e0 = oracle::ground_energy(h);
    GroundStateOptions o;
    auto [st, rep] = ground_state_ladder(s, unit_filling(4, 4), {1e-2, 1e-3, 1e-4}, o);
    CHECK(rep.converged);
    MESSAGE("E_G=" << rep.energy << " <H>=" << rep.energy_expectation << " exact=" << e0);
    CHECK(std::abs(rep.energy - e0) < 1e-8);
    CHECK(std::abs(rep.energy_expectation - e0) < 1e-8);
    const oracle::Vec g = oracle::ground_vector(h);
    CHECK(testing::fidelity(g, testing::dense_of(st, b)) > 1.0 - 1e-8);
  }

  TEST_CASE("free decoupled chain is stationary") {
    const BhChainSpec s = BhChainSpec::make(5, {0.0, 0.0, 0.0, 0.0});
    const CanonicalMps init = from_product_fock({2, 0, 1, 0, 1});
    GroundStateOptions o;
    o.dtau = 0.01;
    auto [st, rep] = ground_state(s, init, o);
    CHECK(rep.converged);
    CHECK(rep.energy == doctest::Approx(0.0));
    CHECK(std::abs(std::abs(overlap(st, init)) - 1.0) < 1e-14);
  }

  TEST_CASE("single site chain") {
    BhChainSpec s = BhChainSpec::make(1, {}, 2.0, 0.5);
    GroundStateOptions o;
    auto [st, rep] = ground_state(s, from_product_fock({3}), o);
    CHECK(rep.energy == doctest::Approx(2.0 / 2 * 3 * 2 + 0.5 * 3));
  }

  TEST_CASE("imaginary-time validation") {
    const BhChainSpec s = BhChainSpec::make(3, {1.0, 1.0});
    GroundStateOptions o;
    o.dtau = -1e-3;
    CHECK_THROWS_AS(ground_state(s, unit_filling(3, 3), o), ValidationError);
    o.dtau = 1e-3;
    CHECK_THROWS_AS(ground_state(s, unit_filling(4, 3), o), ValidationError);
  }

  TEST_CASE("max steps exhausted gives a flagged report") {
    const BhChainSpec s = BhChainSpec::make(4, hopping_profile(HoppingKind::PTH, 4), 1.0);
    GroundStateOptions o;
    o.dtau = 1e-3;
    o.max_steps = 25;
    auto [st, rep] = ground_state(s, unit_filling(4, 4), o);
    CHECK_FALSE(rep.converged);
    CHECK(rep.steps == 25);
    CHECK(rep.chi_trajectory.size() == 25);
    for (int c : rep.chi_trajectory) CHECK(c >= 1);
    CHECK(to_dense(st).norm() == doctest::Approx(1.0));
  }

  TEST_CASE("energy estimate is monotone late in the run") {
    const BhChainSpec s = BhChainSpec::make(6, hopping_profile(HoppingKind::PTH, 6), 0.0);
    GroundStateOptions o;
    o.dtau = 1e-2;
    o.check_every = 1;
    auto [st, rep] = ground_state(s, unit_filling(6, 6), o);
    CHECK(rep.converged);
    const auto& e = rep.energy_trace;
    for (std::size_t i = e.size() / 2 + 1; i < e.size(); ++i) CHECK(e[i] <= e[i - 1] + 1e-9);
  }

  TEST_CASE("checkpointed run resumes bit for bit") {
    const BhChainSpec s = BhChainSpec::make(4, {0.3, 0.5, 0.3}, 1.0);
    GroundStateOptions o;
    o.dtau = 1e-2;
    auto [full, rep_full] = ground_state(s, unit_filling(4, 4), o);
    std::string saved;
    GroundStateCursor cur;
    EvolutionReport partial;
    GroundStateOptions stop = o;
    stop.max_steps = 40;
    stop.on_check = [&](const CanonicalMps& st, const GroundStateCursor& c, const EvolutionReport& r) {
      saved = serialize_mps(st);
      cur = c;
      partial = r;
    };
    ground_state(s, unit_filling(4, 4), stop);
    REQUIRE(cur.step == 40);
    GroundStateOptions rest = o;
    rest.resume = &cur;
    rest.resume_report = &partial;
    auto [resumed, rep_res] = ground_state(s, deserialize_mps(saved), rest);
    CHECK(rep_res.steps == rep_full.steps);
    CHECK(serialize_mps(resumed) == serialize_mps(full));
    CHECK(rep_res.energy == rep_full.energy);
    CHECK(rep_res.energy_trace == rep_full.energy_trace);
    CHECK(rep_res.chi_trajectory == rep_full.chi_trajectory);
    CHECK(rep_res.summary_json() == rep_full.summary_json());
  }

  TEST_CASE("real-time densities follow the dense propagator") {
    const BhChainSpec s = BhChainSpec::make(4, {1.0, 1.0, 1.0}, 0.4);
    const auto b = oracle::make_basis(4, 4);
    const oracle::Mat h = oracle::hamiltonian(b, chain_of(s));
    CanonicalMps st = from_product_fock({1, 1, 1, 1});
    RealTimeOptions o;
    o.dt = 1e-3;
    o.steps = 2000;
    o.record_every = 250;
    o.observers.density = true;
    const EvolutionReport rep = real_time(s, st, o);
    const oracle::Vec psi0 = product_vector(b, {1, 1, 1, 1});
    double worst = 0.0;
    for (const auto& r : rep.series.at("density")) {
      const oracle::Vec psi = oracle::evolve(h, psi0, r.time);
      worst = std::max(worst, std::abs(r.value - oracle::number(b, psi, r.site)));
    }
    MESSAGE("max density deviation " << worst);
    CHECK(worst < 1e-6);
    CHECK(rep.series.at("density").size() == 9 * 4);
    const oracle::Vec fin = oracle::evolve(h, psi0, 2.0);
    CHECK(testing::fidelity(fin, testing::dense_of(st, b)) > 1.0 - 1e-8);
  }

  TEST_CASE("real-time energy drift and conservation") {
    const BhChainSpec s = BhChainSpec::make(4, {1.0, 0.8, 1.0}, 0.4);
    CanonicalMps st = from_product_fock({2, 0, 1, 1});
    const double e0 = energy_expectation(st, s);
    RealTimeOptions o;
    o.dt = 5e-5;
    o.steps = 1000;
    o.record_every = 100;
    o.observers.density = true;
    const EvolutionReport rep = real_time(s, st, o);
    CHECK(std::abs(rep.energy_expectation - e0) <= 1e-4 * std::abs(e0));
    CHECK(to_dense(st).norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (long step = 0; step <= 1000; step += 100) {
      double n = 0.0;
      for (const auto& r : rep.series.at("density"))
        if (r.step == step) n += r.value;
      CHECK(std::abs(n - 4.0) < 1e-8);
    }
  }

  TEST_CASE("zero steps leave the state unchanged") {
    const BhChainSpec s = BhChainSpec::make(3, {1.0, 1.0}, 0.5);
    auto c = testing::random_circuit(3, 2, 5, 2);
    const std::string before = serialize_mps(c.mps);
    RealTimeOptions o;
    o.steps = 0;
    real_time(s, c.mps, o);
    CHECK(serialize_mps(c.mps) == before);
  }

  TEST_CASE("chi cap is applied and flagged") {
    const BhChainSpec s = BhChainSpec::make(8, hopping_profile(HoppingKind::PTH, 8), 0.5);
    CanonicalMps st = unit_filling(8, 8);
    RealTimeOptions o;
    o.dt = 1e-2;
    o.steps = 100;
    o.chi_cap = 4;
    o.observers.entropy = true;
    const EvolutionReport rep = real_time(s, st, o);
    CHECK(rep.chi_capped);
    CHECK(st.max_bond_dim() <= 4);
    CHECK(st.chi_max == 0);
    CHECK(to_dense(st).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("non-finite parameters are rejected") {
    BhChainSpec s = BhChainSpec::make(3, {1.0, 1.0});
    CanonicalMps st = unit_filling(3, 3);
    RealTimeOptions o;
    o.steps = 3;
    o.dt = NAN;
    CHECK_THROWS_AS(real_time(s, st, o), ValidationError);
  }

  TEST_CASE("quench with identical specs is stationary") {
    const BhChainSpec s = BhChainSpec::make(4, {0.5, 0.5, 0.5}, 1.0);
    QuenchOptions o;
    o.dtaus = {1e-2, 1e-3};
    o.real.dt = 1e-2;
    o.real.steps = 100;
    o.real.observers.density = true;
    const QuenchResult q = quench_protocol(s, s, unit_filling(4, 4), o);
    CHECK(std::abs(std::abs(overlap(q.initial, q.final_state)) - 1.0) < 1e-7);
  }

  TEST_CASE("perturbed quench matches the dense oracle") {
    const int n = 4, m = 4;
    BhChainSpec before = BhChainSpec::make(n, hopping_profile(HoppingKind::PTH, n, 1.0), 0.0);
    before.U = {0.0, 6.0, 6.0, 0.0};
    BhChainSpec after = before;
    after.onsite = perturbation_profile(n, 1.0, 0.05).table(m);
    QuenchOptions o;
    o.prepare_ground_state = false;
    o.real.dt = 1e-3;
    o.real.steps = 1000;
    o.real.record_every = 100;
    o.real.observers.eee = true;
    const std::vector<int> occ{1, 1, 1, 1};
    const QuenchResult q = quench_protocol(before, after, from_product_fock(occ), o);
    const auto b = oracle::make_basis(n, m);
    const oracle::Mat h = oracle::hamiltonian(b, chain_of(after));
    for (const auto& r : q.evolution.series.at("eee")) {
      const oracle::Vec psi = oracle::evolve(h, product_vector(b, occ), r.time);
      CHECK(std::abs(r.value - oracle::log_negativity(oracle::end_pair_rdm(b, psi), m + 1)) < 1e-6);
    }
  }

  TEST_CASE("report serialization") {
    const BhChainSpec s = BhChainSpec::make(3, {1.0, 1.0});
    CanonicalMps st = unit_filling(3, 3);
    RealTimeOptions o;
    o.steps = 2;
    o.observers.density = true;
    const EvolutionReport rep = real_time(s, st, o);
    const std::string csv = rep.series_csv("density");
    CHECK(csv.rfind("step,time,site,value\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 3);
    const std::string js = rep.summary_json();
    CHECK(js.find("E_R") != std::string::npos);
    CHECK(js.find("hbar_over_E_R") != std::string::npos);
  }
}
