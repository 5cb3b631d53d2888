#include "bchain/evolve.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"

#include "bchain/entanglement.hpp"
#include "bchain/errors.hpp"

namespace bchain {

namespace {

struct SweepResult {
  double log_norm = 0.0;
  bool capped = false;
  double discarded = 0.0;
};

SweepResult sweep(CanonicalMps& st, const BhChainSpec& spec, GateCache& cache, cplx z,
                  const std::vector<TrotterStep>& sched) {
  SweepResult r;
  const int d = st.local_dim();
  for (const auto& s : sched) {
    const TruncationInfo info = apply_two_site(st, s.bond, cache.get(spec, s.bond, d, z * s.weight));
    r.log_norm += std::log(info.norm);
    r.capped = r.capped || info.capped;
    r.discarded = std::max(r.discarded, info.discarded);
  }
  return r;
}

void check_finite(const CanonicalMps& st, long step) {
  for (int k = 0; k <= st.n_sites(); ++k)
    for (const auto& l : st.bond_raw(k).lambda)
      if (!l.allFinite())
        throw NumericalError("non-finite Schmidt value at bond " + std::to_string(k) + " after step " +
                             std::to_string(step));
}

}  // namespace

CanonicalMps unit_filling(int n_sites, int total_bosons) {
  require(n_sites >= 1 && total_bosons >= 0, "bad chain size");
  std::vector<int> occ(n_sites, total_bosons / n_sites);
  for (int k = 0; k < total_bosons % n_sites; ++k) ++occ[k];
  return from_product_fock(occ);
}

std::pair<CanonicalMps, EvolutionReport> ground_state(const BhChainSpec& spec, CanonicalMps st,
                                                      const GroundStateOptions& opts) {
  spec.validate();
  require(spec.n_sites == st.n_sites(), "spec and state disagree on N");
  require(opts.dtau > 0.0 && std::isfinite(opts.dtau), "dtau must be positive");
  require(opts.tol >= 0.0, "tol must be non-negative");
  require(opts.check_every >= 1, "check_every must be >= 1");

  EvolutionReport rep;
  GroundStateCursor cur;
  cur.dtau = opts.dtau;
  if (opts.resume) cur = *opts.resume;
  if (opts.resume && opts.resume_report) rep = *opts.resume_report;
  rep.dtau = cur.dtau;

  if (st.n_sites() == 1) {
    rep.energy = rep.energy_expectation = spec.site_energy(0, st.total_bosons());
    rep.converged = true;
    rep.chi_trajectory.push_back(1);
    return {std::move(st), rep};
  }
  if (!opts.resume) canonicalize(st);

  GateCache cache;
  const auto sched = trotter_schedule(st.n_sites());
  while (!rep.converged && cur.step < opts.max_steps) {  // a resumed report may already be converged
    const bool check = (cur.step + 1) % opts.check_every == 0 || cur.step + 1 == opts.max_steps;
    const cplx z(-cur.dtau, 0.0);
    // Non-unitary gates spoil the gauge; without re-canonicalizing each sweep the
    // iteration stalls well above tol.
    CanonicalMps prev;
    if (check) prev = st;
    const SweepResult r = sweep(st, spec, cache, z, sched);
    const double ln = r.log_norm + canonicalize(st);
    ++cur.step;
    rep.chi_capped = rep.chi_capped || r.capped;
    rep.max_discarded = std::max(rep.max_discarded, r.discarded);
    rep.chi_trajectory.push_back(st.max_bond_dim());
    if (!check) continue;
    check_finite(st, cur.step);
    const double res = std::abs(1.0 - overlap(prev, st));
    rep.energy = -ln / cur.dtau;
    rep.residual = res;
    rep.energy_trace.push_back(rep.energy);
    rep.residual_trace.push_back(res);
    if (res < opts.tol) {
      rep.converged = true;
      cur.last_residual = res;
      if (opts.on_check) opts.on_check(st, cur, rep);
      break;
    }
    if (cur.last_residual >= 0.0 && res > cur.last_residual)
      cur.increases += opts.check_every;
    else
      cur.increases = 0;
    if (cur.increases >= opts.guard_sweeps && !cur.halved) {
      cur.dtau *= 0.5;
      cur.halved = true;
      cur.increases = 0;
    }
    cur.last_residual = res;
    if (opts.on_check) opts.on_check(st, cur, rep);
  }
  rep.steps = cur.step;
  rep.dtau = cur.dtau;
  rep.dtau_halved = cur.halved;
  rep.energy_expectation = energy_expectation(st, spec);
  return {std::move(st), rep};
}

void accumulate_stage(EvolutionReport& total, const EvolutionReport& rep) {
  total.steps += rep.steps;
  total.chi_capped = total.chi_capped || rep.chi_capped;
  total.dtau_halved = total.dtau_halved || rep.dtau_halved;
  total.max_discarded = std::max(total.max_discarded, rep.max_discarded);
  total.chi_trajectory.insert(total.chi_trajectory.end(), rep.chi_trajectory.begin(), rep.chi_trajectory.end());
  total.energy_trace.insert(total.energy_trace.end(), rep.energy_trace.begin(), rep.energy_trace.end());
  total.residual_trace.insert(total.residual_trace.end(), rep.residual_trace.begin(), rep.residual_trace.end());
  total.energy = rep.energy;
  total.energy_expectation = rep.energy_expectation;
  total.residual = rep.residual;
  total.converged = rep.converged;
  total.dtau = rep.dtau;
}

std::pair<CanonicalMps, EvolutionReport> ground_state_ladder(const BhChainSpec& spec, CanonicalMps init,
                                                             const std::vector<double>& dtaus,
                                                             GroundStateOptions opts) {
  require(!dtaus.empty(), "empty dtau ladder");
  EvolutionReport total;
  for (double dt : dtaus) {
    opts.dtau = dt;
    auto [st, rep] = ground_state(spec, std::move(init), opts);
    init = std::move(st);
    accumulate_stage(total, rep);
  }
  return {std::move(init), total};
}

namespace {

void record(EvolutionReport& rep, const CanonicalMps& st, const Observers& obs, long step, double t) {
  const int n = st.n_sites();
  if (obs.density)
    for (int k = 0; k < n; ++k) rep.series["density"].push_back({step, t, k, expectation_number(st, k)});
  if (obs.fluctuation)
    for (int k = 0; k < n; ++k) rep.series["fluctuation"].push_back({step, t, k, fluctuation(st, k)});
  if (obs.entropy)
    for (int b = 0; b + 1 < n; ++b) rep.series["entropy"].push_back({step, t, b, block_entropy(st, b)});
  if (obs.eee && n >= 2) rep.series["eee"].push_back({step, t, -1, end_to_end_entanglement(st, RdmBudget{obs.eee_max_bytes})});
}

}  // namespace

EvolutionReport real_time(const BhChainSpec& spec, CanonicalMps& st, const RealTimeOptions& opts) {
  spec.validate();
  require(spec.n_sites == st.n_sites(), "spec and state disagree on N");
  require(opts.steps >= 0, "steps must be non-negative");
  require(opts.steps == 0 || (opts.dt > 0.0 && std::isfinite(opts.dt)), "dt must be positive");
  require(opts.record_every >= 1, "record_every must be >= 1");
  require(opts.chi_cap >= 0, "chi_cap must be non-negative");

  EvolutionReport rep;
  const int saved_cap = st.chi_max;
  st.chi_max = opts.chi_cap;
  record(rep, st, opts.observers, 0, 0.0);
  GateCache cache;
  const auto sched = trotter_schedule(st.n_sites());
  const cplx z(0.0, -opts.dt);
  for (long s = 1; s <= opts.steps; ++s) {
    if (st.n_sites() > 1) {
      const SweepResult r = sweep(st, spec, cache, z, sched);
      rep.chi_capped = rep.chi_capped || r.capped;
      rep.max_discarded = std::max(rep.max_discarded, r.discarded);
      if (!std::isfinite(r.log_norm)) throw NumericalError("non-finite norm at step " + std::to_string(s));
      // a binding cap leaves the gauge slightly off; restore unit norm exactly
      if (r.capped) canonicalize(st);
    }
    check_finite(st, s);
    rep.chi_trajectory.push_back(st.max_bond_dim());
    if (s % opts.record_every == 0) record(rep, st, opts.observers, s, s * opts.dt);
  }
  st.chi_max = saved_cap;
  rep.steps = opts.steps;
  rep.converged = true;
  rep.energy_expectation = energy_expectation(st, spec);
  return rep;
}

QuenchResult quench_protocol(const BhChainSpec& before, const BhChainSpec& after, const CanonicalMps& init,
                             const QuenchOptions& opts) {
  require(before.n_sites == after.n_sites, "quench specs disagree on N");
  QuenchResult out;
  if (opts.prepare_ground_state) {
    auto [st, rep] = ground_state_ladder(before, init, opts.dtaus, opts.ground);
    out.initial = std::move(st);
    out.preparation = std::move(rep);
  } else {
    out.initial = init;
  }
  out.final_state = out.initial;
  out.evolution = real_time(after, out.final_state, opts.real);
  return out;
}

std::string EvolutionReport::summary_json() const {
  nlohmann::json j;
  j["steps"] = steps;
  j["residual"] = residual;
  j["energy"] = {{"value", energy}, {"unit", "E_R"}};
  j["energy_expectation"] = {{"value", energy_expectation}, {"unit", "E_R"}};
  j["dtau"] = {{"value", dtau}, {"unit", "hbar_over_E_R"}};
  j["converged"] = converged;
  j["dtau_halved"] = dtau_halved;
  j["chi_capped"] = chi_capped;
  j["max_discarded"] = max_discarded;
  j["chi_final"] = chi_trajectory.empty() ? 1 : chi_trajectory.back();
  int chi_peak = 1;
  for (int c : chi_trajectory) chi_peak = std::max(chi_peak, c);
  j["chi_peak"] = chi_peak;
  std::vector<std::string> names;
  for (const auto& [k, v] : series) names.push_back(k);
  j["observables"] = names;
  return j.dump(2);
}

std::string EvolutionReport::series_csv(const std::string& observable) const {
  std::ostringstream os;
  os.precision(17);
  os << "step,time,site,value\n";
  auto it = series.find(observable);
  if (it == series.end()) return os.str();
  for (const auto& r : it->second) os << r.step << ',' << r.time << ',' << r.site << ',' << r.value << '\n';
  return os.str();
}

}  // namespace bchain
