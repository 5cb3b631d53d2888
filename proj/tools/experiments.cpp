#include "experiments.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "bchain/entanglement.hpp"
#include "bchain/errors.hpp"
#include "bchain/evolve.hpp"
#include "bchain/free_boson.hpp"
#include "bchain/io.hpp"
#include "bchain/kicked_gp.hpp"

namespace bchain::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::vector<double> per_site(const json& v, int n) {
  if (v.is_number()) return std::vector<double>(n, v.get<double>());
  return v.get<std::vector<double>>();
}

void apply_profiles(BhChainSpec& s, const json& c) {
  if (c.contains("U")) s.U = per_site(c["U"], s.n_sites);
  if (c.contains("U_ends")) {
    s.U.front() = c["U_ends"].get<double>();
    s.U.back() = c["U_ends"].get<double>();
  }
  if (c.contains("mu")) s.mu = per_site(c["mu"], s.n_sites);
}

json tagged(double v, const char* unit) { return {{"value", v}, {"unit", unit}}; }

json report_to_json(const EvolutionReport& r) {
  return {{"steps", r.steps},
          {"residual", r.residual},
          {"energy", r.energy},
          {"energy_expectation", r.energy_expectation},
          {"dtau", r.dtau},
          {"converged", r.converged},
          {"dtau_halved", r.dtau_halved},
          {"chi_capped", r.chi_capped},
          {"max_discarded", r.max_discarded},
          {"chi_trajectory", r.chi_trajectory},
          {"energy_trace", r.energy_trace},
          {"residual_trace", r.residual_trace}};
}

EvolutionReport report_from_json(const json& j) {
  EvolutionReport r;
  r.steps = j.at("steps").get<long>();
  r.residual = j.at("residual").get<double>();
  r.energy = j.at("energy").get<double>();
  r.energy_expectation = j.at("energy_expectation").get<double>();
  r.dtau = j.at("dtau").get<double>();
  r.converged = j.at("converged").get<bool>();
  r.dtau_halved = j.at("dtau_halved").get<bool>();
  r.chi_capped = j.at("chi_capped").get<bool>();
  r.max_discarded = j.at("max_discarded").get<double>();
  r.chi_trajectory = j.at("chi_trajectory").get<std::vector<int>>();
  r.energy_trace = j.at("energy_trace").get<std::vector<double>>();
  r.residual_trace = j.at("residual_trace").get<std::vector<double>>();
  return r;
}

json cursor_to_json(const GroundStateCursor& c) {
  return {{"step", c.step},
          {"dtau", c.dtau},
          {"last_residual", c.last_residual},
          {"increases", c.increases},
          {"halved", c.halved}};
}

GroundStateCursor cursor_from_json(const json& j) {
  GroundStateCursor c;
  c.step = j.at("step").get<long>();
  c.dtau = j.at("dtau").get<double>();
  c.last_residual = j.at("last_residual").get<double>();
  c.increases = j.at("increases").get<int>();
  c.halved = j.at("halved").get<bool>();
  return c;
}

GroundStateOptions ground_options(const json& g) {
  GroundStateOptions o;
  o.tol = g["tol"].get<double>();
  o.max_steps = g["max_steps"].get<long>();
  o.check_every = g["check_every"].get<int>();
  o.guard_sweeps = g["guard_sweeps"].get<int>();
  return o;
}

RealTimeOptions real_options(const json& r) {
  RealTimeOptions o;
  o.dt = r["dt"].get<double>();
  o.steps = r["steps"].get<long>();
  o.chi_cap = r["chi_cap"].get<int>();
  o.record_every = r["record_every"].get<int>();
  o.observers.eee_max_bytes = r["eee_budget_bytes"].get<std::size_t>();
  for (const auto& name : r["observables"]) {
    const std::string s = name.get<std::string>();
    if (s == "density") o.observers.density = true;
    if (s == "fluctuation") o.observers.fluctuation = true;
    if (s == "entropy") o.observers.entropy = true;
    if (s == "eee") o.observers.eee = true;
  }
  return o;
}

std::string site_table(const CanonicalMps& st) {
  std::ostringstream os;
  os.precision(17);
  os << "site,density,fluctuation\n";
  for (int k = 0; k < st.n_sites(); ++k) os << k << ',' << expectation_number(st, k) << ',' << fluctuation(st, k) << '\n';
  return os.str();
}

std::string trace_csv(const EvolutionReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "check,energy,residual\n";
  for (std::size_t i = 0; i < r.energy_trace.size(); ++i)
    os << i + 1 << ',' << r.energy_trace[i] << ',' << r.residual_trace[i] << '\n';
  return os.str();
}

void write_series(io::Manifest& man, const EvolutionReport& r, const std::string& prefix = "") {
  for (const auto& [name, rows] : r.series) man.write(prefix + name + ".csv", r.series_csv(name));
}

// ---- ground state with resumable ladder ----

void ground_state_run(const ExperimentConfig& cfg, const RunOptions& ro, const std::string& base, io::Manifest& man) {
  const json& b = cfg.body;
  const BhChainSpec spec = chain_spec(b["chain"], base);
  const std::vector<double> ladder = dtau_ladder(b["ground"]);
  const int every = b["checkpoint_every"].get<int>();
  const fs::path ckdir = fs::path(ro.out_dir) / "checkpoint";
  const std::string ck_state = (ckdir / "state.mps").string(), ck_meta = (ckdir / "progress.json").string();

  CanonicalMps st = initial_state(b["chain"], b["initial"]);
  EvolutionReport total;
  std::size_t stage = 0;
  GroundStateCursor resume_cur;
  EvolutionReport resume_rep;
  bool resuming = false;
  if (ro.resume && fs::exists(ck_meta)) {
    const json meta = json::parse(io::read_file(ck_meta));
    if (meta.at("config_sha256").get<std::string>() != cfg.source_sha256)
      throw ConfigError("checkpoint in " + ckdir.string() + " belongs to a different config");
    st = load_mps(ck_state);
    st.chi_max = b["chain"]["chi_max"].get<int>();
    st.trunc_rel = b["chain"]["trunc_rel"].get<double>();
    stage = meta.at("stage").get<std::size_t>();
    total = report_from_json(meta.at("completed"));
    resume_cur = cursor_from_json(meta.at("cursor"));
    resume_rep = report_from_json(meta.at("stage_report"));
    resuming = true;
  }

  for (; stage < ladder.size(); ++stage) {
    GroundStateOptions o = ground_options(b["ground"]);
    o.dtau = ladder[stage];
    if (resuming) {
      o.resume = &resume_cur;
      o.resume_report = &resume_rep;
    }
    long checks = 0;
    if (every > 0 || ro.halt_after_step >= 0)
      o.on_check = [&, stage](const CanonicalMps& s, const GroundStateCursor& c, const EvolutionReport& r) {
        ++checks;
        const long done = total.steps + c.step;
        const bool halt = ro.halt_after_step >= 0 && done >= ro.halt_after_step;
        if (!halt && (every == 0 || checks % every != 0)) return;
        io::write_atomic(ck_state, serialize_mps(s));
        const json meta{{"config_sha256", cfg.source_sha256},
                        {"stage", stage},
                        {"cursor", cursor_to_json(c)},
                        {"stage_report", report_to_json(r)},
                        {"completed", report_to_json(total)}};
        io::write_atomic(ck_meta, meta.dump() + "\n");
        if (halt) throw Interrupted("halted after sweep " + std::to_string(done) + "; checkpoint in " + ckdir.string());
      };
    auto [next, rep] = ground_state(spec, std::move(st), o);
    st = std::move(next);
    accumulate_stage(total, rep);
    resuming = false;
  }

  man.write("summary.json", total.summary_json() + "\n");
  man.write("energy_trace.csv", trace_csv(total));
  man.write("sites.csv", site_table(st));
  man.write("state.mps", serialize_mps(st));
  std::error_code ec;
  fs::remove_all(ckdir, ec);
}

// ---- real-time family ----

void evolution_run(const ExperimentConfig& cfg, const std::string& base, io::Manifest& man) {
  const json& b = cfg.body;
  const BhChainSpec before = chain_spec(b["chain"], base);
  const CanonicalMps init = initial_state(b["chain"], b["initial"]);
  const RealTimeOptions real = real_options(b["real"]);
  if (cfg.experiment == "real-time") {
    CanonicalMps st = init;
    const EvolutionReport rep = real_time(before, st, real);
    man.write("summary.json", rep.summary_json() + "\n");
    write_series(man, rep);
    man.write("state.mps", serialize_mps(st));
    return;
  }
  BhChainSpec after = before;
  if (cfg.experiment == "quench") {
    after = after_spec(before, b["chain"], b["after"]);
  } else {
    const auto& p = b["perturbation"];
    after.onsite =
        perturbation_profile(before.n_sites, p["n0"].get<double>(), p["eps"].get<double>()).table(init.total_bosons());
  }
  QuenchOptions q;
  q.prepare_ground_state = b["prepare"].get<bool>();
  q.dtaus = dtau_ladder(b["ground"]);
  q.ground = ground_options(b["ground"]);
  q.real = real;
  const QuenchResult res = quench_protocol(before, after, init, q);
  json summary;
  if (q.prepare_ground_state) summary["preparation"] = json::parse(res.preparation.summary_json());
  summary["evolution"] = json::parse(res.evolution.summary_json());
  man.write("summary.json", summary.dump(2) + "\n");
  write_series(man, res.evolution);
  man.write("initial_sites.csv", site_table(res.initial));
  man.write("state.mps", serialize_mps(res.final_state));
}

// ---- free-boson collision ----

void collision_run(const ExperimentConfig& cfg, io::Manifest& man) {
  const json& c = cfg.body["collision"];
  const int n = c["n_sites"].get<int>();
  const auto rows = collision_scan(n, c["total_bosons"].get<int>(), c["mu_over_n"].get<std::vector<double>>(),
                                   c["lambda"].get<double>(), c["with_eee"].get<bool>(), c["chi_max"].get<int>());
  man.write("collision.csv", collision_csv(rows, n));
  double worst = 1.0, eee = 0.0;
  for (const auto& r : rows) {
    worst = std::min(worst, r.collection_fraction);
    if (r.has_eee) eee = std::max(eee, r.eee);
  }
  const double lambda = c["lambda"].get<double>();
  json s{{"points", rows.size()},
         {"min_collection_fraction", worst},
         {"evaluation_time", tagged(M_PI / lambda, "hbar_over_E_R")}};
  if (c["with_eee"].get<bool>()) s["max_eee"] = eee;
  man.write("summary.json", s.dump(2) + "\n");
}

// ---- kicked condensate ----

KickSchedule schedule_of(const json& g) {
  KickSchedule s;
  s.k = g["k"].get<double>();
  s.beta = g["beta"].get<double>();
  s.eps = g["eps"].get<double>();
  s.pairs = g["pairs"].get<int>();
  return s;
}

KickModel model_of(const json& g) { return g["model"].get<std::string>() == "raw" ? KickModel::raw : KickModel::effective; }

void kicked_run(const ExperimentConfig& cfg, io::Manifest& man) {
  const json& g = cfg.body["gp"];
  const KickSchedule s = schedule_of(g);
  const double coupling = g["g"].get<double>();
  const int l = g["grid_size"].get<int>();
  GpOptions go;
  go.dt_max = g["dt_max"].get<double>();
  const GpTrajectory tr = gp_evolve(GpField::uniform(l, coupling), s, go);
  man.write("snapshots.csv", snapshot_csv(tr));

  json summary{{"g", coupling}, {"k", s.k}, {"period", tagged(s.period(), "hbar_over_E_R")}, {"pairs", s.pairs}};
  std::ostringstream os;
  os.precision(17);
  os << "pair,energy" << (g["analytic"].get<bool>() ? ",energy_analytic" : "") << '\n';
  double worst = 0.0;
  for (int p = 1; p <= s.pairs; ++p) {
    os << p << ',' << tr.energies[p - 1];
    if (g["analytic"].get<bool>()) {
      const double ea = gp_energy(analytic_psi(p, s.k, coupling, s.eps, s.period(), l), coupling);
      os << ',' << ea;
      worst = std::max(worst, std::abs(tr.energies[p - 1] - ea) / std::abs(ea));
    }
    os << '\n';
  }
  man.write("energy.csv", os.str());
  if (g["analytic"].get<bool>()) summary["max_relative_energy_deviation"] = worst;

  if (g["bdg"].get<bool>()) {
    BdgOptions bo;
    bo.dt_max = go.dt_max;
    bo.model = model_of(g);
    const auto modes = g["modes"].get<std::vector<int>>();
    const BdgRun run = bdg_evolve(GpField::uniform(l, coupling), initial_modes(modes, l, coupling), s, bo);
    man.write("series.csv", series_csv(run, s.period()));
    const ScanPoint p = classify_nnp(coupling, run.nnp);
    summary["nnp_initial"] = run.nnp.front();
    summary["nnp_final"] = run.nnp.back();
    summary["slope"] = p.slope;
    summary["r2"] = p.r2;
    summary["tag"] = p.tag;
    summary["max_global_norm_drift"] = run.max_global_norm_drift;
    summary["model"] = g["model"];
  }
  summary["energy_unit"] = "E_R";
  man.write("summary.json", summary.dump(2) + "\n");
}

void scan_run(const ExperimentConfig& cfg, const RunOptions& ro, io::Manifest& man) {
  const json& sc = cfg.body["scan"];
  const KickSchedule s = schedule_of(sc);
  ScanOptions so;
  so.grid_size = sc["grid_size"].get<int>();
  so.modes = sc["modes"].get<std::vector<int>>();
  so.dt_max = sc["dt_max"].get<double>();
  so.model = model_of(sc);
  so.threads = ro.threads;
  const std::vector<double> grid = scan_grid(sc);
  const auto pts = stability_scan(grid, s, so);
  man.write("scan.json", scan_json(pts) + "\n");
  std::ostringstream os;
  os.precision(17);
  os << "g,pair,nnp\n";
  for (const auto& p : pts)
    for (std::size_t i = 0; i < p.nnp.size(); ++i) os << p.g << ',' << i << ',' << p.nnp[i] << '\n';
  man.write("nnp.csv", os.str());
  json res = json::array();
  const double lo = grid.front(), hi = grid.back();
  for (int j = 1; j <= sc["resonance_j_max"].get<int>(); ++j)
    for (double g : resonance_couplings(j, s.period(), lo, hi)) res.push_back({{"j", j}, {"g", g}});
  man.write("resonances.json", res.dump(2) + "\n");
}

}  // namespace

BhChainSpec chain_spec(const json& c, const std::string& base_dir) {
  const int n = c["n_sites"].get<int>();
  BhChainSpec s;
  if (c.contains("spec_csv")) {
    fs::path p(c["spec_csv"].get<std::string>());
    if (p.is_relative()) p = fs::path(base_dir) / p;
    s = load_spec_csv(p.string());
    require(s.n_sites == n, "spec_csv has " + std::to_string(s.n_sites) + " sites, n_sites says " + std::to_string(n));
  } else {
    std::vector<double> j;
    if (c.contains("J"))
      j = c["J"].get<std::vector<double>>();
    else if (n >= 2)
      j = hopping_profile(parse_hopping_kind(c["hopping"].get<std::string>()), n, c["lambda"].get<double>());
    s = BhChainSpec::make(n, j);
  }
  if (!c.contains("spec_csv") || c.contains("U_ends")) {
    json only = json::object();
    if (!c.contains("spec_csv")) {
      only["U"] = c["U"];
      only["mu"] = c["mu"];
    }
    if (c.contains("U_ends")) only["U_ends"] = c["U_ends"];
    apply_profiles(s, only);
  }
  s.validate();
  return s;
}

BhChainSpec after_spec(const BhChainSpec& before, const json& chain, const json& a) {
  BhChainSpec s = before;
  if (a.contains("J")) {
    s.J = a["J"].get<std::vector<double>>();
  } else if ((a.contains("hopping") || a.contains("lambda")) && s.n_sites >= 2) {
    const std::string kind = a.value("hopping", chain["hopping"].get<std::string>());
    const double lambda = a.value("lambda", chain["lambda"].get<double>());
    s.J = hopping_profile(parse_hopping_kind(kind), s.n_sites, lambda);
  }
  apply_profiles(s, a);
  s.validate();
  return s;
}

CanonicalMps initial_state(const json& chain, const json& initial) {
  const int n = chain["n_sites"].get<int>(), m = chain["total_bosons"].get<int>();
  CanonicalMps st = initial["state"].get<std::string>() == "fock"
                        ? from_product_fock(initial["occupations"].get<std::vector<int>>())
                        : unit_filling(n, m);
  st.chi_max = chain["chi_max"].get<int>();
  st.trunc_rel = chain["trunc_rel"].get<double>();
  return st;
}

std::vector<double> dtau_ladder(const json& g) {
  const json& d = g["dtau"];
  if (d.is_number()) return {d.get<double>()};
  return d.get<std::vector<double>>();
}

std::vector<double> scan_grid(const json& s) {
  if (s.contains("g_values")) return s["g_values"].get<std::vector<double>>();
  const double lo = s["g_lo"].get<double>(), hi = s["g_hi"].get<double>(), step = s["g_step"].get<double>();
  const long n = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out;
  for (long i = 0; i < n; ++i) out.push_back(lo + step * static_cast<double>(i));
  return out;
}

void run_experiment(const ExperimentConfig& cfg, const RunOptions& ro, const std::string& base_dir) {
  io::Manifest man(ro.out_dir);
  const std::string& e = cfg.experiment;
  if (e == "ground-state")
    ground_state_run(cfg, ro, base_dir, man);
  else if (e == "quench" || e == "real-time" || e == "perturbed-evolution")
    evolution_run(cfg, base_dir, man);
  else if (e == "collision")
    collision_run(cfg, man);
  else if (e == "kicked-gp")
    kicked_run(cfg, man);
  else if (e == "stability-scan")
    scan_run(cfg, ro, man);
  else
    throw ConfigError("unknown experiment " + e);
  man.write("config.json", cfg.body.dump(2) + "\n");
  man.finalize(e, cfg.source_sha256);
}

}  // namespace bchain::cli
