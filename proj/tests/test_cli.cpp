#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "bchain/entanglement.hpp"
#include "bchain/evolve.hpp"
#include "bchain/free_boson.hpp"
#include "bchain/io.hpp"
#include "bchain/kicked_gp.hpp"
#include "config.hpp"
#include "doctest.h"
#include "experiments.hpp"

using namespace bchain;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bchain_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p.string();
}

std::string slurp(const std::string& dir, const std::string& file) { return io::read_file(dir + "/" + file); }

std::string run_dir(const json& cfg, const std::string& name) {
  const std::string out = scratch(name);
  cli::RunOptions ro;
  ro.out_dir = out;
  cli::run_experiment(cli::parse_config(cfg.dump()), ro);
  return out;
}

bool mentions(const std::vector<std::string>& errs, const std::string& what) {
  for (const auto& e : errs)
    if (e.find(what) != std::string::npos) return true;
  return false;
}

int shell(const std::string& args) {
  const std::string cmd = std::string(BCHAIN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string write_config(const json& cfg, const std::string& name) {
  const std::string path = scratch(name + ".json");
  io::write_atomic(path, cfg.dump(2));
  return path;
}

const json kChain = {{"n_sites", 4}, {"total_bosons", 4}, {"hopping", "CH"}, {"U", 1.0}};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("experiment names") {
    const auto& n = cli::experiment_names();
    CHECK(n.size() == 7);
    for (const char* e : {"ground-state", "quench", "real-time", "collision", "perturbed-evolution", "kicked-gp",
                          "stability-scan"})
      CHECK(std::count(n.begin(), n.end(), e) == 1);
  }

  TEST_CASE("schema diagnostics") {
    const json good = {{"experiment", "ground-state"}, {"chain", kChain}};
    CHECK(cli::validate_text(good.dump()).empty());

    json no_n = good;
    no_n["chain"].erase("n_sites");
    const auto e1 = cli::validate_text(no_n.dump(2));
    REQUIRE(e1.size() == 1);
    CHECK(e1[0].find("\"n_sites\"") != std::string::npos);

    json neg = good;
    neg["ground"] = {{"dtau", -1e-3}};
    CHECK(mentions(cli::validate_text(neg.dump(2)), "range error"));
    CHECK(mentions(cli::validate_text(neg.dump(2)), "/ground/dtau"));

    json unknown = good;
    unknown["chain"]["colour"] = 1;
    const auto e3 = cli::validate_text(unknown.dump(2));
    CHECK(mentions(e3, "unknown key \"colour\""));
    CHECK(mentions(e3, "(line "));

    CHECK(mentions(cli::validate_text("{\n\"experiment\": \"quench\",\n,}"), "line 3"));
    CHECK(mentions(cli::validate_text(json{{"experiment", "dance"}}.dump()), "not one of"));
    CHECK(mentions(cli::validate_text(json{{"experiment", "kicked-gp"}, {"gp", {{"g", 1}, {"k", 1}, {"grid_size", 100}}}}.dump()),
                   "power of two"));
    json occ = good;
    occ["initial"] = {{"state", "fock"}, {"occupations", {1, 1, 1, 0}}};
    CHECK(mentions(cli::validate_text(occ.dump()), "total_bosons"));
    json ints = good;
    ints["chain"]["n_sites"] = 4.5;
    CHECK(mentions(cli::validate_text(ints.dump()), "integer"));
    json units = good;
    units["units"] = {{"energy", "eV"}};
    CHECK_FALSE(cli::validate_text(units.dump()).empty());
    CHECK_THROWS_AS(cli::parse_config(no_n.dump()), cli::ConfigError);
  }

  TEST_CASE("defaults are filled in") {
    const auto cfg = cli::parse_config(json{{"experiment", "real-time"}, {"chain", kChain}}.dump());
    CHECK(cfg.body["real"]["dt"].get<double>() == 1e-3);
    CHECK(cfg.body["chain"]["lambda"].get<double>() == 2.0);
    CHECK(cfg.body["units"]["energy"] == "E_R");
    CHECK(cfg.source_sha256.size() == 64);
  }

  TEST_CASE("chain specs from config") {
    json c = {{"n_sites", 5}, {"total_bosons", 5}, {"U", 100.0}, {"U_ends", 0.0}, {"mu", {0, 0, 1, 0, 0}}};
    const auto cfg = cli::parse_config(json{{"experiment", "ground-state"}, {"chain", c}}.dump());
    const BhChainSpec s = cli::chain_spec(cfg.body["chain"]);
    CHECK(s.J == hopping_profile(HoppingKind::PTH, 5, 2.0));
    CHECK(s.U == std::vector<double>{0, 100, 100, 100, 0});
    CHECK(s.mu[2] == 1.0);
    const BhChainSpec a = cli::after_spec(s, cfg.body["chain"], json{{"hopping", "CH"}, {"U", 0.5}});
    CHECK(a.J == std::vector<double>(4, 1.0));
    CHECK(a.U == std::vector<double>(5, 0.5));
    CHECK(a.mu == s.mu);
  }

  TEST_CASE("collision CSV matches the library row for row") {
    const json cfg = {{"experiment", "collision"},
                      {"collision", {{"n_sites", 8}, {"total_bosons", 2}, {"mu_over_n", {0.1, 0.5, 1.0}}}}};
    const std::string out = run_dir(cfg, "collision");
    CHECK(slurp(out, "collision.csv") == collision_csv(collision_scan(8, 2, {0.1, 0.5, 1.0}, 1.0, true, 0), 8));
  }

  TEST_CASE("kicked-gp and scan artifacts match the library") {
    const json gp = {{"g", 2.0}, {"k", 1.0}, {"pairs", 3}, {"grid_size", 32}};
    const std::string out = run_dir({{"experiment", "kicked-gp"}, {"gp", gp}}, "gp");
    KickSchedule s;
    s.k = 1.0;
    s.pairs = 3;
    CHECK(slurp(out, "snapshots.csv") == snapshot_csv(gp_evolve(GpField::uniform(32, 2.0), s)));
    const BdgRun r = bdg_evolve(GpField::uniform(32, 2.0), initial_modes({-2, -1, 1, 2}, 32, 2.0), s);
    CHECK(slurp(out, "series.csv") == series_csv(r, s.period()));
    const json sum = json::parse(slurp(out, "summary.json"));
    CHECK(sum["period"]["unit"] == "hbar_over_E_R");
    CHECK(sum["nnp_final"].get<double>() == r.nnp.back());

    const json sc = {{"k", 1.0}, {"pairs", 6}, {"grid_size", 32}, {"g_lo", 1.0}, {"g_hi", 2.0}, {"g_step", 0.5}};
    const std::string so = run_dir({{"experiment", "stability-scan"}, {"scan", sc}}, "scan");
    s.pairs = 6;
    ScanOptions o;
    o.grid_size = 32;
    CHECK(slurp(so, "scan.json") == scan_json(stability_scan({1.0, 1.5, 2.0}, s, o)) + "\n");
  }

  TEST_CASE("real-time with zero steps records the initial state only") {
    const json cfg = {{"experiment", "real-time"},
                      {"chain", kChain},
                      {"initial", {{"state", "fock"}, {"occupations", {2, 0, 1, 1}}}},
                      {"real", {{"steps", 0}, {"observables", {"density", "eee"}}}}};
    const std::string out = run_dir(cfg, "rt0");
    const std::string d = slurp(out, "density.csv");
    CHECK(d == "step,time,site,value\n0,0,0,2\n0,0,1,0\n0,0,2,1\n0,0,3,1\n");
    const json man = json::parse(slurp(out, "manifest.json"));
    CHECK(man["experiment"] == "real-time");
    for (const auto& f : man["files"]) CHECK(f["sha256"] == io::sha256_hex(slurp(out, f["file"])));
    CHECK(man["files"].size() == 5);  // summary, density, eee, state, config
  }

  TEST_CASE("quench and perturbed evolution match the library") {
    const json real = {{"dt", 0.01}, {"steps", 20}, {"record_every", 5}, {"observables", {"density", "eee"}}};
    const json ground = {{"dtau", {0.01, 0.001}}, {"tol", 1e-12}};
    const json q = {{"experiment", "quench"}, {"chain", kChain}, {"ground", ground},
                    {"real", real},           {"after", {{"U", 0.2}}}};
    const std::string out = run_dir(q, "quench");
    const BhChainSpec before = BhChainSpec::make(4, {1, 1, 1}, 1.0), after = BhChainSpec::make(4, {1, 1, 1}, 0.2);
    QuenchOptions o;
    o.dtaus = {0.01, 0.001};
    o.ground.tol = 1e-12;
    o.real.dt = 0.01;
    o.real.steps = 20;
    o.real.record_every = 5;
    o.real.observers.density = o.real.observers.eee = true;
    const QuenchResult lib = quench_protocol(before, after, unit_filling(4, 4), o);
    CHECK(slurp(out, "density.csv") == lib.evolution.series_csv("density"));
    CHECK(slurp(out, "eee.csv") == lib.evolution.series_csv("eee"));

    json p = q;
    p.erase("after");
    p["experiment"] = "perturbed-evolution";
    p["perturbation"] = {{"n0", 1.0}, {"eps", 0.0}};
    const std::string pout = run_dir(p, "perturbed");
    // eps = 0 leaves the prepared ground state stationary
    std::istringstream rows(slurp(pout, "eee.csv"));
    std::string line;
    std::getline(rows, line);
    std::vector<double> eee;
    while (std::getline(rows, line)) eee.push_back(std::stod(line.substr(line.rfind(',') + 1)));
    REQUIRE(eee.size() == 5);
    double drift = 0.0;
    for (double v : eee) drift = std::max(drift, std::abs(v - eee[0]));
    MESSAGE("EEE drift at eps=0: " << drift);
    CHECK(drift < 1e-4);
    const auto j = json::parse(slurp(pout, "summary.json"));
    CHECK(j["evolution"]["steps"] == 20);
  }

  TEST_CASE("ground-state resume reproduces the uninterrupted summary") {
    const json cfg = {{"experiment", "ground-state"},
                      {"chain", kChain},
                      {"ground", {{"dtau", {0.01, 0.001}}, {"tol", 1e-12}}},
                      {"checkpoint_every", 3}};
    const std::string full = run_dir(cfg, "gs_full");
    const std::string part = scratch("gs_part");
    cli::RunOptions ro;
    ro.out_dir = part;
    ro.halt_after_step = 120;
    const auto parsed = cli::parse_config(cfg.dump());
    CHECK_THROWS_AS(cli::run_experiment(parsed, ro), cli::Interrupted);
    CHECK(fs::exists(part + "/checkpoint/progress.json"));
    CHECK_FALSE(fs::exists(part + "/manifest.json"));
    ro.halt_after_step = -1;
    ro.resume = true;
    cli::run_experiment(parsed, ro);
    const json a = json::parse(slurp(full, "summary.json")), b = json::parse(slurp(part, "summary.json"));
    CHECK(std::abs(a["energy"]["value"].get<double>() - b["energy"]["value"].get<double>()) <= 1e-10);
    CHECK(slurp(full, "summary.json") == slurp(part, "summary.json"));
    CHECK(slurp(full, "energy_trace.csv") == slurp(part, "energy_trace.csv"));
    CHECK_FALSE(fs::exists(part + "/checkpoint"));
  }

  TEST_CASE("binary exit codes") {
    CHECK(shell("list-experiments") == 0);
    const json good = {{"experiment", "real-time"}, {"chain", kChain}};
    CHECK(shell("validate --config " + write_config(good, "ok")) == 0);
    CHECK(shell("run --config " + write_config(good, "ok2") + " --out " + scratch("ok_out")) == 0);
    CHECK(shell("run --config " + write_config(good, "noout")) == 2);  // no output directory
    json bad = good;
    bad["chain"].erase("n_sites");
    CHECK(shell("validate --config " + write_config(bad, "bad")) == 2);
    CHECK(shell("run --config " + write_config(bad, "bad2") + " --out " + scratch("bad_out")) == 2);
    // analytic wave function exactly on the j=2 linear resonance
    const double g = M_PI * (M_PI * M_PI / 2 - 2);
    const json res = {{"experiment", "kicked-gp"},
                      {"gp", {{"g", g}, {"k", 0.5}, {"pairs", 2}, {"grid_size", 16}, {"bdg", false}}}};
    CHECK(shell("run --config " + write_config(res, "res") + " --out " + scratch("res_out")) == 3);
    json budget = good;
    budget["real"] = {{"observables", {"eee"}}, {"eee_budget_bytes", 1}};
    CHECK(shell("run --config " + write_config(budget, "budget") + " --out " + scratch("budget_out")) == 4);
    // odd chain for the perturbation profile is a parameter error
    const json odd = {{"experiment", "perturbed-evolution"},
                      {"chain", {{"n_sites", 3}, {"total_bosons", 3}}},
                      {"perturbation", {{"n0", 1.0}, {"eps", 0.1}}}};
    CHECK(shell("run --config " + write_config(odd, "odd") + " --out " + scratch("odd_out")) == 2);
  }

  TEST_CASE("thread count from the environment") {
    const json sc = {{"experiment", "stability-scan"},
                     {"scan", {{"k", 1.0}, {"pairs", 3}, {"grid_size", 16}, {"g_values", {1.0, 2.0}}}}};
    const std::string cfg = write_config(sc, "threads");
    const std::string a = scratch("t1"), b = scratch("t2");
    CHECK(shell("run --config " + cfg + " --out " + a + " --threads 1") == 0);
    CHECK(shell("run --config " + cfg + " --out " + b + " --threads 2") == 0);
    CHECK(slurp(a, "scan.json") == slurp(b, "scan.json"));
    CHECK(::setenv("BCHAIN_THREADS", "2", 1) == 0);
    CHECK(shell("run --config " + cfg + " --out " + scratch("t3")) == 0);
    ::unsetenv("BCHAIN_THREADS");
  }
}
