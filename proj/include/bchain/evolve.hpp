#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bchain/bose_hubbard.hpp"
#include "bchain/mps.hpp"

namespace bchain {

struct ObservableRecord {
  long step;
  double time;
  int site;  // site, bond for entropy, -1 for chain-wide values
  double value;
};

struct EvolutionReport {
  long steps = 0;
  double residual = 0.0;         // |1 - <psi(tau)|psi(tau+dtau)>| at the last check
  double energy = 0.0;           // E_G = -ln ||e^{-dtau H} psi|| / dtau (imaginary time)
  double energy_expectation = 0.0;
  double dtau = 0.0;             // final imaginary step
  bool converged = false;
  bool dtau_halved = false;
  bool chi_capped = false;
  double max_discarded = 0.0;
  std::vector<int> chi_trajectory;      // per step, max bond dimension
  std::vector<double> energy_trace;     // E_G at each check sweep
  std::vector<double> residual_trace;
  std::map<std::string, std::vector<ObservableRecord>> series;

  std::string summary_json() const;
  // step,time,site,value with a header row
  std::string series_csv(const std::string& observable) const;
};

// Divergence-guard and scheduling state, enough to resume a run bit-for-bit.
struct GroundStateCursor {
  long step = 0;
  double dtau = 0.0;
  double last_residual = -1.0;
  int increases = 0;
  bool halved = false;
};

struct GroundStateOptions {
  double dtau = 1e-3;
  double tol = 1e-14;
  long max_steps = 1'000'000;
  int check_every = 10;           // sweeps between exact-norm checks
  int guard_sweeps = 100;         // residual increasing this long halves dtau once
  // called after every check sweep with the report accumulated so far
  std::function<void(const CanonicalMps&, const GroundStateCursor&, const EvolutionReport&)> on_check;
  const GroundStateCursor* resume = nullptr;
  const EvolutionReport* resume_report = nullptr;  // traces to continue from
};

// Imaginary-time TEBD with second-order Trotter sweeps. init's chi_max and
// trunc_rel are respected.
std::pair<CanonicalMps, EvolutionReport> ground_state(const BhChainSpec& spec, CanonicalMps init,
                                                      const GroundStateOptions& opts);

// Folds one ladder stage into the running total (traces appended, final values replaced).
void accumulate_stage(EvolutionReport& total, const EvolutionReport& stage);

// Runs ground_state for each dtau in turn, feeding each result to the next.
std::pair<CanonicalMps, EvolutionReport> ground_state_ladder(const BhChainSpec& spec, CanonicalMps init,
                                                             const std::vector<double>& dtaus,
                                                             GroundStateOptions opts);

// Mott-like default: bosons spread as evenly as possible, extras from the left.
CanonicalMps unit_filling(int n_sites, int total_bosons);

struct Observers {
  bool density = false;
  bool fluctuation = false;
  bool entropy = false;
  bool eee = false;
  std::size_t eee_max_bytes = std::size_t(2) << 30;  // support-matrix budget per EEE snapshot
};

struct RealTimeOptions {
  double dt = 1e-3;
  long steps = 0;
  int chi_cap = 0;         // 0: unbounded
  int record_every = 1;
  Observers observers;
};

// Advances state in place.
EvolutionReport real_time(const BhChainSpec& spec, CanonicalMps& state, const RealTimeOptions& opts);

struct QuenchOptions {
  bool prepare_ground_state = true;   // false: start from init as given
  std::vector<double> dtaus{1e-2, 1e-3};
  GroundStateOptions ground;
  RealTimeOptions real;
};

struct QuenchResult {
  CanonicalMps initial;
  CanonicalMps final_state;
  EvolutionReport preparation;
  EvolutionReport evolution;
};

QuenchResult quench_protocol(const BhChainSpec& before, const BhChainSpec& after, const CanonicalMps& init,
                             const QuenchOptions& opts);

}  // namespace bchain
