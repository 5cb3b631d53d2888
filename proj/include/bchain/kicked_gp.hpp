#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bchain/linalg.hpp"

namespace bchain {

// Condensate on a ring, theta_m = 2 pi m / L, normalized to int |psi|^2 dtheta = 1.
struct GpField {
  int grid_size = 0;
  double g = 0.0;
  std::vector<cplx> psi;

  double dtheta() const;
  double norm2() const;  // int |psi|^2 dtheta
  static GpField uniform(int grid_size, double g);
};

// Per pair: kick e^{-ik cos}, free evolution eps, kick e^{+ik cos}, free evolution beta.
struct KickSchedule {
  double k = 1.0;
  double beta = 1.96;
  double eps = 0.04;
  int pairs = 40;

  double period() const { return beta + eps; }
  void validate() const;
};

struct BogoliubovData {
  double zeta;
  double energy;  // epsilon_j
  double u;
  double v;
};

BogoliubovData bogoliubov_data(int j, double g);

struct GpOptions {
  double dt_max = 1e-3;  // Strang step bound
};

struct GpTrajectory {
  std::vector<GpField> snapshots;  // after the second kick of each pair; index 0 is pair 1
  std::vector<double> energies;
};

GpTrajectory gp_evolve(GpField field, const KickSchedule& schedule, const GpOptions& opts = {});

// Linear-response wave function after n_pairs kick pairs (not renormalized).
// Raises NumericalError when |sin omega_j| < 1e-8.
GpField analytic_psi(int n_pairs, double k, double g, double eps, double period, int grid_size);

// int psi^* (-1/2 d^2/dtheta^2 + g/2 |psi|^2) psi dtheta
double gp_energy(const GpField& field, double g);

struct BdgMode {
  int j = 0;
  std::vector<cplx> u;  // U_j(theta)
  std::vector<cplx> v;  // V_j(theta)

  double norm_u(double dtheta) const;
  double norm_v(double dtheta) const;
  double global_norm(double dtheta) const { return norm_u(dtheta) - norm_v(dtheta); }
};

// U_j e^{ij theta}/sqrt(2 pi), V_j e^{ij theta}/sqrt(2 pi)
std::vector<BdgMode> initial_modes(const std::vector<int>& js, int grid_size, double g);

// effective: the pair potential W applied once per pair (U by e^{-iW}, V by e^{+iW});
// its imaginary part makes the global norm drift at O(eps k).
// raw: modes see the same Hermitian double kick as the condensate (conjugate for V);
// the global norm is then conserved.
enum class KickModel { raw, effective };

struct BdgOptions {
  double dt_max = 1e-3;
  KickModel model = KickModel::effective;
};

struct BdgRun {
  std::vector<double> nnp;                  // index 0: initial, n: after pair n
  std::vector<double> energy;               // same indexing
  std::vector<std::vector<double>> alpha;   // [pair][mode]
  double max_global_norm_drift = 0.0;
  GpField final_field;
  std::vector<BdgMode> final_modes;
};

// GP field and modes advance in lockstep on the same Strang mesh.
BdgRun bdg_evolve(GpField field, std::vector<BdgMode> modes, const KickSchedule& schedule,
                  const BdgOptions& opts = {});

// sum_j <V_j|V_j> - |<psi|V_j>|^2
double nnp(const std::vector<BdgMode>& modes, const GpField& field);

// g int Im(psi^2 u^* v) dtheta with u, v the unit-normalized mode parts.
double alpha_rate(const BdgMode& mode, const GpField& field);

struct ScanPoint {
  double g = 0.0;
  double slope = 0.0;      // b in log NNP = a + b n over the final two thirds
  double intercept = 0.0;
  double r2 = 0.0;
  bool fit_ok = false;
  std::string tag;         // stable | unstable | fit-failed
  std::vector<double> nnp;
};

struct LogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  bool ok = false;
};

// Least squares on log(y) against x over [from, end).
LogFit fit_exponential(const std::vector<double>& y, std::size_t from);

// Log-linear fit over the final two thirds of an NNP series plus the stability tag.
ScanPoint classify_nnp(double g, const std::vector<double>& nnp);

struct ScanOptions {
  int grid_size = 128;
  std::vector<int> modes{-2, -1, 1, 2};
  double dt_max = 1e-3;
  KickModel model = KickModel::effective;
  int threads = 1;
};

std::vector<ScanPoint> stability_scan(const std::vector<double>& g_grid, const KickSchedule& schedule,
                                      const ScanOptions& opts = {});
std::string scan_json(const std::vector<ScanPoint>& pts);

// g values in [g_lo, g_hi] where epsilon_j(g) T = 2 pi n for some n >= 1.
std::vector<double> resonance_couplings(int j, double period, double g_lo, double g_hi);

// pair,theta,re,im
std::string snapshot_csv(const GpTrajectory& traj);
// pair,time,energy,nnp
std::string series_csv(const BdgRun& run, double period);

}  // namespace bchain
