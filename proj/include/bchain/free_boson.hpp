#pragma once

#include <string>
#include <vector>

#include "bchain/gate.hpp"
#include "bchain/linalg.hpp"
#include "bchain/mps.hpp"

namespace bchain {

enum class RVariant { trap, barrier, pth, pth_central, angular };

RVariant parse_r_variant(const std::string& s);
const char* r_variant_name(RVariant v);

// Site labels i below are 1-based as in the usual chain notation.
struct RParams {
  int n_sites = 100;
  // trap / barrier: R_ii = omega (i - center)^2, R_ij = xi / |i - j|
  double omega = 0.00046;
  double center = 50.0;
  double xi = 0.3;
  // barrier: R_ii = barrier_height for barrier_lo < i < barrier_hi
  double barrier_height = 1000.0;
  int barrier_lo = 45;
  int barrier_hi = 55;
  // pth / pth_central: R_{i,i+1} = (lambda/2) sqrt(i (N - i)); central sites N/2, N/2+1 get mu
  double lambda = 1.0;
  double mu = 0.0;
  // angular: J_x with <m-1|J_x|m> = sqrt(j(j+1) - m(m-1))/2 plus eps exp(-beta m^2),
  // ket |j,m> on site j - m + 1, j = (N-1)/2
  double eps = 0.0;
  double beta = 0.0;
};

struct RMatrix {
  RVariant variant = RVariant::pth;
  CMat r;
  int n_sites() const { return static_cast<int>(r.rows()); }
};

RMatrix build_r(RVariant variant, const RParams& p);

// U(t) = exp(-i R t); column k holds alpha_k(t) = sum_j U_jk a+_j.
CMat propagate(const RMatrix& r, double t);

// Lowest eigenvector of R, phase fixed so the largest entry is real positive.
CVec ground_mode(const RMatrix& r);

struct FoldOp {
  enum class Kind { phase, current };
  Kind kind;
  int index;     // site for phase, bond (joins index, index+1) for current
  double angle;  // theta or phi
};

// Ops in application order; together they map sum_k c_k a+_k to a+_{first}.
struct FoldPlan {
  int n_sites = 0;
  std::vector<FoldOp> ops;
};

// Phase stage e^{-i theta n_k} with theta_k = arg c_k, then currents from the
// far end down to `first`, tan(phi/2) = r_{k+1} / r_k via atan2.
FoldPlan fold_single(const CVec& c, int first = 0, double norm_tol = 1e-10);

// Coefficient-level action of the plan.
CVec apply_plan(const FoldPlan& plan, CVec c);

// exp(-i h) with h = sum_jk H_jk a+_j a_k on two adjacent sites of local dimension d.
TwoSiteGate mode_gate(const Eigen::Matrix2cd& h, int d);

// Inverse ops in reverse order, applied to an MPS.
void unfold_apply(CanonicalMps& state, const FoldPlan& plan);

// (sum c_k a+_k)^M |0> / sqrt(M!) for the mode folded by plan.
CanonicalMps unfold_into_mps(const FoldPlan& plan, int total_bosons, int n_sites);

// (a+_site)^p on a terminal site, then renormalize and restore canonical form.
CanonicalMps apply_creation_power(const CanonicalMps& state, int site, int power);

// (sum c a+)^{m2} (sum z a+)^{m1} |0>, normalized.
CanonicalMps fold_double(const CVec& c, const CVec& z, int m1, int m2, int chi_max = 0);

struct CollisionResult {
  double mu = 0.0;
  double collection_fraction = 0.0;  // (<n_1> + <n_N>) / M
  double eee = 0.0;
  bool has_eee = false;
  int chi = 1;
};

// PTH scale lambda with mu on the two central sites, evaluated at t = pi / lambda.
CollisionResult collision_experiment(int n_sites, int total_bosons, double mu, double lambda = 1.0,
                                     bool with_eee = true, int chi_max = 0);

std::vector<CollisionResult> collision_scan(int n_sites, int total_bosons, const std::vector<double>& mu_over_n,
                                            double lambda = 1.0, bool with_eee = true, int chi_max = 0);
std::string collision_csv(const std::vector<CollisionResult>& rows, int n_sites);

struct TransferTable {
  int j = 0;
  double eps = 0.0;
  double beta = 0.0;
  cplx direct = 1.0;           // weight of a+_N
  std::vector<int> sites;      // 1-based sites 2q+1, q = 0..j
  std::vector<double> f;       // F(q)
  std::vector<cplx> weights;   // -i eps F(q)
};

double transfer_f(int j, double q, double beta);
TransferTable perturbative_transfer(int j, double eps, double beta);

// 2 log2(sum_k s_k), s_k = sqrt(M! / (2^M (M-k)! k!))
double binomial_entanglement(int total_bosons);

struct QuenchMap {
  std::vector<double> times;
  Eigen::MatrixXd density;  // times x sites
  std::string csv() const;  // time,site,value
};

// Prepare the ground mode of `prepare`, evolve under `evolve`; <n_i>(t) = M |(U c)_i|^2.
QuenchMap free_quench(const RMatrix& prepare, const RMatrix& evolve, int total_bosons, double t_max, int n_times);

}  // namespace bchain
