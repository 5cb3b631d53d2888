#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "bchain/gate.hpp"
#include "bchain/linalg.hpp"

namespace bchain {

class CanonicalMps;

enum class HoppingKind { CH, PTH };

HoppingKind parse_hopping_kind(const std::string& s);
const char* hopping_kind_name(HoppingKind k);

// CH: J_k = 1. PTH: J_k = (lambda/2) sqrt(k (N-k)), k = 1..N-1. Transfer time pi/lambda.
std::vector<double> hopping_profile(HoppingKind kind, int n_sites, double lambda = 2.0);

// H = sum_k U_k/2 n_k(n_k-1) - sum_k J_k (a+_{k+1} a_k + h.c.) + sum_k mu_k n_k + sum_k h_k(n_k)
struct BhChainSpec {
  int n_sites = 0;
  std::vector<double> U;                     // N
  std::vector<double> J;                     // N-1
  std::vector<double> mu;                    // N
  std::vector<std::vector<double>> onsite;   // empty, or per site h_k(n) for n = 0..nmax

  void validate() const;
  std::uint64_t hash() const;
  double site_energy(int site, int n) const;

  static BhChainSpec make(int n_sites, const std::vector<double>& J, double U = 0.0, double mu = 0.0);
};

// Weight of site k's on-site energy inside bond b's generator: 1/2 for interior
// sites, 1 for the single bond touching a terminal.
double onsite_weight(int n_sites, int site, int bond);

// Bond generator as a pair-charge conserving operator on local dimension d.
TwoSiteGate bond_hamiltonian(const BhChainSpec& spec, int bond, int d);

// exp(z H_bond) per block.
TwoSiteGate build_gate(const BhChainSpec& spec, int bond, int d, cplx z);

// Memoizes build_gate keyed by (bond, z, d, spec hash).
class GateCache {
 public:
  const TwoSiteGate& get(const BhChainSpec& spec, int bond, int d, cplx z);
  std::size_t size() const { return cache_.size(); }

 private:
  std::map<std::tuple<std::uint64_t, int, int, double, double>, TwoSiteGate> cache_;
  std::mutex mu_;
};

struct TrotterStep {
  int bond;
  double weight;
};

// Second order: 0-based bonds 0,2,4.. weight 1/2, then 1,3,.. weight 1, then 0,2,.. weight 1/2.
std::vector<TrotterStep> trotter_schedule(int n_sites, int order = 2);

// Dense <H> on an MPS (canonical form assumed).
double energy_expectation(const CanonicalMps& state, const BhChainSpec& spec);

struct PerturbationProfile {
  int n_sites = 0;
  double n0 = 0.0;
  double eps = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;

  // Perturbation energy of site (0-based) holding x bosons, eps included.
  // Intermediate sites: eps*k*x with k the distance to the nearest end;
  // terminals: c2 x^2 + c1 x.
  double value(int site, double x) const;
  std::vector<std::vector<double>> table(int nmax) const;
};

PerturbationProfile perturbation_profile(int n_sites, double n0, double eps);

struct LatticeConstants {
  double A = 1.397;
  double B = 1.051;
  double C = 2.121;
};

struct LatticeParams {
  double J;
  double U;
};

// Depths in units of E_R; a_s and d in the same length unit. Result in E_R.
LatticeParams lattice_params(double v0, double v_perp, double a_s, double d, const LatticeConstants& c = {});

// CSV with header containing U, J, mu columns (any order). J has N-1 values: the
// last row's J cell may be empty.
BhChainSpec load_spec_csv(const std::string& path);

}  // namespace bchain
