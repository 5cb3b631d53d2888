#pragma once

#include <complex>
#include <map>
#include <random>
#include <vector>

#include <Eigen/Dense>

// Exact full-basis reference implementation. Uses Eigen's own solvers only, so it
// shares no numerics with the library under test.
namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Occ = std::vector<int>;

struct Basis {
  int n_sites = 0;
  int total = 0;
  std::vector<Occ> states;  // descending lexicographic
  std::map<Occ, int> index;
  int size() const { return static_cast<int>(states.size()); }
};

Basis make_basis(int n_sites, int total);

struct Chain {
  std::vector<double> U, J, mu;
  std::vector<std::vector<double>> onsite;  // optional h_k(n)
};

Mat hamiltonian(const Basis& b, const Chain& c);
double ground_energy(const Mat& h);
Vec ground_vector(const Mat& h);
Vec evolve(const Mat& h, const Vec& psi, double t);

// Apply a pair-conserving two-site operator given as d^2 x d^2 (index i*d+j), d = M+1.
Vec apply_pair(const Basis& b, const Mat& op, int bond, const Vec& psi);

double number(const Basis& b, const Vec& psi, int site);
double number_sq(const Basis& b, const Vec& psi, int site);

// Reduced state of sites 0 and N-1 on (M+1)^2, index n1*(M+1)+nN.
Mat end_pair_rdm(const Basis& b, const Vec& psi);
Mat partial_transpose(const Mat& rho, int d);
double log_negativity(const Mat& rho, int d);

// Entropy (bits) of sites [0, cut] vs the rest, from the reduced density matrix
// of either side.
double entropy_left(const Basis& b, const Vec& psi, int cut);
double entropy_right(const Basis& b, const Vec& psi, int cut);
std::vector<double> schmidt_values(const Basis& b, const Vec& psi, int cut);

// (sum c a+)^{m2} (sum z a+)^{m1} |0>, normalized, by monomial expansion.
Vec two_mode_state(const Basis& b, const Vec& c, const Vec& z, int m1, int m2);

// Random pair-conserving unitary on d^2 and random Hermitian chains.
Mat random_pair_unitary(int d, std::mt19937_64& rng);
Vec random_state(const Basis& b, std::mt19937_64& rng);

}  // namespace oracle
