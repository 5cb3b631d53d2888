#include "bchain/free_boson.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "bchain/entanglement.hpp"
#include "bchain/errors.hpp"

namespace bchain {

RVariant parse_r_variant(const std::string& s) {
  if (s == "trap") return RVariant::trap;
  if (s == "barrier") return RVariant::barrier;
  if (s == "pth") return RVariant::pth;
  if (s == "pth_central" || s == "collision") return RVariant::pth_central;
  if (s == "angular") return RVariant::angular;
  throw ValidationError("unknown R variant '" + s + "'");
}

const char* r_variant_name(RVariant v) {
  switch (v) {
    case RVariant::trap: return "trap";
    case RVariant::barrier: return "barrier";
    case RVariant::pth: return "pth";
    case RVariant::pth_central: return "pth_central";
    case RVariant::angular: return "angular";
  }
  return "?";
}

RMatrix build_r(RVariant variant, const RParams& p) {
  const int n = p.n_sites;
  require(n >= 1, "R matrix needs n_sites >= 1");
  RMatrix out;
  out.variant = variant;
  out.r = CMat::Zero(n, n);
  CMat& r = out.r;
  switch (variant) {
    case RVariant::trap:
    case RVariant::barrier:
      for (int i = 1; i <= n; ++i) {
        r(i - 1, i - 1) = p.omega * (i - p.center) * (i - p.center);
        for (int j = 1; j <= n; ++j)
          if (j != i) r(i - 1, j - 1) = p.xi / std::abs(i - j);
      }
      if (variant == RVariant::barrier)
        for (int i = p.barrier_lo + 1; i < p.barrier_hi && i <= n; ++i)
          if (i >= 1) r(i - 1, i - 1) = p.barrier_height;
      break;
    case RVariant::pth:
    case RVariant::pth_central:
      require(p.lambda > 0.0, "lambda must be positive");
      for (int i = 1; i < n; ++i) r(i - 1, i) = r(i, i - 1) = 0.5 * p.lambda * std::sqrt(double(i) * (n - i));
      if (variant == RVariant::pth_central) {
        require(n % 2 == 0 && n >= 2, "central interaction needs an even chain");
        r(n / 2 - 1, n / 2 - 1) = p.mu;
        r(n / 2, n / 2) = p.mu;
      }
      break;
    case RVariant::angular: {
      const double jj = 0.5 * (n - 1);
      for (int s = 1; s <= n; ++s) {
        const double m = jj + 1.0 - s;
        r(s - 1, s - 1) = p.eps * std::exp(-p.beta * m * m);
        if (s < n) r(s - 1, s) = r(s, s - 1) = 0.5 * std::sqrt(double(s) * (n - s));
      }
      break;
    }
  }
  for (Eigen::Index i = 0; i < r.size(); ++i)
    if (!std::isfinite(r.data()[i].real())) throw ValidationError("R matrix has non-finite entries");
  return out;
}

CMat propagate(const RMatrix& r, double t) {
  require(std::isfinite(t), "time must be finite");
  return expm_hermitian_scaled(r.r, cplx(0.0, -t));
}

CVec ground_mode(const RMatrix& r) {
  const auto ed = eig_hermitian(r.r);
  CVec v = ed.vectors.col(0);
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  const cplx ph = v[imax] / std::abs(v[imax]);
  v /= ph;
  return v / v.norm();
}

FoldPlan fold_single(const CVec& c, int first, double norm_tol) {
  const int n = static_cast<int>(c.size());
  require(n >= 1, "empty mode vector");
  require(first >= 0 && first < n, "fold target out of range");
  if (norm_tol < std::numeric_limits<double>::infinity())
    require(std::abs(c.norm() - 1.0) <= norm_tol, "mode vector is not normalized");
  FoldPlan plan;
  plan.n_sites = n;
  std::vector<double> mag(n, 0.0);
  for (int k = first; k < n; ++k) {
    const double th = std::abs(c[k]) > 0.0 ? std::arg(c[k]) : 0.0;
    plan.ops.push_back({FoldOp::Kind::phase, k, th});
    mag[k] = std::abs(c[k]);
  }
  for (int b = n - 2; b >= first; --b) {
    const double phi = 2.0 * std::atan2(mag[b + 1], mag[b]);
    plan.ops.push_back({FoldOp::Kind::current, b, phi});
    mag[b] = std::hypot(mag[b], mag[b + 1]);
    mag[b + 1] = 0.0;
  }
  return plan;
}

CVec apply_plan(const FoldPlan& plan, CVec c) {
  require(c.size() == plan.n_sites, "plan and vector sizes differ");
  for (const auto& op : plan.ops) {
    if (op.kind == FoldOp::Kind::phase) {
      c[op.index] *= std::polar(1.0, -op.angle);
    } else {
      const double cs = std::cos(0.5 * op.angle), sn = std::sin(0.5 * op.angle);
      const cplx a = c[op.index], b = c[op.index + 1];
      c[op.index] = cs * a + sn * b;
      c[op.index + 1] = -sn * a + cs * b;
    }
  }
  return c;
}

TwoSiteGate mode_gate(const Eigen::Matrix2cd& h, int d) {
  TwoSiteGate g(d);
  for (int p = 0; p < g.n_blocks(); ++p) {
    const int lo = g.lo(p), dim = g.block_dim(p);
    CMat hb = CMat::Zero(dim, dim);
    for (int a = 0; a < dim; ++a) {
      const int i = lo + a;
      hb(a, a) = h(0, 0) * double(i) + h(1, 1) * double(p - i);
      // a+_0 a_1 |i, p-i> = sqrt((i+1)(p-i)) |i+1, p-i-1>
      if (a + 1 < dim) {
        const double w = std::sqrt(double(i + 1) * (p - i));
        hb(a + 1, a) = h(0, 1) * w;
        hb(a, a + 1) = h(1, 0) * w;
      }
    }
    g.block_mut(p) = expm_hermitian_scaled(hb, cplx(0.0, -1.0), 1e-10);
  }
  return g;
}

namespace {

void apply_op(CanonicalMps& st, const FoldOp& op, bool inverse) {
  if (op.angle == 0.0) return;
  const int d = st.local_dim();
  const double sign = inverse ? 1.0 : -1.0;
  if (op.kind == FoldOp::Kind::phase) {
    CMat g = CMat::Zero(d, d);
    for (int i = 0; i < d; ++i) g(i, i) = std::polar(1.0, sign * op.angle * i);
    apply_one_site(st, op.index, g);
    return;
  }
  // h = theta sigma_y, forward theta = -phi/2
  const double half = sign * 0.5 * op.angle;
  Eigen::Matrix2cd h;
  h << 0.0, cplx(0.0, -half), cplx(0.0, half), 0.0;
  apply_two_site(st, op.index, mode_gate(h, d));
}

void fold_apply(CanonicalMps& st, const FoldPlan& plan) {
  for (const auto& op : plan.ops) apply_op(st, op, false);
}

}  // namespace

void unfold_apply(CanonicalMps& st, const FoldPlan& plan) {
  require(plan.n_sites == st.n_sites(), "plan and state sizes differ");
  for (auto it = plan.ops.rbegin(); it != plan.ops.rend(); ++it) apply_op(st, *it, true);
}

CanonicalMps unfold_into_mps(const FoldPlan& plan, int m, int n) {
  require(plan.n_sites == n, "plan built for a different chain length");
  require(m >= 0, "negative particle number");
  std::vector<int> occ(n, 0);
  occ[0] = m;
  CanonicalMps st = from_product_fock(occ);
  if (m > 0) unfold_apply(st, plan);
  return st;
}

CanonicalMps apply_creation_power(const CanonicalMps& st, int site, int p) {
  const int n = st.n_sites(), m = st.total_bosons();
  require(site == 0 || site == n - 1, "creation power needs a terminal site");
  require(p >= 0, "negative power");
  if (p == 0) return st;
  CanonicalMps out = CanonicalMps::empty(n, m + p);
  out.chi_max = st.chi_max;
  out.trunc_rel = st.trunc_rel;
  auto weight = [p](int i) { return std::exp(0.5 * (std::lgamma(i + p + 1.0) - std::lgamma(i + 1.0))); };
  if (site == 0) {
    for (int k = 1; k <= n; ++k) out.bond_raw_mut(k) = st.bond_raw(k);
    for (int k = 1; k < n; ++k) out.site_mut(k) = st.site(k);
    for (const auto& [key, blk] : st.site(0)) out.site_mut(0)[{key.first + p, key.second}] = blk * weight(key.first);
  } else {
    for (int k = 1; k < n; ++k) {
      BondSpace b = st.bond_raw(k);
      for (int& q : b.charges) q += p;
      out.bond_raw_mut(k) = std::move(b);
    }
    for (int k = 0; k + 1 < n; ++k)
      for (const auto& [key, blk] : st.site(k)) out.site_mut(k)[{key.first, key.second + p}] = blk;
    for (const auto& [key, blk] : st.site(n - 1)) out.site_mut(n - 1)[{key.first + p, 0}] = blk * weight(key.first);
  }
  canonicalize(out);
  return out;
}

CanonicalMps fold_double(const CVec& c, const CVec& z, int m1, int m2, int chi_max) {
  const int n = static_cast<int>(c.size());
  require(z.size() == c.size(), "mode vectors differ in length");
  require(m1 >= 0 && m2 >= 0, "negative particle number");
  require(std::abs(c.norm() - 1.0) <= 1e-10 && std::abs(z.norm() - 1.0) <= 1e-10, "mode vectors must be normalized");
  const double inf = std::numeric_limits<double>::infinity();
  const FoldPlan v1 = fold_single(z, 0);
  const CVec c1 = apply_plan(v1, c);
  FoldPlan v2;
  CVec c2 = c1;
  if (n > 1) {
    v2 = fold_single(c1, 1, inf);
    c2 = apply_plan(v2, c1);
    for (int k = 2; k < n; ++k) c2[k] = 0.0;
  } else {
    v2.n_sites = n;
  }
  const FoldPlan w = fold_single(c2, 0, inf);

  std::vector<int> occ(n, 0);
  occ[0] = m1;
  CanonicalMps st = from_product_fock(occ);
  st.chi_max = chi_max;
  if (m1 > 0) fold_apply(st, w);
  st = apply_creation_power(st, 0, m2);
  unfold_apply(st, w);
  unfold_apply(st, v2);
  unfold_apply(st, v1);
  return st;
}

CollisionResult collision_experiment(int n, int m, double mu, double lambda, bool with_eee, int chi_max) {
  require(n >= 2 && n % 2 == 0, "collision needs an even chain");
  require(m >= 2 && m % 2 == 0, "collision needs an even, positive particle number");
  RParams p;
  p.n_sites = n;
  p.lambda = lambda;
  p.mu = mu;
  const RMatrix r = build_r(RVariant::pth_central, p);
  const CMat u = propagate(r, M_PI / lambda);
  const CVec c = u.col(0), z = u.col(n - 1);
  const int m1 = m / 2, m2 = m - m1;
  CollisionResult out;
  out.mu = mu;
  // modes c and z are orthogonal: <n_j> = m2 |c_j|^2 + m1 |z_j|^2
  double ends = 0.0;
  for (int j : {0, n - 1}) ends += m2 * std::norm(c[j]) + m1 * std::norm(z[j]);
  out.collection_fraction = ends / m;
  if (with_eee) {
    const CanonicalMps st = fold_double(c, z, m1, m2, chi_max);
    out.eee = end_to_end_entanglement(st);
    out.has_eee = true;
    out.chi = st.max_bond_dim();
  }
  return out;
}

std::vector<CollisionResult> collision_scan(int n, int m, const std::vector<double>& grid, double lambda,
                                            bool with_eee, int chi_max) {
  std::vector<CollisionResult> rows;
  for (double x : grid) rows.push_back(collision_experiment(n, m, x * n, lambda, with_eee, chi_max));
  return rows;
}

std::string collision_csv(const std::vector<CollisionResult>& rows, int n) {
  std::ostringstream os;
  os.precision(17);
  os << "mu_over_n,mu,collection_fraction,eee\n";
  for (const auto& r : rows) {
    os << r.mu / n << ',' << r.mu << ',' << r.collection_fraction << ',';
    if (r.has_eee) os << r.eee;
    os << '\n';
  }
  return os.str();
}

double transfer_f(int j, double q, double beta) {
  const double e = j - q;
  double lg = 0.5 * (std::lgamma(2.0 * j + 1) - std::lgamma(2.0 * e + 1) - std::lgamma(2.0 * q + 1)) +
              2.0 * std::lgamma(e + 0.5) - std::lgamma(e + 1.0);
  if (e != 0.0) {
    if (beta == 0.0) return 0.0;
    lg += e * std::log(beta);
  }
  return std::exp(lg);
}

TransferTable perturbative_transfer(int j, double eps, double beta) {
  require(j >= 1, "j must be >= 1");
  require(beta >= 0.0, "beta must be non-negative");
  TransferTable t;
  t.j = j;
  t.eps = eps;
  t.beta = beta;
  for (int q = 0; q <= j; ++q) {
    t.sites.push_back(2 * q + 1);
    const double f = transfer_f(j, q, beta);
    t.f.push_back(f);
    t.weights.push_back(cplx(0.0, -eps * f));
  }
  return t;
}

double binomial_entanglement(int m) {
  require(m >= 1, "M must be >= 1");
  std::vector<double> logs;
  double mx = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= m; ++k) {
    const double l = 0.5 * (std::lgamma(m + 1.0) - m * std::log(2.0) - std::lgamma(m - k + 1.0) - std::lgamma(k + 1.0));
    logs.push_back(l);
    mx = std::max(mx, l);
  }
  double s = 0.0;
  for (double l : logs) s += std::exp(l - mx);
  return 2.0 * (mx + std::log(s)) / std::log(2.0);
}

std::string QuenchMap::csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "time,site,value\n";
  for (Eigen::Index t = 0; t < density.rows(); ++t)
    for (Eigen::Index s = 0; s < density.cols(); ++s) os << times[t] << ',' << s << ',' << density(t, s) << '\n';
  return os.str();
}

QuenchMap free_quench(const RMatrix& prepare, const RMatrix& evolve, int m, double t_max, int n_times) {
  require(prepare.n_sites() == evolve.n_sites(), "quench R matrices differ in size");
  require(n_times >= 1 && t_max >= 0.0, "bad quench time grid");
  const CVec c0 = ground_mode(prepare);
  const auto ed = eig_hermitian(evolve.r);
  const CVec proj = ed.vectors.adjoint() * c0;
  QuenchMap q;
  q.density.resize(n_times, prepare.n_sites());
  for (int k = 0; k < n_times; ++k) {
    const double t = n_times == 1 ? 0.0 : t_max * k / (n_times - 1);
    q.times.push_back(t);
    CVec ph = proj;
    for (Eigen::Index i = 0; i < ph.size(); ++i) ph[i] *= std::polar(1.0, -ed.values[i] * t);
    const CVec v = ed.vectors * ph;
    for (Eigen::Index s = 0; s < v.size(); ++s) q.density(k, s) = m * std::norm(v[s]);
  }
  return q;
}

}  // namespace bchain
