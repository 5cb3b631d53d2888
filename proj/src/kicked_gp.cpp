#include "bchain/kicked_gp.hpp"

#include <atomic>
#include <map>
#include <mutex>
#include <cmath>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "bchain/errors.hpp"
#include "bchain/kernels.hpp"

namespace bchain {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int wavenumber(int m, int l) { return m < l / 2 ? m : m - l; }

void check_field(const std::vector<cplx>& a, const char* what) {
  for (const auto& x : a)
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) throw NumericalError(std::string("non-finite values in ") + what);
}

// Shared split-step machinery for the condensate and its modes.
class Propagator {
 public:
  Propagator(int l, double g, double k, double dt_max) : l_(l), g_(g), dt_max_(dt_max) {
    require(power_of_two(l), "grid size must be a power of two");
    require(dt_max > 0.0, "dt_max must be positive");
    kick_minus_.resize(l);
    kick_plus_.resize(l);
    for (int m = 0; m < l; ++m) {
      const double th = 2.0 * M_PI * m / l;
      kick_minus_[m] = std::polar(1.0, -k * std::cos(th));
      kick_plus_[m] = std::conj(kick_minus_[m]);
    }
  }

  const std::vector<cplx>& kick_minus() const { return kick_minus_; }
  const std::vector<cplx>& kick_plus() const { return kick_plus_; }

  // Free evolution over tau: psi under GP, (U,V) under the linearized equations.
  void evolve(std::vector<cplx>& psi, std::vector<std::vector<cplx>*>& us, std::vector<std::vector<cplx>*>& vs,
              double tau) {
    if (tau <= 0.0) return;
    const int n = static_cast<int>(std::ceil(tau / dt_max_ - 1e-12));
    const double h = tau / n;
    kinetic(psi, us, vs, 0.5 * h);
    for (int s = 0; s < n; ++s) {
      nonlinear(psi, us, vs, h);
      kinetic(psi, us, vs, s + 1 < n ? h : 0.5 * h);
    }
  }

 private:
  const std::vector<cplx>& phases(double h, bool conj) {
    auto& cache = conj ? kin_conj_ : kin_;
    auto it = cache.find(h);
    if (it != cache.end()) return it->second;
    std::vector<cplx> p(l_);
    for (int m = 0; m < l_; ++m) {
      const double q = wavenumber(m, l_);
      p[m] = std::polar(1.0, (conj ? 1.0 : -1.0) * 0.5 * q * q * h);
    }
    if (cache.size() > 8) cache.clear();
    return cache.emplace(h, std::move(p)).first->second;
  }

  void kinetic_one(std::vector<cplx>& a, const std::vector<cplx>& ph) {
    fft_ring_inplace(a.data(), a.size());
    kernels::cmul(a.data(), ph.data(), a.size());
    ifft_ring_inplace(a.data(), a.size());
  }

  void kinetic(std::vector<cplx>& psi, std::vector<std::vector<cplx>*>& us, std::vector<std::vector<cplx>*>& vs,
               double h) {
    const auto& p = phases(h, false);
    kinetic_one(psi, p);
    for (auto* u : us) kinetic_one(*u, p);
    if (!vs.empty()) {
      const auto& pc = phases(h, true);
      for (auto* v : vs) kinetic_one(*v, pc);
    }
  }

  void nonlinear(std::vector<cplx>& psi, std::vector<std::vector<cplx>*>& us, std::vector<std::vector<cplx>*>& vs,
                 double h) {
    const double s3 = std::sqrt(3.0);
    for (int m = 0; m < l_; ++m) {
      const double n2 = std::norm(psi[m]);
      const cplx half = std::polar(1.0, -0.5 * g_ * n2 * h);
      const cplx mid = psi[m] * half;
      psi[m] = mid * half;
      if (us.empty()) continue;
      // exp(-i G h), G^2 = 3 g^2 |psi|^4
      const double a = 2.0 * g_ * n2;
      const cplx b = g_ * mid * mid;
      const cplx c = -g_ * std::conj(mid * mid);
      const double w = s3 * g_ * n2;
      const double cs = std::cos(w * h);
      const double sn = w > 0.0 ? std::sin(w * h) / w : h;
      const cplx mi(0.0, -sn);
      for (std::size_t r = 0; r < us.size(); ++r) {
        const cplx u = (*us[r])[m], v = (*vs[r])[m];
        (*us[r])[m] = cs * u + mi * (a * u + b * v);
        (*vs[r])[m] = cs * v + mi * (c * u - a * v);
      }
    }
  }

  int l_;
  double g_;
  double dt_max_;
  std::vector<cplx> kick_minus_, kick_plus_;
  std::map<double, std::vector<cplx>> kin_, kin_conj_;
};

void run_pairs(GpField& f, std::vector<BdgMode>* modes, const KickSchedule& ks, double dt_max, KickModel model,
               const std::function<void(int)>& after_pair) {
  Propagator prop(f.grid_size, f.g, ks.k, dt_max);
  std::vector<std::vector<cplx>*> us, vs;
  if (modes)
    for (auto& md : *modes) {
      us.push_back(&md.u);
      vs.push_back(&md.v);
    }
  const std::size_t l = f.psi.size();
  std::vector<cplx> w_u, w_v;
  if (modes && model == KickModel::effective) {
    w_u.resize(l);
    w_v.resize(l);
    for (std::size_t m = 0; m < l; ++m) {
      const double th = 2.0 * M_PI * m / l;
      const double c = std::cos(th), s = std::sin(th);
      // e^{-iW}, e^{+iW} with W = -i (eps k/2) cos + (eps k^2/2) sin^2
      w_u[m] = std::exp(-0.5 * ks.eps * ks.k * c) * std::polar(1.0, -0.5 * ks.eps * ks.k * ks.k * s * s);
      w_v[m] = std::exp(0.5 * ks.eps * ks.k * c) * std::polar(1.0, 0.5 * ks.eps * ks.k * ks.k * s * s);
    }
  }
  const bool raw_modes = modes && model == KickModel::raw;
  for (int p = 1; p <= ks.pairs; ++p) {
    kernels::cmul(f.psi.data(), prop.kick_minus().data(), l);
    if (raw_modes)
      for (std::size_t r = 0; r < us.size(); ++r) {
        kernels::cmul(us[r]->data(), prop.kick_minus().data(), l);
        kernels::cmul(vs[r]->data(), prop.kick_plus().data(), l);
      }
    if (modes && model == KickModel::effective)
      for (std::size_t r = 0; r < us.size(); ++r) {
        kernels::cmul(us[r]->data(), w_u.data(), l);
        kernels::cmul(vs[r]->data(), w_v.data(), l);
      }
    prop.evolve(f.psi, us, vs, ks.eps);
    kernels::cmul(f.psi.data(), prop.kick_plus().data(), l);
    if (raw_modes)
      for (std::size_t r = 0; r < us.size(); ++r) {
        kernels::cmul(us[r]->data(), prop.kick_plus().data(), l);
        kernels::cmul(vs[r]->data(), prop.kick_minus().data(), l);
      }
    check_field(f.psi, "condensate");
    after_pair(p);
    prop.evolve(f.psi, us, vs, ks.beta);
  }
}

}  // namespace

double GpField::dtheta() const { return 2.0 * M_PI / grid_size; }

double GpField::norm2() const { return kernels::norm2(psi.data(), psi.size()) * dtheta(); }

GpField GpField::uniform(int l, double g) {
  require(power_of_two(l), "grid size must be a power of two");
  GpField f;
  f.grid_size = l;
  f.g = g;
  f.psi.assign(l, cplx(1.0 / std::sqrt(2.0 * M_PI), 0.0));
  return f;
}

void KickSchedule::validate() const {
  require(eps > 0.0, "eps must be positive");
  require(beta > eps, "beta must exceed eps");
  require(std::isfinite(k), "kick strength must be finite");
  require(pairs >= 0, "pairs must be non-negative");
}

BogoliubovData bogoliubov_data(int j, double g) {
  require(j != 0, "Bogoliubov mode j = 0 is the condensate");
  require(g >= 0.0, "g must be non-negative");
  const double e = 0.5 * j * j;
  BogoliubovData d;
  d.zeta = std::pow(e / (e + g / M_PI), 0.25);
  d.energy = std::sqrt(e * (e + g / M_PI));
  d.u = 0.5 * (d.zeta + 1.0 / d.zeta);
  d.v = 0.5 * (d.zeta - 1.0 / d.zeta);
  return d;
}

GpTrajectory gp_evolve(GpField f, const KickSchedule& ks, const GpOptions& opts) {
  ks.validate();
  require(static_cast<int>(f.psi.size()) == f.grid_size, "field size mismatch");
  GpTrajectory tr;
  run_pairs(f, nullptr, ks, opts.dt_max, KickModel::raw, [&](int) {
    tr.snapshots.push_back(f);
    tr.energies.push_back(gp_energy(f, f.g));
  });
  return tr;
}

GpField analytic_psi(int n, double k, double g, double eps, double period, int l) {
  require(n >= 0, "pair count must be non-negative");
  GpField f = GpField::uniform(l, g);
  if (n == 0 || eps == 0.0 || k == 0.0) return f;
  const auto d1 = bogoliubov_data(1, g), d2 = bogoliubov_data(2, g);
  const double w1 = 0.5 * d1.energy * period, w2 = 0.5 * d2.energy * period;
  if (std::abs(std::sin(w1)) < 1e-8 || std::abs(std::sin(w2)) < 1e-8)
    throw NumericalError("analytic wave function sits on a linear resonance");
  const cplx c1 = -eps * k / (2.0 * std::sin(w1)) * std::sin(w1 * n) *
                  cplx(std::cos(w1 * (n - 1)), -std::sin(w1 * (n - 1)) / (d1.zeta * d1.zeta));
  const cplx c2 = eps * k * k / (4.0 * std::sin(w2)) * std::sin(w2 * n) *
                  cplx(d2.zeta * d2.zeta * std::sin(w2 * (n - 1)), std::cos(w2 * (n - 1)));
  const double pre = 1.0 / std::sqrt(2.0 * M_PI);
  for (int m = 0; m < l; ++m) {
    const double th = 2.0 * M_PI * m / l;
    f.psi[m] = pre * (1.0 + c1 * std::cos(th) + c2 * std::cos(2.0 * th));
  }
  return f;
}

double gp_energy(const GpField& f, double g) {
  std::vector<cplx> a = f.psi;
  fft_ring_inplace(a.data(), a.size());
  const int l = static_cast<int>(a.size());
  double kin = 0.0, inter = 0.0;
  for (int m = 0; m < l; ++m) {
    const double q = wavenumber(m, l);
    kin += 0.5 * q * q * std::norm(a[m]);
    const double n2 = std::norm(f.psi[m]);
    inter += 0.5 * g * n2 * n2;
  }
  return (kin + inter) * f.dtheta();
}

double BdgMode::norm_u(double dth) const { return kernels::norm2(u.data(), u.size()) * dth; }
double BdgMode::norm_v(double dth) const { return kernels::norm2(v.data(), v.size()) * dth; }

std::vector<BdgMode> initial_modes(const std::vector<int>& js, int l, double g) {
  require(power_of_two(l), "grid size must be a power of two");
  std::vector<BdgMode> out;
  const double pre = 1.0 / std::sqrt(2.0 * M_PI);
  for (int j : js) {
    const auto d = bogoliubov_data(j, g);
    BdgMode md;
    md.j = j;
    md.u.resize(l);
    md.v.resize(l);
    for (int m = 0; m < l; ++m) {
      const cplx e = std::polar(pre, j * 2.0 * M_PI * m / l);
      md.u[m] = d.u * e;
      md.v[m] = d.v * e;
    }
    out.push_back(std::move(md));
  }
  return out;
}

double nnp(const std::vector<BdgMode>& modes, const GpField& f) {
  const double dth = f.dtheta();
  double acc = 0.0;
  for (const auto& md : modes) {
    require(md.v.size() == f.psi.size(), "mode and field grids differ");
    const cplx proj = kernels::cdotc(f.psi.data(), md.v.data(), f.psi.size()) * dth;
    acc += md.norm_v(dth) - std::norm(proj);
  }
  return acc;
}

double alpha_rate(const BdgMode& md, const GpField& f) {
  const double dth = f.dtheta();
  const double nu = std::sqrt(md.norm_u(dth)), nv = std::sqrt(md.norm_v(dth));
  if (!(nv > 0.0) || !(nu > 0.0)) throw NumericalError("rate undefined for a zero-norm mode component");
  double acc = 0.0;
  for (std::size_t m = 0; m < f.psi.size(); ++m) acc += (f.psi[m] * f.psi[m] * std::conj(md.u[m]) * md.v[m]).imag();
  return f.g * acc * dth / (nu * nv);
}

BdgRun bdg_evolve(GpField f, std::vector<BdgMode> modes, const KickSchedule& ks, const BdgOptions& opts) {
  ks.validate();
  for (const auto& md : modes)
    require(md.u.size() == f.psi.size() && md.v.size() == f.psi.size(), "mode and field grids differ");
  const double dth = f.dtheta();
  std::vector<double> g0;
  for (const auto& md : modes) g0.push_back(md.global_norm(dth));
  BdgRun run;
  auto snap = [&]() {
    run.nnp.push_back(nnp(modes, f));
    run.energy.push_back(gp_energy(f, f.g));
    std::vector<double> al;
    for (std::size_t r = 0; r < modes.size(); ++r) {
      check_field(modes[r].u, "mode U");
      check_field(modes[r].v, "mode V");
      al.push_back(std::asinh(std::sqrt(modes[r].norm_v(dth))));
      run.max_global_norm_drift = std::max(run.max_global_norm_drift, std::abs(modes[r].global_norm(dth) - g0[r]));
    }
    run.alpha.push_back(std::move(al));
  };
  snap();
  run_pairs(f, &modes, ks, opts.dt_max, opts.model, [&](int) { snap(); });
  run.final_field = std::move(f);
  run.final_modes = std::move(modes);
  return run;
}

LogFit fit_exponential(const std::vector<double>& y, std::size_t from) {
  LogFit fit;
  if (y.size() < from + 3) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  const double n = static_cast<double>(y.size() - from);
  for (std::size_t i = from; i < y.size(); ++i) {
    if (!(y[i] > 0.0) || !std::isfinite(y[i])) return fit;
    const double x = static_cast<double>(i), ly = std::log(y[i]);
    sx += x;
    sy += ly;
    sxx += x * x;
    sxy += x * ly;
    syy += ly * ly;
  }
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
  if (!(vx > 0.0)) return fit;
  fit.slope = cxy / vx;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.r2 = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
  fit.ok = true;
  return fit;
}

ScanPoint classify_nnp(double g, const std::vector<double>& series) {
  ScanPoint p;
  p.g = g;
  p.nnp = series;
  const std::size_t from = series.size() / 3;
  const LogFit f = fit_exponential(series, from);
  p.fit_ok = f.ok;
  p.slope = f.slope;
  p.intercept = f.intercept;
  p.r2 = f.r2;
  if (!f.ok)
    p.tag = "fit-failed";
  else
    p.tag = (f.r2 >= 0.9 && series.back() > 2.0 * series[from]) ? "unstable" : "stable";
  return p;
}

std::vector<ScanPoint> stability_scan(const std::vector<double>& grid, const KickSchedule& ks, const ScanOptions& opts) {
  ks.validate();
  std::vector<ScanPoint> pts(grid.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&]() {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        const double g = grid[i];
        BdgOptions bo;
        bo.dt_max = opts.dt_max;
        bo.model = opts.model;
        const BdgRun run = bdg_evolve(GpField::uniform(opts.grid_size, g), initial_modes(opts.modes, opts.grid_size, g), ks, bo);
        ScanPoint p = classify_nnp(g, run.nnp);
        pts[i] = std::move(p);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  const int nt = std::max(1, std::min<int>(opts.threads, static_cast<int>(grid.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  return pts;
}

std::string scan_json(const std::vector<ScanPoint>& pts) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : pts)
    j.push_back({{"g", p.g}, {"slope", p.slope}, {"intercept", p.intercept}, {"r2", p.r2}, {"fit_ok", p.fit_ok}, {"tag", p.tag}});
  return j.dump(2);
}

std::vector<double> resonance_couplings(int j, double period, double lo, double hi) {
  require(j != 0 && period > 0.0, "bad resonance query");
  const double e = 0.5 * j * j;
  std::vector<double> out;
  for (int n = 1;; ++n) {
    const double w = 2.0 * M_PI * n / period;
    const double g = M_PI * (w * w / e - e);
    if (g > hi) break;
    if (g >= lo) out.push_back(g);
  }
  return out;
}

std::string snapshot_csv(const GpTrajectory& tr) {
  std::ostringstream os;
  os.precision(17);
  os << "pair,theta,re,im\n";
  for (std::size_t p = 0; p < tr.snapshots.size(); ++p) {
    const auto& f = tr.snapshots[p];
    for (int m = 0; m < f.grid_size; ++m)
      os << p + 1 << ',' << f.dtheta() * m << ',' << f.psi[m].real() << ',' << f.psi[m].imag() << '\n';
  }
  return os.str();
}

std::string series_csv(const BdgRun& run, double period) {
  std::ostringstream os;
  os.precision(17);
  os << "pair,time,energy,nnp\n";
  for (std::size_t p = 0; p < run.nnp.size(); ++p)
    os << p << ',' << period * static_cast<double>(p) << ',' << run.energy[p] << ',' << run.nnp[p] << '\n';
  return os.str();
}

}  // namespace bchain
