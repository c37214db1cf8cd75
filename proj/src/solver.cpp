#include "halfext/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

#include "halfext/errors.hpp"
#include "halfext/extension.hpp"
#include "halfext/parallel.hpp"
#include "halfext/quadrature.hpp"

namespace halfext {

std::string to_string(Normalization n) { return n == Normalization::unit_lp ? "unit_lp" : "mass_half"; }

Normalization normalization_from_string(const std::string& s) {
  if (s == "unit_lp") return Normalization::unit_lp;
  if (s == "mass_half") return Normalization::mass_half;
  throw DomainError("unknown normalization: " + s);
}

void SolverConfig::validate() const {
  if (max_iters < 1) throw DomainError("SolverConfig: max_iters must be >= 1");
  if (!(tol_residual > 0.0)) throw DomainError("SolverConfig: tol_residual must be > 0");
  if (!(damping > 0.0 && damping <= 1.0)) throw DomainError("SolverConfig: damping must lie in (0, 1]");
  if (height_count < 16) throw DomainError("SolverConfig: height_count must be >= 16");
}

void IterationTrace::write_csv(std::ostream& os) const {
  os << "iter,residual,rayleigh,lambda\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", r.iter, r.residual, r.rayleigh, r.lambda);
    os << buf;
  }
}

std::string to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::converged: return "converged";
    case SolverStatus::stalled: return "stalled";
    case SolverStatus::max_iters: return "max_iters";
    case SolverStatus::diverged: return "diverged";
  }
  return "?";
}

std::string to_string(InitKind k) {
  switch (k) {
    case InitKind::gaussian: return "gaussian";
    case InitKind::bump: return "bump";
    case InitKind::wrong_family: return "wrong-family";
  }
  return "?";
}

InitKind init_from_string(const std::string& s) {
  if (s == "gaussian") return InitKind::gaussian;
  if (s == "bump") return InitKind::bump;
  if (s == "wrong-family" || s == "wrong_family") return InitKind::wrong_family;
  throw DomainError("unknown init: " + s);
}

std::string to_string(InvertedClass c) {
  switch (c) {
    case InvertedClass::quadratic_power: return "quadratic_power";
    case InvertedClass::pure_power: return "pure_power";
    case InvertedClass::none: return "none";
  }
  return "?";
}

namespace {

void check_solver_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("solver: need 1 < p < inf");
}

// Cumulative L^p mass of f at each node, with the mass beyond the last node.
struct MassProfile {
  std::vector<double> cumulative;
  double total = 0.0;
};

double panel_mass(const RadialFn& f, double p, double a, double b) {
  if (!(b > a)) return 0.0;
  const int d = f.grid().dim();
  const QuadratureRule& ref = gauss_legendre(8);
  double s = 0.0;
  for (int k = 0; k < 8; ++k) {
    const double r = 0.5 * (a + b) + 0.5 * (b - a) * ref.nodes[k];
    s += ref.weights[k] * std::pow(std::abs(f(r)), p) * std::pow(r, d - 1);
  }
  return 0.5 * (b - a) * s * f.grid().sphere();
}

double tail_mass(const RadialFn& f, double p, double from, double to) {
  const RadialGrid& g = f.grid();
  const int d = g.dim();
  if (!g.power_tail()) return panel_mass(f, p, from, std::min(to, g.r_max()));
  const double k = f.tail_exponent();
  if (std::isinf(k)) return 0.0;
  const double e = d - k * p;
  if (!(e < 0.0) && std::isinf(to)) throw DivergenceError("mass: power tail is not L^p integrable");
  const double rn = g.nodes().back();
  const double c = g.sphere() * std::pow(std::abs(f.values().back()), p) * std::pow(rn, k * p);
  if (std::isinf(to)) return c * std::pow(from, e) / -e;
  if (std::abs(e) < 1e-12) return c * std::log(to / from);
  return c * (std::pow(to, e) - std::pow(from, e)) / e;
}

MassProfile mass_profile(const RadialFn& f, double p) {
  MassProfile m;
  const auto& r = f.grid().nodes();
  m.cumulative.resize(r.size());
  double acc = panel_mass(f, p, 0.0, r[0]);
  m.cumulative[0] = acc;
  for (std::size_t i = 1; i < r.size(); ++i) {
    acc += panel_mass(f, p, r[i - 1], r[i]);
    m.cumulative[i] = acc;
  }
  m.total = acc + tail_mass(f, p, r.back(), std::numeric_limits<double>::infinity());
  return m;
}

double mass_within(const RadialFn& f, const MassProfile& m, double p, double R) {
  const auto& r = f.grid().nodes();
  if (R <= 0.0) return 0.0;
  if (R >= r.back()) return m.cumulative.back() + tail_mass(f, p, r.back(), R);
  const std::size_t j = static_cast<std::size_t>(std::upper_bound(r.begin(), r.end(), R) - r.begin());
  if (j == 0) return panel_mass(f, p, 0.0, R);
  return m.cumulative[j - 1] + panel_mass(f, p, r[j - 1], R);
}

double half_mass_radius(const RadialFn& f, double p) {
  const MassProfile m = mass_profile(f, p);
  if (!(m.total > 0.0) || !std::isfinite(m.total)) throw NumericalError("half_mass_radius: degenerate mass");
  double lo = f.grid().nodes().front() * 1e-3, hi = f.grid().nodes().back();
  while (mass_within(f, m, p, lo) > 0.5 * m.total) {
    lo *= 0.5;
    if (lo < 1e-300) throw NumericalError("half_mass_radius: mass concentrated at the origin");
  }
  int grow = 0;
  while (mass_within(f, m, p, hi) < 0.5 * m.total) {
    hi *= 2.0;
    if (++grow > 200) throw NumericalError("half_mass_radius: mass function is flat");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass_within(f, m, p, mid) < 0.5 * m.total ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

RadialFn scaled(const RadialFn& f, double c) {
  std::vector<double> v = f.values();
  for (double& x : v) x *= c;
  RadialFn out(f.grid(), std::move(v));
  return out;
}

RadialFn unit_lp(const RadialFn& f, double p) {
  const double norm = std::pow(mass_profile(f, p).total, 1.0 / p);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericalError("normalize: zero or non-finite norm");
  return scaled(f, 1.0 / norm);
}

// min over b of max_i |F_i - b G_i| / max F
double scaled_residual(const std::vector<double>& F, const std::vector<double>& G) {
  const double fmax = *std::max_element(F.begin(), F.end());
  double hi = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i)
    if (G[i] > 0.0) hi = std::max(hi, 2.0 * F[i] / G[i]);
  if (!(fmax > 0.0) || !(hi > 0.0)) return std::numeric_limits<double>::infinity();
  auto res = [&](double b) {
    double m = 0.0;
    for (std::size_t i = 0; i < F.size(); ++i) m = std::max(m, std::abs(F[i] - b * G[i]));
    return m / fmax;
  };
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (res(m1) < res(m2)) hi = m2;
    else lo = m1;
  }
  return res(0.5 * (lo + hi));
}

RadialFn gauge(const RadialFn& f, double p, Normalization mode) {
  if (mode == Normalization::mass_half) return normalize_mass_half(f, p).normalized;
  return unit_lp(f, p);
}

}  // namespace

double mass_fraction(const RadialFn& f, double p, double R) {
  if (!(p >= 1.0)) throw DomainError("mass_fraction: p must be >= 1");
  const MassProfile m = mass_profile(f, p);
  if (!(m.total > 0.0)) throw DomainError("mass_fraction: zero input");
  return mass_within(f, m, p, R) / m.total;
}

RadialFn dilate(const RadialFn& f, double lambda, double p) {
  if (!(lambda > 0.0)) throw DomainError("dilate: lambda must be > 0");
  const double d = f.grid().dim();
  const double amp = std::pow(lambda, -d / p);
  std::vector<double> v(f.size());
  const auto& r = f.grid().nodes();
  // interpolation can ring slightly below zero where f underflows
  const bool clamp = f.nonnegative();
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = amp * f(r[i] / lambda);
    if (clamp && v[i] < 0.0) v[i] = 0.0;
  }
  return RadialFn(f.grid(), std::move(v));
}

MassHalf normalize_mass_half(const RadialFn& f, double p) {
  check_solver_p(p);
  const RadialFn unit = unit_lp(f, p);
  const double R = half_mass_radius(unit, p);
  MassHalf out;
  out.lambda = 1.0 / R;
  out.normalized = unit_lp(dilate(unit, out.lambda, p), p);
  return out;
}

RadialFn el_map(const RadialFn& f, Dim n, double p, int height_count) {
  check_solver_p(p);
  const ElSides sides = el_sides(f, n, p, height_count);
  std::vector<double> g = sides.rhs.values();
  for (double& v : g) v = std::pow(std::max(v, 0.0), 1.0 / (p - 1.0));
  return RadialFn(f.grid(), std::move(g));
}

SolverResult el_fixed_point(Dim n, double p, const RadialFn& init, const SolverConfig& cfg) {
  cfg.validate();
  check_solver_p(p);
  if (init.grid().dim() != n.boundary()) throw DomainError("el_fixed_point: grid dimension must be n-1");
  if (!init.nonnegative()) throw DomainError("el_fixed_point: init must be nonnegative");
  if (*std::max_element(init.values().begin(), init.values().end()) <= 0.0)
    throw DomainError("el_fixed_point: init must not vanish");

  const double q = target_exponent(n, p);
  const HalfspaceGrid hg = halfspace_grid_for(n.value(), init.grid(), cfg.height_count);
  const auto op = shared_extension_operator(hg);

  SolverResult res;
  try {
    res.f = gauge(init, p, cfg.normalization);
  } catch (const std::runtime_error& e) {
    res.f = init;
    res.status = SolverStatus::diverged;
    res.residual = std::numeric_limits<double>::infinity();
    res.message = std::string("initial gauge failed: ") + e.what();
    return res;
  }
  double best = std::numeric_limits<double>::infinity(), best_before = best;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    AxisymFn u = op->extend(res.f);
    const double rq = lp_norm_halfspace(u, q);
    for (double& v : u.values()) v = std::pow(std::max(v, 0.0), q - 1.0);
    const RadialFn G = op->dual(u);
    std::vector<double> F(res.f.size());
    for (std::size_t i = 0; i < F.size(); ++i) F[i] = std::pow(res.f[i], p - 1.0);
    const double residual = scaled_residual(F, G.values());

    IterationRecord rec{it, residual, rq, std::numeric_limits<double>::quiet_NaN()};
    bool finite = std::isfinite(residual) && std::isfinite(rq);
    std::vector<double> g(G.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] = std::pow(std::max(G[i], 0.0), 1.0 / (p - 1.0));
      finite = finite && std::isfinite(g[i]);
    }
    RadialFn gf;
    if (finite) {
      try {
        gf = unit_lp(RadialFn(res.f.grid(), std::move(g)), p);
        rec.lambda = half_mass_radius(gf, p);
      } catch (const std::runtime_error&) {
        finite = false;
      }
    }
    res.trace.rows.push_back(rec);
    res.residual = residual;
    if (!finite) {
      res.status = SolverStatus::diverged;
      res.message = "non-finite iterate at iteration " + std::to_string(it);
      return res;
    }
    if (residual <= cfg.tol_residual) {
      res.status = SolverStatus::converged;
      return res;
    }
    if (it > 50 && residual > 10.0 * res.trace.rows[it - 51].residual) {
      res.status = SolverStatus::diverged;
      res.message = "residual grew tenfold over 50 iterations";
      return res;
    }
    best = std::min(best, residual);
    if (it > 200) {
      best_before = std::min(best_before, res.trace.rows[it - 201].residual);
      if (best >= 0.999 * best_before) {
        res.status = SolverStatus::stalled;
        res.message = "no progress over 200 iterations";
        return res;
      }
    }
    if (it == cfg.max_iters) break;
    std::vector<double> mix(res.f.size());
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = (1.0 - cfg.damping) * res.f[i] + cfg.damping * gf[i];
    try {
      res.f = gauge(RadialFn(res.f.grid(), std::move(mix)), p, cfg.normalization);
    } catch (const std::runtime_error& e) {
      res.status = SolverStatus::diverged;
      res.message = e.what();
      return res;
    }
  }
  res.status = SolverStatus::max_iters;
  res.message = "iteration budget exhausted";
  return res;
}

RadialFn initial_profile(InitKind kind, Dim n, double p, const RadialGrid& grid, std::uint64_t seed) {
  std::function<double(double)> base;
  switch (kind) {
    case InitKind::gaussian: base = [](double r) { return std::exp(-r * r); }; break;
    case InitKind::bump:
      base = [](double r) { return r < 1.0 ? (1.0 - r * r) * (1.0 - r * r) : 0.0; };
      break;
    case InitKind::wrong_family: {
      // profile of the family that is not extremal at p, with its exponent
      // raised where needed so that it lies in L^p
      const double pc = extremal_p(n, ExtremalKind::conformal);
      const ExtremalKind other = std::abs(p - pc) < 1e-12 ? ExtremalKind::dual : ExtremalKind::conformal;
      const double e = std::max(extremal_exponent(n, other), grid.dim() / (2.0 * p) + 0.5);
      base = [e](double r) { return std::pow(1.0 / (1.0 + r * r), e); };
      break;
    }
  }
  if (seed == 0) return RadialFn::sample(grid, base);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-0.3, 0.3), phase(0.0, 2.0 * std::numbers::pi);
  const double a1 = amp(rng), a2 = amp(rng), ph = phase(rng);
  return RadialFn::sample(grid, [&](double r) {
    return base(r) * (1.0 + a1 * std::cos(r + ph) / (1.0 + r) + a2 * r / (1.0 + r * r));
  });
}

FamilyMatch family_match(const RadialFn& f, ExtremalKind kind, double r_max) {
  const int d = f.grid().dim();
  const double e = extremal_exponent(Dim(d + 1), kind);
  const auto& r = f.grid().nodes();
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (r[i] <= r_max) idx.push_back(i);
  if (idx.empty()) throw DomainError("family_match: no nodes below r_max");
  auto fit = [&](double log_lambda, double* amplitude) {
    const double lam = std::exp(log_lambda);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i : idx) {
      const double ratio = f[i] / std::pow(lam / (lam * lam + r[i] * r[i]), e);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    if (amplitude) *amplitude = 0.5 * (lo + hi);
    if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
    return (hi - lo) / (hi + lo);
  };
  double best = 0.0, best_err = std::numeric_limits<double>::infinity();
  for (int k = -70; k <= 70; ++k) {
    const double err = fit(0.1 * k, nullptr);
    if (err < best_err) best_err = err, best = 0.1 * k;
  }
  double a = best - 0.1, b = best + 0.1;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 120; ++it) {
    const double c = b - g * (b - a), dd = a + g * (b - a);
    if (fit(c, nullptr) < fit(dd, nullptr)) b = dd;
    else a = c;
  }
  FamilyMatch m;
  m.lambda = std::exp(0.5 * (a + b));
  m.error = fit(0.5 * (a + b), &m.amplitude);
  return m;
}

AscentResult ascent_estimate_constant(Dim n, double p, int trials, const SolverConfig& cfg, const RadialGrid& grid) {
  if (trials < 1) throw DomainError("ascent_estimate_constant: trials must be >= 1");
  cfg.validate();
  check_solver_p(p);
  // build the shared operator once before the trials race for it
  shared_extension_operator(halfspace_grid_for(n.value(), grid, cfg.height_count));
  std::vector<double> best(trials, -1.0);
  std::vector<char> diverged(trials, 0);
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t k) {
    std::mt19937_64 rng(cfg.seed * 1000003u + k + 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    // sum of three Gaussians with random weights and log-uniform widths
    double w[3], s[3];
    for (int j = 0; j < 3; ++j) {
      w[j] = 0.2 + 0.8 * u(rng);
      s[j] = std::exp(std::log(0.3) + u(rng) * std::log(10.0));
    }
    const RadialFn init = RadialFn::sample(grid, [&](double r) {
      double v = 0.0;
      for (int j = 0; j < 3; ++j) v += w[j] * std::exp(-r * r / (s[j] * s[j]));
      return v;
    });
    SolverConfig c = cfg;
    c.seed = cfg.seed + k;
    const SolverResult r = el_fixed_point(n, p, init, c);
    double m = -1.0;
    for (const auto& row : r.trace.rows)
      if (std::isfinite(row.rayleigh)) m = std::max(m, row.rayleigh);
    best[k] = m;
    diverged[k] = r.status == SolverStatus::diverged;
  });
  AscentResult out;
  out.per_trial = best;
  for (int k = 0; k < trials; ++k) {
    out.diverged += diverged[k];
    out.estimate = std::max(out.estimate, best[k]);
  }
  if (out.diverged == trials) throw NumericalError("ascent_estimate_constant: every trial diverged");
  return out;
}

namespace {

double radial_metric(const PolarSamples& v, double cx, double cy) {
  static const double radii[] = {0.3, 0.6, 1.0, 1.5};
  constexpr int kAngles = 64;
  double worst = 0.0;
  try {
    for (double rho : radii) {
      double sum = 0.0, sq = 0.0;
      for (int m = 0; m < kAngles; ++m) {
        const double th = 2.0 * std::numbers::pi * m / kAngles;
        const double x = v.evaluate(cx + rho * std::cos(th), cy + rho * std::sin(th));
        sum += x;
        sq += x * x;
      }
      const double mean = sum / kAngles;
      const double var = std::max(0.0, sq / kAngles - mean * mean);
      if (mean == 0.0) return std::numeric_limits<double>::infinity();
      worst = std::max(worst, std::sqrt(var) / std::abs(mean));
    }
  } catch (const std::exception&) {
    return std::numeric_limits<double>::infinity();
  }
  return worst;
}

template <class Fn>
double golden_min(Fn fn, double a, double b, int iters = 60) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < iters; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (fn(c) < fn(d)) b = d;
    else a = c;
  }
  return 0.5 * (a + b);
}

}  // namespace

RadialCenter best_radial_center(const PolarSamples& v, bool full_2d) {
  RadialCenter c;
  c.metric = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 80; ++k) {
    const double a = -2.0 + 0.05 * k;
    const double m = radial_metric(v, a, 0.0);
    if (m < c.metric) c.metric = m, c.x = a;
  }
  c.x = golden_min([&](double a) { return radial_metric(v, a, 0.0); }, c.x - 0.05, c.x + 0.05);
  c.metric = radial_metric(v, c.x, 0.0);
  if (!full_2d) return c;
  for (int k = 0; k <= 80; ++k) {
    const double b = -2.0 + 0.05 * k;
    const double m = radial_metric(v, c.x, b);
    if (m < c.metric) c.metric = m, c.y = b;
  }
  for (int round = 0; round < 4; ++round) {
    c.x = golden_min([&](double a) { return radial_metric(v, a, c.y); }, c.x - 0.05, c.x + 0.05);
    c.y = golden_min([&](double b) { return radial_metric(v, c.x, b); }, c.y - 0.05, c.y + 0.05);
  }
  c.metric = radial_metric(v, c.x, c.y);
  return c;
}

std::optional<RadialCenter> radial_about_point(const PolarSamples& v, double tol, bool full_2d) {
  const RadialCenter c = best_radial_center(v, full_2d);
  if (c.metric <= tol) return c;
  return std::nullopt;
}

Classification classify_inverted_radial(const RadialFn& u, double alpha, double r_fit) {
  if (alpha == 0.0) throw DomainError("classify_inverted_radial: alpha must be nonzero");
  const auto& r = u.grid().nodes();
  std::vector<double> rs, ws;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] > 0.0) || r[i] > r_fit) continue;
    if (!(u[i] > 0.0)) throw DomainError("classify_inverted_radial: u must be positive");
    rs.push_back(r[i]);
    ws.push_back(std::pow(u[i], 2.0 / alpha));
  }
  if (rs.size() < 3) throw DomainError("classify_inverted_radial: too few nodes in the fit range");
  // weighted least squares of w = c1 r^2 + c2 with weights 1/w
  double s11 = 0.0, s12 = 0.0, s22 = 0.0, b1 = 0.0, b2 = 0.0;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const double x1 = rs[i] * rs[i] / ws[i], x2 = 1.0 / ws[i];
    s11 += x1 * x1;
    s12 += x1 * x2;
    s22 += x2 * x2;
    b1 += x1;
    b2 += x2;
  }
  const double det = s11 * s22 - s12 * s12;
  Classification out;
  const double c1 = (b1 * s22 - b2 * s12) / det;
  const double c2 = (s11 * b2 - s12 * b1) / det;
  for (std::size_t i = 0; i < rs.size(); ++i)
    out.residual = std::max(out.residual, std::abs(c1 * rs[i] * rs[i] + c2 - ws[i]) / std::abs(ws[i]));
  const double rtop = rs.back();
  if (out.residual <= 1e-6 && c1 > 0.0) {
    if (std::abs(c2) < 1e-8 * c1 * rtop * rtop) {
      out.kind = InvertedClass::pure_power;
      out.c1 = std::pow(c1, alpha / 2.0);
      return out;
    }
    if (c2 > 0.0) {
      out.kind = InvertedClass::quadratic_power;
      out.c1 = c1;
      out.c2 = c2;
      return out;
    }
  }
  out.c1 = c1;
  out.c2 = c2;
  return out;
}

double ode_check_1d(const std::vector<double>& u, double h, double alpha) {
  if (alpha == 0.0) throw DomainError("ode_check_1d: alpha must be nonzero");
  if (u.size() < 7) throw DomainError("ode_check_1d: need at least 7 samples");
  if (!(h > 0.0)) throw DomainError("ode_check_1d: spacing must be > 0");
  std::vector<double> w(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] > 0.0)) throw DomainError("ode_check_1d: samples must be positive");
    w[i] = std::pow(u[i], 2.0 / alpha);
  }
  double m = 0.0;
  for (std::size_t i = 0; i + 3 < w.size(); ++i)
    m = std::max(m, std::abs(w[i + 3] - 3.0 * w[i + 2] + 3.0 * w[i + 1] - w[i]));
  return m / (h * h * h);
}

}  // namespace halfext
