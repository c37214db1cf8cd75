#include "halfext/extremals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "halfext/errors.hpp"
#include "halfext/extension.hpp"
#include "halfext/parallel.hpp"
#include "halfext/quadrature.hpp"

namespace halfext {

std::string to_string(ExtremalKind k) { return k == ExtremalKind::conformal ? "conformal" : "dual"; }

double extremal_exponent(Dim n, ExtremalKind kind) {
  return kind == ExtremalKind::conformal ? 0.5 * (n.value() - 2) : 0.5 * n.value();
}

double extremal_p(Dim n, ExtremalKind kind) {
  const double nn = n.value();
  if (kind == ExtremalKind::conformal) {
    if (n.value() < 3) throw DomainError("extremal_p: conformal case needs n >= 3");
    return 2.0 * (nn - 1.0) / (nn - 2.0);
  }
  return 2.0 * (nn - 1.0) / nn;
}

namespace {
void check_spec(const ExtremalSpec& spec) {
  if (!(spec.lambda > 0.0)) throw DomainError("ExtremalSpec: lambda must be > 0");
  if (!(spec.amplitude > 0.0)) throw DomainError("ExtremalSpec: amplitude must be > 0");
}
}  // namespace

double extremal_value(const ExtremalSpec& spec, const BoundaryPoint& xi) {
  check_spec(spec);
  double d2 = 0.0;
  for (std::size_t i = 0; i < xi.xi.size(); ++i) {
    const double c = i < spec.center.xi.size() ? spec.center.xi[i] : 0.0;
    d2 += (xi.xi[i] - c) * (xi.xi[i] - c);
  }
  const double l = spec.lambda;
  return spec.amplitude * std::pow(l / (l * l + d2), extremal_exponent(spec.n, spec.kind));
}

RadialFn extremal_profile(const ExtremalSpec& spec, const RadialGrid& grid) {
  check_spec(spec);
  for (double c : spec.center.xi)
    if (c != 0.0) throw DomainError("extremal_profile: nonzero center has no radial profile");
  const double e = extremal_exponent(spec.n, spec.kind);
  const double l = spec.lambda;
  RadialFn f = RadialFn::sample(grid, [&](double r) { return spec.amplitude * std::pow(l / (l * l + r * r), e); });
  f.set_tail_exponent(2.0 * e);
  f.set_value_at_zero(spec.amplitude * std::pow(1.0 / l, e));
  return f;
}

double sharp_constant(Dim n, ExtremalKind which) {
  const int nn = n.value();
  if (nn < 3) throw DomainError("sharp_constant: closed forms need n >= 3");
  const double x = nn;
  if (which == ExtremalKind::conformal) {
    const double omega = unit_ball_volume(nn);
    return std::pow(x, -(x - 2.0) / (2.0 * (x - 1.0))) * std::pow(omega, -(x - 2.0) / (2.0 * x * (x - 1.0)));
  }
  const double ratio = std::tgamma(x - 1.0) / std::tgamma(0.5 * (x - 1.0));  // (n-2)! / Gamma((n-1)/2)
  return 1.0 / (std::sqrt(2.0 * (x - 2.0)) * std::pow(std::numbers::pi, 0.25)) *
         std::pow(ratio, 1.0 / (2.0 * (x - 1.0)));
}

double target_exponent(Dim n, double p) { return n.value() * p / (n.value() - 1.0); }

namespace {

void check_boundary_fn(const RadialFn& f, Dim n, const char* who) {
  if (f.grid().dim() != n.boundary())
    throw DomainError(std::string(who) + ": grid dimension must be n-1");
}

void check_p(double p, const char* who) {
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError(std::string(who) + ": need 1 < p < inf");
}

}  // namespace

double rayleigh_quotient(const RadialFn& f, Dim n, double p, int height_count) {
  check_boundary_fn(f, n, "rayleigh_quotient");
  if (!(p >= 1.0)) throw DomainError("rayleigh_quotient: p must be >= 1");
  const double fp = lp_norm_boundary(f, p);
  if (fp == 0.0) throw DomainError("rayleigh_quotient: zero input");
  const HalfspaceGrid hg = halfspace_grid_for(n.value(), f.grid(), height_count);
  const AxisymFn u = shared_extension_operator(hg)->extend(f);
  return lp_norm_halfspace(u, target_exponent(n, p)) / fp;
}

ElSides el_sides(const RadialFn& f, Dim n, double p, int height_count) {
  check_boundary_fn(f, n, "el_sides");
  check_p(p, "el_sides");
  if (!f.nonnegative()) throw DomainError("el_sides: f must be nonnegative");
  const double q = target_exponent(n, p);
  const HalfspaceGrid hg = halfspace_grid_for(n.value(), f.grid(), height_count);
  auto op = shared_extension_operator(hg);
  AxisymFn u = op->extend(f);
  for (double& v : u.values()) v = std::pow(std::max(v, 0.0), q - 1.0);
  RadialFn rhs = op->dual(u);
  std::vector<double> lhs(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) lhs[i] = std::pow(f[i], p - 1.0);
  for (double v : rhs.values())
    if (!std::isfinite(v)) throw DivergenceError("el_sides: non-finite dual extension");
  return {RadialFn(f.grid(), std::move(lhs)), std::move(rhs)};
}

namespace {

double scaled_residual(const std::vector<double>& F, const std::vector<double>& G, double b, double fmax) {
  double m = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i) m = std::max(m, std::abs(F[i] - b * G[i]));
  return m / fmax;
}

}  // namespace

double el_residual(const RadialFn& f, Dim n, double p, int height_count) {
  const ElSides sides = el_sides(f, n, p, height_count);
  const auto& F = sides.lhs.values();
  const double fmax = *std::max_element(F.begin(), F.end());
  if (!(fmax > 0.0)) throw DomainError("el_residual: zero input");
  return scaled_residual(F, sides.rhs.values(), 1.0, fmax);
}

ElNormalization normalize_el(const RadialFn& f, Dim n, double p, int height_count) {
  const ElSides sides = el_sides(f, n, p, height_count);
  const auto& F = sides.lhs.values();
  const auto& G = sides.rhs.values();
  const double fmax = *std::max_element(F.begin(), F.end());
  if (!(fmax > 0.0)) throw DomainError("normalize_el: zero input");
  double hi = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i)
    if (G[i] > 0.0) hi = std::max(hi, 2.0 * F[i] / G[i]);
  if (!(hi > 0.0)) throw NumericalError("normalize_el: dual side vanishes");
  // residual(b) is convex and piecewise linear in b
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (scaled_residual(F, G, m1, fmax) < scaled_residual(F, G, m2, fmax)) hi = m2;
    else lo = m1;
  }
  const double b = 0.5 * (lo + hi);
  const double q = target_exponent(n, p);
  ElNormalization out;
  out.amplitude = std::pow(b, 1.0 / (q - p));
  out.residual = scaled_residual(F, G, b, fmax);
  out.shape_ok = out.residual <= 1e-2;
  return out;
}

double singular_constant(Dim n, double p, double r) {
  check_p(p, "singular_constant");
  if (!(r > 0.0)) throw DomainError("singular_constant: r must be > 0");
  const int nn = n.value();
  const double k = (nn - 1.0) / p;
  const double q = target_exponent(n, p);

  // h(rho) = P(s^{-k})(rho, 1); P(s^{-k})(x', t) = t^{-k} h(|x'|/t).
  const RadialGrid hgrid = build_radial_grid(1, 256, Mapping::exp, 1.0);
  std::vector<double> hv(hgrid.size());
  parallel_for(hgrid.size(), [&](std::size_t i) {
    hv[i] = radial_convolve(n, KernelKind::poisson, [&](double s) { return std::pow(s, -k); }, hgrid.nodes()[i],
                            1.0, 48, std::max(1.0, hgrid.nodes()[i]), -k);
  });
  RadialFn h(hgrid, hv);
  h.set_tail_exponent(k);
  for (double v : hv)
    if (!std::isfinite(v) || !(v > 0.0)) throw NumericalError("singular_constant: extension of the power law failed");

  // Outer integral over t = r tan(psi), graded at both ends of [0, pi/2].
  const double gamma = k * (q - 1.0) - 2.0;
  const double m_far = 1.0 / (gamma + 1.0);
  const int order = 64;
  const QuadratureRule& ref = gauss_legendre(order);
  std::vector<double> ts, ws;
  const double quarter = 0.25 * std::numbers::pi;
  for (int j = 0; j < order; ++j) {
    const double w = 0.5 * (ref.nodes[j] + 1.0);
    const double psi = quarter * w * w;
    const double dpsi = quarter * 2.0 * w * 0.5;
    const double c = std::cos(psi);
    ts.push_back(r * std::tan(psi));
    ws.push_back(ref.weights[j] * dpsi * r / (c * c));
  }
  for (int j = 0; j < order; ++j) {
    const double w = 0.5 * (ref.nodes[j] + 1.0);
    const double eps = quarter * std::pow(w, m_far);
    const double deps = quarter * m_far * std::pow(w, m_far - 1.0) * 0.5;
    const double sn = std::sin(eps);
    ts.push_back(r / std::tan(eps));
    ws.push_back(ref.weights[j] * deps * r / (sn * sn));
  }
  std::vector<double> inner(ts.size());
  parallel_for(ts.size(), [&](std::size_t m) {
    const double t = ts[m];
    const double scale_t = std::pow(t, -k * (q - 1.0));
    inner[m] = radial_convolve(
        n, KernelKind::poisson,
        [&](double rho) { return scale_t * std::pow(std::max(h(rho / t), 0.0), q - 1.0); }, r, t, 48, t);
  });
  double R = 0.0;
  for (std::size_t m = 0; m < ts.size(); ++m) R += ws[m] * inner[m];
  if (!std::isfinite(R) || !(R > 0.0)) throw NumericalError("singular_constant: dual integral failed");
  const double lhs = std::pow(r, -k * (p - 1.0));
  return std::pow(lhs / R, 1.0 / (q - p));
}

}  // namespace halfext
