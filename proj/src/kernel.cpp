#include "halfext/kernel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "halfext/errors.hpp"
#include "halfext/quadrature.hpp"

namespace halfext {

Dim::Dim(int n) : n_(n) {
  if (n < 2) throw DomainError("Dim: half-space dimension must be >= 2, got " + std::to_string(n));
}

double unit_ball_volume(int n) {
  if (n < 1) throw DomainError("unit_ball_volume: n must be >= 1");
  return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double sphere_area(int d) {
  if (d < 1) throw DomainError("sphere_area: d must be >= 1");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

double poisson_constant(int n) { return 2.0 / (n * unit_ball_volume(n)); }

double pt_profile(Dim n, double t, double rho) {
  if (!(t > 0.0)) throw DomainError("pt_profile: t must be > 0");
  if (rho < 0.0) throw DomainError("pt_profile: rho must be >= 0");
  return poisson_constant(n.value()) * t / std::pow(rho * rho + t * t, 0.5 * n.value());
}

double qt_profile(Dim n, double t, double rho) {
  return pt_profile(n, t, rho) * rho / t;
}

double poisson_kernel(Dim n, const HalfspacePoint& x, const BoundaryPoint& xi) {
  const std::size_t d = static_cast<std::size_t>(n.boundary());
  if (x.x_prime.size() != d || xi.xi.size() != d)
    throw DomainError("poisson_kernel: point dimensions do not match n-1");
  if (!(x.x_n > 0.0)) throw DomainError("poisson_kernel: x_n must be > 0");
  double rho2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = x.x_prime[i] - xi.xi[i];
    rho2 += diff * diff;
  }
  return pt_profile(n, x.x_n, std::sqrt(rho2));
}

namespace {

// Integral over R^{n-1} of |K(rho)|^p with rho = t tan(theta).
template <class Profile>
double radial_lp(Dim n, double p, double t, int order, Profile profile) {
  const int d = n.boundary();
  const QuadratureRule rule = gauss_legendre(order, 0.0, 0.5 * std::numbers::pi);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double th = rule.nodes[i];
    const double c = std::cos(th);
    const double rho = t * std::tan(th);
    const double jac = t / (c * c);
    sum += rule.weights[i] * std::pow(std::abs(profile(rho)), p) * std::pow(rho, d - 1) * jac;
  }
  return std::pow(sphere_area(d) * sum, 1.0 / p);
}

}  // namespace

double pt_lp_norm(Dim n, double p, double t, int order) {
  if (!(t > 0.0)) throw DomainError("pt_lp_norm: t must be > 0");
  const double nn = n.value();
  if (!(p > (nn - 1.0) / nn)) throw DivergenceError("pt_lp_norm: requires p > (n-1)/n");
  if (std::isinf(p)) return pt_profile(n, t, 0.0);
  return radial_lp(n, p, t, order, [&](double rho) { return pt_profile(n, t, rho); });
}

double qt_lp_norm(Dim n, double p, double t, int order) {
  if (!(t > 0.0)) throw DomainError("qt_lp_norm: t must be > 0");
  if (!(p > 1.0)) throw DivergenceError("qt_lp_norm: requires p > 1");
  if (std::isinf(p)) {
    // max of rho/(rho^2+t^2)^{n/2} at rho = t/sqrt(n-1)
    const double rho = t / std::sqrt(n.value() - 1.0);
    return qt_profile(n, t, rho);
  }
  return radial_lp(n, p, t, order, [&](double rho) { return qt_profile(n, t, rho); });
}

}  // namespace halfext
