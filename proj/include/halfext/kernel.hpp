#pragma once

#include <limits>
#include <vector>

namespace halfext {

/// Dimension n of the half-space R^n_+ (boundary R^{n-1}).
class Dim {
 public:
  explicit Dim(int n);
  int value() const { return n_; }
  int boundary() const { return n_ - 1; }

 private:
  int n_;
};

/// Point on the boundary R^{n-1}.
struct BoundaryPoint {
  std::vector<double> xi;
};

/// Point x = (x', x_n) of the open upper half-space.
struct HalfspacePoint {
  std::vector<double> x_prime;
  double x_n = 1.0;
};

/// Volume of the unit ball in R^n, pi^{n/2} / Gamma(n/2 + 1). Requires n >= 1.
double unit_ball_volume(int n);

/// Surface measure of the unit sphere S^{d-1} in R^d. S^0 has measure 2.
double sphere_area(int d);

/// Normalising constant 2 / (n omega_n) of the half-space Poisson kernel.
double poisson_constant(int n);

double poisson_kernel(Dim n, const HalfspacePoint& x, const BoundaryPoint& xi);

/// P_t at radius rho: 2/(n omega_n) * t / (rho^2 + t^2)^{n/2}.
double pt_profile(Dim n, double t, double rho);

/// Q_t = P_t * rho / t.
double qt_profile(Dim n, double t, double rho);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// L^p norm of P_t over R^{n-1}. Finite p uses the substitution
/// rho = t tan(theta) with Gauss-Legendre of the given order; p = infinity
/// returns the peak value. Throws DivergenceError for p <= (n-1)/n.
double pt_lp_norm(Dim n, double p, double t, int order = 128);

/// Same for Q_t (finite only for p > 1 up to infinity).
double qt_lp_norm(Dim n, double p, double t, int order = 128);

}  // namespace halfext
