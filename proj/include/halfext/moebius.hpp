#pragma once

#include <vector>

#include "halfext/grids.hpp"
#include "halfext/interpolation.hpp"
#include "halfext/kernel.hpp"

namespace halfext {

/// v(xi) = |xi|^alpha f(xi / |xi|^2 - shift).
struct InversionSpec {
  double alpha = -1.0;
  std::vector<double> shift;  // empty means no shift
};

/// Inversion for the critical boundary power: alpha = 2 - n.
InversionSpec critical_inversion(Dim n);

/// phi(x) = (x + e_n/2) / |x + e_n/2|^2 - e_n, mapping R^n_+ into the unit ball.
std::vector<double> ball_map(const HalfspacePoint& x);
/// Conformal factor |x + e_n/2|^{-2} of ball_map.
double ball_map_factor(const HalfspacePoint& x);

/// Samples on a polar mesh of R^2 (or of the plane spanned by e_1 and e_2 in
/// R^d): values[j * angles + m] at radius radial.nodes()[j] and angle
/// 2 pi m / angles.
struct PolarSamples {
  RadialGrid radial;
  int angles = 64;
  std::vector<double> values;

  double at(std::size_t j, std::size_t m) const { return values[j * angles + m]; }
  /// Radial Lagrange in the mapped coordinate (nodes mirrored through the
  /// origin pick up the opposite angle) combined with periodic Lagrange
  /// in angle. Throws outside the last radial node.
  double evaluate(double x, double y) const;
};

/// Radial inversion (shift must be empty or zero). Off-node values use
/// monotone cubic interpolation of log f against log r; on self-dual tan
/// grids (scale 1) inverted radii fall exactly on nodes.
RadialFn boundary_inversion(const RadialFn& f, const InversionSpec& spec, const RadialGrid& out_grid);

/// Shifted inversion sampled on a polar mesh. The shift direction is taken
/// as the angle-zero axis.
PolarSamples boundary_inversion_polar(const RadialFn& f, const InversionSpec& spec, const RadialGrid& radii,
                                      int angles = 64);

/// u~(x) = |x|^{2-n} u(x / |x|^2) sampled on out_grid.
AxisymFn halfspace_inversion(const AxisymFn& u, const HalfspaceGrid& out_grid);

/// Evaluates f at arbitrary radius by the monotone log-log cubic used for
/// inversions, with power-law continuation past the end nodes.
class LogRadialInterpolant {
 public:
  explicit LogRadialInterpolant(const RadialFn& f);
  double operator()(double r) const;

 private:
  RadialFn f_;
  MonotoneCubic cubic_;
  bool log_values_ = false;
  double tail_k_ = 0.0;
};

}  // namespace halfext
