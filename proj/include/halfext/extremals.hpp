#pragma once

#include <string>

#include "halfext/grids.hpp"
#include "halfext/kernel.hpp"

namespace halfext {

/// conformal: exponent (n-2)/2, extremal at p = 2(n-1)/(n-2)
/// dual:      exponent n/2,     extremal at p = 2(n-1)/n
enum class ExtremalKind { conformal, dual };

std::string to_string(ExtremalKind k);

struct ExtremalSpec {
  Dim n{3};
  ExtremalKind kind = ExtremalKind::conformal;
  double lambda = 1.0;
  BoundaryPoint center;  // empty or all zeros for radial profiles
  double amplitude = 1.0;
};

double extremal_exponent(Dim n, ExtremalKind kind);
/// Exponent p at which the family is extremal.
double extremal_p(Dim n, ExtremalKind kind);

/// amplitude * (lambda / (lambda^2 + |xi - center|^2))^e at a boundary point.
double extremal_value(const ExtremalSpec& spec, const BoundaryPoint& xi);

/// Radial samples; the declared tail exponent is 2e.
RadialFn extremal_profile(const ExtremalSpec& spec, const RadialGrid& grid);

double sharp_constant(Dim n, ExtremalKind which);

/// Exponent q = np/(n-1) of the half-space norm paired with L^p.
double target_exponent(Dim n, double p);

/// |Pf|_{L^q} / |f|_{L^p} with q = np/(n-1). Uses a cached extension
/// operator on f's grid with tan-mapped heights.
double rayleigh_quotient(const RadialFn& f, Dim n, double p, int height_count = 96);

/// Both sides of f^{p-1} = T((Pf)^{q-1}) on f's grid.
struct ElSides {
  RadialFn lhs;  // f^{p-1}
  RadialFn rhs;  // T((Pf)^{q-1})
};
ElSides el_sides(const RadialFn& f, Dim n, double p, int height_count = 96);

/// max_j |f^{p-1} - T((Pf)^{q-1})| / max f^{p-1} over grid nodes.
double el_residual(const RadialFn& f, Dim n, double p, int height_count = 96);

struct ElNormalization {
  double amplitude = 1.0;
  /// Residual of the rescaled function a f.
  double residual = 0.0;
  /// False when the best amplitude still leaves residual > 1e-2: f does
  /// not have the shape of a solution and the amplitude is best effort.
  bool shape_ok = true;
};

/// Amplitude a minimising el_residual(a f). Both sides scale with
/// different powers of a (p-1 and q-1), so the minimiser is unique.
ElNormalization normalize_el(const RadialFn& f, Dim n, double p, int height_count = 96);

/// c > 0 such that c |xi|^{-(n-1)/p} solves the Euler-Lagrange equation,
/// from T((P s^{-k})^{q-1}) evaluated at radius r.
double singular_constant(Dim n, double p, double r = 1.0);

}  // namespace halfext
