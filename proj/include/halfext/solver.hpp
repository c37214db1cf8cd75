#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "halfext/extremals.hpp"
#include "halfext/grids.hpp"
#include "halfext/kernel.hpp"
#include "halfext/moebius.hpp"

namespace halfext {

enum class Normalization { unit_lp, mass_half };

std::string to_string(Normalization n);
Normalization normalization_from_string(const std::string& s);

struct SolverConfig {
  int max_iters = 4000;
  double tol_residual = 1e-9;
  double damping = 0.5;
  Normalization normalization = Normalization::mass_half;
  std::uint64_t seed = 0;
  int height_count = 96;

  void validate() const;
};

struct IterationRecord {
  int iter = 0;
  double residual = 0.0;
  double rayleigh = 0.0;
  double lambda = 0.0;  // half-mass radius of the raw update
};

struct IterationTrace {
  std::vector<IterationRecord> rows;
  void write_csv(std::ostream& os) const;
};

enum class SolverStatus { converged, stalled, max_iters, diverged };
std::string to_string(SolverStatus s);

struct SolverResult {
  RadialFn f;  // last iterate, unit L^p norm
  IterationTrace trace;
  SolverStatus status = SolverStatus::max_iters;
  double residual = 0.0;
  std::string message;
};

/// Damped fixed-point iteration of f^{p-1} = T((Pf)^{q-1}), q = np/(n-1),
/// on init's grid. Divergence (residual up 10x over 50 iterations, or
/// non-finite values) is reported through the status, not thrown. The run
/// also stops as stalled once 200 iterations fail to improve the best
/// residual by 0.1%, which is where discretisation error takes over.
SolverResult el_fixed_point(Dim n, double p, const RadialFn& init, const SolverConfig& cfg);

/// One step of the undamped map, f -> [T((Pf)^{q-1})]^{1/(p-1)}, without
/// normalization.
RadialFn el_map(const RadialFn& f, Dim n, double p, int height_count = 96);

/// lambda^{-d/p} f(r / lambda) resampled on f's grid (d = boundary dimension).
RadialFn dilate(const RadialFn& f, double lambda, double p);

/// Fraction of the L^p mass of f inside the ball of radius R.
double mass_fraction(const RadialFn& f, double p, double R);

struct MassHalf {
  double lambda = 1.0;
  RadialFn normalized;  // unit L^p norm, half its mass in the unit ball
};

/// Dilation lambda with dilate(f, lambda, p) putting half of the L^p mass
/// in the unit ball.
MassHalf normalize_mass_half(const RadialFn& f, double p);

enum class InitKind { gaussian, bump, wrong_family };
std::string to_string(InitKind k);
InitKind init_from_string(const std::string& s);

/// Initial data on grid. wrong_family picks the extremal of the other kind.
/// A nonzero seed perturbs the amplitude profile smoothly.
RadialFn initial_profile(InitKind kind, Dim n, double p, const RadialGrid& grid, std::uint64_t seed = 0);

struct FamilyMatch {
  double lambda = 1.0;
  double amplitude = 1.0;
  double error = 0.0;  // sup relative error over nodes with r <= r_max
};

/// Best dilation and amplitude of the extremal family `kind` against f.
FamilyMatch family_match(const RadialFn& f, ExtremalKind kind, double r_max = 10.0);

struct AscentResult {
  double estimate = 0.0;  // running max of the Rayleigh quotient
  std::vector<double> per_trial;
  int diverged = 0;
};

/// Lower bound for the sharp constant from random radial initial data,
/// trials run concurrently. Throws NumericalError if every trial diverges.
AscentResult ascent_estimate_constant(Dim n, double p, int trials, const SolverConfig& cfg,
                                      const RadialGrid& grid);

struct RadialCenter {
  double x = 0.0, y = 0.0;
  double metric = 0.0;  // max coefficient of variation over test circles
};

/// Searches for a point about which v is radial. Candidates lie on the
/// angle-zero axis unless full_2d is set. Returns the best center when its
/// metric is <= tol.
std::optional<RadialCenter> radial_about_point(const PolarSamples& v, double tol, bool full_2d = false);

/// Same search, returning the best candidate regardless of tol.
RadialCenter best_radial_center(const PolarSamples& v, bool full_2d = false);

enum class InvertedClass { quadratic_power, pure_power, none };
std::string to_string(InvertedClass c);

struct Classification {
  InvertedClass kind = InvertedClass::none;
  double c1 = 0.0, c2 = 0.0;  // (c1 r^2 + c2)^{alpha/2} or c1 r^alpha
  double residual = 0.0;      // max relative misfit of u^{2/alpha}
};

/// Fits u^{2/alpha} = c1 r^2 + c2 over nodes with 0 < r <= r_fit.
Classification classify_inverted_radial(const RadialFn& u, double alpha, double r_fit = 10.0);

/// max |third difference of u^{2/alpha}| / h^3 over uniformly spaced
/// samples with spacing h.
double ode_check_1d(const std::vector<double>& u, double h, double alpha);

}  // namespace halfext
