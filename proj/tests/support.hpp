#pragma once
// Shared helpers for the unit tests. Grids are function-local statics so the
// cached extension operators built on them are reused across test cases.
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "halfext/extremals.hpp"
#include "halfext/grids.hpp"

namespace halfext::testing {

inline const RadialGrid& grid2() {
  static const RadialGrid g = build_radial_grid(2, 128, Mapping::tan, 1.0);
  return g;
}

inline const RadialGrid& grid3() {
  static const RadialGrid g = build_radial_grid(3, 128, Mapping::tan, 1.0);
  return g;
}

inline RadialFn extremal(Dim n, ExtremalKind kind, const RadialGrid& g, double lambda = 1.0) {
  ExtremalSpec s;
  s.n = n;
  s.kind = kind;
  s.lambda = lambda;
  return extremal_profile(s, g);
}

/// Random positive radial trial function: a Gaussian mixture plus a power
/// tail decaying fast enough to lie in L^p on the boundary.
inline RadialFn random_trial(std::mt19937_64& rng, const RadialGrid& g, double p) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double a[3], w[3];
  for (int k = 0; k < 3; ++k) {
    a[k] = 0.1 + U(rng);
    w[k] = std::exp(std::log(0.2) + U(rng) * std::log(25.0));
  }
  const double b = 0.5 * U(rng);
  const double c = 0.3 + 3.0 * U(rng);
  const double e = g.dim() / (2.0 * p) + 0.3 + 2.0 * U(rng);
  RadialFn f = RadialFn::sample(g, [&](double r) {
    double v = b * std::pow(1.0 + (r / c) * (r / c), -e);
    for (int k = 0; k < 3; ++k) v += a[k] * std::exp(-(r / w[k]) * (r / w[k]));
    return v;
  });
  f.set_tail_exponent(2.0 * e);
  return f;
}

inline std::string fixture_path(const std::string& name) {
  return std::string(HALFEXT_TEST_FIXTURES) + "/" + name;
}

}  // namespace halfext::testing
