#pragma once

#include <cstddef>
#include <vector>

namespace halfext {

/// Barycentric-free Lagrange basis weights: out[j] = l_j(x) for the given
/// abscissae (any distinct values, any order).
void lagrange_weights(const double* xs, std::size_t count, double x, double* out);

/// Piecewise cubic Hermite interpolant with Fritsch-Carlson slope limiting.
/// Monotone data stay monotone. Outside the data range the end cubic is
/// not used; callers handle extrapolation.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double front() const { return x_.front(); }
  double back() const { return x_.back(); }

 private:
  std::vector<double> x_, y_, slope_;
};

/// Periodic Lagrange interpolation on a uniform grid of `count` samples over
/// [0, 2 pi) using `order` nearest samples.
double periodic_lagrange(const double* values, std::size_t count, double angle, int order = 8);

}  // namespace halfext
