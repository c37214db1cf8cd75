#include "halfext/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "halfext/errors.hpp"

namespace halfext {

void lagrange_weights(const double* xs, std::size_t count, double x, double* out) {
  for (std::size_t j = 0; j < count; ++j) {
    double w = 1.0;
    for (std::size_t m = 0; m < count; ++m) {
      if (m == j) continue;
      w *= (x - xs[m]) / (xs[j] - xs[m]);
    }
    out[j] = w;
  }
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw DomainError("MonotoneCubic: need >= 2 matching samples");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1])) throw DomainError("MonotoneCubic: abscissae must increase");
  std::vector<double> delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
  slope_.assign(n, 0.0);
  slope_[0] = delta[0];
  slope_[n - 1] = delta[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i)
    slope_[i] = (delta[i - 1] * delta[i] <= 0.0) ? 0.0 : 0.5 * (delta[i - 1] + delta[i]);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (delta[i] == 0.0) {
      slope_[i] = slope_[i + 1] = 0.0;
      continue;
    }
    const double a = slope_[i] / delta[i];
    const double b = slope_[i + 1] / delta[i];
    const double s = a * a + b * b;
    if (s > 9.0) {
      const double tau = 3.0 / std::sqrt(s);
      slope_[i] = tau * a * delta[i];
      slope_[i + 1] = tau * b * delta[i];
    }
  }
}

double MonotoneCubic::operator()(double x) const {
  const std::size_t n = x_.size();
  std::size_t i;
  if (x <= x_.front()) {
    i = 0;
  } else if (x >= x_.back()) {
    i = n - 2;
  } else {
    i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) - 1;
  }
  const double h = x_[i + 1] - x_[i];
  const double s = (x - x_[i]) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y_[i] + (s3 - 2 * s2 + s) * h * slope_[i] +
         (-2 * s3 + 3 * s2) * y_[i + 1] + (s3 - s2) * h * slope_[i + 1];
}

double periodic_lagrange(const double* values, std::size_t count, double angle, int order) {
  const double two_pi = 2.0 * std::numbers::pi;
  const double h = two_pi / static_cast<double>(count);
  double pos = std::fmod(angle, two_pi);
  if (pos < 0) pos += two_pi;
  pos /= h;
  const long base = static_cast<long>(std::floor(pos)) - (order / 2 - 1);
  double xs[32], w[32];
  order = std::min<int>(order, std::min<int>(32, static_cast<int>(count)));
  for (int j = 0; j < order; ++j) xs[j] = static_cast<double>(base + j);
  lagrange_weights(xs, order, pos, w);
  double sum = 0.0;
  const long c = static_cast<long>(count);
  for (int j = 0; j < order; ++j) {
    long idx = (base + j) % c;
    if (idx < 0) idx += c;
    sum += w[j] * values[idx];
  }
  return sum;
}

}  // namespace halfext
