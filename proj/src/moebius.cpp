#include "halfext/moebius.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "halfext/errors.hpp"
#include "halfext/parallel.hpp"

namespace halfext {

InversionSpec critical_inversion(Dim n) {
  InversionSpec s;
  s.alpha = 2.0 - n.value();
  return s;
}

std::vector<double> ball_map(const HalfspacePoint& x) {
  if (!(x.x_n > 0.0)) throw DomainError("ball_map: x_n must be > 0");
  std::vector<double> y(x.x_prime);
  y.push_back(x.x_n + 0.5);
  double norm2 = 0.0;
  for (double v : y) norm2 += v * v;
  for (double& v : y) v /= norm2;
  y.back() -= 1.0;
  return y;
}

double ball_map_factor(const HalfspacePoint& x) {
  double norm2 = (x.x_n + 0.5) * (x.x_n + 0.5);
  for (double v : x.x_prime) norm2 += v * v;
  return 1.0 / norm2;
}

LogRadialInterpolant::LogRadialInterpolant(const RadialFn& f) : f_(f) {
  const auto& r = f.grid().nodes();
  const auto& v = f.values();
  log_values_ = std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; });
  std::vector<double> x(r.size()), y(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    x[i] = std::log(r[i]);
    y[i] = log_values_ ? std::log(v[i]) : v[i];
  }
  cubic_ = MonotoneCubic(std::move(x), std::move(y));
  tail_k_ = f.tail_exponent();
}

double LogRadialInterpolant::operator()(double r) const {
  r = std::abs(r);
  const auto& nodes = f_.grid().nodes();
  if (r < nodes.front()) return f_(r);
  if (r > nodes.back()) {
    if (!f_.grid().power_tail()) return f_(r);
    if (std::isinf(tail_k_)) return 0.0;
    return f_.values().back() * std::pow(nodes.back() / r, tail_k_);
  }
  const double y = cubic_(std::log(r));
  return log_values_ ? std::exp(y) : y;
}

namespace {

double shift_norm(const InversionSpec& spec) {
  double s = 0.0;
  for (double v : spec.shift) s += v * v;
  return std::sqrt(s);
}

}  // namespace

RadialFn boundary_inversion(const RadialFn& f, const InversionSpec& spec, const RadialGrid& out_grid) {
  if (shift_norm(spec) != 0.0) throw DomainError("boundary_inversion: shifted inversion is not radial");
  if (out_grid.dim() != f.grid().dim()) throw DomainError("boundary_inversion: grid dimensions differ");
  const LogRadialInterpolant F(f);
  std::vector<double> out(out_grid.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double rho = out_grid.nodes()[j];
    out[j] = std::pow(rho, spec.alpha) * F(1.0 / rho);
  }
  return RadialFn(out_grid, std::move(out));
}

PolarSamples boundary_inversion_polar(const RadialFn& f, const InversionSpec& spec, const RadialGrid& radii,
                                      int angles) {
  if (angles < 8) throw DomainError("boundary_inversion_polar: need at least 8 angles");
  const double a = shift_norm(spec);
  const LogRadialInterpolant F(f);
  PolarSamples out;
  out.radial = radii;
  out.angles = angles;
  out.values.resize(radii.size() * angles);
  for (std::size_t j = 0; j < radii.size(); ++j) {
    const double rho = radii.nodes()[j];
    for (int m = 0; m < angles; ++m) {
      const double beta = 2.0 * std::numbers::pi * m / angles;
      const double d2 = 1.0 / (rho * rho) - 2.0 * a * std::cos(beta) / rho + a * a;
      out.values[j * angles + m] = std::pow(rho, spec.alpha) * F(std::sqrt(std::max(d2, 0.0)));
    }
  }
  return out;
}

double PolarSamples::evaluate(double x, double y) const {
  const double rho = std::hypot(x, y);
  const double beta = std::atan2(y, x);
  Stencil st;
  const Region region = radial.stencil(rho, st, true);
  if (region != Region::interior) throw DomainError("PolarSamples::evaluate: point outside the polar mesh");
  double s = 0.0;
  for (int j = 0; j < st.count; ++j) {
    const double ang = st.mirrored[j] ? beta + std::numbers::pi : beta;
    s += st.weight[j] * periodic_lagrange(&values[static_cast<std::size_t>(st.index[j]) * angles], angles, ang);
  }
  return s;
}

AxisymFn halfspace_inversion(const AxisymFn& u, const HalfspaceGrid& out_grid) {
  const int n = out_grid.n;
  if (u.grid().n != n) throw DomainError("halfspace_inversion: dimension mismatch");
  AxisymFn out = AxisymFn::zeros(out_grid);
  const auto& r = out_grid.radial.nodes();
  const auto& t = out_grid.heights.nodes();
  parallel_for(t.size(), [&](std::size_t k) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double rho2 = r[i] * r[i] + t[k] * t[k];
      out.at(i, k) = std::pow(rho2, 0.5 * (2 - n)) * u.evaluate(r[i] / rho2, t[k] / rho2);
    }
  });
  return out;
}

}  // namespace halfext
