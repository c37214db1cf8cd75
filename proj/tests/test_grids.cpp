#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "halfext/errors.hpp"
#include "halfext/extension.hpp"
#include "halfext/grids.hpp"
#include "support.hpp"

using namespace halfext;
using doctest::Approx;

namespace {

double integrate(const RadialGrid& g, const std::function<double(double)>& h) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += g.weights()[i] * h(g.nodes()[i]);
  return s;
}

}  // namespace

TEST_SUITE("grids") {

TEST_CASE("radial grid quadrature") {
  const auto g2 = build_radial_grid(2, 128, Mapping::tan, 1.0);
  CHECK(std::abs(integrate(g2, [](double r) { return std::exp(-r * r); }) - 0.5) <= 1e-10);
  const auto g1 = build_radial_grid(1, 128, Mapping::tan, 1.0);
  CHECK(std::abs(integrate(g1, [](double r) { return 1.0 / (1.0 + r * r); }) - std::numbers::pi / 2.0) <= 1e-10);
  const auto coarse = build_radial_grid(2, 16, Mapping::tan, 1.0);
  CHECK(std::abs(integrate(coarse, [](double r) { return std::exp(-r * r); }) - 0.5) <= 1e-4);

  // the exp mapping spends most nodes far from the bulk of a Gaussian
  const auto ge = build_radial_grid(2, 128, Mapping::exp, 1.0);
  CHECK(std::abs(integrate(ge, [](double r) { return std::exp(-r * r); }) - 0.5) <= 1e-5);
  const auto gl = build_radial_grid(2, 64, Mapping::linear, 2.0);
  CHECK(integrate(gl, [](double) { return 1.0; }) == Approx(2.0).epsilon(1e-13));

  CHECK_THROWS_AS(build_radial_grid(2, 8), DomainError);
  CHECK_THROWS_AS(build_radial_grid(0, 64), DomainError);
  CHECK_THROWS_AS(build_radial_grid(2, 64, Mapping::tan, -1.0), DomainError);
  CHECK(mapping_from_string("exp") == Mapping::exp);
  CHECK_THROWS_AS(mapping_from_string("cubic"), DomainError);
}

TEST_CASE("boundary norms") {
  const auto& g = testing::grid2();
  const auto f = RadialFn::sample(g, [](double r) { return 1.0 / std::sqrt(1.0 + r * r); });
  CHECK(lp_norm_boundary(f, 4.0) == Approx(std::pow(std::numbers::pi, 0.25)).epsilon(1e-10));
  const auto h = RadialFn::sample(g, [](double r) { return std::pow(1.0 + r * r, -1.5); });
  CHECK(lp_norm_boundary(h, 4.0 / 3.0) == Approx(std::pow(std::numbers::pi, 0.75)).epsilon(1e-10));
  CHECK(lp_norm_boundary(RadialFn(g, std::vector<double>(g.size(), 0.0)), 2.0) == 0.0);
  // |f|^2 ~ r^{-2} is not integrable in the plane
  CHECK_THROWS_AS(lp_norm_boundary(f, 2.0), DivergenceError);

  // refinement and homogeneity
  const auto g256 = build_radial_grid(2, 256, Mapping::tan, 1.0);
  const auto f256 = RadialFn::sample(g256, [](double r) { return 1.0 / std::sqrt(1.0 + r * r); });
  CHECK(std::abs(lp_norm_boundary(f256, 4.0) - lp_norm_boundary(f, 4.0)) < 1e-9);
  auto f3 = f;
  for (double& v : f3.values()) v *= -3.0;
  CHECK(lp_norm_boundary(f3, 4.0) == Approx(3.0 * lp_norm_boundary(f, 4.0)).epsilon(1e-14));
}

TEST_CASE("half-space norm against Monte Carlo") {
  const auto hg = build_halfspace_grid(3, 128, 96);
  const auto u = AxisymFn::sample(hg, [](double r, double t) { return 1.0 / std::sqrt(r * r + (t + 1) * (t + 1)); });
  const double N = lp_norm_halfspace(u, 6.0);
  // exact: 2 pi int int (r^2 + (t+1)^2)^{-3} r dr dt = pi / 6
  CHECK(N == Approx(std::pow(std::numbers::pi / 6.0, 1.0 / 6.0)).epsilon(1e-9));

  // brute force over R^3_+: x' uniform in a disk of radius R through the
  // map rho = R sqrt(U), t exponential with rate 1, plus the analytic
  // remainder outside the disk
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::exponential_distribution<double> E(1.0);
  const double R = 4.0;
  const long samples = 10000000;
  double sum = 0.0, sum2 = 0.0;
  for (long k = 0; k < samples; ++k) {
    const double rho = R * std::sqrt(U(rng));
    const double t = E(rng);
    const double d2 = rho * rho + (t + 1) * (t + 1);
    const double v = std::numbers::pi * R * R * std::exp(t) / (d2 * d2 * d2);
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / samples;
  const double sigma = std::sqrt((sum2 / samples - mean * mean) / samples);
  // remainder: 2 pi int_0^inf int_R^inf (r^2+(t+1)^2)^{-3} r dr dt
  boost::math::quadrature::gauss_kronrod<double, 61> gk;
  const double rest = gk.integrate(
      [&](double t) { return 2.0 * std::numbers::pi * 0.25 / std::pow(R * R + (t + 1) * (t + 1), 2); }, 0.0,
      std::numeric_limits<double>::infinity());
  const double target = std::pow(N, 6.0) - rest;
  CHECK(std::abs(mean - target) <= 3.0 * sigma);

  CHECK(lp_norm_halfspace(AxisymFn::zeros(hg), 2.0) == 0.0);
}

TEST_CASE("constant on a truncated box") {
  const auto hg = build_halfspace_grid(3, 48, 48, Mapping::linear, 2.0);
  const auto u = AxisymFn::sample(hg, [](double, double) { return 3.0; });
  const double vol = std::numbers::pi * 4.0 * 2.0;
  CHECK(lp_norm_halfspace(u, 2.0) == Approx(3.0 * std::sqrt(vol)).epsilon(1e-12));
  CHECK(distribution_mass(u, 0.5) == Approx(vol).epsilon(1e-12));
  CHECK(distribution_mass(u, 3.5) == 0.0);
}

TEST_CASE("weak norms") {
  const auto hg = build_halfspace_grid(3, 128, 96);
  CHECK(weak_lp_norm(AxisymFn::zeros(hg), 1.5) == 0.0);
  CHECK(distribution_mass(AxisymFn::zeros(hg), 0.1) == 0.0);

  auto kernel = [](double r, double t) { return pt_profile(Dim(3), t, r); };
  const auto u = AxisymFn::sample(hg, kernel);
  const double w = weak_lp_norm(u, 1.5);
  CHECK(std::isfinite(w));
  CHECK(w > 0.0);
  auto u2 = u;
  for (double& v : u2.values()) v *= 2.0;
  CHECK(weak_lp_norm(u2, 1.5) == 2.0 * w);
  const auto fine = AxisymFn::sample(build_halfspace_grid(3, 256, 192), kernel);
  CHECK(weak_lp_norm(fine, 1.5) == Approx(w).epsilon(0.01));
}

TEST_CASE("distribution mass of an extension") {
  const auto& g = testing::grid2();
  // |f|_1 = 1
  const auto f = RadialFn::sample(g, [](double r) { return std::pow(1.0 + r * r, -1.5) / (2.0 * std::numbers::pi); });
  const auto hg = halfspace_grid_for(3, g, 96);
  const auto u = poisson_extend(f, hg);
  double prev = kInfinity, c = 0.0;
  for (double lt = -4.0; lt <= -0.9; lt += 0.25) {
    const double level = std::pow(10.0, lt);
    const double m = distribution_mass(u, level);
    CHECK(m <= prev);
    prev = m;
    c = std::max(c, m * std::pow(level, 1.5));
  }
  CHECK(std::isfinite(c));
  CHECK(c > 0.0);
}

TEST_CASE("layer cake") {
  const auto hg = build_halfspace_grid(3, 128, 96);
  const auto u = AxisymFn::sample(hg, [](double r, double t) { return std::exp(-(r * r + t * t)); });
  for (double p : {1.0, 2.0, 3.0}) {
    boost::math::quadrature::gauss_kronrod<double, 31> gk;
    const double layer =
        p * gk.integrate([&](double s) { return std::pow(s, p - 1.0) * distribution_mass(u, s); }, 0.0, 1.0, 12, 1e-8);
    CHECK(layer == Approx(std::pow(lp_norm_halfspace(u, p), p)).epsilon(0.01));
  }
}

TEST_CASE("interpolation and tails") {
  const auto& g = testing::grid2();
  auto f = RadialFn::sample(g, [](double r) { return 1.0 / std::sqrt(1.0 + r * r); });
  for (double r : {0.0, 0.013, 0.7, 3.3, 41.0})
    CHECK(f(r) == Approx(1.0 / std::sqrt(1.0 + r * r)).epsilon(1e-8));
  CHECK(f.tail_exponent() == Approx(1.0).epsilon(1e-3));
  CHECK(f(1e6) == Approx(1e-6).epsilon(1e-3));
  const auto bump = RadialFn::sample(g, [](double r) { return r < 1.0 ? 1.0 - r : 0.0; });
  CHECK(std::isinf(bump.tail_exponent()));
  CHECK(f.nonnegative());
}

TEST_CASE("csv round trip") {
  const auto f = RadialFn::sample(testing::grid2(), [](double r) { return std::exp(-r); });
  std::stringstream ss;
  write_csv(ss, f);
  const auto s = read_radial_csv(ss);
  REQUIRE(s.r.size() == f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(s.r[i] == f.grid().nodes()[i]);
    CHECK(s.value[i] == f[i]);
  }
  std::stringstream bad("x,y\n1,2\n");
  CHECK_THROWS_AS(read_radial_csv(bad), DomainError);
}

}  // TEST_SUITE
