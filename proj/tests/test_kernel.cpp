#include <doctest.h>

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "halfext/errors.hpp"
#include "halfext/kernel.hpp"

using namespace halfext;
using doctest::Approx;

namespace {

// test-only oracle: |P_t|_p by double-exponential quadrature on [0, inf)
double pt_lp_oracle(int n, double p, double t) {
  boost::math::quadrature::exp_sinh<double> q;
  const double I = q.integrate([&](double rho) {
    return std::pow(pt_profile(Dim(n), t, rho), p) * std::pow(rho, n - 2);
  });
  return std::pow(sphere_area(n - 1) * I, 1.0 / p);
}

}  // namespace

TEST_SUITE("kernel") {

TEST_CASE("unit ball volumes") {
  CHECK(unit_ball_volume(1) == Approx(2.0).epsilon(1e-15));
  CHECK(unit_ball_volume(2) == Approx(std::numbers::pi).epsilon(1e-15));
  CHECK(unit_ball_volume(3) == Approx(4.0 * std::numbers::pi / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(unit_ball_volume(0), DomainError);
  CHECK(sphere_area(1) == Approx(2.0).epsilon(1e-15));
  CHECK(sphere_area(2) == Approx(2.0 * std::numbers::pi).epsilon(1e-15));
}

TEST_CASE("poisson kernel point values") {
  CHECK(poisson_kernel(Dim(3), {{0.0, 0.0}, 1.0}, {{0.0, 0.0}}) ==
        Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-15));
  CHECK(poisson_kernel(Dim(2), {{0.0}, 1.0}, {{0.0}}) == Approx(1.0 / std::numbers::pi).epsilon(1e-15));
  CHECK_THROWS_AS(poisson_kernel(Dim(3), {{0.0, 0.0}, 0.0}, {{0.0, 0.0}}), DomainError);
  CHECK_THROWS_AS(poisson_kernel(Dim(3), {{0.0, 0.0}, 1.0}, {{0.0}}), DomainError);

  // at xi = (1, 0) the kernel decreases to 0 as t -> 0
  double prev = poisson_kernel(Dim(3), {{0.0, 0.0}, 0.5}, {{1.0, 0.0}});
  for (double t = 0.25; t > 1e-8; t /= 2.0) {
    const double v = poisson_kernel(Dim(3), {{0.0, 0.0}, t}, {{1.0, 0.0}});
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < 1e-7);
}

TEST_CASE("profiles") {
  const double c = 1.0 / (2.0 * std::numbers::pi);
  CHECK(pt_profile(Dim(3), 1.0, 0.0) == Approx(c).epsilon(1e-15));
  CHECK(pt_profile(Dim(2), 2.0, 0.0) == Approx(c).epsilon(1e-15));

  // arbitrary-precision oracle for (1/(2 pi)) 2^{-3/2}
  using mp = boost::multiprecision::cpp_bin_float_50;
  const mp exact = mp(1) / (2 * boost::math::constants::pi<mp>()) / pow(mp(2), mp(1.5));
  CHECK(pt_profile(Dim(3), 1.0, 1.0) == Approx(exact.convert_to<double>()).epsilon(1e-15));
  CHECK(pt_profile(Dim(3), 1.0, 1.0) == Approx(0.05626977).epsilon(1e-7));

  CHECK(qt_profile(Dim(3), 1.0, 0.0) == 0.0);
  CHECK(qt_profile(Dim(3), 1.0, 1.0) == Approx(pt_profile(Dim(3), 1.0, 1.0)).epsilon(1e-15));
  CHECK(qt_profile(Dim(3), 2.0, 1.0) == Approx(pt_profile(Dim(3), 2.0, 1.0) / 2.0).epsilon(1e-15));
}

TEST_CASE("norm examples") {
  CHECK(std::abs(pt_lp_norm(Dim(3), 1.0, 0.7) - 1.0) <= 1e-10);
  CHECK(pt_lp_norm(Dim(3), kInfinity, 2.0) == Approx(1.0 / (8.0 * std::numbers::pi)).epsilon(1e-15));
  CHECK(pt_lp_norm(Dim(3), 2.0, 1.0) / pt_lp_norm(Dim(3), 2.0, 2.0) == Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(pt_lp_norm(Dim(3), 2.0 / 3.0, 1.0), DivergenceError);
  CHECK_THROWS_AS(pt_lp_norm(Dim(3), 0.5, 1.0), DivergenceError);
  CHECK_THROWS_AS(pt_lp_norm(Dim(3), 2.0, 0.0), DomainError);
}

TEST_CASE("normalization over n and t") {
  for (int n : {2, 3, 4})
    for (double t : {0.25, 1.0, 4.0}) {
      CAPTURE(n);
      CAPTURE(t);
      CHECK(std::abs(pt_lp_norm(Dim(n), 1.0, t) - 1.0) <= 1e-8);
    }
}

TEST_CASE("scaling in t") {
  for (int n : {2, 3, 4})
    for (double p : {1.5, 2.0, 4.0}) {
      const double k = (n - 1) * (p - 1.0) / p;
      const double ref = pt_lp_norm(Dim(n), p, 1.0);
      for (double lt = -3.0; lt <= 3.0; lt += 0.5) {
        const double t = std::pow(10.0, lt);
        CHECK(std::abs(pt_lp_norm(Dim(n), p, t) * std::pow(t, k) / ref - 1.0) <= 1e-8);
      }
    }
}

TEST_CASE("lp norms against an adaptive quadrature oracle") {
  for (int n : {2, 3, 4})
    for (double p : {1.5, 2.0, 4.0, 6.0})
      for (double t : {0.5, 3.0}) {
        CAPTURE(n);
        CAPTURE(p);
        CHECK(pt_lp_norm(Dim(n), p, t) == Approx(pt_lp_oracle(n, p, t)).epsilon(1e-10));
      }
  // Q_t differs from P_t by rho/t; both are checked at one point
  boost::math::quadrature::exp_sinh<double> q;
  const double I = q.integrate([](double rho) { return std::pow(qt_profile(Dim(3), 1.5, rho), 2.0) * rho; });
  CHECK(qt_lp_norm(Dim(3), 2.0, 1.5) == Approx(std::sqrt(2.0 * std::numbers::pi * I)).epsilon(1e-10));
}

TEST_CASE("rotation symmetry and positivity") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (int k = 0; k < 200; ++k) {
    const double x0 = U(rng), x1 = U(rng), y0 = U(rng), y1 = U(rng), t = std::abs(U(rng)) + 1e-3;
    const double a = U(rng);
    const double c = std::cos(a), s = std::sin(a);
    const double v = poisson_kernel(Dim(3), {{x0, x1}, t}, {{y0, y1}});
    const double w = poisson_kernel(Dim(3), {{c * x0 - s * x1, s * x0 + c * x1}, t}, {{c * y0 - s * y1, s * y0 + c * y1}});
    CHECK(std::abs(v - w) <= 1e-14);
    CHECK(v > 0.0);
    CHECK(v == Approx(pt_profile(Dim(3), t, std::hypot(x0 - y0, x1 - y1))).epsilon(1e-14));
  }
}

}  // TEST_SUITE
