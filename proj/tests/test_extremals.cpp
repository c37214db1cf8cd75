#include <doctest.h>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>

#include "experiments.hpp"
#include "halfext/errors.hpp"
#include "halfext/solver.hpp"
#include "support.hpp"

using namespace halfext;
using doctest::Approx;

namespace {

using mp = boost::multiprecision::cpp_bin_float_50;

double fixture(const std::string& name, double p) {
  const auto all = app::read_derived_constants(HALFEXT_TEST_FIXTURES);
  const auto v = app::find_constant(all, name, 3, p);
  REQUIRE(v.has_value());
  return *v;
}

}  // namespace

TEST_SUITE("extremals") {

TEST_CASE("profiles") {
  const auto& g = testing::grid2();
  const auto c = testing::extremal(Dim(3), ExtremalKind::conformal, g);
  const auto d = testing::extremal(Dim(3), ExtremalKind::dual, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.nodes()[i];
    CHECK(c[i] == Approx(std::pow(1.0 + r * r, -0.5)).epsilon(1e-15));
    CHECK(d[i] == Approx(std::pow(1.0 + r * r, -1.5)).epsilon(1e-15));
  }
  CHECK(c.tail_exponent() == 1.0);
  CHECK(d.tail_exponent() == 3.0);

  // lambda = 2 is the L^p-preserving dilation of lambda = 1
  for (auto kind : {ExtremalKind::conformal, ExtremalKind::dual}) {
    const double p = extremal_p(Dim(3), kind);
    const auto f1 = testing::extremal(Dim(3), kind, g);
    const auto f2 = testing::extremal(Dim(3), kind, g, 2.0);
    const auto dil = dilate(f1, 2.0, p);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(f2[i] == Approx(dil[i]).epsilon(1e-8));
  }

  ExtremalSpec s;
  s.center.xi = {1.0, -2.0};
  s.amplitude = 3.0;
  CHECK(extremal_value(s, {{1.0, -2.0}}) == Approx(3.0).epsilon(1e-15));
  CHECK(extremal_value(s, {{2.0, -2.0}}) == Approx(3.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(extremal_profile(s, g), DomainError);
  s.center.xi.clear();
  s.lambda = 0.0;
  CHECK_THROWS_AS(extremal_profile(s, g), DomainError);

  CHECK(extremal_p(Dim(3), ExtremalKind::conformal) == 4.0);
  CHECK(extremal_p(Dim(3), ExtremalKind::dual) == Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(target_exponent(Dim(3), 4.0) == 6.0);
}

TEST_CASE("sharp constants in high precision") {
  const mp pi = boost::math::constants::pi<mp>();
  const mp c3 = pow(mp(3), mp(-0.25)) * pow(4 * pi / 3, mp(-1) / 12);
  const mp d3 = 1 / (sqrt(mp(2)) * pow(pi, mp(0.25)));
  const mp c4 = pow(mp(4), mp(-1) / 3) * pow(pi * pi / 2, mp(-1) / 12);
  CHECK(sharp_constant(Dim(3), ExtremalKind::conformal) == Approx(c3.convert_to<double>()).epsilon(1e-15));
  CHECK(sharp_constant(Dim(3), ExtremalKind::dual) == Approx(d3.convert_to<double>()).epsilon(1e-15));
  CHECK(sharp_constant(Dim(4), ExtremalKind::conformal) == Approx(c4.convert_to<double>()).epsilon(1e-15));
  CHECK(sharp_constant(Dim(3), ExtremalKind::conformal) == Approx(0.67435).epsilon(1e-5));
  CHECK(sharp_constant(Dim(3), ExtremalKind::dual) == Approx(0.53113).epsilon(1e-5));
  CHECK_THROWS_AS(sharp_constant(Dim(2), ExtremalKind::conformal), DomainError);
}

TEST_CASE("rayleigh quotients of the extremals") {
  const auto& g = testing::grid2();
  const auto c = testing::extremal(Dim(3), ExtremalKind::conformal, g);
  const auto d = testing::extremal(Dim(3), ExtremalKind::dual, g);
  const double cc = sharp_constant(Dim(3), ExtremalKind::conformal);
  const double cd = sharp_constant(Dim(3), ExtremalKind::dual);
  CHECK(std::abs(rayleigh_quotient(c, Dim(3), 4.0) - cc) <= 5e-4);
  CHECK(std::abs(rayleigh_quotient(d, Dim(3), 4.0 / 3.0) - cd) <= 5e-4);
  CHECK(rayleigh_quotient(d, Dim(3), 4.0) <= 0.99 * cc);

  CHECK_THROWS_AS(rayleigh_quotient(RadialFn(g, std::vector<double>(g.size(), 0.0)), Dim(3), 4.0), DomainError);
  CHECK_THROWS_AS(rayleigh_quotient(c, Dim(4), 4.0), DomainError);
}

TEST_CASE("dilation invariance") {
  const auto& g = testing::grid2();
  const auto c = testing::extremal(Dim(3), ExtremalKind::conformal, g);
  const auto gauss = RadialFn::sample(g, [](double r) { return std::exp(-r * r) * (1.0 + r); });
  for (const auto* f : {&c, &gauss}) {
    const double base = rayleigh_quotient(*f, Dim(3), 4.0);
    for (double lam : {0.25, 0.5, 2.0, 4.0}) {
      CAPTURE(lam);
      CHECK(rayleigh_quotient(dilate(*f, lam, 4.0), Dim(3), 4.0) == Approx(base).epsilon(1e-6));
    }
  }
}

TEST_CASE("upper bound on random trials") {
  std::mt19937_64 rng(31);
  const auto& g = testing::grid2();
  for (auto kind : {ExtremalKind::conformal, ExtremalKind::dual}) {
    const double p = extremal_p(Dim(3), kind), c = sharp_constant(Dim(3), kind);
    for (int k = 0; k < 50; ++k) CHECK(rayleigh_quotient(testing::random_trial(rng, g, p), Dim(3), p) <= c * (1.0 + 1e-3));
  }
}

TEST_CASE("euler-lagrange residual and amplitude") {
  const auto& g = testing::grid2();
  const auto c = testing::extremal(Dim(3), ExtremalKind::conformal, g);
  const auto norm = normalize_el(c, Dim(3), 4.0);
  CHECK(norm.shape_ok);
  CHECK(norm.amplitude == Approx(fixture("el_amplitude_conformal", 4.0)).epsilon(1e-6));
  CHECK(norm.amplitude == Approx(std::sqrt(6.0)).epsilon(1e-6));

  auto calibrated = c;
  for (double& v : calibrated.values()) v *= norm.amplitude;
  CHECK(el_residual(calibrated, Dim(3), 4.0) <= 1e-3);
  CHECK(normalize_el(calibrated, Dim(3), 4.0).amplitude == Approx(1.0).epsilon(1e-6));
  auto doubled = calibrated;
  for (double& v : doubled.values()) v *= 2.0;
  CHECK(el_residual(doubled, Dim(3), 4.0) > 0.1);
  CHECK(normalize_el(doubled, Dim(3), 4.0).amplitude == Approx(0.5).epsilon(1e-6));

  const auto d = testing::extremal(Dim(3), ExtremalKind::dual, g);
  CHECK(normalize_el(d, Dim(3), 4.0 / 3.0).amplitude ==
        Approx(fixture("el_amplitude_dual", 4.0 / 3.0)).epsilon(1e-6));
}

TEST_CASE("residual minimality") {
  const auto& g = testing::grid2();
  const auto gauss = RadialFn::sample(g, [](double r) { return std::exp(-r * r); });
  const auto bump = RadialFn::sample(g, [](double r) { return r < 1.0 ? (1 - r * r) * (1 - r * r) : 0.0; });
  const auto c = testing::extremal(Dim(3), ExtremalKind::conformal, g);
  const auto d = testing::extremal(Dim(3), ExtremalKind::dual, g);
  struct Candidate {
    const RadialFn* f;
    ExtremalKind family;
    bool is_extremal;
  };
  const Candidate all[] = {{&c, ExtremalKind::conformal, true},
                           {&d, ExtremalKind::dual, true},
                           {&gauss, ExtremalKind::conformal, false},
                           {&bump, ExtremalKind::conformal, false}};
  for (auto kind : {ExtremalKind::conformal, ExtremalKind::dual}) {
    const double p = extremal_p(Dim(3), kind);
    for (const auto& cand : all) {
      const bool expect = cand.is_extremal && cand.family == kind;
      const double res = normalize_el(*cand.f, Dim(3), p).residual;
      CAPTURE(p);
      CAPTURE(res);
      CHECK((res <= 1e-3) == expect);
    }
  }
}

TEST_CASE("solver output at p = 2 solves the equation") {
  const auto& g = testing::grid2();
  SolverConfig cfg;
  cfg.tol_residual = 1e-8;
  const auto res = el_fixed_point(Dim(3), 2.0, initial_profile(InitKind::gaussian, Dim(3), 2.0, g), cfg);
  CHECK(res.status != SolverStatus::diverged);
  const auto norm = normalize_el(res.f, Dim(3), 2.0);
  auto f = res.f;
  for (double& v : f.values()) v *= norm.amplitude;
  CHECK(el_residual(f, Dim(3), 2.0) <= 1e-3);
}

TEST_CASE("singular solutions") {
  const double c1 = singular_constant(Dim(3), 2.0, 1.0);
  CHECK(std::isfinite(c1));
  CHECK(c1 > 0.0);
  for (double r : {0.5, 2.0}) CHECK(singular_constant(Dim(3), 2.0, r) == Approx(c1).epsilon(1e-4));
  CHECK(c1 == Approx(fixture("singular_constant", 2.0)).epsilon(1e-8));
  CHECK(singular_constant(Dim(3), 4.0) == Approx(fixture("singular_constant", 4.0)).epsilon(1e-8));
  CHECK_THROWS_AS(singular_constant(Dim(3), 1.0), DomainError);
  CHECK_THROWS_AS(singular_constant(Dim(3), 2.0, 0.0), DomainError);
}

}  // TEST_SUITE
