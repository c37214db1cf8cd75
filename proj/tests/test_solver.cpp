#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "experiments.hpp"
#include "halfext/errors.hpp"
#include "halfext/moebius.hpp"
#include "halfext/solver.hpp"
#include "support.hpp"

using namespace halfext;
using doctest::Approx;

namespace {

// converged solution at (3, 4) from a Gaussian, shared by several cases
const SolverResult& conformal_solution() {
  static const SolverResult r = [] {
    SolverConfig cfg;
    cfg.tol_residual = 1e-8;
    return el_fixed_point(Dim(3), 4.0, initial_profile(InitKind::gaussian, Dim(3), 4.0, testing::grid2()), cfg);
  }();
  return r;
}

double relative_spread(const std::vector<double>& ratio) {
  const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
  return (*hi - *lo) / (*hi + *lo) * 2.0;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("conformal case from a Gaussian") {
  const auto& r = conformal_solution();
  CHECK(r.status == SolverStatus::converged);
  CHECK(r.residual <= 1e-8);
  const auto m = family_match(r.f, ExtremalKind::conformal);
  CHECK(m.error <= 1e-3);
  // mass_half gauge: the dilation parameter settles at 1
  CHECK(m.lambda == Approx(1.0).epsilon(1e-6));
  CHECK(mass_fraction(r.f, 4.0, 1.0) == Approx(0.5).epsilon(1e-8));
  CHECK(lp_norm_boundary(r.f, 4.0) == Approx(1.0).epsilon(1e-10));

  // strictly decreasing and decaying samples
  for (std::size_t i = 1; i < r.f.size(); ++i) CHECK(r.f[i] < r.f[i - 1]);
  CHECK(r.f.values().back() < 1e-3 * r.f[0]);

  // post-hoc check on the equation itself after fixing the amplitude
  const auto norm = normalize_el(r.f, Dim(3), 4.0);
  CHECK(norm.residual <= 1e-8);
}

TEST_CASE("dual case from a compact bump") {
  SolverConfig cfg;
  cfg.tol_residual = 1e-8;
  const double p = 4.0 / 3.0;
  const auto r = el_fixed_point(Dim(3), p, initial_profile(InitKind::bump, Dim(3), p, testing::grid2()), cfg);
  CHECK(r.status != SolverStatus::diverged);
  CHECK(r.status != SolverStatus::max_iters);
  CHECK(r.residual <= 1e-3);
  CHECK(family_match(r.f, ExtremalKind::dual).error <= 1e-3);
}

TEST_CASE("extremal initial data is already a fixed point") {
  SolverConfig cfg;
  cfg.tol_residual = 1e-6;
  const auto init = testing::extremal(Dim(3), ExtremalKind::conformal, testing::grid2());
  const auto r = el_fixed_point(Dim(3), 4.0, init, cfg);
  CHECK(r.status == SolverStatus::converged);
  CHECK(r.trace.rows.size() == 1);
  std::vector<double> ratio(init.size());
  for (std::size_t i = 0; i < init.size(); ++i) ratio[i] = r.f[i] / init[i];
  CHECK(relative_spread(ratio) <= 1e-6);
}

TEST_CASE("divergence is a status") {
  auto spike = testing::extremal(Dim(3), ExtremalKind::conformal, testing::grid2());
  spike.values()[5] = 1e300;
  SolverResult r;
  CHECK_NOTHROW(r = el_fixed_point(Dim(3), 4.0, spike, SolverConfig{}));
  CHECK(r.status == SolverStatus::diverged);
  CHECK(!r.message.empty());

  SolverConfig bad;
  bad.damping = 1.5;
  CHECK_THROWS_AS(el_fixed_point(Dim(3), 4.0, spike, bad), DomainError);
  CHECK_THROWS_AS(el_fixed_point(Dim(3), 1.0, spike, SolverConfig{}), DomainError);
}

TEST_CASE("trace and determinism") {
  SolverConfig cfg;
  cfg.max_iters = 15;
  const auto init = initial_profile(InitKind::wrong_family, Dim(3), 4.0, testing::grid2(), 5);
  const auto a = el_fixed_point(Dim(3), 4.0, init, cfg);
  const auto b = el_fixed_point(Dim(3), 4.0, init, cfg);
  CHECK(a.status == SolverStatus::max_iters);
  REQUIRE(a.trace.rows.size() == 15);
  REQUIRE(b.trace.rows.size() == 15);
  std::ostringstream sa, sb;
  a.trace.write_csv(sa);
  b.trace.write_csv(sb);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().rfind("iter,residual,rayleigh,lambda\n", 0) == 0);
  for (std::size_t i = 0; i < a.f.size(); ++i) CHECK(a.f[i] == b.f[i]);
  // the Rayleigh quotient never exceeds the sharp constant along the way
  for (const auto& row : a.trace.rows)
    CHECK(row.rayleigh <= sharp_constant(Dim(3), ExtremalKind::conformal) * (1.0 + 1e-3));

  // a nonzero seed perturbs the initial data
  const auto s0 = initial_profile(InitKind::gaussian, Dim(3), 4.0, testing::grid2(), 0);
  const auto s1 = initial_profile(InitKind::gaussian, Dim(3), 4.0, testing::grid2(), 1);
  bool differs = false;
  for (std::size_t i = 0; i < s0.size(); ++i) differs = differs || s0[i] != s1[i];
  CHECK(differs);
}

TEST_CASE("dilation equivariance of the map") {
  const auto& g = testing::grid2();
  const auto f = RadialFn::sample(g, [](double r) { return std::exp(-r * r) + 0.2 * std::pow(1.0 + r * r, -1.0); });
  // nodes whose dilated radius stays on the mesh; past it the comparison
  // would test tail extrapolation rather than the map
  auto check = [&](double p, double lam, double r_max, double tol) {
    const auto lhs = el_map(dilate(f, lam, p), Dim(3), p);
    const auto rhs = dilate(el_map(f, Dim(3), p), lam, p);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double r = g.nodes()[i];
      if (r / lam > g.nodes().back() || r > r_max) continue;
      worst = std::max(worst, std::abs(lhs[i] / rhs[i] - 1.0));
    }
    CAPTURE(p);
    CAPTURE(lam);
    CHECK(worst <= tol);
  };
  for (double lam : {0.5, 2.0}) check(4.0, lam, kInfinity, 1e-8);
  // at p = 2 the map's output decays like r^{-3} log r and the fitted tail
  // limits agreement further out
  for (double lam : {0.5, 2.0}) check(2.0, lam, 20.0, 1e-6);
}

TEST_CASE("mass_half gauge") {
  const auto& g = testing::grid2();
  const auto f = testing::extremal(Dim(3), ExtremalKind::conformal, g, 0.7);
  const auto mh = normalize_mass_half(f, 4.0);
  CHECK(mh.lambda == Approx(1.0 / 0.7).epsilon(1e-8));
  CHECK(mass_fraction(mh.normalized, 4.0, 1.0) == Approx(0.5).epsilon(1e-8));

  // oracle: the analytic dilate of the lambda = 0.7 profile
  boost::math::quadrature::gauss_kronrod<double, 61> gk;
  const double lam = mh.lambda;
  auto h = [&](double r) {
    const double s = r / lam;
    return std::pow(0.7 / (0.49 + s * s), 2.0) / (lam * lam) * r;
  };
  const double inside = gk.integrate(h, 0.0, 1.0, 10, 1e-14);
  const double total = gk.integrate(h, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-14);
  CHECK(std::abs(inside / total - 0.5) <= 1e-8);

  const auto unit = testing::extremal(Dim(3), ExtremalKind::conformal, g);
  CHECK(normalize_mass_half(unit, 4.0).lambda == Approx(1.0).epsilon(1e-10));
  CHECK(normalize_mass_half(dilate(unit, 2.0, 4.0), 4.0).lambda == Approx(0.5).epsilon(1e-8));
  CHECK(mass_fraction(unit, 4.0, 1.0) == Approx(0.5).epsilon(1e-10));
  CHECK_THROWS_AS(dilate(unit, 0.0, 4.0), DomainError);
}

TEST_CASE("sharp constant by ascent") {
  const auto& g = testing::grid2();
  SolverConfig cfg;
  cfg.tol_residual = 1e-8;
  cfg.seed = 3;
  const auto c4 = ascent_estimate_constant(Dim(3), 4.0, 2, cfg, g);
  CHECK(c4.estimate == Approx(sharp_constant(Dim(3), ExtremalKind::conformal)).epsilon(0.005));
  CHECK(c4.estimate <= sharp_constant(Dim(3), ExtremalKind::conformal) * (1.0 + 1e-3));
  const auto cd = ascent_estimate_constant(Dim(3), 4.0 / 3.0, 2, cfg, g);
  CHECK(cd.estimate == Approx(sharp_constant(Dim(3), ExtremalKind::dual)).epsilon(0.005));

  const auto a = ascent_estimate_constant(Dim(3), 2.0, 2, cfg, g);
  cfg.seed = 99;
  const auto b = ascent_estimate_constant(Dim(3), 2.0, 2, cfg, g);
  CHECK(a.estimate == Approx(b.estimate).epsilon(0.005));
  const auto all = app::read_derived_constants(HALFEXT_TEST_FIXTURES);
  const auto fx = app::find_constant(all, "sharp_constant_estimate", 3, 2.0);
  REQUIRE(fx.has_value());
  CHECK(a.estimate == Approx(*fx).epsilon(0.005));
}

TEST_CASE("radial centers") {
  const auto& g = testing::grid2();
  const auto radii = build_radial_grid(2, 48, Mapping::tan, 1.0);
  const double alpha = -1.0;

  const auto u = RadialFn::sample(g, [&](double r) { return std::pow(0.5 * r * r + 0.5, alpha / 2.0); });
  const auto v = boundary_inversion_polar(u, {alpha, {1.0, 0.0}}, radii);
  const auto c = radial_about_point(v, 1e-3);
  REQUIRE(c.has_value());
  CHECK(c->x == Approx(0.5).epsilon(1e-3));
  CHECK(std::abs(c->y) <= 1e-12);

  const auto self = boundary_inversion_polar(testing::extremal(Dim(3), ExtremalKind::conformal, g), {alpha, {}}, radii);
  const auto c0 = radial_about_point(self, 1e-3);
  REQUIRE(c0.has_value());
  CHECK(std::abs(c0->x) <= 1e-3);

  const auto bent = RadialFn::sample(g, [&](double r) { return std::pow(1 + r * r, alpha / 2.0) * (1 + 0.1 * r / (1 + r)); });
  CHECK_FALSE(radial_about_point(boundary_inversion_polar(bent, {alpha, {1.0, 0.0}}, radii), 1e-3).has_value());
  CHECK(best_radial_center(boundary_inversion_polar(bent, {alpha, {1.0, 0.0}}, radii)).metric > 1e-3);

  // off-axis center needs the 2-D search
  PolarSamples off;
  off.radial = radii;
  off.angles = 64;
  for (std::size_t j = 0; j < radii.size(); ++j)
    for (int m = 0; m < 64; ++m) {
      const double th = 2.0 * std::numbers::pi * m / 64, rho = radii.nodes()[j];
      const double dx = rho * std::cos(th) - 0.3, dy = rho * std::sin(th) - 0.4;
      off.values.push_back(1.0 / (1.0 + dx * dx + dy * dy));
    }
  CHECK_FALSE(radial_about_point(off, 1e-3).has_value());
  const auto c2 = radial_about_point(off, 1e-3, true);
  REQUIRE(c2.has_value());
  CHECK(c2->x == Approx(0.3).epsilon(1e-3));
  CHECK(c2->y == Approx(0.4).epsilon(1e-3));
}

TEST_CASE("converged solution is symmetric under shifted inversion") {
  const auto& r = conformal_solution();
  const auto radii = build_radial_grid(2, 48, Mapping::tan, 1.0);
  const auto v = boundary_inversion_polar(r.f, {-1.0, {1.0, 0.0}}, radii);
  CHECK(radial_about_point(v, 1e-3).has_value());
}

TEST_CASE("inverted-radial classification") {
  const auto& g = testing::grid2();
  const double alpha = -1.0;
  const auto q = classify_inverted_radial(RadialFn::sample(g, [&](double r) { return std::pow(0.3 * r * r + 0.7, alpha / 2); }), alpha);
  CHECK(q.kind == InvertedClass::quadratic_power);
  CHECK(q.c1 == Approx(0.3).epsilon(1e-8));
  CHECK(q.c2 == Approx(0.7).epsilon(1e-8));
  CHECK(classify_inverted_radial(RadialFn::sample(g, [&](double r) { return std::pow(r, alpha); }), alpha).kind ==
        InvertedClass::pure_power);
  CHECK(classify_inverted_radial(RadialFn::sample(g, [&](double r) { return std::pow(1 + r * r + 0.05 * std::sin(r), alpha / 2); }), alpha)
            .kind == InvertedClass::none);
  CHECK_THROWS_AS(classify_inverted_radial(RadialFn::sample(g, [](double) { return 1.0; }), 0.0), DomainError);

  const auto cases = app::read_classifier_cases(testing::fixture_path("classifier_cases.csv"));
  REQUIRE(cases.size() == 30);
  for (const auto& k : cases) {
    CAPTURE(k.id);
    const auto cl = classify_inverted_radial(RadialFn::sample(g, [&](double r) { return k.radial(r); }), k.alpha);
    CHECK(cl.kind == k.expected);
    double h = 0.0;
    const auto line = k.line_samples(h);
    if (k.member()) CHECK(ode_check_1d(line, h, k.alpha) <= 1e-8);
  }
}

TEST_CASE("third differences") {
  const double alpha = -1.0, h = 0.1;
  std::vector<double> a, b, e;
  for (int i = 0; i < 21; ++i) {
    const double x = -1.0 + h * i;
    a.push_back(std::pow(x * x + 1, alpha / 2));
    b.push_back(std::pow(2 * (x - 1) * (x - 1) + 3, alpha / 2));
    e.push_back(std::exp(x));
  }
  CHECK(ode_check_1d(a, h, alpha) <= 1e-8);
  CHECK(ode_check_1d(b, h, alpha) <= 1e-8);
  // u^{2/alpha} = e^x, whose third derivative is at least e^{-1} here
  CHECK(ode_check_1d(e, h, 2.0) >= 0.5 * std::exp(-1.0));
  CHECK_THROWS_AS(ode_check_1d(e, h, 0.0), DomainError);
  CHECK_THROWS_AS(ode_check_1d({1, 1, 1}, h, 2.0), DomainError);
  CHECK_THROWS_AS(ode_check_1d(e, 0.0, 2.0), DomainError);
}

}  // TEST_SUITE
