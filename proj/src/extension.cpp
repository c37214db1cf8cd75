#include "halfext/extension.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "halfext/errors.hpp"
#include "halfext/parallel.hpp"
#include "halfext/quadrature.hpp"

namespace halfext {

namespace {

double check_t(double t, const char* who) {
  if (!(t > 0.0)) throw DomainError(std::string(who) + ": t must be > 0");
  return t;
}

// Angular integral int_0^pi sin^{n-3}(th) h(1 - cos th) dth with geometric
// panels refined towards th = 0, where the integrand peaks when A - B is small.
template <class H>
double angular_integral(int n, double width, int order, H h) {
  const int per_panel = std::max(16, order / 4);
  const QuadratureRule& ref = gauss_legendre(per_panel);
  std::vector<double> edges{0.0};
  double e = std::min(std::numbers::pi, std::max(width, 1e-12));
  while (e < std::numbers::pi) {
    edges.push_back(e);
    e *= 2.0;
  }
  edges.push_back(std::numbers::pi);
  double sum = 0.0;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double a = edges[p], b = edges[p + 1];
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int j = 0; j < per_panel; ++j) {
      const double th = mid + half * ref.nodes[j];
      const double sh = std::sin(0.5 * th);
      sum += half * ref.weights[j] * std::pow(std::sin(th), n - 3) * h(2.0 * sh * sh);
    }
  }
  return sum;
}

}  // namespace

RingKernel::RingKernel(Dim n_, int quad_order_) : n(n_), quad_order(quad_order_) {
  if (quad_order < 32) throw DomainError("RingKernel: quad_order must be >= 32");
}

double RingKernel::operator()(double r, double s, double t) const {
  const int nn = n.value();
  if (nn == 2 || nn == 3 || nn == 4) return ring_kernel(n, r, s, t);
  return ring_kernel_quadrature(n, r, s, t, quad_order);
}

double ring_kernel(Dim n, double r, double s, double t) {
  check_t(t, "ring_kernel");
  const int nn = n.value();
  const double c = poisson_constant(nn);
  const double amb = (r - s) * (r - s) + t * t;  // A - B
  const double apb = (r + s) * (r + s) + t * t;  // A + B
  switch (nn) {
    case 2: return c * t * (1.0 / amb + 1.0 / apb);
    case 3: {
      const double k = std::sqrt(std::max(0.0, 1.0 - amb / apb));
      return c * t * 4.0 * std::comp_ellint_2(k) / (amb * std::sqrt(apb));
    }
    case 4: return c * t * 4.0 * std::numbers::pi / (amb * apb);
    default: return ring_kernel_quadrature(n, r, s, t);
  }
}

double ring_kernel_quadrature(Dim n, double r, double s, double t, int order) {
  check_t(t, "ring_kernel_quadrature");
  const int nn = n.value();
  if (nn == 2) return ring_kernel(n, r, s, t);
  const double amb = (r - s) * (r - s) + t * t;
  const double b = 2.0 * r * s;
  const double c = poisson_constant(nn) * t * sphere_area(nn - 2);
  if (b == 0.0) return poisson_constant(nn) * t * sphere_area(nn - 1) * std::pow(amb, -0.5 * nn);
  const double width = std::sqrt(amb / b);
  const double half_n = 0.5 * nn;
  return c * angular_integral(nn, width, order,
                              [&](double one_minus_cos) { return std::pow(amb + b * one_minus_cos, -half_n); });
}

double ring_kernel_q(Dim n, double r, double s, double t, int order) {
  check_t(t, "ring_kernel_q");
  const int nn = n.value();
  if (nn == 2) return qt_profile(n, t, std::abs(r - s)) + qt_profile(n, t, r + s);
  const double amb = (r - s) * (r - s) + t * t;
  const double b = 2.0 * r * s;
  const double c = poisson_constant(nn) * sphere_area(nn - 2);
  if (b == 0.0) return sphere_area(nn - 1) * qt_profile(n, t, std::abs(r - s));
  const double width = std::sqrt(amb / b);
  const double half_n = 0.5 * nn;
  const double t2 = t * t;
  return c * angular_integral(nn, width, order, [&](double omc) {
    const double a = amb + b * omc;
    return std::sqrt(std::max(0.0, a - t2)) * std::pow(a, -half_n);
  });
}

namespace {

// Visits quadrature points (s, weight) for int_0^{upper} g(s) ds around the
// near-diagonal point s = r at height t. The window |s - r| < 4t is mapped by
// s = r + t tan(phi); outside it, panels grow geometrically in |s - r| so the
// kernel's t / (s-r)^2 decay and the data are both resolved.
template <class Visit>
void radial_plan(double r, double t, double upper, int order, double grade_exponent, double data_scale,
                 Visit visit) {
  struct Panel {
    double a, b;
    bool mapped;
  };
  std::vector<Panel> panels;
  const double near = 4.0 * t;
  auto add_side = [&](double lo, double hi, bool left) {
    // [lo, hi] lies on one side of r; refine geometrically towards r.
    const double dist_far = left ? r - lo : hi - r;
    double d_in = left ? r - hi : lo - r;
    if (d_in < near) {
      const double d = std::min(near, dist_far);
      if (left) panels.push_back({r - d, hi, true});
      else panels.push_back({lo, r + d, true});
      d_in = d;
    }
    while (d_in < dist_far) {
      const double d = std::min(4.0 * d_in, dist_far);
      if (left) panels.push_back({r - d, r - d_in, false});
      else panels.push_back({r + d_in, r + d, false});
      d_in = d;
    }
  };
  if (r > 0.0) {
    panels.push_back({0.0, 0.5 * r, false});
    add_side(0.5 * r, r, true);
    add_side(r, 2.0 * r + 2.0 * t, false);
  } else {
    panels.push_back({0.0, 2.0 * t, true});
  }
  // Far field: geometric panels out to a multiple of the data scale, then
  // s = X / v on v in (0, 1].
  double b = r > 0.0 ? 2.0 * r + 2.0 * t : 2.0 * t;
  const double far = std::max(8.0 * b, 16.0 * data_scale);
  while (b < far) {
    const double e = std::min(8.0 * b, far);
    panels.push_back({b, e, false});
    b = e;
  }
  panels.push_back({far, kInfinity, false});
  std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  // The data vary on the scale of data_scale: keep panels within a factor 8
  // in s across [data_scale/64, far].
  {
    std::vector<double> marks;
    for (double m = data_scale / 64.0; m < far; m *= 8.0) marks.push_back(m);
    std::vector<Panel> split;
    for (const Panel& p : panels) {
      double a = p.a;
      for (double m : marks)
        if (m > a * 1.0000001 && m < p.b * 0.9999999) {
          split.push_back({a, m, p.mapped});
          a = m;
        }
      split.push_back({a, p.b, p.mapped});
    }
    panels = std::move(split);
  }
  if (std::isfinite(upper)) {
    std::vector<Panel> clipped;
    for (Panel p : panels) {
      if (p.a >= upper) break;
      p.b = std::min(p.b, upper);
      clipped.push_back(p);
    }
    panels = std::move(clipped);
  }
  const QuadratureRule& ref = gauss_legendre(order);
  const int outer_order = std::max(8, order / 2);
  const QuadratureRule& outer = gauss_legendre(outer_order);
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const double a = panels[p].a, b = panels[p].b;
    if (!(b > a)) continue;
    if (p == 0 && grade_exponent != 1.0) {
      // s = b v^m on v in [0,1]
      for (int j = 0; j < order; ++j) {
        const double v = 0.5 * (ref.nodes[j] + 1.0);
        const double s = b * std::pow(v, grade_exponent);
        const double ds = b * grade_exponent * std::pow(v, grade_exponent - 1.0) * 0.5;
        visit(s, ref.weights[j] * ds);
      }
      continue;
    }
    if (std::isinf(b)) {
      for (int j = 0; j < order; ++j) {
        const double v = 0.5 * (ref.nodes[j] + 1.0);
        visit(a / v, 0.5 * ref.weights[j] * a / (v * v));
      }
      continue;
    }
    if (!panels[p].mapped) {
      const QuadratureRule& rule = (p == 0) ? ref : outer;
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (std::size_t j = 0; j < rule.nodes.size(); ++j) visit(mid + half * rule.nodes[j], half * rule.weights[j]);
      continue;
    }
    const double pa = std::atan((a - r) / t);
    const double pb = std::atan((b - r) / t);
    const double mid = 0.5 * (pa + pb), half = 0.5 * (pb - pa);
    for (int j = 0; j < order; ++j) {
      const double phi = mid + half * ref.nodes[j];
      const double c = std::cos(phi);
      if (c <= 0.0) continue;
      const double s = r + t * std::tan(phi);
      visit(std::max(s, 0.0), half * ref.weights[j] * t / (c * c));
    }
  }
}

double grade_for(int n, double origin_power) {
  if (origin_power == 0.0) return 1.0;
  const double e = n - 1 + origin_power;
  if (!(e > 0.0)) throw DivergenceError("radial integral: singularity at the origin not integrable");
  return 1.0 / e;
}

}  // namespace

double radial_convolve(Dim n, KernelKind kind, const std::function<double(double)>& g, double r,
                       double t, int order, double data_scale, double origin_power) {
  check_t(t, "radial_convolve");
  const int nn = n.value();
  double sum = 0.0;
  radial_plan(r, t, kInfinity, order, grade_for(nn, origin_power), data_scale, [&](double s, double w) {
    const double k = kind == KernelKind::poisson ? ring_kernel(n, r, s, t) : ring_kernel_q(n, r, s, t);
    sum += w * k * std::pow(s, nn - 2) * g(s);
  });
  return sum;
}

ExtensionOperator::ExtensionOperator(HalfspaceGrid grid, ExtensionOptions options)
    : grid_(std::move(grid)), options_(options) {
  if (grid_.radial.dim() != grid_.n - 1) throw DomainError("ExtensionOperator: radial grid must have d = n-1");
  if (options_.panel_order < 8) throw DomainError("ExtensionOperator: panel_order must be >= 8");
  nr_ = grid_.radial.size();
  nt_ = grid_.heights.size();
  r_last_ = grid_.radial.nodes().back();
  dense_.assign(nr_ * nr_ * nt_, 0.0);
  std::vector<std::vector<TailTerm>> tails(nr_ * nt_);
  parallel_for(nr_ * nt_, [&](std::size_t row) {
    const std::size_t k = row / nr_, i = row % nr_;
    Row built = build_row(grid_.radial.nodes()[i], grid_.heights.nodes()[k]);
    std::copy(built.dense.begin(), built.dense.end(), dense_.begin() + row * nr_);
    tails[row] = std::move(built.tail);
  });
  tail_offset_.assign(nr_ * nt_ + 1, 0);
  for (std::size_t row = 0; row < tails.size(); ++row) tail_offset_[row + 1] = tail_offset_[row] + tails[row].size();
  tail_.reserve(tail_offset_.back());
  for (auto& tl : tails) tail_.insert(tail_.end(), tl.begin(), tl.end());
}

ExtensionOperator::Row ExtensionOperator::build_row(double r, double t) const {
  check_t(t, "ExtensionOperator");
  const Dim n(grid_.n);
  const int nn = grid_.n;
  const RadialGrid& g = grid_.radial;
  Row row;
  row.dense.assign(g.size(), 0.0);
  const double upper = g.power_tail() ? kInfinity : g.r_max();
  const double rn = g.nodes().back();
  Stencil st;
  const double data_scale = g.power_tail() ? g.scale() : g.r_max();
  radial_plan(r, t, upper, options_.panel_order, grade_for(nn, options_.origin_power), data_scale, [&](double s, double w) {
    const double k = ring_kernel(n, r, s, t);
    const double coef = w * k * std::pow(s, nn - 2);
    if (coef == 0.0) return;
    switch (g.stencil(s, st)) {
      case Region::interior:
        for (int j = 0; j < st.count; ++j) row.dense[st.index[j]] += coef * st.weight[j];
        break;
      case Region::head: row.dense[0] += coef; break;
      case Region::tail:
        row.tail.push_back({coef, std::log(rn / s), 0.5 * std::log((rn * rn + t * t) / (s * s + t * t))});
        break;
      case Region::outside: break;
    }
  });
  return row;
}

namespace {

double apply_row(const double* dense, const double* values, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += dense[i] * values[i];
  return s;
}

double tail_sum_f(const std::vector<ExtensionOperator::TailTerm>& terms, std::size_t begin, std::size_t end,
                  double k) {
  double s = 0.0;
  for (std::size_t j = begin; j < end; ++j) s += terms[j].coef * std::exp(k * terms[j].log_ratio_f);
  return s;
}

double decay_exponent_for(const RadialFn& f) {
  if (!f.grid().power_tail()) return kInfinity;
  const double k = f.tail_exponent();
  if (f.values().back() != 0.0 && !(k > 0.0))
    throw DivergenceError("Poisson extension: input does not decay (tail exponent <= 0)");
  return k;
}

RadialFn on_grid(const RadialFn& f, const RadialGrid& grid) {
  if (f.grid() == grid) return f;
  RadialFn out = RadialFn::sample(grid, [&](double r) { return f(r); });
  return out;
}

}  // namespace

AxisymFn ExtensionOperator::extend(const RadialFn& f_in) const {
  const RadialFn f = on_grid(f_in, grid_.radial);
  const double k = decay_exponent_for(f);
  const double fn = f.values().back();
  AxisymFn u = AxisymFn::zeros(grid_);
  auto& out = u.values();
  const double* v = f.values().data();
  parallel_for(nt_, [&](std::size_t kk) {
    for (std::size_t i = 0; i < nr_; ++i) {
      const std::size_t row = kk * nr_ + i;
      double s = apply_row(&dense_[row * nr_], v, nr_);
      if (fn != 0.0 && std::isfinite(k)) s += fn * tail_sum_f(tail_, tail_offset_[row], tail_offset_[row + 1], k);
      out[row] = s;
    }
  });
  return u;
}

double ExtensionOperator::extend_at(const RadialFn& f_in, double r, double t) const {
  const RadialFn f = on_grid(f_in, grid_.radial);
  const double k = decay_exponent_for(f);
  const Row row = build_row(std::abs(r), t);
  double s = apply_row(row.dense.data(), f.values().data(), nr_);
  if (f.values().back() != 0.0 && std::isfinite(k))
    s += f.values().back() * tail_sum_f(row.tail, 0, row.tail.size(), k);
  return s;
}

std::vector<double> ExtensionOperator::height_tail_exponents(const AxisymFn& u) const {
  std::vector<double> ks(nt_, kInfinity);
  if (!grid_.radial.power_tail()) return ks;
  const auto& r = grid_.radial.nodes();
  std::size_t first = nr_;
  while (first > 0 && r[first - 1] >= 0.1 * r.back()) --first;
  first = std::min(first, nr_ - 4);
  for (std::size_t k = 0; k < nt_; ++k) {
    const double t = grid_.heights.nodes()[k];
    double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
    bool zero = false;
    for (std::size_t i = first; i < nr_; ++i) {
      const double v = std::abs(u.at(i, k));
      if (!(v > 0.0)) {
        zero = true;
        break;
      }
      const double x = 0.5 * std::log(r[i] * r[i] + t * t), y = std::log(v);
      sx += x, sy += y, sxx += x * x, sxy += x * y, cnt += 1;
    }
    if (zero) continue;
    const double denom = cnt * sxx - sx * sx;
    if (!(denom > 0.0)) continue;
    const double kk = -(cnt * sxy - sx * sy) / denom;
    ks[k] = kk > 60.0 ? kInfinity : std::max(kk, 0.0);
  }
  return ks;
}

RadialFn ExtensionOperator::dual(const AxisymFn& u) const {
  if (u.grid().radial != grid_.radial || u.grid().heights != grid_.heights)
    throw DomainError("ExtensionOperator::dual: u must live on the operator grid");
  const std::vector<double> ks = height_tail_exponents(u);
  const auto& wt = grid_.heights.weights();
  std::vector<double> g(nr_, 0.0);
  parallel_for(nr_, [&](std::size_t j) {
    double total = 0.0;
    for (std::size_t k = 0; k < nt_; ++k) {
      const std::size_t row = k * nr_ + j;
      double s = apply_row(&dense_[row * nr_], &u.values()[k * nr_], nr_);
      const double un = u.at(nr_ - 1, k);
      if (un != 0.0 && std::isfinite(ks[k])) {
        double tl = 0.0;
        for (std::size_t m = tail_offset_[row]; m < tail_offset_[row + 1]; ++m)
          tl += tail_[m].coef * std::exp(ks[k] * tail_[m].log_ratio_u);
        s += un * tl;
      }
      total += wt[k] * s;
    }
    g[j] = total;
  });
  return RadialFn(grid_.radial, std::move(g));
}

double ExtensionOperator::dual_at(const AxisymFn& u, double s) const {
  if (u.grid().radial != grid_.radial || u.grid().heights != grid_.heights)
    throw DomainError("ExtensionOperator::dual_at: u must live on the operator grid");
  const std::vector<double> ks = height_tail_exponents(u);
  const auto& wt = grid_.heights.weights();
  double total = 0.0;
  for (std::size_t k = 0; k < nt_; ++k) {
    const Row row = build_row(std::abs(s), grid_.heights.nodes()[k]);
    double v = apply_row(row.dense.data(), &u.values()[k * nr_], nr_);
    const double un = u.at(nr_ - 1, k);
    if (un != 0.0 && std::isfinite(ks[k]))
      for (const auto& term : row.tail) v += un * term.coef * std::exp(ks[k] * term.log_ratio_u);
    total += wt[k] * v;
  }
  return total;
}

std::shared_ptr<const ExtensionOperator> shared_extension_operator(const HalfspaceGrid& grid,
                                                                   ExtensionOptions options) {
  using Key = std::tuple<const void*, const void*, int, int, double>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const ExtensionOperator>> cache;
  const Key key{grid.radial.id(), grid.heights.id(), grid.n, options.panel_order, options.origin_power};
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto op = std::make_shared<const ExtensionOperator>(grid, options);
  std::lock_guard<std::mutex> lock(mutex);
  auto [it, inserted] = cache.emplace(key, op);
  return it->second;
}

HalfspaceGrid halfspace_grid_for(int n, const RadialGrid& radial, int height_count) {
  using Key = std::tuple<const void*, int, int>;
  static std::mutex mutex;
  static std::map<Key, HalfspaceGrid> cache;
  if (radial.dim() != n - 1) throw DomainError("halfspace_grid_for: radial grid must have d = n-1");
  std::lock_guard<std::mutex> lock(mutex);
  const Key key{radial.id(), n, height_count};
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  HalfspaceGrid g;
  g.n = n;
  g.radial = radial;
  const double scale = radial.mapping() == Mapping::custom || radial.mapping() == Mapping::linear
                           ? radial.r_max()
                           : radial.scale();
  g.heights = build_radial_grid(1, height_count, Mapping::tan, scale);
  cache.emplace(key, g);
  return g;
}

AxisymFn poisson_extend(const RadialFn& f, const HalfspaceGrid& grid) {
  return shared_extension_operator(grid)->extend(f);
}

RadialFn dual_extend(const AxisymFn& u, const RadialGrid& grid) {
  auto op = shared_extension_operator(u.grid());
  if (grid == u.grid().radial) return op->dual(u);
  std::vector<double> g(grid.size());
  parallel_for(grid.size(), [&](std::size_t j) { g[j] = op->dual_at(u, grid.nodes()[j]); });
  return RadialFn(grid, std::move(g));
}

double slab_mass(const RadialFn& f, double a, int height_order) {
  if (!(a > 0.0)) throw DomainError("slab_mass: a must be > 0");
  if (!f.nonnegative()) throw DomainError("slab_mass: f must be nonnegative");
  const RadialGrid& g = f.grid();
  HalfspaceGrid hg;
  hg.n = g.dim() + 1;
  hg.radial = g;
  hg.heights = build_radial_grid(1, 16, Mapping::linear, a);
  ExtensionOperator op(hg);
  const QuadratureRule rule = gauss_legendre(height_order, 0.0, a);
  std::vector<double> layer(rule.nodes.size(), 0.0);
  parallel_for(rule.nodes.size(), [&](std::size_t m) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g.weights()[i] * op.extend_at(f, g.nodes()[i], rule.nodes[m]);
    layer[m] = g.sphere() * s;
  });
  double mass = 0.0;
  for (std::size_t m = 0; m < layer.size(); ++m) mass += rule.weights[m] * layer[m];
  return mass;
}

double commutator_gap(const RadialFn& f, double phi_lip, const RadialFn& phi, double t) {
  check_t(t, "commutator_gap");
  if (!(phi_lip >= 0.0)) throw DomainError("commutator_gap: phi_lip must be >= 0");
  if (!f.nonnegative()) throw DomainError("commutator_gap: f must be nonnegative");
  const Dim n(f.grid().dim() + 1);
  const auto& nodes = f.grid().nodes();
  std::vector<double> gap(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t i) {
    const double r = nodes[i];
    const double lhs_a = radial_convolve(n, KernelKind::poisson, [&](double s) { return phi(s) * f(s); }, r, t);
    const double lhs_b = phi(r) * radial_convolve(n, KernelKind::poisson, [&](double s) { return f(s); }, r, t);
    const double rhs =
        phi_lip * t * radial_convolve(n, KernelKind::q_profile, [&](double s) { return f(s); }, r, t);
    gap[i] = std::abs(lhs_a - lhs_b) - rhs;
  });
  return *std::max_element(gap.begin(), gap.end());
}

}  // namespace halfext
