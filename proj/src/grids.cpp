#include "halfext/grids.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "halfext/errors.hpp"
#include "halfext/interpolation.hpp"
#include "halfext/kernel.hpp"
#include "halfext/quadrature.hpp"

namespace halfext {

namespace {
constexpr double kExpHalfWidth = 14.0;
constexpr int kStencil = 8;
}  // namespace

struct RadialGrid::Data {
  int d = 1;
  Mapping mapping = Mapping::tan;
  double scale = 1.0;
  std::vector<double> nodes, weights, coords, edges;
  double r_max = kInfinity;
  double r_min_edge = 0.0;
  double sphere = 2.0;
};

std::string to_string(Mapping m) {
  switch (m) {
    case Mapping::tan: return "tan";
    case Mapping::exp: return "exp";
    case Mapping::linear: return "linear";
    case Mapping::custom: return "custom";
  }
  return "unknown";
}

Mapping mapping_from_string(const std::string& name) {
  if (name == "tan") return Mapping::tan;
  if (name == "exp") return Mapping::exp;
  if (name == "linear") return Mapping::linear;
  if (name == "custom") return Mapping::custom;
  throw DomainError("unknown grid mapping '" + name + "'");
}

int RadialGrid::dim() const { return data_->d; }
Mapping RadialGrid::mapping() const { return data_->mapping; }
double RadialGrid::scale() const { return data_->scale; }
std::size_t RadialGrid::size() const { return data_ ? data_->nodes.size() : 0; }
const std::vector<double>& RadialGrid::nodes() const { return data_->nodes; }
const std::vector<double>& RadialGrid::weights() const { return data_->weights; }
const std::vector<double>& RadialGrid::edges() const { return data_->edges; }
double RadialGrid::r_min_edge() const { return data_->r_min_edge; }
double RadialGrid::r_max() const { return data_->r_max; }
double RadialGrid::sphere() const { return data_->sphere; }
bool RadialGrid::power_tail() const {
  return data_->mapping == Mapping::tan || data_->mapping == Mapping::exp;
}

double RadialGrid::coordinate(double r) const {
  switch (data_->mapping) {
    case Mapping::tan: return std::atan(r / data_->scale);
    case Mapping::exp: return std::log(r / data_->scale);
    default: return r;
  }
}

Region RadialGrid::stencil(double r, Stencil& out, bool reflect) const {
  const Data& g = *data_;
  const int n = static_cast<int>(g.nodes.size());
  r = std::abs(r);
  out.count = 0;
  if (g.mapping == Mapping::custom) {
    if (r >= g.edges.back()) return Region::outside;
    auto it = std::upper_bound(g.edges.begin(), g.edges.end(), r);
    const int cell = std::clamp(static_cast<int>(it - g.edges.begin()) - 1, 0, n - 1);
    out.count = 1;
    out.mirrored[0] = false;
    out.index[0] = cell;
    out.weight[0] = 1.0;
    return Region::interior;
  }
  if (g.mapping == Mapping::linear && r > g.r_max) return Region::outside;
  if (g.mapping != Mapping::linear && r > g.nodes.back()) return Region::tail;
  if (g.mapping == Mapping::exp && r < g.nodes.front()) return Region::head;

  const double x = coordinate(r);
  const int m = std::min(kStencil, n);
  const int pos = static_cast<int>(std::upper_bound(g.coords.begin(), g.coords.end(), x) - g.coords.begin());
  const bool mirror = reflect && g.mapping != Mapping::exp;
  int start = pos - m / 2;
  start = std::min(start, n - m);
  start = std::max(start, mirror ? -m / 2 : 0);
  double xs[kStencil];
  for (int j = 0; j < m; ++j) {
    const int idx = start + j;
    out.mirrored[j] = idx < 0;
    if (idx < 0) {
      out.index[j] = -idx - 1;
      xs[j] = -g.coords[-idx - 1];
    } else {
      out.index[j] = idx;
      xs[j] = g.coords[idx];
    }
  }
  lagrange_weights(xs, m, x, out.weight.data());
  out.count = m;
  return Region::interior;
}

RadialGrid build_radial_grid(int d, int count, Mapping mapping, double scale) {
  if (d < 1) throw DomainError("build_radial_grid: d must be >= 1");
  if (count < 16) throw DomainError("build_radial_grid: need at least 16 nodes");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("build_radial_grid: scale must be > 0");
  if (mapping == Mapping::custom) throw DomainError("build_radial_grid: use build_custom_grid");
  auto data = std::make_shared<RadialGrid::Data>();
  data->d = d;
  data->mapping = mapping;
  data->scale = scale;
  data->sphere = sphere_area(d);
  const QuadratureRule& ref = gauss_legendre(count);
  data->nodes.resize(count);
  data->weights.resize(count);
  data->coords.resize(count);
  const double half_pi = 0.5 * std::numbers::pi;
  for (int i = 0; i < count; ++i) {
    double r = 0.0, jac = 0.0, x = 0.0;
    switch (mapping) {
      case Mapping::tan: {
        x = half_pi * 0.5 * (ref.nodes[i] + 1.0);
        const double c = std::cos(x);
        r = scale * std::tan(x);
        jac = half_pi * 0.5 * scale / (c * c);
        break;
      }
      case Mapping::exp: {
        x = kExpHalfWidth * ref.nodes[i];
        r = scale * std::exp(x);
        jac = kExpHalfWidth * r;
        break;
      }
      case Mapping::linear: {
        x = 0.5 * scale * (ref.nodes[i] + 1.0);
        r = x;
        jac = 0.5 * scale;
        break;
      }
      default: break;
    }
    data->nodes[i] = r;
    data->coords[i] = x;
    data->weights[i] = ref.weights[i] * jac * std::pow(r, d - 1);
  }
  switch (mapping) {
    case Mapping::tan: data->r_max = kInfinity; break;
    case Mapping::exp:
      data->r_max = scale * std::exp(kExpHalfWidth);
      data->r_min_edge = scale * std::exp(-kExpHalfWidth);
      break;
    case Mapping::linear: data->r_max = scale; break;
    default: break;
  }
  return RadialGrid(std::move(data));
}

RadialGrid build_custom_grid(int d, std::vector<double> nodes, std::vector<double> weights,
                             std::vector<double> edges) {
  if (d < 1) throw DomainError("build_custom_grid: d must be >= 1");
  if (nodes.empty() || weights.size() != nodes.size() || edges.size() != nodes.size() + 1)
    throw DomainError("build_custom_grid: need N nodes, N weights and N+1 edges");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!(edges[i + 1] >= edges[i])) throw DomainError("build_custom_grid: edges must not decrease");
    if (weights[i] < 0.0) throw DomainError("build_custom_grid: weights must be >= 0");
  }
  auto data = std::make_shared<RadialGrid::Data>();
  data->d = d;
  data->mapping = Mapping::custom;
  data->scale = edges.back() > 0 ? edges.back() : 1.0;
  data->sphere = sphere_area(d);
  data->coords = nodes;
  data->nodes = std::move(nodes);
  data->weights = std::move(weights);
  data->r_max = edges.back();
  data->r_min_edge = edges.front();
  data->edges = std::move(edges);
  return RadialGrid(std::move(data));
}

double fit_tail_exponent(const RadialGrid& grid, const std::vector<double>& values) {
  if (!grid.power_tail()) return kInfinity;
  const auto& r = grid.nodes();
  const std::size_t n = r.size();
  std::size_t first = n;
  while (first > 0 && r[first - 1] >= 0.1 * r.back()) --first;
  first = std::min(first, n - 4);
  double peak = 0.0;
  for (double v : values) peak = std::max(peak, std::abs(v));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double count = 0;
  for (std::size_t i = first; i < n; ++i) {
    const double v = std::abs(values[i]);
    // underflow debris is not a power tail
    if (!(v > 1e-100 * peak) || !std::isfinite(v)) return kInfinity;
    const double x = std::log(r[i]);
    const double y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    count += 1;
  }
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  const double k = -slope;
  return k > 60.0 ? kInfinity : k;
}

RadialFn::RadialFn(RadialGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_.valid()) throw DomainError("RadialFn: invalid grid");
  if (values_.size() != grid_.size()) throw DomainError("RadialFn: value count does not match grid");
  for (double v : values_)
    if (!std::isfinite(v)) throw DomainError("RadialFn: non-finite sample");
}

RadialFn RadialFn::sample(const RadialGrid& grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.nodes()[i]);
  return RadialFn(grid, std::move(v));
}

double RadialFn::tail_exponent() const {
  return has_tail_exponent_ ? tail_exponent_ : fit_tail_exponent(grid_, values_);
}

void RadialFn::clear_tail_exponent() { has_tail_exponent_ = false; }

double RadialFn::value_at_zero() const {
  if (has_value_at_zero_) return value_at_zero_;
  return (*this)(0.0);
}

bool RadialFn::nonnegative() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
}

double RadialFn::operator()(double r) const {
  Stencil st;
  switch (grid_.stencil(r, st)) {
    case Region::interior: {
      double s = 0.0;
      for (int j = 0; j < st.count; ++j) s += st.weight[j] * values_[st.index[j]];
      return s;
    }
    case Region::head: return values_.front();
    case Region::tail: {
      const double k = tail_exponent();
      if (std::isinf(k)) return 0.0;
      return values_.back() * std::pow(grid_.nodes().back() / std::abs(r), k);
    }
    case Region::outside: return 0.0;
  }
  return 0.0;
}

HalfspaceGrid build_halfspace_grid(int n, int radial_count, int height_count, Mapping mapping,
                                   double scale) {
  Dim dim(n);
  HalfspaceGrid g;
  g.n = dim.value();
  g.radial = build_radial_grid(dim.boundary(), radial_count, mapping, scale);
  g.heights = build_radial_grid(1, height_count, mapping == Mapping::linear ? Mapping::linear : Mapping::tan, scale);
  return g;
}

AxisymFn::AxisymFn(HalfspaceGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_.radial.valid() || !grid_.heights.valid()) throw DomainError("AxisymFn: invalid grid");
  if (values_.size() != grid_.radial.size() * grid_.heights.size())
    throw DomainError("AxisymFn: value count does not match grid");
  for (double v : values_)
    if (!std::isfinite(v)) throw DomainError("AxisymFn: non-finite sample");
}

AxisymFn AxisymFn::zeros(const HalfspaceGrid& grid) {
  return AxisymFn(grid, std::vector<double>(grid.radial.size() * grid.heights.size(), 0.0));
}

AxisymFn AxisymFn::sample(const HalfspaceGrid& grid, const std::function<double(double, double)>& u) {
  AxisymFn out = zeros(grid);
  const auto& r = grid.radial.nodes();
  const auto& t = grid.heights.nodes();
  for (std::size_t k = 0; k < t.size(); ++k)
    for (std::size_t i = 0; i < r.size(); ++i) out.at(i, k) = u(r[i], t[k]);
  return out;
}

double AxisymFn::evaluate_inside(double r, double t) const {
  Stencil sr, st;
  const Region rr = grid_.radial.stencil(r, sr, true);
  const Region rt = grid_.heights.stencil(t, st, false);
  if (rr == Region::outside || rt == Region::outside) return 0.0;
  if (rr != Region::interior || rt != Region::interior)
    throw NumericalError("AxisymFn::evaluate_inside: point outside mesh");
  double s = 0.0;
  for (int b = 0; b < st.count; ++b) {
    double row = 0.0;
    for (int a = 0; a < sr.count; ++a) row += sr.weight[a] * at(sr.index[a], st.index[b]);
    s += st.weight[b] * row;
  }
  return s;
}

double AxisymFn::evaluate(double r, double t) const {
  r = std::abs(r);
  if (!(t > 0.0)) throw DomainError("AxisymFn::evaluate: t must be > 0");
  const bool compact = !grid_.radial.power_tail();
  const double r_edge = compact ? grid_.radial.r_max() : grid_.radial.nodes().back();
  const double t_edge = compact ? grid_.heights.r_max() : grid_.heights.nodes().back();
  double sigma = 1.0;
  if (r > r_edge) sigma = std::min(sigma, r_edge / r);
  if (t > t_edge) sigma = std::min(sigma, t_edge / t);
  if (sigma == 1.0) return evaluate_inside(r, t);
  if (compact) return 0.0;
  const double ub = evaluate_inside(sigma * r, sigma * t);
  const double uh = evaluate_inside(0.5 * sigma * r, 0.5 * sigma * t);
  if (!(ub > 0.0) || !(uh > 0.0)) return 0.0;
  const double k = std::log(uh / ub) / std::log(2.0);
  return ub * std::pow(sigma, k);
}

namespace {

// Tail and inner-ball corrections to int |f|^p r^{d-1} dr; throws when the
// power-law tail does not converge or dominates.
double boundary_tail(const RadialGrid& g, const std::vector<double>& v, double k, double p,
                     double body) {
  if (!g.power_tail()) return 0.0;
  const int d = g.dim();
  if (!std::isinf(k) && p * k <= d)
    throw DivergenceError("lp norm: tail |f|^p r^{d-1} not integrable (p*k <= d)");
  double tail = 0.0;
  const double rn = g.nodes().back();
  const double fn = std::pow(std::abs(v.back()), p);
  if (!std::isinf(k)) {
    const double edge = g.mapping() == Mapping::exp ? g.r_max() : rn;
    tail = fn * std::pow(rn, p * k) * std::pow(edge, d - p * k) / (p * k - d);
  }
  if (tail > 0.01 * std::max(body, std::numeric_limits<double>::min()) && tail > 0.0)
    throw DivergenceError("lp norm: tail beyond the last node exceeds 1% of the integral");
  if (g.mapping() != Mapping::exp) return 0.0;
  const double r0 = g.r_min_edge();
  const double inner = std::pow(std::abs(v.front()), p) * std::pow(r0, d) / d;
  return tail + inner;
}

}  // namespace

double lp_norm_boundary(const RadialFn& f, double p) {
  if (!(p >= 1.0)) throw DomainError("lp_norm_boundary: p must be >= 1");
  const RadialGrid& g = f.grid();
  const auto& w = g.weights();
  const auto& v = f.values();
  double body = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) body += w[i] * std::pow(std::abs(v[i]), p);
  if (body == 0.0) return 0.0;
  body += boundary_tail(g, v, f.tail_exponent(), p, body);
  return std::pow(g.sphere() * body, 1.0 / p);
}

double lp_norm_halfspace(const AxisymFn& u, double p) {
  if (!(p >= 1.0)) throw DomainError("lp_norm_halfspace: p must be >= 1");
  const HalfspaceGrid& g = u.grid();
  const auto& wr = g.radial.weights();
  const auto& wt = g.heights.weights();
  const std::size_t nr = wr.size(), nt = wt.size();
  double sum = 0.0;
  for (std::size_t k = 0; k < nt; ++k) {
    double row = 0.0;
    for (std::size_t i = 0; i < nr; ++i) row += wr[i] * std::pow(std::abs(u.at(i, k)), p);
    sum += wt[k] * row;
  }
  if (sum == 0.0) return 0.0;
  if (g.radial.power_tail()) {
    std::vector<double> bottom(nr), axis(nt);
    for (std::size_t i = 0; i < nr; ++i) bottom[i] = u.at(i, 0);
    for (std::size_t k = 0; k < nt; ++k) axis[k] = u.at(0, k);
    const double kr = fit_tail_exponent(g.radial, bottom);
    const double kt = fit_tail_exponent(g.heights, axis);
    if ((!std::isinf(kr) && p * kr <= g.radial.dim()) || (!std::isinf(kt) && p * kt <= 1.0))
      throw DivergenceError("lp_norm_halfspace: tail not integrable");
  }
  return std::pow(g.radial.sphere() * sum, 1.0 / p);
}

namespace {

double weak_from_pairs(std::vector<std::pair<double, double>>& pairs, double p) {
  if (!(p > 0.0)) throw DomainError("weak_lp_norm: p must be > 0");
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  double best = 0.0, mass = 0.0;
  std::size_t i = 0;
  while (i < pairs.size()) {
    const double v = pairs[i].first;
    if (!(v > 0.0)) break;
    while (i < pairs.size() && pairs[i].first == v) mass += pairs[i++].second;
    best = std::max(best, v * std::pow(mass, 1.0 / p));
  }
  return best;
}

}  // namespace

double weak_lp_norm(const AxisymFn& u, double p) {
  const HalfspaceGrid& g = u.grid();
  const auto& wr = g.radial.weights();
  const auto& wt = g.heights.weights();
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(u.values().size());
  for (std::size_t k = 0; k < wt.size(); ++k)
    for (std::size_t i = 0; i < wr.size(); ++i)
      pairs.emplace_back(std::abs(u.at(i, k)), g.radial.sphere() * wr[i] * wt[k]);
  return weak_from_pairs(pairs, p);
}

double weak_lp_norm(const RadialFn& f, double p) {
  const RadialGrid& g = f.grid();
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < f.size(); ++i)
    pairs.emplace_back(std::abs(f[i]), g.sphere() * g.weights()[i]);
  return weak_from_pairs(pairs, p);
}

double distribution_mass(const AxisymFn& u, double level) {
  const HalfspaceGrid& g = u.grid();
  const auto& wr = g.radial.weights();
  const auto& wt = g.heights.weights();
  double mass = 0.0;
  for (std::size_t k = 0; k < wt.size(); ++k) {
    double row = 0.0;
    for (std::size_t i = 0; i < wr.size(); ++i)
      if (u.at(i, k) > level) row += wr[i];
    mass += wt[k] * row;
  }
  return g.radial.sphere() * mass;
}

void write_csv(std::ostream& os, const RadialFn& f) {
  os << "r,value\n";
  char buf[96];
  for (std::size_t i = 0; i < f.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", f.grid().nodes()[i], f[i]);
    os << buf;
  }
}

void write_csv(std::ostream& os, const AxisymFn& u) {
  os << "r,t,value\n";
  char buf[128];
  const auto& r = u.grid().radial.nodes();
  const auto& t = u.grid().heights.nodes();
  for (std::size_t k = 0; k < t.size(); ++k)
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r[i], t[k], u.at(i, k));
      os << buf;
    }
}

RadialSamples read_radial_csv(std::istream& is) {
  RadialSamples out;
  std::string line;
  if (!std::getline(is, line) || line.rfind("r,value", 0) != 0)
    throw DomainError("read_radial_csv: expected header 'r,value'");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DomainError("read_radial_csv: malformed line '" + line + "'");
    out.r.push_back(std::stod(line.substr(0, comma)));
    out.value.push_back(std::stod(line.substr(comma + 1)));
  }
  return out;
}

}  // namespace halfext
