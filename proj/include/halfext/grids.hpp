#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace halfext {

/// How Gauss-Legendre nodes on a reference interval are mapped to radii.
///   tan:    r = scale * tan(theta), theta in [0, pi/2]; covers [0, inf)
///   exp:    r = scale * exp(u),     u in [-14, 14]; tails added analytically
///   linear: r in [0, scale]; functions vanish beyond scale
///   custom: caller-supplied nodes, weights and cell edges (step functions)
enum class Mapping { tan, exp, linear, custom };

std::string to_string(Mapping m);
Mapping mapping_from_string(const std::string& name);

/// Interpolation stencil into a grid. Negative indices never appear; nodes
/// reflected through r = 0 are reported with their original index.
struct Stencil {
  int count = 0;
  std::array<int, 8> index{};
  std::array<double, 8> weight{};
  std::array<bool, 8> mirrored{};
};

enum class Region { interior, head, tail, outside };

/// Immutable quadrature mesh for integrals of the form
/// int_0^inf g(r) r^{d-1} dr. Copies share the same underlying data, so a
/// grid can be used as a cache key through id().
class RadialGrid {
 public:
  RadialGrid() = default;

  int dim() const;
  Mapping mapping() const;
  double scale() const;
  std::size_t size() const;
  const std::vector<double>& nodes() const;
  /// Weights already include the Jacobian r^{d-1}.
  const std::vector<double>& weights() const;
  /// Cell edges for custom grids (size()+1 values); empty otherwise.
  const std::vector<double>& edges() const;
  double r_min_edge() const;
  double r_max() const;
  /// Measure of the unit sphere S^{d-1}.
  double sphere() const;
  /// True when functions are extended past the last node by a power law.
  bool power_tail() const;

  double coordinate(double r) const;
  /// Stencil for evaluation at r. With reflect, nodes mirrored through
  /// r = 0 extend the window (valid for even functions); otherwise the
  /// window is one-sided near the origin.
  Region stencil(double r, Stencil& out, bool reflect = true) const;

  const void* id() const { return data_.get(); }
  bool valid() const { return static_cast<bool>(data_); }
  bool operator==(const RadialGrid& other) const { return data_ == other.data_; }

  struct Data;

 private:
  explicit RadialGrid(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
  std::shared_ptr<const Data> data_;

  friend RadialGrid build_radial_grid(int d, int count, Mapping mapping, double scale);
  friend RadialGrid build_custom_grid(int d, std::vector<double> nodes,
                                      std::vector<double> weights, std::vector<double> edges);
};

RadialGrid build_radial_grid(int d, int count, Mapping mapping = Mapping::tan, double scale = 1.0);

/// Step-function grid: cell i is [edges[i], edges[i+1]) with node nodes[i].
RadialGrid build_custom_grid(int d, std::vector<double> nodes, std::vector<double> weights,
                             std::vector<double> edges);

/// Decay exponent k of |f| ~ r^{-k} from a least-squares fit over the last
/// decade of nodes. Returns +inf for compactly supported or super-polynomial
/// decay (any zero sample, or k > 60).
double fit_tail_exponent(const RadialGrid& grid, const std::vector<double>& values);

/// Radial function sampled on the nodes of a RadialGrid.
class RadialFn {
 public:
  RadialFn() = default;
  RadialFn(RadialGrid grid, std::vector<double> values);

  static RadialFn sample(const RadialGrid& grid, const std::function<double(double)>& f);

  const RadialGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Declared decay exponent if set, otherwise fitted from the samples.
  double tail_exponent() const;
  void set_tail_exponent(double k) {
    tail_exponent_ = k;
    has_tail_exponent_ = true;
  }
  void clear_tail_exponent();

  double value_at_zero() const;
  void set_value_at_zero(double v) { value_at_zero_ = v; has_value_at_zero_ = true; }

  bool nonnegative() const;

  /// Lagrange interpolation in the mapped coordinate (8 points), power-law
  /// tail past the last node, zero outside compact grids.
  double operator()(double r) const;

 private:
  RadialGrid grid_;
  std::vector<double> values_;
  double tail_exponent_ = 0.0;
  bool has_tail_exponent_ = false;
  double value_at_zero_ = 0.0;
  bool has_value_at_zero_ = false;

};

/// Product mesh (radius of x' on R^{n-1}) x (height x_n).
struct HalfspaceGrid {
  int n = 3;
  RadialGrid radial;
  RadialGrid heights;

  const void* id() const { return radial.id(); }
};

HalfspaceGrid build_halfspace_grid(int n, int radial_count, int height_count,
                                   Mapping mapping = Mapping::tan, double scale = 1.0);

/// Axisymmetric function u(|x'|, x_n), stored height-major:
/// values[k * Nr + i] = u(r_i, t_k).
class AxisymFn {
 public:
  AxisymFn() = default;
  AxisymFn(HalfspaceGrid grid, std::vector<double> values);

  static AxisymFn zeros(const HalfspaceGrid& grid);
  static AxisymFn sample(const HalfspaceGrid& grid, const std::function<double(double, double)>& u);

  const HalfspaceGrid& grid() const { return grid_; }
  std::size_t radial_size() const { return grid_.radial.size(); }
  std::size_t height_size() const { return grid_.heights.size(); }
  double at(std::size_t i, std::size_t k) const { return values_[k * radial_size() + i]; }
  double& at(std::size_t i, std::size_t k) { return values_[k * radial_size() + i]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Tensor Lagrange interpolation in mapped coordinates. Below the first
  /// height the stencil extrapolates one-sidedly; outside the mesh box the
  /// value is continued along the ray through the origin with a locally
  /// fitted power law.
  double evaluate(double r, double t) const;

 private:
  double evaluate_inside(double r, double t) const;
  HalfspaceGrid grid_;
  std::vector<double> values_;
};

/// (|S^{d-1}| int |f|^p r^{d-1} dr)^{1/p}.
double lp_norm_boundary(const RadialFn& f, double p);
/// (|S^{n-2}| int int |u|^p r^{n-2} dr dt)^{1/p}.
double lp_norm_halfspace(const AxisymFn& u, double p);

/// sup over sampled levels v of v * |{|u| >= v}|^{1/p}.
double weak_lp_norm(const AxisymFn& u, double p);
double weak_lp_norm(const RadialFn& f, double p);

/// Quadrature measure of {x : u(x) > level}.
double distribution_mass(const AxisymFn& u, double level);

void write_csv(std::ostream& os, const RadialFn& f);
void write_csv(std::ostream& os, const AxisymFn& u);

struct RadialSamples {
  std::vector<double> r, value;
};
RadialSamples read_radial_csv(std::istream& is);

}  // namespace halfext
