#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "halfext/grids.hpp"
#include "halfext/kernel.hpp"

namespace halfext {

/// Angular reduction of the Poisson kernel for radial data:
///   K(r,s,t) = (2/(n omega_n)) t int_{S^{n-2}} (r^2+s^2-2rs w_1+t^2)^{-n/2} dsigma(w)
/// so that (Pf)(r,t) = int_0^inf K(r,s,t) f(s) s^{n-2} ds.
/// n = 2, 3, 4 use closed forms; other n use angular Gauss-Legendre.
struct RingKernel {
  explicit RingKernel(Dim n, int quad_order = 64);
  double operator()(double r, double s, double t) const;

  Dim n;
  int quad_order;
};

double ring_kernel(Dim n, double r, double s, double t);

/// Angular quadrature path, valid for every n >= 3 (n = 2 has no angular
/// integral). Used for n >= 5 and as an independent check of the closed forms.
double ring_kernel_quadrature(Dim n, double r, double s, double t, int order = 64);

/// Angular reduction of Q_t = P_t |xi| / t, always by quadrature.
double ring_kernel_q(Dim n, double r, double s, double t, int order = 64);

enum class KernelKind { poisson, q_profile };

/// (K_t * g)(r) for a radial g given pointwise, with the radial integral
/// split at s = r and mapped through s = r + t tan(phi). data_scale is the
/// radius beyond which g is assumed to follow its asymptotic power law;
/// origin_power != 0 grades the first panel for g ~ s^{origin_power}.
double radial_convolve(Dim n, KernelKind kind, const std::function<double(double)>& g, double r,
                       double t, int order = 48, double data_scale = 1.0, double origin_power = 0.0);

struct ExtensionOptions {
  /// Gauss-Legendre points per radial panel.
  int panel_order = 48;
  /// Known behaviour f ~ s^{origin_power} near 0. Nonzero values grade the
  /// first panel so that integrable singularities are integrated exactly.
  double origin_power = 0.0;
};

/// Precomputed discretisation of P and T on a HalfspaceGrid. Each output
/// value is a fixed linear combination of the input samples plus a power-law
/// tail term, so applying the operator is a dense matrix product.
class ExtensionOperator {
 public:
  ExtensionOperator(HalfspaceGrid grid, ExtensionOptions options = {});

  const HalfspaceGrid& grid() const { return grid_; }
  Dim dim() const { return Dim(grid_.n); }

  /// u = Pf on the grid. f must live on grid().radial.
  AxisymFn extend(const RadialFn& f) const;
  /// g = Tu on grid().radial.
  RadialFn dual(const AxisymFn& u) const;

  /// Pf at an arbitrary point with t > 0.
  double extend_at(const RadialFn& f, double r, double t) const;
  /// Tu at an arbitrary boundary radius.
  double dual_at(const AxisymFn& u, double s) const;

  struct TailTerm {
    double coef;
    double log_ratio_f;  // log(r_N / s)
    double log_ratio_u;  // log((r_N^2 + t^2) / (s^2 + t^2)) / 2
  };

  struct Row {
    std::vector<double> dense;
    std::vector<TailTerm> tail;
  };

  /// Quadrature row for the radial integral at (r, t): the integral of
  /// K(r,s,t) g(s) s^{n-2} equals dense . g(nodes) + tail terms.
  Row build_row(double r, double t) const;

 private:
  HalfspaceGrid grid_;
  ExtensionOptions options_;
  std::size_t nr_ = 0, nt_ = 0;
  std::vector<double> dense_;  // row (k*nr + i) has nr entries
  std::vector<std::size_t> tail_offset_;
  std::vector<TailTerm> tail_;
  double r_last_ = 0.0;

  std::vector<double> height_tail_exponents(const AxisymFn& u) const;
};

/// Operators are cached per (grid, options); building one costs a few
/// hundred thousand kernel evaluations.
std::shared_ptr<const ExtensionOperator> shared_extension_operator(const HalfspaceGrid& grid,
                                                                   ExtensionOptions options = {});

/// Half-space grid matching a boundary grid: same radial nodes, tan-mapped
/// heights with the same scale. Cached per radial grid.
HalfspaceGrid halfspace_grid_for(int n, const RadialGrid& radial, int height_count = 96);

/// Pf sampled on grid; f is resampled onto grid.radial when needed.
AxisymFn poisson_extend(const RadialFn& f, const HalfspaceGrid& grid);

/// Tu sampled on grid.
RadialFn dual_extend(const AxisymFn& u, const RadialGrid& grid);

/// int_{0 < x_n < a} Pf dx by Gauss-Legendre in x_n and radial quadrature.
double slab_mass(const RadialFn& f, double a, int height_order = 32);

/// max over grid nodes of |P_t*(phi f) - phi (P_t*f)| - phi_lip t (Q_t*f).
double commutator_gap(const RadialFn& f, double phi_lip, const RadialFn& phi, double t);

}  // namespace halfext
