#pragma once

#include <functional>
#include <vector>

#include "halfext/grids.hpp"
#include "halfext/kernel.hpp"

namespace halfext {

/// Piecewise-constant function on polar cells of R^2:
/// cell (j, m) = [edges[j], edges[j+1]) x [2 pi m / angles, 2 pi (m+1) / angles),
/// value values[j * angles + m]; zero outside edges.back().
struct PolarCells {
  std::vector<double> edges;
  int angles = 16;
  std::vector<double> values;

  std::size_t bands() const { return edges.size() - 1; }
  double value(std::size_t j, std::size_t m) const { return values[j * angles + m]; }
  double measure(std::size_t j) const;

  /// Cell averages of g(x, y) by 3x3 Gauss-Legendre per cell.
  static PolarCells sample(std::vector<double> edges, int angles, const std::function<double(double, double)>& g);
};

/// Rearrangement of value/measure pairs in R^d. The result is a step
/// function on a custom grid: shells of the same measure as the input
/// level pieces, sorted by decreasing value (stable in input order); equal
/// consecutive values are merged.
RadialFn symmetric_rearrangement(const std::vector<double>& values, const std::vector<double>& measures, int d);

RadialFn symmetric_rearrangement(const PolarCells& f);

/// Rearrangement of a radial function back onto its own grid: node i takes
/// the decreasing rearrangement at the cumulative measure of its cell
/// midpoint. Non-increasing input is returned unchanged.
RadialFn symmetric_rearrangement(const RadialFn& f);

struct RieszOptions {
  int radial_nodes = 96;  // tan-mapped output radii for the L^q norm
  int synthesis_angles = 256;
  int max_modes = 512;
};

struct RieszResult {
  double original = 0.0;     // |P_t * f|_{L^q(R^2)}
  double rearranged = 0.0;   // |P_t * f*|_{L^q(R^2)}
  double gain() const { return rearranged - original; }
};

/// Both layer norms at height t (n = 3 only).
RieszResult riesz_layer(const PolarCells& f, Dim n, double t, double q, const RieszOptions& opts = {});

/// |P_t*f*|_{L^q} - |P_t*f|_{L^q}.
double riesz_gain(const PolarCells& f, Dim n, double t, double q, const RieszOptions& opts = {});

/// |Pf|_{L^q(R^3_+)} and |Pf*|_{L^q(R^3_+)}, q = 3p/2, assembled layer by
/// layer over tan-mapped heights.
RieszResult pipeline_norms(const PolarCells& f, Dim n, double p, int height_count = 32,
                           const RieszOptions& opts = {});

}  // namespace halfext
