#include "halfext/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "halfext/errors.hpp"
#include "halfext/extension.hpp"
#include "halfext/parallel.hpp"
#include "halfext/quadrature.hpp"

namespace halfext {

double PolarCells::measure(std::size_t j) const {
  return 0.5 * (edges[j + 1] * edges[j + 1] - edges[j] * edges[j]) * (2.0 * std::numbers::pi / angles);
}

PolarCells PolarCells::sample(std::vector<double> edges, int angles, const std::function<double(double, double)>& g) {
  if (edges.size() < 2 || angles < 1) throw DomainError("PolarCells::sample: need >= 1 band and >= 1 angle");
  PolarCells c;
  c.edges = std::move(edges);
  c.angles = angles;
  c.values.resize(c.bands() * angles);
  const QuadratureRule& ref = gauss_legendre(3);
  const double dbeta = 2.0 * std::numbers::pi / angles;
  for (std::size_t j = 0; j < c.bands(); ++j) {
    const double a = c.edges[j], b = c.edges[j + 1];
    for (int m = 0; m < angles; ++m) {
      double sum = 0.0, area = 0.0;
      for (int u = 0; u < 3; ++u) {
        const double s = 0.5 * (a + b) + 0.5 * (b - a) * ref.nodes[u];
        for (int v = 0; v < 3; ++v) {
          const double beta = dbeta * (m + 0.5 + 0.5 * ref.nodes[v]);
          const double w = ref.weights[u] * ref.weights[v] * s;
          sum += w * g(s * std::cos(beta), s * std::sin(beta));
          area += w;
        }
      }
      c.values[j * angles + m] = sum / area;
    }
  }
  return c;
}

RadialFn symmetric_rearrangement(const std::vector<double>& values, const std::vector<double>& measures, int d) {
  if (values.size() != measures.size() || values.empty())
    throw DomainError("symmetric_rearrangement: need matching, nonempty value and measure lists");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0)) throw DomainError("symmetric_rearrangement: values must be nonnegative");
    if (!(measures[i] >= 0.0)) throw DomainError("symmetric_rearrangement: measures must be nonnegative");
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  std::vector<double> shell_value, shell_measure;
  for (std::size_t idx : order) {
    if (measures[idx] == 0.0) continue;
    if (!shell_value.empty() && shell_value.back() == values[idx]) shell_measure.back() += measures[idx];
    else {
      shell_value.push_back(values[idx]);
      shell_measure.push_back(measures[idx]);
    }
  }
  if (shell_value.empty()) throw DomainError("symmetric_rearrangement: total measure is zero");
  const double omega = unit_ball_volume(d);
  const double sphere = sphere_area(d);
  std::vector<double> edges{0.0}, nodes, weights;
  double mass = 0.0;
  for (std::size_t i = 0; i < shell_value.size(); ++i) {
    nodes.push_back(std::pow((mass + 0.5 * shell_measure[i]) / omega, 1.0 / d));
    mass += shell_measure[i];
    edges.push_back(std::pow(mass / omega, 1.0 / d));
    weights.push_back(shell_measure[i] / sphere);
  }
  RadialGrid grid = build_custom_grid(d, std::move(nodes), std::move(weights), std::move(edges));
  return RadialFn(grid, std::move(shell_value));
}

RadialFn symmetric_rearrangement(const PolarCells& f) {
  std::vector<double> measures(f.values.size());
  for (std::size_t j = 0; j < f.bands(); ++j)
    for (int m = 0; m < f.angles; ++m) measures[j * f.angles + m] = f.measure(j);
  return symmetric_rearrangement(f.values, measures, 2);
}

RadialFn symmetric_rearrangement(const RadialFn& f) {
  const RadialGrid& g = f.grid();
  const std::size_t n = f.size();
  for (double v : f.values())
    if (!(v >= 0.0)) throw DomainError("symmetric_rearrangement: values must be nonnegative");
  std::vector<double> measure(n);
  for (std::size_t i = 0; i < n; ++i) measure[i] = g.sphere() * g.weights()[i];
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] > f[b]; });
  std::vector<double> sorted_end(n);
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) sorted_end[k] = (acc += measure[order[k]]);
  std::vector<double> out(n);
  double before = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mid = before + 0.5 * measure[i];
    before += measure[i];
    std::size_t k = static_cast<std::size_t>(std::upper_bound(sorted_end.begin(), sorted_end.end(), mid) - sorted_end.begin());
    out[i] = f[order[std::min(k, n - 1)]];
  }
  return RadialFn(g, std::move(out));
}

namespace {

// Antiderivative in s of channels of G(s) on [0, R], built from Chebyshev
// fits on panels that grow geometrically away from s = r. Integrals over the
// many narrow shells of a step function then cost one series evaluation per
// shell edge instead of one kernel evaluation per quadrature point.
class PanelAntiderivative {
 public:
  static constexpr int kNodes = 16;

  template <class Sample>
  PanelAntiderivative(double r, double t, double outer, int channels, Sample sample) : channels_(channels) {
    breaks_ = breakpoints(r, t, outer);
    const std::size_t panels = breaks_.size() - 1;
    coef_.assign(panels * kNodes * channels, 0.0);
    start_.assign((panels + 1) * channels, 0.0);
    std::vector<double> vals(kNodes * channels), buf(channels);
    double cheb[kNodes];
    for (std::size_t p = 0; p < panels; ++p) {
      const double a = breaks_[p], b = breaks_[p + 1], half = 0.5 * (b - a);
      for (int k = 0; k < kNodes; ++k) {
        const double x = std::cos(std::numbers::pi * (k + 0.5) / kNodes);
        sample(0.5 * (a + b) + half * x, buf.data());
        for (int c = 0; c < channels; ++c) vals[k * channels + c] = buf[c];
      }
      for (int c = 0; c < channels; ++c) {
        for (int j = 0; j < kNodes; ++j) {
          double acc = 0.0;
          for (int k = 0; k < kNodes; ++k)
            acc += vals[k * channels + c] * std::cos(std::numbers::pi * j * (k + 0.5) / kNodes);
          cheb[j] = acc * 2.0 / kNodes;
        }
        cheb[0] *= 0.5;
        // integrate: B_j = (a_{j-1} - a_{j+1}) / (2j), with a_0 counted twice at j = 1
        double* out = &coef_[(p * kNodes) * channels_ + c];
        for (int j = 1; j < kNodes; ++j) {
          const double prev = (j == 1) ? 2.0 * cheb[0] : cheb[j - 1];
          const double next = (j + 1 < kNodes) ? cheb[j + 1] : 0.0;
          out[j * channels_] = half * (prev - next) / (2.0 * j);
        }
        double at_minus = 0.0;
        for (int j = 1; j < kNodes; ++j) at_minus += (j % 2 ? -1.0 : 1.0) * out[j * channels_];
        out[0] = -at_minus;
        double at_plus = 0.0;
        for (int j = 0; j < kNodes; ++j) at_plus += out[j * channels_];
        start_[(p + 1) * channels_ + c] = start_[p * channels_ + c] + at_plus;
      }
    }
  }

  /// Adds the integral over [0, s] of every channel to out.
  void add(double s, double scale, double* out) const {
    if (s <= 0.0) return;
    if (s >= breaks_.back()) {
      for (int c = 0; c < channels_; ++c) out[c] += scale * start_[(breaks_.size() - 1) * channels_ + c];
      return;
    }
    const std::size_t p = static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), s) - breaks_.begin()) - 1;
    const double a = breaks_[p], b = breaks_[p + 1];
    const double x = (2.0 * s - a - b) / (b - a);
    double tk[kNodes];
    tk[0] = 1.0;
    tk[1] = x;
    for (int j = 2; j < kNodes; ++j) tk[j] = 2.0 * x * tk[j - 1] - tk[j - 2];
    const double* base = &coef_[(p * kNodes) * channels_];
    for (int c = 0; c < channels_; ++c) {
      double acc = start_[p * channels_ + c];
      for (int j = 0; j < kNodes; ++j) acc += base[j * channels_ + c] * tk[j];
      out[c] += scale * acc;
    }
  }

 private:
  static std::vector<double> breakpoints(double r, double t, double outer) {
    const double pivot = std::clamp(r, 0.0, outer);
    std::vector<double> left{pivot}, right;
    for (double x = pivot; x > 0.0;) {
      const double w = 0.5 * std::max(t, r - x);
      x = (x - w < 0.25 * w) ? 0.0 : x - w;
      left.push_back(x);
    }
    for (double x = pivot; x < outer;) {
      const double w = 0.5 * std::max(t, x - r);
      x = (x + w > outer - 0.25 * w) ? outer : x + w;
      right.push_back(x);
    }
    std::vector<double> out(left.rbegin(), left.rend());
    out.insert(out.end(), right.begin(), right.end());
    return out;
  }

  int channels_;
  std::vector<double> breaks_, coef_, start_;
};

// K_m(r,s,t) = int_0^{2 pi} P_t(|r - s e^{i g}|) cos(m g) dg for m = 0..modes
// (n = 3). K_0 is the closed-form ring kernel.
void kernel_modes(double r, double s, double t, int modes, std::vector<double>& out) {
  const Dim n(3);
  out.assign(modes + 1, 0.0);
  out[0] = ring_kernel(n, r, s, t);
  const double B = 2.0 * r * s;
  if (B == 0.0 || modes == 0) return;
  const double amb = (r - s) * (r - s) + t * t;
  const double width = std::sqrt(amb / B);
  const int used = std::min(modes, static_cast<int>(std::ceil(36.0 / width)) + 4);
  int count = std::max(2 * used + 8, static_cast<int>(std::ceil(48.0 / width)));
  count = std::min(16384, (count + 7) / 8 * 8);
  const double c = poisson_constant(3) * t;
  const double h = 2.0 * std::numbers::pi / count;
  for (int l = 0; l <= count / 2; ++l) {
    const double g = h * l;
    const double sh = std::sin(0.5 * g);
    const double val = c / std::pow(amb + 2.0 * B * sh * sh, 1.5) * ((l == 0 || l == count / 2) ? h : 2.0 * h);
    const double cg = std::cos(g);
    double cm_prev = 1.0, cm = cg;
    for (int m = 1; m <= used; ++m) {
      out[m] += val * cm;
      const double next = 2.0 * cg * cm - cm_prev;
      cm_prev = cm;
      cm = next;
    }
  }
}

double layer_norm_radial(const RadialFn& fstar, const RadialGrid& out, double t, double q) {
  const auto& edges = fstar.grid().edges();
  std::vector<double> g(out.size(), 0.0);
  const Dim n(3);
  parallel_for(out.size(), [&](std::size_t i) {
    const double r = out.nodes()[i];
    const PanelAntiderivative F(r, t, edges.back(), 1, [&](double s, double* v) { v[0] = s * ring_kernel(n, r, s, t); });
    // summation by parts over the shell edges
    double sum = 0.0;
    for (std::size_t j = 0; j < fstar.size(); ++j) {
      const double next = (j + 1 < fstar.size()) ? fstar[j + 1] : 0.0;
      if (fstar[j] != next) F.add(edges[j + 1], fstar[j] - next, &sum);
    }
    g[i] = sum;
  });
  double acc = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) acc += out.weights()[i] * std::pow(std::abs(g[i]), q);
  return std::pow(2.0 * std::numbers::pi * acc, 1.0 / q);
}

double layer_norm_polar(const PolarCells& f, const RadialGrid& out, double t, double q, const RieszOptions& opts) {
  const double outer = f.edges.back();
  const int modes = std::clamp(static_cast<int>(std::ceil(30.0 * outer / t)), 16, opts.max_modes);
  const std::size_t nb = f.bands();
  const double dbeta = 2.0 * std::numbers::pi / f.angles;
  // c[j][m] = (1/2pi) sum_k f_jk int e^{-i m beta}
  std::vector<double> cre(nb * (modes + 1), 0.0), cim(nb * (modes + 1), 0.0);
  for (std::size_t j = 0; j < nb; ++j)
    for (int k = 0; k < f.angles; ++k) {
      const double v = f.value(j, k) / (2.0 * std::numbers::pi);
      if (v == 0.0) continue;
      const double a = dbeta * k, b = dbeta * (k + 1);
      cre[j * (modes + 1)] += v * (b - a);
      for (int m = 1; m <= modes; ++m) {
        cre[j * (modes + 1) + m] += v * (std::sin(m * b) - std::sin(m * a)) / m;
        cim[j * (modes + 1) + m] += v * (std::cos(m * b) - std::cos(m * a)) / m;
      }
    }
  const int synth = std::max(opts.synthesis_angles, 4 * modes);
  std::vector<double> layer(out.size(), 0.0);
  parallel_for(out.size(), [&](std::size_t i) {
    const double r = out.nodes()[i];
    std::vector<double> gre(modes + 1, 0.0), gim(modes + 1, 0.0), km, lo(modes + 1), hi(modes + 1);
    const PanelAntiderivative F(r, t, f.edges.back(), modes + 1, [&](double s, double* v) {
      kernel_modes(r, s, t, modes, km);
      for (int m = 0; m <= modes; ++m) v[m] = s * km[m];
    });
    std::fill(hi.begin(), hi.end(), 0.0);
    F.add(f.edges[0], 1.0, hi.data());
    for (std::size_t j = 0; j < nb; ++j) {
      lo.swap(hi);
      std::fill(hi.begin(), hi.end(), 0.0);
      F.add(f.edges[j + 1], 1.0, hi.data());
      const double* cr = &cre[j * (modes + 1)];
      const double* ci = &cim[j * (modes + 1)];
      for (int m = 0; m <= modes; ++m) {
        const double band = hi[m] - lo[m];
        gre[m] += cr[m] * band;
        gim[m] += ci[m] * band;
      }
    }
    double sum = 0.0;
    for (int l = 0; l < synth; ++l) {
      const double psi = 2.0 * std::numbers::pi * l / synth;
      double g = gre[0];
      for (int m = 1; m <= modes; ++m) g += 2.0 * (gre[m] * std::cos(m * psi) - gim[m] * std::sin(m * psi));
      sum += std::pow(std::abs(g), q);
    }
    layer[i] = sum * 2.0 * std::numbers::pi / synth;
  });
  double acc = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) acc += out.weights()[i] * layer[i];
  return std::pow(acc, 1.0 / q);
}

void check_riesz(const PolarCells& f, Dim n, double t, double q) {
  if (n.value() != 3) throw DomainError("riesz: only n = 3 is supported");
  if (!(t > 0.0)) throw DomainError("riesz: t must be > 0");
  if (!(q >= 1.0)) throw DomainError("riesz: q must be >= 1");
  if (f.edges.size() < 2 || f.values.size() != f.bands() * f.angles) throw DomainError("riesz: malformed cells");
  for (double v : f.values)
    if (!(v >= 0.0)) throw DomainError("riesz: f must be nonnegative");
}

}  // namespace

RieszResult riesz_layer(const PolarCells& f, Dim n, double t, double q, const RieszOptions& opts) {
  check_riesz(f, n, t, q);
  const RadialFn fstar = symmetric_rearrangement(f);
  const RadialGrid out = build_radial_grid(2, opts.radial_nodes, Mapping::tan, f.edges.back());
  RieszResult res;
  res.rearranged = layer_norm_radial(fstar, out, t, q);
  res.original = layer_norm_polar(f, out, t, q, opts);
  return res;
}

double riesz_gain(const PolarCells& f, Dim n, double t, double q, const RieszOptions& opts) {
  return riesz_layer(f, n, t, q, opts).gain();
}

RieszResult pipeline_norms(const PolarCells& f, Dim n, double p, int height_count, const RieszOptions& opts) {
  const double q = n.value() * p / (n.value() - 1.0);
  check_riesz(f, n, 1.0, q);
  const RadialGrid heights = build_radial_grid(1, height_count, Mapping::tan, f.edges.back());
  RieszResult total;
  for (std::size_t k = 0; k < heights.size(); ++k) {
    const RieszResult layer = riesz_layer(f, n, heights.nodes()[k], q, opts);
    total.original += heights.weights()[k] * std::pow(layer.original, q);
    total.rearranged += heights.weights()[k] * std::pow(layer.rearranged, q);
  }
  total.original = std::pow(total.original, 1.0 / q);
  total.rearranged = std::pow(total.rearranged, 1.0 / q);
  return total;
}

}  // namespace halfext
