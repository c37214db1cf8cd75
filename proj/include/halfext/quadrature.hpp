#pragma once

#include <vector>

namespace halfext {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with `order` points on [-1, 1], nodes ascending.
/// Rules are cached per order; the returned reference stays valid.
const QuadratureRule& gauss_legendre(int order);

/// Gauss-Legendre rule mapped affinely onto [a, b].
QuadratureRule gauss_legendre(int order, double a, double b);

}  // namespace halfext
