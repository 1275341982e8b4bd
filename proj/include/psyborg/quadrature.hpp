#pragma once

#include <cmath>
#include <numbers>
#include <vector>

namespace psyborg {

/// Nodes and weights for integrals of f(x) exp(-x^2) over the real line.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Hermite rule (Golub-Welsch). Exact for polynomials of degree
/// below 2n.
QuadratureRule gauss_hermite(int n);

/// E[f(X)] for X ~ N(mean, variance). A zero variance evaluates f at the mean.
template <typename F>
double gaussian_expectation(F&& f, double mean, double variance, const QuadratureRule& rule) {
  if (variance == 0.0) return f(mean);
  const double scale = std::sqrt(2.0 * variance);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    sum += rule.weights[i] * f(mean + scale * rule.nodes[i]);
  return sum / std::sqrt(std::numbers::pi);
}

}  // namespace psyborg
