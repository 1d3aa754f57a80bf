#ifndef FEEC_QUADRATURE_HPP
#define FEEC_QUADRATURE_HPP

#include <cmath>
#include <vector>

#include "core.hpp"

namespace feec {

/// One quadrature node in reference coordinates with its weight.
struct QuadNode {
  Vec point;  // length = reference dimension (1 or 2)
  double weight;
};

using QuadRule = std::vector<QuadNode>;

/// Gauss-Legendre nodes/weights on [0,1], n points (exact for degree 2n-1).
inline void gauss_legendre_unit(int n, std::vector<double>& x,
                                std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton iteration from the Chebyshev initial guess on [-1,1].
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p0, p1;
    for (int it = 0; it < 100; ++it) {
      p0 = 1.0;
      p1 = t;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2 * j - 1) * t * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    p0 = 1.0;
    p1 = t;
    for (int j = 2; j <= n; ++j) {
      double p2 = ((2 * j - 1) * t * p1 - (j - 1) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (t * p1 - p0) / (t * t - 1.0);
    double wi = 2.0 / ((1.0 - t * t) * dp * dp);
    x[i] = 0.5 * (1.0 - t);
    x[n - 1 - i] = 0.5 * (1.0 + t);
    w[i] = 0.5 * wi;
    w[n - 1 - i] = 0.5 * wi;
  }
}

/// Rule on the unit segment [0,1], exact for polynomials of degree `deg`.
inline QuadRule segment_rule(int deg) {
  int n = deg / 2 + 1;
  std::vector<double> x, w;
  gauss_legendre_unit(n, x, w);
  QuadRule rule(n);
  for (int i = 0; i < n; ++i) {
    rule[i].point = Vec::Constant(1, x[i]);
    rule[i].weight = w[i];
  }
  return rule;
}

/// Rule on the reference triangle {x>=0, y>=0, x+y<=1}, exact for
/// polynomials of degree `deg`. Built from a collapsed (Duffy) tensor
/// Gauss rule; the collapse raises the needed 1D degree by one.
inline QuadRule triangle_rule(int deg) {
  int n = (deg + 1) / 2 + 1;
  std::vector<double> x, w;
  gauss_legendre_unit(n, x, w);
  QuadRule rule;
  rule.reserve(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      QuadNode node;
      node.point = Vec(2);
      node.point[0] = x[i];
      node.point[1] = x[j] * (1.0 - x[i]);
      node.weight = w[i] * w[j] * (1.0 - x[i]);
      rule.push_back(node);
    }
  return rule;
}

/// Rule on the reference simplex of dimension `dim` (1 or 2).
inline QuadRule simplex_rule(int dim, int deg) {
  require(dim == 1 || dim == 2, "simplex_rule: dim must be 1 or 2");
  return dim == 1 ? segment_rule(deg) : triangle_rule(deg);
}

}  // namespace feec

#endif
