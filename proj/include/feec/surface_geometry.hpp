#ifndef FEEC_SURFACE_GEOMETRY_HPP
#define FEEC_SURFACE_GEOMETRY_HPP

#include <cmath>

#include "quadrature.hpp"
#include "simplicial_mesh.hpp"

namespace feec {

/// Closest-point projection onto the unit circle/sphere with signed distance
/// and outward normal; x = a + delta * nu holds exactly.
struct ClosestPoint {
  Vec a;
  double delta;
  Vec nu;
};

inline ClosestPoint closest_point(const Vec& x) {
  double r = x.norm();
  require(r > 0.5, "closest_point: point outside the tubular neighborhood");
  ClosestPoint cp;
  cp.nu = x / r;
  cp.a = cp.nu;
  cp.delta = r - 1.0;
  return cp;
}

/// First-fundamental-form data of an element chart at one reference point.
struct GeomSample {
  Vec point;     // ambient coordinates
  Mat J;         // chart Jacobian, ambient_dim x n
  Mat G;         // metric J^T J, n x n
  Mat Ginv;      // inverse metric
  double sqrtG;  // sqrt(det G), the volume weight
};

/// Chart from the reference simplex onto one element: affine (s = 1) or the
/// quadratic Lagrange interpolant of the closest-point projection over the
/// element (s = 2). With `exact` set the chart is composed with the
/// projection a(x) = x/|x| itself, whose differential at x is
/// Da(x) = (I - nu nu^T)/|x|; this realizes integration on the exact
/// circle/sphere parametrized over the chart domain.
struct SurfaceChart {
  int n = 2;   // reference dimension
  int s = 1;   // chart polynomial degree
  bool exact = false;
  std::vector<Vec> nodes;  // s=1: vertices; s=2: vertices then edge midpoints

  Vec chart_point(const Vec& xi) const {
    Vec p = Vec::Zero(nodes[0].size());
    Vec N = shape(xi);
    for (size_t i = 0; i < nodes.size(); ++i) p += N[i] * nodes[i];
    return p;
  }

  GeomSample sample(const Vec& xi) const {
    GeomSample g;
    Vec p = chart_point(xi);
    Mat Jc = chart_jacobian(xi);
    if (exact) {
      double r = p.norm();
      require(std::abs(r - 1.0) < 0.5, "SurfaceChart: left the tubular neighborhood");
      Vec nu = p / r;
      g.point = nu;
      g.J = (Jc - nu * (nu.transpose() * Jc)) / r;
    } else {
      g.point = p;
      g.J = Jc;
    }
    g.G = g.J.transpose() * g.J;
    double det = g.G.determinant();
    require(det > 0.0, "SurfaceChart: degenerate metric");
    g.sqrtG = std::sqrt(det);
    g.Ginv = g.G.inverse();
    return g;
  }

  /// Unit normal of the (unprojected) chart surface at xi, oriented away
  /// from the origin; only meaningful for codimension-one charts.
  Vec chart_normal(const Vec& xi) const {
    Mat Jc = chart_jacobian(xi);
    Vec nu;
    if (n == 1) {
      nu.resize(2);
      nu << Jc(1, 0), -Jc(0, 0);
    } else {
      Eigen::Vector3d a = Jc.col(0), b = Jc.col(1);
      nu = a.cross(b);
    }
    nu /= nu.norm();
    if (nu.dot(chart_point(xi)) < 0) nu = -nu;
    return nu;
  }

  Vec shape(const Vec& xi) const {
    if (s == 1) {
      Vec N(n + 1);
      N[0] = 1.0;
      for (int i = 0; i < n; ++i) {
        N[0] -= xi[i];
        N[i + 1] = xi[i];
      }
      return N;
    }
    // quadratic Lagrange in barycentric coordinates
    if (n == 1) {
      double l0 = 1.0 - xi[0], l1 = xi[0];
      Vec N(3);
      N << l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), 4 * l0 * l1;
      return N;
    }
    double l0 = 1.0 - xi[0] - xi[1], l1 = xi[0], l2 = xi[1];
    Vec N(6);
    N << l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1), 4 * l0 * l1,
        4 * l0 * l2, 4 * l1 * l2;
    return N;
  }

  Mat chart_jacobian(const Vec& xi) const {
    const int ad = static_cast<int>(nodes[0].size());
    Mat J = Mat::Zero(ad, n);
    Mat dN = shape_grad(xi);
    for (size_t i = 0; i < nodes.size(); ++i)
      J += nodes[i] * dN.row(static_cast<int>(i));
    return J;
  }

  Mat shape_grad(const Vec& xi) const {
    if (s == 1) {
      Mat dN(n + 1, n);
      dN.row(0).setConstant(-1.0);
      dN.bottomRows(n) = Mat::Identity(n, n);
      return dN;
    }
    if (n == 1) {
      double l0 = 1.0 - xi[0], l1 = xi[0];
      Mat dN(3, 1);
      dN << 1 - 4 * l0, 4 * l1 - 1, 4 * (l0 - l1);
      return dN;
    }
    double l0 = 1.0 - xi[0] - xi[1], l1 = xi[0], l2 = xi[1];
    Mat dN(6, 2);
    dN.row(0) << 1 - 4 * l0, 1 - 4 * l0;
    dN.row(1) << 4 * l1 - 1, 0;
    dN.row(2) << 0, 4 * l2 - 1;
    dN.row(3) << 4 * (l0 - l1), -4 * l1;
    dN.row(4) << -4 * l2, 4 * (l0 - l2);
    dN.row(5) << 4 * l2, 4 * l1;
    return dN;
  }
};

/// Chart construction options; the plain-bool form selects exact-geometry
/// integration over the affine chart (the common case for inscribed meshes).
struct ChartOptions {
  int s = 1;
  bool exact = false;
  ChartOptions() = default;
  ChartOptions(bool exact_geometry) : exact(exact_geometry) {}
  ChartOptions(int degree, bool exact_geometry) : s(degree), exact(exact_geometry) {}
};

inline SurfaceChart element_chart(const SimplicialComplex& mesh, int idx,
                                  ChartOptions opt = {}) {
  require(opt.s == 1 || opt.s == 2, "element_chart: s must be 1 or 2");
  require((opt.s == 1 && !opt.exact) || mesh.exact_unit_sphere,
          "element_chart: curved charts need a mesh inscribed in the unit sphere");
  const auto& t = mesh.simplices[mesh.dim][idx];
  SurfaceChart ch;
  ch.n = mesh.dim;
  ch.s = opt.s;
  ch.exact = opt.exact;
  for (int v : t) ch.nodes.push_back(mesh.vertices[v]);
  if (opt.s == 2) {
    // edge midpoints projected onto the exact surface; shared edges give the
    // same node from both sides, so the charts are continuous
    const int pairs2[1][2] = {{0, 1}};
    const int pairs3[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    int np = mesh.dim == 1 ? 1 : 3;
    for (int p = 0; p < np; ++p) {
      const int* pr = mesh.dim == 1 ? pairs2[p] : pairs3[p];
      Vec m = 0.5 * (mesh.vertices[t[pr[0]]] + mesh.vertices[t[pr[1]]]);
      ch.nodes.push_back(closest_point(m).a);
    }
  }
  return ch;
}

/// Sup-norm geometric defects of a degree-s chart family relative to the
/// unit circle/sphere, by dense sampling (grid plus vertices, >= 25 points
/// per element by default).
struct GeometricDefects {
  double distance_inf = 0.0;   // sup |delta| = sup |1 - |x||
  double normal_gap_inf = 0.0; // sup |nu - nu_h|
};

inline GeometricDefects geometric_defects(const SimplicialComplex& mesh, int s = 1,
                                          int samples_per_dim = 6) {
  require(mesh.exact_unit_sphere, "geometric_defects: mesh is not inscribed");
  std::vector<Vec> pts;
  int m = samples_per_dim;
  if (mesh.dim == 1) {
    for (int i = 0; i <= m * m; ++i) {
      Vec x(1);
      x << static_cast<double>(i) / (m * m);
      pts.push_back(x);
    }
  } else {
    for (int i = 0; i <= m; ++i)
      for (int j = 0; j <= m - i; ++j) {
        Vec x(2);
        x << static_cast<double>(i) / m, static_cast<double>(j) / m;
        pts.push_back(x);
      }
  }
  GeometricDefects out;
  for (int e = 0; e < mesh.count(mesh.dim); ++e) {
    SurfaceChart ch = element_chart(mesh, e, {s, false});
    for (const auto& xi : pts) {
      Vec p = ch.chart_point(xi);
      double r = p.norm();
      out.distance_inf = std::max(out.distance_inf, std::abs(1.0 - r));
      out.normal_gap_inf =
          std::max(out.normal_gap_inf, (p / r - ch.chart_normal(xi)).norm());
    }
  }
  return out;
}

}  // namespace feec

#endif
