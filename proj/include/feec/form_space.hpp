#ifndef FEEC_FORM_SPACE_HPP
#define FEEC_FORM_SPACE_HPP

#include <functional>
#include <map>
#include <vector>

#include "polyform.hpp"
#include "quadrature.hpp"
#include "surface_geometry.hpp"

namespace feec {

enum class Family { Trimmed, Full };

namespace detail {

/// Degree of freedom on the reference simplex.
///
/// EdgeMoment: integral of the tangential trace along local vertex a -> b,
/// weighted by 1 (weight = -1), the barycentric function of a (weight = 0),
/// or of b (weight = 1). CellMoment: integral of the form wedged with the
/// constant 1-form dx_{weight+1}. CellIntegral: integral of the top-degree
/// coefficient. PointEval / PointCoeff: component value at local vertex a.
struct Dof {
  enum Kind { PointEval, EdgeMoment, CellMoment, CellIntegral, PointCoeff };
  Kind kind;
  int a = 0, b = 0;
  int weight = -1;
};

inline Vec ref_vertex(int n, int i) {
  Vec v = Vec::Zero(n);
  if (i > 0) v[i - 1] = 1.0;
  return v;
}

inline double apply_dof(const Dof& dof, const PolyForm& w, int n) {
  switch (dof.kind) {
    case Dof::PointEval:
    case Dof::PointCoeff: {
      return w.eval(ref_vertex(n, dof.a))[0];
    }
    case Dof::EdgeMoment: {
      Vec va = ref_vertex(n, dof.a), vb = ref_vertex(n, dof.b);
      Vec tau = vb - va;
      QuadRule rule = segment_rule(8);
      double s = 0.0;
      for (const auto& node : rule) {
        double t = node.point[0];
        Vec x = va + t * tau;
        double trace = w.eval(x).dot(tau);
        double wt = dof.weight < 0 ? 1.0 : (dof.weight == 0 ? 1.0 - t : t);
        s += node.weight * trace * wt;
      }
      return s;
    }
    case Dof::CellMoment: {
      PolyForm q = PolyForm::zero(2, 1);
      q.comp[dof.weight][{0, 0}] = 1.0;
      return poly_integral(wedge11(w, q).comp[0], 2);
    }
    case Dof::CellIntegral:
      return poly_integral(w.comp[0], n);
  }
  return 0.0;
}

/// Nodal basis dual to a dof set, built by inverting the Vandermonde matrix
/// of a spanning set.
struct LocalBasis {
  std::vector<Dof> dofs;
  std::vector<PolyForm> basis;
  std::vector<PolyForm> dbasis;  // empty for top-degree spaces
};

inline LocalBasis build_local_basis(int n, int k, std::vector<Dof> dofs,
                                    const std::vector<PolyForm>& span) {
  const int m = static_cast<int>(span.size());
  require(static_cast<int>(dofs.size()) == m, "build_local_basis: dof count mismatch");
  Mat V(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) V(i, j) = apply_dof(dofs[i], span[j], n);
  Eigen::FullPivLU<Mat> lu(V);
  require(lu.isInvertible(), "build_local_basis: degenerate dof set");
  Mat C = lu.inverse();
  LocalBasis lb;
  lb.dofs = std::move(dofs);
  for (int j = 0; j < m; ++j) {
    PolyForm b = PolyForm::zero(n, k);
    for (int i = 0; i < m; ++i) b = form_axpy(std::move(b), C(i, j), span[i]);
    lb.basis.push_back(std::move(b));
  }
  if (k < n)
    for (const auto& b : lb.basis) lb.dbasis.push_back(exterior_derivative(b));
  return lb;
}

}  // namespace detail

/// Global finite element space of differential k-forms: the trimmed family
/// with r = 1 (lowest order, all k) or r = 2 (only 1-forms in dimension 2),
/// and the full family with r = 1 for 0-forms (Lagrange) and top-degree
/// forms (discontinuous linear).
///
/// Shared edge degrees of freedom are oriented from the lower toward the
/// higher global vertex index, so no per-element sign bookkeeping is needed;
/// the element-local nodal basis is cached per edge-direction pattern.
struct FormSpace {
  const SimplicialComplex* mesh = nullptr;
  int k = 0;
  int r = 1;
  Family family = Family::Trimmed;
  int ndof = 0;
  std::vector<std::vector<int>> elem_dofs;
  std::vector<const detail::LocalBasis*> elem_basis;
  std::map<int, detail::LocalBasis> cache;

  int local_dim() const { return static_cast<int>(elem_basis[0]->basis.size()); }
};

inline FormSpace make_form_space(const SimplicialComplex& mesh, int k, int r,
                                 Family family) {
  const int n = mesh.dim;
  require(k >= 0 && k <= n, "make_form_space: k out of range");
  bool ok = (family == Family::Trimmed && r == 1) ||
            (family == Family::Trimmed && r == 2 && n == 2 && k == 1) ||
            (family == Family::Full && r == 1 && (k == 0 || k == n));
  require(ok, "make_form_space: unsupported (family, r, k) combination");

  FormSpace fs;
  fs.mesh = &mesh;
  fs.k = k;
  fs.r = r;
  fs.family = family;

  using detail::Dof;
  const int ne = mesh.count(n);
  const bool lagrange = (k == 0);
  const bool whitney_edge = (family == Family::Trimmed && r == 1 && k == 1 && n == 2);
  const bool trimmed2_edge = (family == Family::Trimmed && r == 2);
  const bool p0_top = (family == Family::Trimmed && k == n && r == 1);
  const bool dg1_top = (family == Family::Full && k == n);

  const std::vector<PolyForm> span =
      family == Family::Trimmed ? trimmed_poly_span(n, k, r) : full_poly_span(n, k, r);
  // local edge pairs of the reference triangle
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};

  if (lagrange) {
    fs.ndof = mesh.count(0);
  } else if (whitney_edge) {
    fs.ndof = mesh.count(1);
  } else if (trimmed2_edge) {
    fs.ndof = 2 * mesh.count(1) + 2 * ne;
  } else if (p0_top) {
    fs.ndof = ne;
  } else {  // dg1_top
    fs.ndof = (n + 1) * ne;
  }

  for (int e = 0; e < ne; ++e) {
    const auto& g = mesh.simplices[n][e];
    int key = 0;
    std::vector<Dof> dofs;
    std::vector<int> gids;
    if (lagrange) {
      for (int i = 0; i <= n; ++i) {
        dofs.push_back({Dof::PointEval, i, 0, -1});
        gids.push_back(g[i]);
      }
    } else if (whitney_edge) {
      for (int p = 0; p < 3; ++p) {
        int i = pairs[p][0], j = pairs[p][1];
        if (g[i] > g[j]) {
          std::swap(i, j);
          key |= 1 << p;
        }
        dofs.push_back({Dof::EdgeMoment, i, j, -1});
        gids.push_back(mesh.simplex_index(1, {g[i], g[j]}));
      }
    } else if (trimmed2_edge) {
      for (int p = 0; p < 3; ++p) {
        int i = pairs[p][0], j = pairs[p][1];
        if (g[i] > g[j]) {
          std::swap(i, j);
          key |= 1 << p;
        }
        int eid = mesh.simplex_index(1, {g[i], g[j]});
        dofs.push_back({Dof::EdgeMoment, i, j, 0});
        gids.push_back(2 * eid);
        dofs.push_back({Dof::EdgeMoment, i, j, 1});
        gids.push_back(2 * eid + 1);
      }
      for (int c = 0; c < 2; ++c) {
        dofs.push_back({Dof::CellMoment, 0, 0, c});
        gids.push_back(2 * mesh.count(1) + 2 * e + c);
      }
    } else if (p0_top) {
      dofs.push_back({Dof::CellIntegral, 0, 0, -1});
      gids.push_back(e);
    } else {  // dg1_top
      for (int i = 0; i <= n; ++i) {
        dofs.push_back({Dof::PointCoeff, i, 0, -1});
        gids.push_back((n + 1) * e + i);
      }
    }
    auto it = fs.cache.find(key);
    if (it == fs.cache.end())
      it = fs.cache.emplace(key, detail::build_local_basis(n, k, dofs, span)).first;
    fs.elem_dofs.push_back(std::move(gids));
    fs.elem_basis.push_back(&it->second);
  }
  return fs;
}

/// Pointwise pairing of two forms given by reference components.
/// Weights: sqrt(det G) for 0-forms, the inverse metric for 1-forms, and
/// 1/sqrt(det G) for top-degree coefficient pairs in dimension 2.
inline double component_pairing(int k, int n, const GeomSample& g, const Vec& a,
                                const Vec& b) {
  if (k == 0) return a[0] * b[0] * g.sqrtG;
  if (k < n || n == 1) return a.dot(g.Ginv * b) * g.sqrtG;
  return a[0] * b[0] / g.sqrtG;
}

/// Pull an ambient-convention form value back to reference components:
/// 0-forms are scalars, 1-forms are ambient covectors (pairing with J),
/// top-degree forms are densities q with meaning q * (Riemannian volume).
inline Vec pullback_components(int k, int n, const GeomSample& g, const Vec& f) {
  if (k == 0) return f;
  if (k == 1) return g.J.transpose() * f;  // covector pairing, any ambient dim
  Vec r(1);
  r[0] = f[0] * g.sqrtG;
  return r;
}

inline int default_quad_degree(const FormSpace& fs, ChartOptions geo) {
  return 2 * fs.r + 2 + ((geo.s > 1 || geo.exact) ? 2 : 0);
}

/// L2 mass matrix. `curved` integrates against the exact unit circle/sphere
/// geometry through the closest-point chart; otherwise the flat elements.
inline SpMat mass_matrix(const FormSpace& fs, ChartOptions geo = {},
                         int quad_degree = -1) {
  const auto& mesh = *fs.mesh;
  if (quad_degree < 0) quad_degree = default_quad_degree(fs, geo);
  QuadRule rule = simplex_rule(mesh.dim, quad_degree);
  std::vector<Triplet> trips;
  for (int e = 0; e < mesh.count(mesh.dim); ++e) {
    SurfaceChart em = element_chart(mesh, e, geo);
    const auto& lb = *fs.elem_basis[e];
    const int m = static_cast<int>(lb.basis.size());
    Mat loc = Mat::Zero(m, m);
    for (const auto& node : rule) {
      GeomSample g = em.sample(node.point);
      std::vector<Vec> vals(m);
      for (int i = 0; i < m; ++i) vals[i] = lb.basis[i].eval(node.point);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j <= i; ++j) {
          double v = node.weight *
                     component_pairing(fs.k, mesh.dim, g, vals[i], vals[j]);
          loc(i, j) += v;
          if (j < i) loc(j, i) += v;
        }
    }
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        trips.emplace_back(fs.elem_dofs[e][i], fs.elem_dofs[e][j], loc(i, j));
  }
  SpMat M(fs.ndof, fs.ndof);
  M.setFromTriplets(trips.begin(), trips.end());
  return M;
}

/// Exterior derivative as a matrix between global spaces: codomain degrees of
/// freedom applied to the derivative of the domain nodal basis, element by
/// element. Shared entries must agree across elements, which is verified.
inline SpMat exterior_derivative_matrix(const FormSpace& domain,
                                        const FormSpace& codomain) {
  const auto& mesh = *domain.mesh;
  require(codomain.mesh == domain.mesh, "exterior_derivative_matrix: mesh mismatch");
  require(codomain.k == domain.k + 1, "exterior_derivative_matrix: degree mismatch");
  std::map<std::pair<int, int>, double> entries;
  for (int e = 0; e < mesh.count(mesh.dim); ++e) {
    const auto& dlb = *domain.elem_basis[e];
    const auto& clb = *codomain.elem_basis[e];
    for (size_t j = 0; j < dlb.basis.size(); ++j) {
      const PolyForm& db = dlb.dbasis[j];
      for (size_t i = 0; i < clb.dofs.size(); ++i) {
        double v = detail::apply_dof(clb.dofs[i], db, mesh.dim);
        if (std::abs(v) < 1e-13) continue;
        auto ij = std::make_pair(codomain.elem_dofs[e][i], domain.elem_dofs[e][j]);
        auto it = entries.find(ij);
        if (it == entries.end())
          entries.emplace(ij, v);
        else
          require(std::abs(it->second - v) < 1e-10,
                  "exterior_derivative_matrix: inconsistent shared entry");
      }
    }
  }
  std::vector<Triplet> trips;
  for (const auto& [ij, v] : entries) trips.emplace_back(ij.first, ij.second, v);
  SpMat D(codomain.ndof, domain.ndof);
  D.setFromTriplets(trips.begin(), trips.end());
  return D;
}

using FormField = std::function<Vec(const Vec&)>;

/// Right-hand side vector b_i = <f, phi_i> for an ambient-convention field f.
inline Vec load_vector(const FormSpace& fs, const FormField& f,
                       ChartOptions geo = {}, int quad_degree = -1) {
  const auto& mesh = *fs.mesh;
  if (quad_degree < 0) quad_degree = default_quad_degree(fs, geo) + 4;
  QuadRule rule = simplex_rule(mesh.dim, quad_degree);
  Vec b = Vec::Zero(fs.ndof);
  for (int e = 0; e < mesh.count(mesh.dim); ++e) {
    SurfaceChart em = element_chart(mesh, e, geo);
    const auto& lb = *fs.elem_basis[e];
    for (const auto& node : rule) {
      GeomSample g = em.sample(node.point);
      Vec fr = pullback_components(fs.k, mesh.dim, g, f(g.point));
      for (size_t i = 0; i < lb.basis.size(); ++i)
        b[fs.elem_dofs[e][i]] +=
            node.weight *
            component_pairing(fs.k, mesh.dim, g, lb.basis[i].eval(node.point), fr);
    }
  }
  return b;
}

/// L2-orthogonal projection of an ambient-convention field onto the space.
inline Vec project(const FormSpace& fs, const FormField& f, ChartOptions geo = {},
                   int quad_degree = -1) {
  SpMat M = mass_matrix(fs, geo);
  Vec b = load_vector(fs, f, geo, quad_degree);
  Eigen::SimplicialLDLT<SpMat> chol(M);
  require(chol.info() == Eigen::Success, "project: mass factorization failed");
  return chol.solve(b);
}

/// Evaluate a coefficient vector on element e at reference point xi
/// (reference components).
inline Vec eval_local(const FormSpace& fs, int e, const Vec& coeffs, const Vec& xi) {
  const auto& lb = *fs.elem_basis[e];
  Vec v = Vec::Zero(PolyForm::ncomp(fs.mesh->dim, fs.k));
  for (size_t i = 0; i < lb.basis.size(); ++i)
    v += coeffs[fs.elem_dofs[e][i]] * lb.basis[i].eval(xi);
  return v;
}

/// L2 distance between a coefficient vector and an ambient-convention field.
inline double l2_error(const FormSpace& fs, const Vec& coeffs, const FormField& f,
                       ChartOptions geo = {}, int quad_degree = -1) {
  const auto& mesh = *fs.mesh;
  if (quad_degree < 0) quad_degree = default_quad_degree(fs, geo) + 4;
  QuadRule rule = simplex_rule(mesh.dim, quad_degree);
  double err2 = 0.0;
  for (int e = 0; e < mesh.count(mesh.dim); ++e) {
    SurfaceChart em = element_chart(mesh, e, geo);
    for (const auto& node : rule) {
      GeomSample g = em.sample(node.point);
      Vec diff = eval_local(fs, e, coeffs, node.point) -
                 pullback_components(fs.k, mesh.dim, g, f(g.point));
      err2 += node.weight * component_pairing(fs.k, mesh.dim, g, diff, diff);
    }
  }
  return std::sqrt(std::max(err2, 0.0));
}

/// L2 norm of a coefficient vector with respect to a given mass matrix.
inline double l2_norm(const SpMat& M, const Vec& c) {
  return std::sqrt(std::max(c.dot(M * c), 0.0));
}

}  // namespace feec

#endif
