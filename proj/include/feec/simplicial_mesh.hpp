#ifndef FEEC_SIMPLICIAL_MESH_HPP
#define FEEC_SIMPLICIAL_MESH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <vector>

#include "core.hpp"

namespace feec {

/// Oriented simplicial complex embedded in R^2 or R^3.
///
/// Top-dimensional simplices carry orientation in their vertex-tuple order;
/// lower-dimensional simplices are stored with sorted vertex tuples.
/// Immutable after construction.
struct SimplicialComplex {
  int dim = 0;          // intrinsic dimension n (1 or 2)
  int ambient_dim = 0;  // embedding dimension
  std::vector<Vec> vertices;
  // simplices[k][i] = vertex index tuple of the i-th k-simplex
  std::vector<std::vector<std::vector<int>>> simplices;
  // face_index[k]: sorted vertex tuple -> index into simplices[k]
  std::vector<std::map<std::vector<int>, int>> face_index;
  // true for circle/sphere meshes whose vertices lie on the unit sphere;
  // refinement then projects new vertices back onto it
  bool exact_unit_sphere = false;

  int count(int k) const { return static_cast<int>(simplices[k].size()); }

  int euler_characteristic() const {
    int chi = 0, sign = 1;
    for (int k = 0; k <= dim; ++k, sign = -sign) chi += sign * count(k);
    return chi;
  }

  int simplex_index(int k, std::vector<int> tuple) const {
    std::sort(tuple.begin(), tuple.end());
    auto it = face_index[k].find(tuple);
    require(it != face_index[k].end(), "simplex_index: face not found");
    return it->second;
  }

  /// k-volume of a simplex from its embedded vertex coordinates.
  double simplex_volume(int k, int idx) const {
    const auto& s = simplices[k][idx];
    if (k == 0) return 1.0;
    Mat E(ambient_dim, k);
    for (int i = 1; i <= k; ++i) E.col(i - 1) = vertices[s[i]] - vertices[s[0]];
    Mat G = E.transpose() * E;
    double det = G.determinant();
    double fact = (k == 1) ? 1.0 : 2.0;
    return std::sqrt(std::max(det, 0.0)) / fact;
  }

  double max_edge_length() const {
    double h = 0.0;
    for (int e = 0; e < count(1); ++e) h = std::max(h, simplex_volume(1, e));
    return h;
  }
};

namespace detail {

inline int parity_of_sort(std::vector<int>& t) {
  // Bubble sort while counting swaps; tuples are tiny.
  int swaps = 0;
  for (size_t i = 0; i + 1 < t.size(); ++i)
    for (size_t j = 0; j + 1 < t.size() - i; ++j)
      if (t[j] > t[j + 1]) {
        std::swap(t[j], t[j + 1]);
        ++swaps;
      }
  return (swaps % 2 == 0) ? 1 : -1;
}

/// Fill in lower-dimensional simplices, index maps, and validate invariants.
inline void finalize(SimplicialComplex& mesh) {
  const int n = mesh.dim;
  mesh.simplices.resize(n + 1);
  mesh.face_index.assign(n + 1, {});

  // vertices as 0-simplices
  mesh.simplices[0].clear();
  for (int v = 0; v < static_cast<int>(mesh.vertices.size()); ++v)
    mesh.simplices[0].push_back({v});

  // intermediate faces (sorted tuples), derived from top simplices
  for (int k = 1; k < n; ++k) {
    mesh.simplices[k].clear();
    for (const auto& top : mesh.simplices[n]) {
      // all (k+1)-subsets of the top tuple; n<=2 so k==1, subsets are edges
      for (size_t i = 0; i < top.size(); ++i)
        for (size_t j = i + 1; j < top.size(); ++j) {
          std::vector<int> f = {std::min(top[i], top[j]), std::max(top[i], top[j])};
          if (!mesh.face_index[k].count(f)) {
            mesh.face_index[k][f] = static_cast<int>(mesh.simplices[k].size());
            mesh.simplices[k].push_back(f);
          }
        }
    }
  }

  for (int k = 0; k <= n; ++k) {
    if (k > 0 && k < n) continue;  // already indexed above
    mesh.face_index[k].clear();
    for (int i = 0; i < mesh.count(k); ++i) {
      auto t = mesh.simplices[k][i];
      std::sort(t.begin(), t.end());
      require(!mesh.face_index[k].count(t), "finalize: duplicate simplex");
      mesh.face_index[k][t] = i;
    }
  }

  // invariants: distinct vertices, positive volume
  for (int k = 1; k <= n; ++k)
    for (int i = 0; i < mesh.count(k); ++i) {
      const auto& s = mesh.simplices[k][i];
      for (size_t a = 0; a < s.size(); ++a)
        for (size_t b = a + 1; b < s.size(); ++b)
          require(s[a] != s[b], "finalize: repeated vertex in simplex");
      require(mesh.simplex_volume(k, i) > 0.0, "finalize: degenerate simplex");
    }
}

}  // namespace detail

/// Signed incidence matrix from k-simplices to (k-1)-simplices.
/// Face i of (v_0..v_k) receives sign (-1)^i, composed with the parity of
/// the permutation taking the face tuple to its stored (sorted) order.
/// Entries are exactly +-1; products like d1*d2 vanish in exact arithmetic.
inline SparseOperator boundary_matrix(const SimplicialComplex& mesh, int k) {
  require(k >= 1 && k <= mesh.dim, "boundary_matrix: k out of range");
  std::vector<Triplet> trips;
  for (int s = 0; s < mesh.count(k); ++s) {
    const auto& tup = mesh.simplices[k][s];
    for (int i = 0; i <= k; ++i) {
      std::vector<int> face;
      for (int j = 0; j <= k; ++j)
        if (j != i) face.push_back(tup[j]);
      int sign = (i % 2 == 0) ? 1 : -1;
      sign *= detail::parity_of_sort(face);
      int fi = mesh.face_index[k - 1].at(face);
      trips.emplace_back(fi, s, static_cast<double>(sign));
    }
  }
  SparseOperator B(mesh.count(k - 1), mesh.count(k));
  B.setFromTriplets(trips.begin(), trips.end());
  return B;
}

/// Structured triangulation of [0,side]^2, nx-by-ny cells, each split along
/// the lower-left to upper-right diagonal, counterclockwise orientation.
inline SimplicialComplex build_square_mesh(int nx, int ny, double side) {
  require(nx >= 1 && ny >= 1 && side > 0, "build_square_mesh: bad arguments");
  SimplicialComplex mesh;
  mesh.dim = 2;
  mesh.ambient_dim = 2;
  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      Vec p(2);
      p << side * i / nx, side * j / ny;
      mesh.vertices.push_back(p);
    }
  mesh.simplices.resize(3);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      int v00 = vid(i, j), v10 = vid(i + 1, j);
      int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      mesh.simplices[2].push_back({v00, v10, v11});
      mesh.simplices[2].push_back({v00, v11, v01});
    }
  detail::finalize(mesh);
  return mesh;
}

/// Regular m-gon inscribed in the unit circle, edges oriented
/// counterclockwise; vertices lie on the exact circle.
inline SimplicialComplex build_circle_mesh(int m) {
  require(m >= 3, "build_circle_mesh: need m >= 3");
  SimplicialComplex mesh;
  mesh.dim = 1;
  mesh.ambient_dim = 2;
  mesh.exact_unit_sphere = true;
  for (int i = 0; i < m; ++i) {
    double a = 2.0 * std::numbers::pi * i / m;
    Vec p(2);
    p << std::cos(a), std::sin(a);
    mesh.vertices.push_back(p);
  }
  mesh.simplices.resize(2);
  for (int i = 0; i < m; ++i) mesh.simplices[1].push_back({i, (i + 1) % m});
  detail::finalize(mesh);
  return mesh;
}

inline SimplicialComplex refine_uniform(const SimplicialComplex& mesh);

/// Icosahedron subdivided `level` times, vertices projected onto the unit
/// sphere, consistent outward orientation.
inline SimplicialComplex build_icosphere(int level) {
  require(level >= 0 && level <= 6, "build_icosphere: level must be in 0..6");
  SimplicialComplex mesh;
  mesh.dim = 2;
  mesh.ambient_dim = 3;
  mesh.exact_unit_sphere = true;
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const double coords[12][3] = {
      {-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
  for (const auto& c : coords) {
    Vec p(3);
    p << c[0], c[1], c[2];
    mesh.vertices.push_back(p / p.norm());
  }
  const int faces[20][3] = {
      {0, 11, 5},  {0, 5, 1},   {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},   {5, 11, 4},  {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},   {3, 4, 2},   {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},   {2, 4, 11},  {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  mesh.simplices.resize(3);
  for (const auto& f : faces) mesh.simplices[2].push_back({f[0], f[1], f[2]});
  detail::finalize(mesh);
  for (int l = 0; l < level; ++l) mesh = refine_uniform(mesh);
  return mesh;
}

/// Bisect every edge. Triangles split into 4 similar triangles preserving
/// orientation; meshes flagged with exact geometry get their new vertices
/// projected back onto the unit circle/sphere.
inline SimplicialComplex refine_uniform(const SimplicialComplex& mesh) {
  SimplicialComplex out;
  out.dim = mesh.dim;
  out.ambient_dim = mesh.ambient_dim;
  out.exact_unit_sphere = mesh.exact_unit_sphere;
  out.vertices = mesh.vertices;
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    Vec p = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
    if (mesh.exact_unit_sphere) p /= p.norm();
    int idx = static_cast<int>(out.vertices.size());
    out.vertices.push_back(p);
    midpoint[key] = idx;
    return idx;
  };
  out.simplices.resize(mesh.dim + 1);
  if (mesh.dim == 1) {
    for (const auto& e : mesh.simplices[1]) {
      int m = mid(e[0], e[1]);
      out.simplices[1].push_back({e[0], m});
      out.simplices[1].push_back({m, e[1]});
    }
  } else {
    for (const auto& t : mesh.simplices[2]) {
      int a = t[0], b = t[1], c = t[2];
      int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
      out.simplices[2].push_back({a, ab, ca});
      out.simplices[2].push_back({ab, b, bc});
      out.simplices[2].push_back({ca, bc, c});
      out.simplices[2].push_back({ab, bc, ca});
    }
  }
  detail::finalize(out);
  return out;
}

/// Legacy-VTK ASCII export (POINTS + CELLS/CELL_TYPES). Optional per-cell
/// scalar field attached as CELL_DATA.
inline void write_vtk(const SimplicialComplex& mesh, const std::string& path,
                      const Vec* cell_scalars = nullptr,
                      const std::string& field_name = "u") {
  std::ofstream f(path);
  require(f.good(), "write_vtk: cannot open " + path);
  f << "# vtk DataFile Version 3.0\nmesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  f << "POINTS " << mesh.vertices.size() << " double\n";
  for (const auto& v : mesh.vertices) {
    f << v[0] << " " << v[1] << " " << (mesh.ambient_dim == 3 ? v[2] : 0.0)
      << "\n";
  }
  int n = mesh.dim;
  int nc = mesh.count(n);
  f << "CELLS " << nc << " " << nc * (n + 2) << "\n";
  for (const auto& s : mesh.simplices[n]) {
    f << (n + 1);
    for (int v : s) f << " " << v;
    f << "\n";
  }
  f << "CELL_TYPES " << nc << "\n";
  for (int i = 0; i < nc; ++i) f << (n == 1 ? 3 : 5) << "\n";  // line / triangle
  if (cell_scalars) {
    require(cell_scalars->size() == nc, "write_vtk: field size mismatch");
    f << "CELL_DATA " << nc << "\nSCALARS " << field_name << " double 1\n";
    f << "LOOKUP_TABLE default\n";
    for (int i = 0; i < nc; ++i) f << (*cell_scalars)[i] << "\n";
  }
}

}  // namespace feec

#endif
