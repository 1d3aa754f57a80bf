#include <catch2/catch_amalgamated.hpp>

#include "feec/hodge.hpp"

using namespace feec;

TEST_CASE("Koszul operator arithmetic") {
  // kappa(dx ^ dy) = x dy - y dx
  PolyForm vol = PolyForm::zero(2, 2);
  vol.comp[0][{0, 0}] = 1.0;
  PolyForm k1 = koszul(vol);
  REQUIRE(k1.comp[0].at({0, 1}) == -1.0);
  REQUIRE(k1.comp[1].at({1, 0}) == 1.0);
  // kappa(dx) = x
  PolyForm dx = PolyForm::zero(2, 1);
  dx.comp[0][{0, 0}] = 1.0;
  PolyForm k0 = koszul(dx);
  REQUIRE(k0.comp[0].at({1, 0}) == 1.0);
  // kappa(kappa(w)) = 0
  PolyForm kk = koszul(koszul(vol));
  for (const auto& [e, c] : kk.comp[0]) REQUIRE(c == 0.0);
}

TEST_CASE("d of d vanishes on polynomial forms") {
  PolyForm w = PolyForm::zero(2, 0);
  w.comp[0][{2, 1}] = 3.0;
  w.comp[0][{0, 2}] = -1.5;
  w.comp[0][{1, 1}] = 0.25;
  PolyForm dd = exterior_derivative(exterior_derivative(w));
  double s = 0.0;
  for (const auto& [e, c] : dd.comp[0]) s += std::abs(c);
  REQUIRE(s == 0.0);
}

TEST_CASE("degree-of-freedom counts") {
  SimplicialComplex circ = build_circle_mesh(8);
  REQUIRE(make_form_space(circ, 0, 1, Family::Trimmed).ndof == 8);
  SimplicialComplex sq = build_square_mesh(2, 2, 1.0);
  REQUIRE(make_form_space(sq, 2, 1, Family::Trimmed).ndof == 8);
  REQUIRE(make_form_space(sq, 1, 1, Family::Trimmed).ndof == 16);
  REQUIRE(make_form_space(sq, 0, 1, Family::Trimmed).ndof == 9);
  REQUIRE(make_form_space(sq, 2, 1, Family::Full).ndof == 24);
  // trimmed r=2 1-forms: two moments per edge plus two interior per triangle
  REQUIRE(make_form_space(sq, 1, 2, Family::Trimmed).ndof == 2 * 16 + 2 * 8);
  REQUIRE_THROWS(make_form_space(sq, 1, 1, Family::Full));
  REQUIRE_THROWS(make_form_space(sq, 0, 2, Family::Trimmed));
}

TEST_CASE("nodal bases are dual to their degrees of freedom") {
  SimplicialComplex sq = build_square_mesh(2, 2, 1.0);
  for (const FormSpace& fs :
       {make_form_space(sq, 1, 1, Family::Trimmed),
        make_form_space(sq, 1, 2, Family::Trimmed),
        make_form_space(sq, 2, 1, Family::Full)}) {
    for (const auto& [key, lb] : fs.cache)
      for (size_t i = 0; i < lb.dofs.size(); ++i)
        for (size_t j = 0; j < lb.basis.size(); ++j)
          REQUIRE(detail::apply_dof(lb.dofs[i], lb.basis[j], 2) ==
                  Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-11));
  }
}

TEST_CASE("top-degree Whitney basis is twice the volume form") {
  SimplicialComplex sq = build_square_mesh(1, 1, 1.0);
  FormSpace p0 = make_form_space(sq, 2, 1, Family::Trimmed);
  // unit integral over the reference triangle of area 1/2 forces coeff 2
  Vec xi(2);
  xi << 0.3, 0.3;
  REQUIRE(p0.elem_basis[0]->basis[0].eval(xi)[0] == Catch::Approx(2.0));
}

TEST_CASE("exterior derivative matrices are the transposed incidence matrices") {
  for (const SimplicialComplex& mesh :
       {build_square_mesh(3, 3, 1.0), build_icosphere(0)}) {
    FormSpace v0 = make_form_space(mesh, 0, 1, Family::Trimmed);
    FormSpace v1 = make_form_space(mesh, 1, 1, Family::Trimmed);
    FormSpace v2 = make_form_space(mesh, 2, 1, Family::Trimmed);
    SpMat D0 = exterior_derivative_matrix(v0, v1);
    SpMat D1 = exterior_derivative_matrix(v1, v2);
    Mat diff0 = Mat(D0) - Mat(boundary_matrix(mesh, 1)).transpose();
    Mat diff1 = Mat(D1) - Mat(boundary_matrix(mesh, 2)).transpose();
    REQUIRE(diff0.cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE(diff1.cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE(Mat(SpMat(D1 * D0)).cwiseAbs().maxCoeff() < 1e-12);
    // d of the constant 0-form vanishes
    REQUIRE((D0 * Vec::Ones(v0.ndof)).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("mass matrix oracles") {
  SimplicialComplex sq = build_square_mesh(4, 4, 1.0);
  FormSpace v0 = make_form_space(sq, 0, 1, Family::Trimmed);
  SpMat M = mass_matrix(v0);
  Vec ones = Vec::Ones(v0.ndof);
  REQUIRE(ones.dot(M * ones) == Catch::Approx(1.0).epsilon(1e-13));
  // the coordinate function x is in the space; its L2 norm^2 over the unit
  // square is 1/3 (exact barycentric integration: int lam_i lam_j = |T|(1+dij)/12)
  Vec xs(v0.ndof);
  for (int i = 0; i < v0.ndof; ++i) xs[i] = sq.vertices[i][0];
  REQUIRE(xs.dot(M * xs) == Catch::Approx(1.0 / 3.0).epsilon(1e-13));
  REQUIRE((Mat(M) - Mat(M).transpose()).cwiseAbs().maxCoeff() < 1e-15);
  Eigen::SelfAdjointEigenSolver<Mat> es((Mat(M)));
  REQUIRE(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("mixed matrix equals mass times derivative") {
  std::vector<std::pair<SimplicialComplex, bool>> cases;
  cases.emplace_back(build_square_mesh(3, 3, 1.0), false);
  cases.emplace_back(build_circle_mesh(12), true);
  cases.emplace_back(build_icosphere(1), true);
  for (auto& [mesh, curved] : cases) {
    int n = mesh.dim;
    FormSpace sig = make_form_space(mesh, n - 1, 1, Family::Trimmed);
    FormSpace usp = make_form_space(mesh, n, 1, Family::Trimmed);
    SpMat B = mixed_derivative_matrix(sig, usp, curved);
    SpMat MD = SpMat(mass_matrix(usp, curved) * exterior_derivative_matrix(sig, usp));
    double rel = (Mat(B) - Mat(MD)).norm() / Mat(B).norm();
    REQUIRE(rel < 1e-13);
  }
  // circle m=4 Whitney pair: two nonzeros per edge column
  SimplicialComplex c4 = build_circle_mesh(4);
  FormSpace s0 = make_form_space(c4, 0, 1, Family::Trimmed);
  FormSpace s1 = make_form_space(c4, 1, 1, Family::Trimmed);
  REQUIRE(mixed_derivative_matrix(s0, s1).nonZeros() == 8);
}

TEST_CASE("stiffness is PSD with cocycles in its kernel") {
  SimplicialComplex sq = build_square_mesh(3, 3, 1.0);
  FormSpace v0 = make_form_space(sq, 0, 1, Family::Trimmed);
  FormSpace v1 = make_form_space(sq, 1, 1, Family::Trimmed);
  SpMat K = stiffness_matrix(v0, v1);
  REQUIRE((K * Vec::Ones(v0.ndof)).cwiseAbs().maxCoeff() < 1e-12);  // row sums 0
  Eigen::SelfAdjointEigenSolver<Mat> es((Mat(K)));
  REQUIRE(es.eigenvalues().minCoeff() > -1e-12);
}

TEST_CASE("projection reproduces members of the space") {
  SimplicialComplex sq = build_square_mesh(3, 3, 1.0);
  FormSpace v0 = make_form_space(sq, 0, 1, Family::Trimmed);
  FormField f = [](const Vec& p) {
    Vec v(1);
    v << 1.0 + 2.0 * p[0] - 0.5 * p[1];
    return v;
  };
  Vec c = project(v0, f);
  for (int i = 0; i < v0.ndof; ++i)
    REQUIRE(c[i] == Catch::Approx(f(sq.vertices[i])[0]).margin(1e-10));
  FormField zero = [](const Vec& p) { return Vec::Zero(1).eval(); };
  REQUIRE(project(v0, zero).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("projection error rates follow best approximation") {
  // piecewise-constant 1-forms on the circle approximate smooth forms at
  // first order; this is the approximation-theoretic ceiling for the space
  FormField f = [](const Vec& p) {  // sin(theta) d theta
    Vec v(2);
    v << -p[1] * p[1], p[0] * p[1];
    return v;
  };
  std::vector<double> errs;
  for (int m : {32, 64, 128}) {
    SimplicialComplex mesh = build_circle_mesh(m);
    FormSpace v1 = make_form_space(mesh, 1, 1, Family::Trimmed);
    errs.push_back(l2_error(v1, project(v1, f, true), f, true));
  }
  double order = std::log2(errs[1] / errs[2]);
  REQUIRE(order > 0.85);
  REQUIRE(order < 1.15);

  // the richer trimmed r=2 1-form space reaches second order on the square
  FormField g = [](const Vec& p) {
    Vec v(2);
    v << std::sin(p[0] + 2 * p[1]), std::cos(3 * p[0] - p[1]);
    return v;
  };
  errs.clear();
  for (int nx : {4, 8, 16}) {
    SimplicialComplex mesh = build_square_mesh(nx, nx, 1.0);
    FormSpace rt1 = make_form_space(mesh, 1, 2, Family::Trimmed);
    errs.push_back(l2_error(rt1, project(rt1, g), g));
  }
  REQUIRE(std::log2(errs[1] / errs[2]) > 1.8);
}
