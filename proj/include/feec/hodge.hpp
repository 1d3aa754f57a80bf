#ifndef FEEC_HODGE_HPP
#define FEEC_HODGE_HPP

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "form_space.hpp"

namespace feec {

/// Mixed weak derivative matrix B with B(a, b) = <d psi_b, phi_a>, assembled
/// by quadrature: rows over the k-form space, columns over the (k-1)-forms.
inline SpMat mixed_derivative_matrix(const FormSpace& sigma, const FormSpace& u,
                                     ChartOptions geo = {}, int quad_degree = -1) {
  const auto& mesh = *u.mesh;
  require(sigma.mesh == u.mesh && u.k == sigma.k + 1,
          "mixed_derivative_matrix: incompatible spaces");
  if (quad_degree < 0)
    quad_degree = 2 * std::max(sigma.r, u.r) + 2 + ((geo.s > 1 || geo.exact) ? 2 : 0);
  QuadRule rule = simplex_rule(mesh.dim, quad_degree);
  std::vector<Triplet> trips;
  for (int e = 0; e < mesh.count(mesh.dim); ++e) {
    SurfaceChart em = element_chart(mesh, e, geo);
    const auto& slb = *sigma.elem_basis[e];
    const auto& ulb = *u.elem_basis[e];
    Mat loc = Mat::Zero(ulb.basis.size(), slb.basis.size());
    for (const auto& node : rule) {
      GeomSample g = em.sample(node.point);
      for (size_t a = 0; a < ulb.basis.size(); ++a) {
        Vec ua = ulb.basis[a].eval(node.point);
        for (size_t b = 0; b < slb.basis.size(); ++b)
          loc(a, b) += node.weight *
                       component_pairing(u.k, mesh.dim, g, ua,
                                         slb.dbasis[b].eval(node.point));
      }
    }
    for (size_t a = 0; a < ulb.basis.size(); ++a)
      for (size_t b = 0; b < slb.basis.size(); ++b)
        trips.emplace_back(u.elem_dofs[e][a], sigma.elem_dofs[e][b], loc(a, b));
  }
  SpMat B(u.ndof, sigma.ndof);
  B.setFromTriplets(trips.begin(), trips.end());
  return B;
}

/// Stiffness K = D^T M_{k+1} D where D is the exterior derivative matrix
/// into the given (k+1)-form space.
inline SpMat stiffness_matrix(const FormSpace& u, const FormSpace& up1,
                              ChartOptions geo = {}) {
  SpMat D = exterior_derivative_matrix(u, up1);
  SpMat M = mass_matrix(up1, geo);
  return SpMat(D.transpose() * M * D);
}

/// All matrices of one Hodge-Laplacian level: (k-1)-forms sigma (absent for
/// k = 0), k-forms u, and the harmonic basis H of the kernel of
/// K + B Msigma^{-1} B^T, whose columns are Mu-orthonormal.
struct MixedSystem {
  const FormSpace* sigma = nullptr;
  const FormSpace* u = nullptr;
  SpMat Msigma;  // empty when sigma is absent
  SpMat Mu;
  SpMat B;       // empty when sigma is absent
  SpMat K;       // zero when u is top-degree
  Mat H;
};

/// Mu-orthonormal basis of the discrete harmonic space, found as the
/// near-null eigenspace of the full Laplacian pencil (L, Mu). Eigenvalues
/// below 1e-8 * lambda_max count as zero; a spectral gap of at least 1e6
/// between the zero and nonzero groups is enforced.
inline Mat harmonic_basis(const Mat& L, const Mat& Mu) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(L, Mu);
  require(es.info() == Eigen::Success, "harmonic_basis: eigensolver failed");
  const Vec& lam = es.eigenvalues();
  const int n = static_cast<int>(lam.size());
  double lmax = std::abs(lam[n - 1]);
  require(lmax > 0, "harmonic_basis: zero operator");
  int nz = 0;
  while (nz < n && lam[nz] < 1e-8 * lmax) ++nz;
  if (nz > 0 && nz < n) {
    double denom = std::abs(lam[nz - 1]);
    require(denom == 0.0 || lam[nz] / denom >= 1e6,
            "harmonic_basis: no clear spectral gap at the rank cut");
  }
  return es.eigenvectors().leftCols(nz);
}

/// Assembles the mixed system; `compute_harmonic` can be disabled for large
/// time-stepping-only systems where the dense eigensolve behind the harmonic
/// basis would dominate the runtime and H is never used.
inline MixedSystem build_mixed_system(const FormSpace* sigma, const FormSpace& u,
                                      const FormSpace* up1, ChartOptions geo = {},
                                      bool compute_harmonic = true) {
  MixedSystem sys;
  sys.sigma = sigma;
  sys.u = &u;
  sys.Mu = mass_matrix(u, geo);
  if (up1)
    sys.K = stiffness_matrix(u, *up1, geo);
  else
    sys.K = SpMat(u.ndof, u.ndof);
  if (sigma) {
    sys.Msigma = mass_matrix(*sigma, geo);
    sys.B = mixed_derivative_matrix(*sigma, u, geo);
  }
  if (!compute_harmonic) {
    sys.H = Mat::Zero(u.ndof, 0);
    return sys;
  }
  Mat L = Mat(sys.K);
  if (sigma) {
    Eigen::SimplicialLDLT<SpMat> chol(sys.Msigma);
    require(chol.info() == Eigen::Success, "build_mixed_system: Msigma factorization");
    Mat Bt = Mat(sys.B).transpose();
    L += Mat(sys.B) * chol.solve(Bt);
  }
  sys.H = harmonic_basis(L, Mat(sys.Mu));
  return sys;
}

/// Solution of the mixed problem together with the relative residuals of its
/// three defining equations.
struct MixedSolution {
  Vec sigma;  // empty when the system has no sigma space
  Vec u;
  Vec p;      // harmonic multiplier coordinates
  double res_sigma = 0.0, res_u = 0.0, res_harmonic = 0.0;
};

/// Saddle-point solver for
///   <sigma, tau> - <u, d tau>           = 0
///   <d sigma, v> + <du, dv> + <p, v>    = <f, v>
///   <u, q>                              = <w, q>   for harmonic q,
/// assembled as one symmetric bordered sparse matrix and factored once with
/// SparseLU so repeated right-hand sides are cheap.
class MixedEllipticSolver {
 public:
  explicit MixedEllipticSolver(const MixedSystem& sys) : sys_(&sys) {
    ns_ = sys.sigma ? sys.sigma->ndof : 0;
    nu_ = sys.u->ndof;
    nh_ = static_cast<int>(sys.H.cols());
    const int N = ns_ + nu_ + nh_;
    std::vector<Triplet> trips;
    auto add_block = [&](int r0, int c0, const SpMat& A, double s) {
      for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it)
          trips.emplace_back(r0 + it.row(), c0 + it.col(), s * it.value());
    };
    if (ns_ > 0) {
      add_block(0, 0, sys.Msigma, -1.0);  // negated for a symmetric matrix
      SpMat Bt = sys.B.transpose();
      add_block(0, ns_, Bt, 1.0);
      add_block(ns_, 0, sys.B, 1.0);
    }
    add_block(ns_, ns_, sys.K, 1.0);
    Mat MH = Mat(sys.Mu) * sys.H;
    for (int j = 0; j < nh_; ++j)
      for (int i = 0; i < nu_; ++i) {
        trips.emplace_back(ns_ + i, ns_ + nu_ + j, MH(i, j));
        trips.emplace_back(ns_ + nu_ + j, ns_ + i, MH(i, j));
      }
    SpMat A(N, N);
    A.setFromTriplets(trips.begin(), trips.end());
    lu_.compute(A);
    require(lu_.info() == Eigen::Success, "MixedEllipticSolver: factorization failed");
  }

  /// F is the load <f, phi_i>; w_harm holds <w, q_j> for the harmonic basis.
  MixedSolution solve(const Vec& F, const Vec& w_harm) const {
    require(F.size() == nu_, "MixedEllipticSolver::solve: bad load size");
    require(w_harm.size() == nh_, "MixedEllipticSolver::solve: bad harmonic size");
    Vec rhs = Vec::Zero(ns_ + nu_ + nh_);
    rhs.segment(ns_, nu_) = F;
    rhs.tail(nh_) = w_harm;
    Vec x = lu_.solve(rhs);
    MixedSolution sol;
    sol.sigma = x.head(ns_);
    sol.u = x.segment(ns_, nu_);
    sol.p = x.tail(nh_);
    const auto& s = *sys_;
    double fscale = std::max(F.norm(), 1.0);
    if (ns_ > 0)
      sol.res_sigma =
          (s.Msigma * sol.sigma - s.B.transpose() * sol.u).norm() / fscale;
    Vec r2 = s.K * sol.u + s.Mu * (s.H * sol.p) - F;
    if (ns_ > 0) r2 += s.B * sol.sigma;
    sol.res_u = r2.norm() / fscale;
    if (nh_ > 0)
      sol.res_harmonic = (s.H.transpose() * (s.Mu * sol.u) - w_harm).norm() /
                         std::max(w_harm.norm(), 1.0);
    return sol;
  }

 private:
  const MixedSystem* sys_;
  Eigen::SparseLU<SpMat> lu_;
  int ns_ = 0, nu_ = 0, nh_ = 0;
};

/// Discrete Hodge decomposition of a k-form coefficient vector:
/// v = (exact part in range D) + (harmonic part in span H) + remainder,
/// mutually Mu-orthogonal.
struct HodgeParts {
  Vec exact_part;
  Vec harmonic_part;
  Vec coexact_part;
};

inline HodgeParts hodge_decompose(const SpMat& Mu, const SpMat& D, const Mat& H,
                                  const Vec& v) {
  Mat Md(Mu);
  Eigen::LLT<Mat> llt(Md);
  require(llt.info() == Eigen::Success, "hodge_decompose: mass not SPD");
  Mat Lt = llt.matrixL().transpose();
  Mat A = Lt * Mat(D);
  Vec tau = A.completeOrthogonalDecomposition().solve(Vec(Lt * v));
  HodgeParts parts;
  parts.exact_part = D * tau;
  parts.harmonic_part = H * (H.transpose() * (Mu * v));
  parts.coexact_part = v - parts.exact_part - parts.harmonic_part;
  return parts;
}

/// Discrete Poincare constant 1/sqrt(lambda_min) from the smallest nonzero
/// eigenvalue of the pencil (K, M).
inline double poincare_constant(const SpMat& K, const SpMat& M) {
  Mat Kd(K), Md(M);
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(Kd, Md);
  require(es.info() == Eigen::Success, "poincare_constant: eigensolver failed");
  const Vec& lam = es.eigenvalues();
  double lmax = std::abs(lam[lam.size() - 1]);
  for (int i = 0; i < lam.size(); ++i)
    if (lam[i] >= 1e-8 * lmax) return 1.0 / std::sqrt(lam[i]);
  require(false, "poincare_constant: operator has no nonzero eigenvalue");
  return 0.0;
}

/// Largest deviation |1 - lambda| over the pencil (Mtilde, M): an operator
/// bound for the geometric consistency defect between two mass matrices on
/// the same space (flat versus exact geometry).
inline double mass_deviation(const SpMat& Mtilde, const SpMat& M) {
  Mat Td(Mtilde), Md(M);
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(Td, Md, Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, "mass_deviation: eigensolver failed");
  return (es.eigenvalues().array() - 1.0).abs().maxCoeff();
}

}  // namespace feec

#endif
