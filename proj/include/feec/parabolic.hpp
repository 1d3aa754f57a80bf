#ifndef FEEC_PARABOLIC_HPP
#define FEEC_PARABOLIC_HPP

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "hodge.hpp"

namespace feec {

/// Backward Euler for the mixed heat system
///   <sigma, tau> - <u, d tau>    = 0
///   <u_t, v> + <d sigma, v> + <du, dv> = <f, v>,
/// stepped as one block solve
///   [ Msigma     -B^T      ] [Sigma]   [ Msigma Sigma^n - B^T U^n ]
///   [ dt B    Mu + dt K    ] [  U  ] = [ Mu U^n + dt F^{n+1}      ].
/// The first block row keeps Msigma Sigma - B^T U invariant in exact
/// arithmetic, and with F = 0 the energy U^T Mu U is nonincreasing while the
/// harmonic component of u is conserved.
class BackwardEuler {
 public:
  BackwardEuler(const MixedSystem& sys, double dt) : sys_(&sys), dt_(dt) {
    require(sys.sigma != nullptr, "BackwardEuler: needs a sigma space");
    require(dt > 0, "BackwardEuler: dt must be positive");
    ns_ = sys.sigma->ndof;
    nu_ = sys.u->ndof;
    std::vector<Triplet> trips;
    auto add_block = [&](int r0, int c0, const SpMat& A, double s) {
      for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it)
          trips.emplace_back(r0 + it.row(), c0 + it.col(), s * it.value());
    };
    add_block(0, 0, sys.Msigma, 1.0);
    SpMat Bt = sys.B.transpose();
    add_block(0, ns_, Bt, -1.0);
    add_block(ns_, 0, sys.B, dt);
    add_block(ns_, ns_, sys.Mu, 1.0);
    add_block(ns_, ns_, sys.K, dt);
    SpMat A(ns_ + nu_, ns_ + nu_);
    A.setFromTriplets(trips.begin(), trips.end());
    lu_.compute(A);
    require(lu_.info() == Eigen::Success, "BackwardEuler: factorization failed");
    msigma_chol_.compute(sys.Msigma);
    require(msigma_chol_.info() == Eigen::Success, "BackwardEuler: Msigma not SPD");
  }

  /// Sigma(t0) consistent with the first equation: Msigma Sigma = B^T U0.
  Vec initial_sigma(const Vec& U0) const {
    return msigma_chol_.solve(sys_->B.transpose() * U0);
  }

  /// One step; F is the load vector at the new time level.
  void step(Vec& Sigma, Vec& U, const Vec& F) const {
    Vec rhs(ns_ + nu_);
    rhs.head(ns_) = sys_->Msigma * Sigma - sys_->B.transpose() * U;
    rhs.tail(nu_) = sys_->Mu * U + dt_ * F;
    Vec x = lu_.solve(rhs);
    Sigma = x.head(ns_);
    U = x.tail(nu_);
  }

  double energy(const Vec& U) const { return U.dot(sys_->Mu * U); }
  double dt() const { return dt_; }

 private:
  const MixedSystem* sys_;
  double dt_;
  int ns_ = 0, nu_ = 0;
  Eigen::SparseLU<SpMat> lu_;
  Eigen::SimplicialLDLT<SpMat> msigma_chol_;
};

/// Exact propagator of the homogeneous semidiscrete system: eliminating
/// Sigma gives Mu U' = -(B Msigma^{-1} B^T + K) U, solved spectrally through
/// the symmetric pencil (L, Mu). Intended for small systems (dense).
class SemidiscretePropagator {
 public:
  explicit SemidiscretePropagator(const MixedSystem& sys) : sys_(&sys) {
    require(sys.sigma != nullptr, "SemidiscretePropagator: needs a sigma space");
    Mat L = Mat(sys.K);
    Eigen::SimplicialLDLT<SpMat> chol(sys.Msigma);
    require(chol.info() == Eigen::Success, "SemidiscretePropagator: Msigma not SPD");
    L += Mat(sys.B) * chol.solve(Mat(sys.B.transpose()));
    Mat Mu(sys.Mu);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(L, Mu);
    require(es.info() == Eigen::Success, "SemidiscretePropagator: eigensolver failed");
    lambda_ = es.eigenvalues().cwiseMax(0.0);
    V_ = es.eigenvectors();  // Mu-orthonormal columns
    VtMu_ = V_.transpose() * Mu;
  }

  Vec u_at(const Vec& U0, double t) const {
    Vec c = VtMu_ * U0;
    for (int i = 0; i < c.size(); ++i) c[i] *= std::exp(-lambda_[i] * t);
    return V_ * c;
  }

 private:
  const MixedSystem* sys_;
  Vec lambda_;
  Mat V_, VtMu_;
};

}  // namespace feec

#endif
