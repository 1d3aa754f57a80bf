#ifndef FEEC_POLYFORM_HPP
#define FEEC_POLYFORM_HPP

#include <array>
#include <map>
#include <vector>

#include "core.hpp"

namespace feec {

/// Scalar polynomial in reference coordinates (x1, x2); exponent pair -> coeff.
/// For 1-dimensional reference elements the second exponent stays zero.
using Poly = std::map<std::array<int, 2>, double>;

inline void poly_axpy(Poly& p, double a, const Poly& q) {
  for (const auto& [e, c] : q) p[e] += a * c;
}

inline Poly poly_mul(const Poly& p, const Poly& q) {
  Poly r;
  for (const auto& [ep, cp] : p)
    for (const auto& [eq, cq] : q)
      r[{ep[0] + eq[0], ep[1] + eq[1]}] += cp * cq;
  return r;
}

inline Poly poly_diff(const Poly& p, int var) {
  Poly r;
  for (const auto& [e, c] : p) {
    if (e[var] == 0) continue;
    auto f = e;
    f[var] -= 1;
    r[f] += c * e[var];
  }
  return r;
}

inline double poly_eval(const Poly& p, const Vec& x) {
  double s = 0.0;
  for (const auto& [e, c] : p) {
    double m = c;
    for (int i = 0; i < e[0]; ++i) m *= x[0];
    for (int i = 0; i < e[1]; ++i) m *= x[1];
    s += m;
  }
  return s;
}

/// Exact integral over the reference simplex: [0,1] for dim 1,
/// {x,y >= 0, x+y <= 1} for dim 2 (where int x^a y^b = a! b! / (a+b+2)!).
inline double poly_integral(const Poly& p, int dim) {
  auto fact = [](int m) {
    double f = 1.0;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
  };
  double s = 0.0;
  for (const auto& [e, c] : p) {
    if (dim == 1)
      s += c / (e[0] + 1);
    else
      s += c * fact(e[0]) * fact(e[1]) / fact(e[0] + e[1] + 2);
  }
  return s;
}

/// Differential form with polynomial coefficients on the reference simplex.
/// Component layout: k=0 -> (f); k=1 -> (f1 dx1 [, f2 dx2]); k=2 -> (f dx1^dx2).
struct PolyForm {
  int n = 2;  // reference dimension
  int k = 0;  // form degree
  std::vector<Poly> comp;

  static int ncomp(int n, int k) { return binomial(n, k); }

  static PolyForm zero(int n, int k) {
    PolyForm w;
    w.n = n;
    w.k = k;
    w.comp.resize(ncomp(n, k));
    return w;
  }

  Vec eval(const Vec& x) const {
    Vec v(comp.size());
    for (size_t i = 0; i < comp.size(); ++i) v[i] = poly_eval(comp[i], x);
    return v;
  }
};

inline PolyForm form_axpy(PolyForm w, double a, const PolyForm& q) {
  require(w.n == q.n && w.k == q.k, "form_axpy: shape mismatch");
  for (size_t i = 0; i < w.comp.size(); ++i) poly_axpy(w.comp[i], a, q.comp[i]);
  return w;
}

/// Exterior derivative d: k-forms -> (k+1)-forms; d(d(w)) vanishes identically.
inline PolyForm exterior_derivative(const PolyForm& w) {
  require(w.k < w.n, "exterior_derivative: top-degree form");
  PolyForm r = PolyForm::zero(w.n, w.k + 1);
  if (w.k == 0) {
    for (int i = 0; i < w.n; ++i) r.comp[i] = poly_diff(w.comp[0], i);
  } else {  // k=1, n=2
    r.comp[0] = poly_diff(w.comp[1], 0);
    poly_axpy(r.comp[0], -1.0, poly_diff(w.comp[0], 1));
  }
  return r;
}

/// Koszul operator: contraction with the position field x1 d/dx1 + x2 d/dx2.
/// Satisfies koszul(koszul(w)) = 0; homogeneous pieces obey d kappa + kappa d = (r+k) id.
inline PolyForm koszul(const PolyForm& w) {
  require(w.k >= 1, "koszul: zero-form");
  PolyForm r = PolyForm::zero(w.n, w.k - 1);
  Poly x1 = {{{1, 0}, 1.0}};
  Poly x2 = {{{0, 1}, 1.0}};
  if (w.k == 1) {
    r.comp[0] = poly_mul(x1, w.comp[0]);
    if (w.n == 2) poly_axpy(r.comp[0], 1.0, poly_mul(x2, w.comp[1]));
  } else {  // k=2, n=2: X _| (f dx1^dx2) = f (x1 dx2 - x2 dx1)
    r.comp[0] = poly_mul(x2, w.comp[0]);
    for (auto& [e, c] : r.comp[0]) c = -c;
    r.comp[1] = poly_mul(x1, w.comp[0]);
  }
  return r;
}

/// Wedge of two 1-forms in dimension 2.
inline PolyForm wedge11(const PolyForm& a, const PolyForm& b) {
  require(a.n == 2 && a.k == 1 && b.n == 2 && b.k == 1, "wedge11: need two 1-forms");
  PolyForm r = PolyForm::zero(2, 2);
  r.comp[0] = poly_mul(a.comp[0], b.comp[1]);
  Poly t = poly_mul(a.comp[1], b.comp[0]);
  poly_axpy(r.comp[0], -1.0, t);
  return r;
}

namespace detail {

inline std::vector<std::array<int, 2>> monomials_up_to(int n, int r) {
  std::vector<std::array<int, 2>> out;
  for (int d = 0; d <= r; ++d)
    for (int a = d; a >= 0; --a) {
      int b = d - a;
      if (n == 1 && b > 0) continue;
      out.push_back({a, b});
    }
  return out;
}

inline std::vector<std::array<int, 2>> monomials_exactly(int n, int r) {
  std::vector<std::array<int, 2>> out;
  for (int a = r; a >= 0; --a) {
    int b = r - a;
    if (n == 1 && b > 0) continue;
    out.push_back({a, b});
  }
  return out;
}

}  // namespace detail

/// Spanning set of P_r Lambda^k on the reference simplex: every monomial of
/// total degree <= r times every coordinate form component.
inline std::vector<PolyForm> full_poly_span(int n, int k, int r) {
  std::vector<PolyForm> out;
  int nc = PolyForm::ncomp(n, k);
  for (const auto& e : detail::monomials_up_to(n, r))
    for (int c = 0; c < nc; ++c) {
      PolyForm w = PolyForm::zero(n, k);
      w.comp[c][e] = 1.0;
      out.push_back(w);
    }
  return out;
}

/// Spanning set of the trimmed family P_r^- Lambda^k =
/// P_{r-1} Lambda^k + koszul(H_{r-1} Lambda^{k+1}).
/// For k = n the Koszul part is empty and the space reduces to P_{r-1} Lambda^n.
inline std::vector<PolyForm> trimmed_poly_span(int n, int k, int r) {
  require(r >= 1, "trimmed_poly_span: r >= 1");
  std::vector<PolyForm> out = full_poly_span(n, k, r - 1);
  if (k < n) {
    int nc = PolyForm::ncomp(n, k + 1);
    for (const auto& e : detail::monomials_exactly(n, r - 1))
      for (int c = 0; c < nc; ++c) {
        PolyForm w = PolyForm::zero(n, k + 1);
        w.comp[c][e] = 1.0;
        out.push_back(koszul(w));
      }
  }
  return out;
}

}  // namespace feec

#endif
