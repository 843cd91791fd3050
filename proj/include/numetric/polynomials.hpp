#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <vector>

#include "numetric/errors.hpp"

namespace numetric {

/// Dense univariate polynomials with complex coefficients, ascending degree.
/// The empty vector is the zero polynomial.
namespace poly {

using Coeffs = std::vector<std::complex<double>>;

inline Coeffs trimmed(Coeffs c, double tol = 0.0) {
  while (!c.empty() && std::abs(c.back()) <= tol) c.pop_back();
  return c;
}

inline int degree(const Coeffs& c) { return static_cast<int>(c.size()) - 1; }

inline std::complex<double> eval(const Coeffs& c, std::complex<double> x) {
  std::complex<double> acc(0.0, 0.0);
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

inline Coeffs add(const Coeffs& a, const Coeffs& b) {
  Coeffs out(std::max(a.size(), b.size()), {0.0, 0.0});
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

inline Coeffs scale(Coeffs a, std::complex<double> s) {
  for (auto& c : a) c *= s;
  return a;
}

inline Coeffs mul(const Coeffs& a, const Coeffs& b) {
  if (a.empty() || b.empty()) return {};
  Coeffs out(a.size() + b.size() - 1, {0.0, 0.0});
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

/// Euclidean division a = q*b + r with deg r < deg b. b must have a nonzero
/// leading coefficient.
inline void divmod(const Coeffs& a, const Coeffs& b, Coeffs& q, Coeffs& r) {
  Coeffs bb = trimmed(b);
  if (bb.empty()) throw ValidationError("polynomial division by zero");
  r = trimmed(a);
  q.assign(r.size() > bb.size() ? r.size() - bb.size() + 1 : 1, {0.0, 0.0});
  const auto lead = bb.back();
  while (r.size() >= bb.size() && !r.empty()) {
    const std::size_t shift = r.size() - bb.size();
    const auto f = r.back() / lead;
    q[shift] = f;
    for (std::size_t i = 0; i < bb.size(); ++i) r[shift + i] -= f * bb[i];
    r.pop_back();
    r = trimmed(r, 0.0);
    if (r.size() < bb.size()) break;
  }
  q = trimmed(q);
}

/// Roots via the companion matrix. The leading coefficient must be nonzero.
inline std::vector<std::complex<double>> roots(const Coeffs& c_in) {
  Coeffs c = trimmed(c_in);
  if (c.size() <= 1) return {};
  const int n = degree(c);
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -c[i] / c[n];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  std::vector<std::complex<double>> out(n);
  for (int i = 0; i < n; ++i) out[i] = es.eigenvalues()(i);
  return out;
}

/// Coefficient-wise conjugation composed with degree reversal at length K+1:
/// on |z| = 1, conj(p(z)) = z^{-K} * reflect(p)(z). Used when clearing the
/// involution from rational expressions on the circle.
inline Coeffs conj_reflect(const Coeffs& p, int K) {
  Coeffs out(static_cast<std::size_t>(K) + 1, {0.0, 0.0});
  for (std::size_t i = 0; i < p.size(); ++i)
    out[K - i] = std::conj(p[i]);
  return out;
}

}  // namespace poly
}  // namespace numetric
