#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <vector>

#include "numetric/config.hpp"
#include "numetric/errors.hpp"
#include "numetric/matrix_function.hpp"

namespace numetric {

/// Discrete algebraic Riccati equation with cross weight,
///   X = A^H X A + Q - (A^H X B + S) (R + B^H X B)^{-1} (B^H X A + S^H),
/// Q, R Hermitian, R > 0.
struct DareProblem {
  Mat A, B, Q, R, S;
};

struct DareSolution {
  Mat X;  // Hermitian PSD stabilizing solution
  Mat F;  // F = -(R + B^H X B)^{-1} (B^H X A + S^H); A + B F Schur stable
  int iterations = 0;
  double residual = 0.0;
};

namespace detail {

inline Mat hermitize(const Mat& m) { return 0.5 * (m + m.adjoint()); }

inline double dare_residual(const DareProblem& pb, const Mat& x) {
  const Mat rb = pb.R + pb.B.adjoint() * x * pb.B;
  const Mat k = pb.A.adjoint() * x * pb.B + pb.S;
  const Mat rhs =
      pb.A.adjoint() * x * pb.A + pb.Q - k * rb.partialPivLu().solve(k.adjoint());
  const double scale = std::max(1.0, x.norm());
  return (x - rhs).norm() / scale;
}

}  // namespace detail

/// Structure-preserving doubling iteration for the stabilizing solution.
/// The cross weight is folded away first (Ab = A - B R^{-1} S^H,
/// Qb = Q - S R^{-1} S^H >= 0), then
///   A_{k+1} = A_k W^{-1} A_k,          W = I + G_k H_k,
///   G_{k+1} = G_k + A_k (W^{-1} G_k) A_k^H,
///   H_{k+1} = H_k + A_k^H (H_k W^{-1}) A_k,
/// with G_0 = B R^{-1} B^H and H_0 = Qb; H_k converges quadratically to X
/// when the symplectic pencil has no unit-circle eigenvalues. Divergence or
/// stagnation raises RiccatiError carrying the per-step update history.
inline DareSolution solve_dare(const DareProblem& pb, const Tolerances& tol = {}) {
  const int n = static_cast<int>(pb.A.rows());
  const int m = static_cast<int>(pb.B.cols());
  if (pb.A.cols() != n || pb.B.rows() != n || pb.Q.rows() != n || pb.Q.cols() != n ||
      pb.R.rows() != m || pb.R.cols() != m || pb.S.rows() != n || pb.S.cols() != m)
    throw ValidationError("Riccati data dimensions are inconsistent");
  DareSolution out;
  if (n == 0) {
    out.X = Mat::Zero(0, 0);
    out.F = Mat::Zero(m, 0);
    return out;
  }
  const auto rlu = pb.R.partialPivLu();
  const Mat rinv_sh = rlu.solve(pb.S.adjoint());           // R^{-1} S^H
  const Mat ab = pb.A - pb.B * rinv_sh;
  const Mat qb = detail::hermitize(pb.Q - pb.S * rinv_sh);
  Mat a = ab;
  Mat g = detail::hermitize(pb.B * rlu.solve(pb.B.adjoint()));
  Mat h = qb;
  std::vector<double> history;
  const int max_iterations = 500;
  bool converged = false;
  for (int it = 0; it < max_iterations; ++it) {
    const Mat w = Mat::Identity(n, n) + g * h;
    const auto wlu = w.partialPivLu();
    const Mat v1 = wlu.solve(a);        // W^{-1} A
    const Mat v2 = wlu.solve(g);        // W^{-1} G
    const Mat hnext = detail::hermitize(h + a.adjoint() * h * v1);
    const double step = (hnext - h).norm();
    const double scale = std::max(1.0, hnext.norm());
    history.push_back(step / scale);
    g = detail::hermitize(g + a * v2 * a.adjoint());
    const Mat anext = a * v1;
    a = anext;
    h = hnext;
    if (!h.allFinite() || !g.allFinite() || !a.allFinite())
      throw RiccatiError("doubling iteration diverged", history);
    if (history.back() <= tol.riccati) {
      out.iterations = it + 1;
      converged = true;
      break;
    }
  }
  if (!converged)
    throw RiccatiError("doubling iteration failed to converge", history);
  out.X = detail::hermitize(h);
  const Mat rb = pb.R + pb.B.adjoint() * out.X * pb.B;
  out.F = -rb.partialPivLu().solve(pb.B.adjoint() * out.X * pb.A + pb.S.adjoint());
  out.residual = detail::dare_residual(pb, out.X);
  if (out.residual > 1e-6)
    throw RiccatiError("doubling iteration converged to a spurious fixed point", history);
  return out;
}

/// Hermitian principal inverse square root via the eigendecomposition;
/// the argument must be positive definite.
inline Mat inverse_sqrt(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(detail::hermitize(m));
  if (es.info() != Eigen::Success)
    throw RiccatiError("eigendecomposition failed", {});
  Eigen::VectorXd ev = es.eigenvalues();
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) <= 0.0) throw RiccatiError("matrix is not positive definite", {});
    ev(i) = 1.0 / std::sqrt(ev(i));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace numetric
