#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <utility>

#include "numetric/plants.hpp"
#include "numetric/polynomials.hpp"
#include "numetric/realization.hpp"
#include "numetric/riccati.hpp"

namespace numetric {

/// Residual summary produced by verify_factors. All residuals are sup-norms
/// over the grid of Frobenius-norm defects.
struct FactorizationReport {
  double r_right = 0.0;    // sup || G^H G - I ||
  double r_left = 0.0;     // sup || Gt Gt^H - I ||
  double r_double = 0.0;   // sup || G G^H + Gt^H Gt - I ||
  std::optional<double> bezout_residual;  // sup defect of both Bezout identities
  bool passed = false;
  double tolerance = 0.0;
};

namespace detail {

/// Everything needed to sample the eight factor blocks at one point, kept in
/// one shared immutable bundle so samplers stay cheap to copy.
struct NcfData {
  MobiusMap mob;
  int n = 0, p = 0, m = 0;
  // right factorization in w
  Mat AF, B, CF, D, F, Sr;       // N = (D + CF Phi B) Sr,  M = (I + F Phi B) Sr
  // left factorization (right factorization of the transposed system)
  Mat AFt, Bt, CFt, Dt, Ft, Sl;  // Nt = (Dt + CFt Phi Bt) Sl, Mt = (I + Ft Phi Bt) Sl
  // Bezout witnesses
  Mat AL, L, BLD, SrInv;         // X = Sr^{-1} F Phi L, Y = Sr^{-1}(I - F Phi BLD)
  Mat ALt, Lt, BLDt, SlInv;      // transposed-system witnesses

  Mat phi(const Mat& a, const Mat& rhs, Cplx w) const {
    if (n == 0) return Mat::Zero(0, rhs.cols());
    return (w * Mat::Identity(n, n) - a).partialPivLu().solve(rhs);
  }
};

using NcfPtr = std::shared_ptr<const NcfData>;

inline Mat sample_g(const NcfPtr& d, Cplx z) {
  const Cplx w = d->mob.to_w(z);
  const Mat pb = d->phi(d->AF, d->B, w);
  Mat g(d->p + d->m, d->m);
  g.topRows(d->p) = (d->D + d->CF * pb) * d->Sr;
  g.bottomRows(d->m) = (Mat::Identity(d->m, d->m) + d->F * pb) * d->Sr;
  return g;
}

inline Mat sample_gt(const NcfPtr& d, Cplx z) {
  const Cplx w = d->mob.to_w(z);
  const Mat pb = d->phi(d->AFt, d->Bt, w);
  const Mat nt = (d->Dt + d->CFt * pb) * d->Sl;  // m x p
  const Mat mt = (Mat::Identity(d->p, d->p) + d->Ft * pb) * d->Sl;
  Mat gt(d->p, d->p + d->m);
  gt.leftCols(d->p) = -mt.transpose();
  gt.rightCols(d->m) = nt.transpose();
  return gt;
}

inline Mat sample_x(const NcfPtr& d, Cplx z) {
  return d->SrInv * d->F * d->phi(d->AL, d->L, d->mob.to_w(z));
}
inline Mat sample_y(const NcfPtr& d, Cplx z) {
  const Mat t = d->F * d->phi(d->AL, d->BLD, d->mob.to_w(z));
  return d->SrInv * (Mat::Identity(d->m, d->m) - t);
}
inline Mat sample_xt(const NcfPtr& d, Cplx z) {
  const Mat xt = d->SlInv * d->Ft * d->phi(d->ALt, d->Lt, d->mob.to_w(z));  // p x m
  return xt.transpose();
}
inline Mat sample_yt(const NcfPtr& d, Cplx z) {
  const Mat t = d->Ft * d->phi(d->ALt, d->BLDt, d->mob.to_w(z));
  const Mat yt = d->SlInv * (Mat::Identity(d->p, d->p) - t);
  return yt.transpose();
}

}  // namespace detail

/// Residual verification of a factor pair on its grid. The Bezout residual is
/// reported when the witnesses are present; `passed` requires every computed
/// residual (Bezout included) to stay within `tol`.
inline FactorizationReport verify_factors(const CoprimeFactors& f, double tol) {
  detail::require_same_grid(f.G, f.Gtilde);
  const int p = f.p, m = f.m;
  if (f.G.rows() != p + m || f.G.cols() != m || f.Gtilde.rows() != p ||
      f.Gtilde.cols() != p + m)
    throw ValidationError("factor block dimensions are inconsistent");
  FactorizationReport rep;
  rep.tolerance = tol;
  const bool with_bezout = f.X && f.Y && f.Xt && f.Yt;
  double bez = 0.0;
  const Mat eye_m = Mat::Identity(m, m);
  const Mat eye_p = Mat::Identity(p, p);
  const Mat eye_pm = Mat::Identity(p + m, p + m);
  for (int k = 0; k < f.G.grid()->size(); ++k) {
    const Mat& g = f.G.sample(k);
    const Mat& gt = f.Gtilde.sample(k);
    rep.r_right = std::max(rep.r_right, (g.adjoint() * g - eye_m).norm());
    rep.r_left = std::max(rep.r_left, (gt * gt.adjoint() - eye_p).norm());
    rep.r_double =
        std::max(rep.r_double, (g * g.adjoint() + gt.adjoint() * gt - eye_pm).norm());
    if (with_bezout) {
      const Mat n = g.topRows(p), dd = g.bottomRows(m);
      const Mat dt = -gt.leftCols(p), nt = gt.rightCols(m);
      bez = std::max(bez,
                     (f.X->sample(k) * n + f.Y->sample(k) * dd - eye_m).norm());
      bez = std::max(bez,
                     (nt * f.Xt->sample(k) + dt * f.Yt->sample(k) - eye_p).norm());
    }
  }
  if (with_bezout) rep.bezout_residual = bez;
  rep.passed = rep.r_right <= tol && rep.r_left <= tol && rep.r_double <= tol &&
               (!with_bezout || bez <= tol);
  return rep;
}

/// Normalized coprime factorization of a disk plant with a state-space or
/// rational body. The plant is moved to the Mobius coordinate (base point
/// clear of its poles), one Riccati equation per side produces the normalized
/// right and left factors, and observer-form Bezout witnesses complete the
/// double factorization. Residuals are verified on the grid and stamped on
/// the result.
inline CoprimeFactors ncf(const PlantModel& P, const RunConfig& cfg = {}) {
  validate(P);
  if (P.algebra != Algebra::Disk)
    throw UnsupportedError("factor construction is available for disk plants only");
  if (P.is_factors())
    throw UnsupportedError("plant already carries explicit factors");
  if (P.is_exp_quotient())
    throw UnsupportedError("no construction route for exponential-sum bodies");

  const MobiusMap mob = choose_mobius(pole_spectrum(P));
  const StateSpace ws = w_realization(P, mob);
  const int n = ws.order(), p = P.p, m = P.m;

  auto d = std::make_shared<detail::NcfData>();
  d->mob = mob;
  d->n = n;
  d->p = p;
  d->m = m;

  // Right side: X = A^H X A + C^H C - (A^H X B + C^H D) Rx^{-1} (...)^H.
  DareProblem right{ws.A, ws.B, ws.C.adjoint() * ws.C,
                    Mat::Identity(m, m) + ws.D.adjoint() * ws.D, ws.C.adjoint() * ws.D};
  const DareSolution rsol = solve_dare(right, cfg.tol);
  const Mat rx = right.R + ws.B.adjoint() * rsol.X * ws.B;
  d->AF = ws.A + ws.B * rsol.F;
  d->B = ws.B;
  d->CF = ws.C + ws.D * rsol.F;
  d->D = ws.D;
  d->F = rsol.F;
  d->Sr = inverse_sqrt(rx);

  // Left side: same construction on the transposed system.
  const Mat at = ws.A.transpose(), bt = ws.C.transpose(), ct = ws.B.transpose(),
            dt = ws.D.transpose();
  DareProblem left{at, bt, ct.adjoint() * ct, Mat::Identity(p, p) + dt.adjoint() * dt,
                   ct.adjoint() * dt};
  const DareSolution lsol = solve_dare(left, cfg.tol);
  const Mat lx = left.R + bt.adjoint() * lsol.X * bt;
  d->AFt = at + bt * lsol.F;
  d->Bt = bt;
  d->CFt = ct + dt * lsol.F;
  d->Dt = dt;
  d->Ft = lsol.F;
  d->Sl = inverse_sqrt(lx);

  // Bezout witnesses: the transposed feedback doubles as an observer gain
  // (AL = A + L C is Schur because its transpose is the closed loop of the
  // transposed Riccati problem), and symmetrically for the left side.
  d->L = lsol.F.transpose();
  d->AL = ws.A + d->L * ws.C;
  d->BLD = ws.B + d->L * ws.D;
  d->SrInv = inverse_sqrt(rx).inverse();
  d->Lt = rsol.F.transpose();
  d->ALt = at + d->Lt * ct;
  d->BLDt = bt + d->Lt * dt;
  d->SlInv = inverse_sqrt(lx).inverse();

  GridPtr grid = grid_for(P, cfg);
  const detail::NcfPtr dc = d;
  CoprimeFactors out;
  out.p = p;
  out.m = m;
  out.G = MatrixFunction::from_sampler(
      grid, p + m, m, [dc](const EvalPoint& pt) { return detail::sample_g(dc, pt.z); },
      cfg.parallel);
  out.Gtilde = MatrixFunction::from_sampler(
      grid, p, p + m, [dc](const EvalPoint& pt) { return detail::sample_gt(dc, pt.z); },
      cfg.parallel);
  out.X = MatrixFunction::from_sampler(
      grid, m, p, [dc](const EvalPoint& pt) { return detail::sample_x(dc, pt.z); },
      cfg.parallel);
  out.Y = MatrixFunction::from_sampler(
      grid, m, m, [dc](const EvalPoint& pt) { return detail::sample_y(dc, pt.z); },
      cfg.parallel);
  out.Xt = MatrixFunction::from_sampler(
      grid, m, p, [dc](const EvalPoint& pt) { return detail::sample_xt(dc, pt.z); },
      cfg.parallel);
  out.Yt = MatrixFunction::from_sampler(
      grid, p, p, [dc](const EvalPoint& pt) { return detail::sample_yt(dc, pt.z); },
      cfg.parallel);

  const FactorizationReport rep = verify_factors(out, cfg.tol.structural);
  out.r_right = rep.r_right;
  out.r_left = rep.r_left;
  out.r_double = rep.r_double;
  out.normalized = rep.passed;
  if (rep.r_right > 1e-6 || rep.r_left > 1e-6 || rep.r_double > 1e-6 ||
      (rep.bezout_residual && *rep.bezout_residual > 1e-6))
    throw FactorizationError("factor residuals are far out of tolerance");
  return out;
}

/// Factor access for any plant: construct for state-space and rational disk
/// bodies, materialize and verify for explicit-factor bodies.
inline CoprimeFactors obtain_factors(const PlantModel& P, const RunConfig& cfg = {}) {
  if (P.is_factors()) {
    CoprimeFactors f = materialize_factors(P, cfg);
    const FactorizationReport rep = verify_factors(f, cfg.tol.structural);
    f.r_right = rep.r_right;
    f.r_left = rep.r_left;
    f.r_double = rep.r_double;
    f.normalized = rep.passed;
    return f;
  }
  return ncf(P, cfg);
}

/// Recovers the unitary right multiple connecting two normalized factor pairs
/// of one plant: U = G2^* G1 pointwise. Verifies U is unitary and G1 = G2 U
/// within `tol` in the sup norm; mismatch raises NotEquivalentError.
inline MatrixFunction unitary_equivalence(const CoprimeFactors& f1, const CoprimeFactors& f2,
                                          double tol = 1e-7) {
  detail::require_same_grid(f1.G, f2.G);
  if (f1.p != f2.p || f1.m != f2.m)
    throw ValidationError("factor pairs have different plant dimensions");
  const int m = f1.m;
  std::vector<Mat> u(static_cast<std::size_t>(f1.G.grid()->size()));
  double worst = 0.0;
  const Mat eye = Mat::Identity(m, m);
  for (int k = 0; k < f1.G.grid()->size(); ++k) {
    u[k] = f2.G.sample(k).adjoint() * f1.G.sample(k);
    worst = std::max(worst, (u[k].adjoint() * u[k] - eye).norm());
    worst = std::max(worst, (f1.G.sample(k) - f2.G.sample(k) * u[k]).norm());
  }
  if (worst > tol)
    throw NotEquivalentError("factor pairs are not unitarily equivalent (defect " +
                             std::to_string(worst) + ")");
  return MatrixFunction::from_samples(f1.G.grid(), m, m, std::move(u));
}

/// Independent scalar route: normalized factors of a scalar plant n/d by
/// direct polynomial spectral factorization of phi = n n^* + d d^* on the
/// circle. Shares no code with the Riccati path, which makes it a genuine
/// cross-check oracle. Returns (N, D) as rational functions over the stable
/// spectral factor.
inline std::pair<RationalFn, RationalFn> scalar_spectral_factors(const RationalFn& f) {
  const int K = std::max({poly::degree(f.num), poly::degree(f.den), 0});
  // psi(z) = z^K (n n^* + d d^*): polynomial of degree <= 2K, positive on the
  // circle, roots in reciprocal-conjugate pairs.
  auto reflect_product = [K](const poly::Coeffs& a) {
    // z^K a(z) a^*(z) = a(z) * reflect(a)(z), reflect at K
    return poly::mul(a, poly::conj_reflect(a, K));
  };
  poly::Coeffs psi = poly::add(reflect_product(f.num), reflect_product(f.den));
  psi = poly::trimmed(psi, 1e-14 * std::abs(psi[K]));
  poly::Coeffs g{Cplx(1.0, 0.0)};
  for (const Cplx& r : poly::roots(psi)) {
    if (std::abs(r) > 1.0) g = poly::mul(g, poly::Coeffs{-r, Cplx(1.0, 0.0)});
  }
  // Fix the positive scale on the circle: |gamma g|^2 = phi there.
  double acc = 0.0;
  const int probes = 8;
  for (int k = 0; k < probes; ++k) {
    const Cplx z = std::polar(1.0, (2.0 * k + 1.0) * M_PI / probes);
    const double phi = std::norm(poly::eval(f.num, z)) + std::norm(poly::eval(f.den, z));
    acc += phi / std::norm(poly::eval(g, z));
  }
  const double gamma = std::sqrt(acc / probes);
  const poly::Coeffs fs = poly::scale(g, gamma);
  return {RationalFn(f.num, fs), RationalFn(f.den, fs)};
}

}  // namespace numetric
