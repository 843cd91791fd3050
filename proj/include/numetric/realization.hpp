#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <vector>

#include "numetric/plants.hpp"
#include "numetric/polynomials.hpp"

namespace numetric {

/// Disk automorphism machinery. With stability meaning analyticity on the
/// closed unit disk, plants are improper in z (z itself is stable), so no
/// z-domain realization exists in general. The substitution
///
///   z = (1 + a w) / (w + conj(a)),  w = (1 - conj(a) z) / (z - a),  |a| < 1
///
/// maps the closed z-disk onto the closed exterior of the w-disk and the unit
/// circle onto itself. Functions analytic on the closed z-disk become proper
/// rational functions of w with all poles strictly inside the w-disk, which
/// is exactly the Schur-stability convention the Riccati machinery expects.
struct MobiusMap {
  Cplx a;  // base point, |a| < 1, away from plant poles

  Cplx to_w(Cplx z) const { return (1.0 - std::conj(a) * z) / (z - a); }
  Cplx to_z(Cplx w) const { return (1.0 + a * w) / (w + std::conj(a)); }
};

namespace detail {

/// Substitutes z = (1+aw)/(w+conj(a)) into a polynomial p of formal degree K
/// and clears denominators: returns the w-polynomial
///   sum_k p_k (1+aw)^k (w+conj(a))^{K-k},
/// of degree <= K with leading coefficient p(a).
inline poly::Coeffs mobius_numerator(const poly::Coeffs& p, int K, Cplx a) {
  std::vector<poly::Coeffs> up(K + 1), lo(K + 1);
  up[0] = {Cplx(1.0, 0.0)};
  lo[0] = {Cplx(1.0, 0.0)};
  const poly::Coeffs u{Cplx(1.0, 0.0), a};           // 1 + a w
  const poly::Coeffs l{std::conj(a), Cplx(1.0, 0.0)};  // w + conj(a)
  for (int k = 1; k <= K; ++k) {
    up[k] = poly::mul(up[k - 1], u);
    lo[k] = poly::mul(lo[k - 1], l);
  }
  poly::Coeffs acc;
  for (int k = 0; k <= K && k < static_cast<int>(p.size()); ++k) {
    if (p[k] == Cplx(0.0, 0.0)) continue;
    acc = poly::add(acc, poly::scale(poly::mul(up[k], lo[K - k]), p[k]));
  }
  if (acc.empty()) acc = {Cplx(0.0, 0.0)};
  acc.resize(K + 1, Cplx(0.0, 0.0));
  return acc;
}

}  // namespace detail

/// Proper rational matrix in the Mobius coordinate w, stored entrywise with
/// numerator/denominator polynomial pairs.
struct ProperRational {
  int p = 0, m = 0;
  std::vector<poly::Coeffs> num, den;  // row-major

  const poly::Coeffs& n(int i, int j) const { return num[static_cast<std::size_t>(i) * m + j]; }
  const poly::Coeffs& d(int i, int j) const { return den[static_cast<std::size_t>(i) * m + j]; }
};

/// Chooses a base point for the Mobius map that keeps its distance from the
/// given spectrum (plant poles or state eigenvalues). Deterministic: first
/// candidate whose margin exceeds 0.2 of the candidate spacing wins, else the
/// candidate with the largest margin.
inline MobiusMap choose_mobius(const std::vector<Cplx>& avoid) {
  static const Cplx candidates[] = {
      {0.0, 0.0},   {0.4, 0.0},   {-0.35, 0.0}, {0.0, 0.45},  {0.0, -0.3},
      {0.3, 0.3},   {-0.25, 0.35}, {0.5, -0.2}, {-0.45, -0.25}, {0.15, -0.55},
  };
  double best_margin = -1.0;
  Cplx best = candidates[0];
  for (const Cplx& c : candidates) {
    double margin = 2.0;  // no constraint: anything in the disk works
    for (const Cplx& s : avoid) margin = std::min(margin, std::abs(c - s));
    if (margin > 0.2) return MobiusMap{c};
    if (margin > best_margin) {
      best_margin = margin;
      best = c;
    }
  }
  return MobiusMap{best};
}

/// Mobius transform of a z-domain realization: if P(z) = D + C (zI-A)^{-1} B
/// and z(w) as above, then P(z(w)) = Dh + Ch (wI - Ah)^{-1} Bh with
///   E  = (aI - A)^{-1}
///   Ah = E (conj(a) A - I),  Bh = E B,  Ch = C (Ah + conj(a) I),  Dh = D + C E B.
/// Requires a outside the spectrum of A.
inline StateSpace mobius_state_space(const StateSpace& ss, const MobiusMap& mob) {
  const int n = ss.order();
  if (n == 0) return ss;
  const Mat e =
      (mob.a * Mat::Identity(n, n) - ss.A).partialPivLu().solve(Mat::Identity(n, n));
  StateSpace out;
  out.A = e * (std::conj(mob.a) * ss.A - Mat::Identity(n, n));
  out.B = e * ss.B;
  out.C = ss.C * (out.A + std::conj(mob.a) * Mat::Identity(n, n));
  out.D = ss.D + ss.C * out.B;
  return out;
}

/// Entrywise Mobius substitution of a z-domain rational matrix. Each entry
/// n(z)/d(z) is written to the common formal degree K = max(deg n, deg d);
/// the transformed denominator has leading coefficient d(a) != 0, so every
/// entry comes out proper in w.
inline ProperRational mobius_rational(const SymMat<RationalFn>& rm, const MobiusMap& mob) {
  ProperRational out;
  out.p = rm.rows();
  out.m = rm.cols();
  out.num.reserve(static_cast<std::size_t>(out.p) * out.m);
  out.den.reserve(static_cast<std::size_t>(out.p) * out.m);
  for (int i = 0; i < out.p; ++i)
    for (int j = 0; j < out.m; ++j) {
      const RationalFn& f = rm.at(i, j);
      const int K = std::max({poly::degree(f.num), poly::degree(f.den), 0});
      poly::Coeffs dn = detail::mobius_numerator(f.den, K, mob.a);
      double dmax = 0.0;
      for (const Cplx& c : dn) dmax = std::max(dmax, std::abs(c));
      if (std::abs(dn.back()) < 1e-12 * dmax)
        throw ValidationError("Mobius base point coincides with a plant pole");
      out.num.push_back(detail::mobius_numerator(f.num, K, mob.a));
      out.den.push_back(std::move(dn));
    }
  return out;
}

/// Column-companion realization of a proper rational matrix. Each column uses
/// the product of its entry denominators as a common denominator, realized in
/// controllable canonical form; the blocks are stacked block-diagonally.
/// The pair (A, B) is controllable by construction; any cancellation modes
/// are unobservable and, thanks to the circle margin kept by validation,
/// never lie on the unit circle.
inline StateSpace companion_realization(const ProperRational& r) {
  struct Column {
    poly::Coeffs q;                  // monic common denominator
    std::vector<poly::Coeffs> s;     // strictly proper numerators, one per row
    std::vector<Cplx> dterm;         // constant (feedthrough) parts
  };
  std::vector<Column> cols(r.m);
  int total = 0;
  for (int j = 0; j < r.m; ++j) {
    Column& cj = cols[j];
    cj.q = {Cplx(1.0, 0.0)};
    for (int i = 0; i < r.p; ++i) cj.q = poly::mul(cj.q, r.d(i, j));
    cj.q = poly::trimmed(cj.q);
    const Cplx lead = cj.q.back();
    for (auto& c : cj.q) c /= lead;
    const int nj = poly::degree(cj.q);
    cj.s.resize(r.p);
    cj.dterm.resize(r.p);
    for (int i = 0; i < r.p; ++i) {
      poly::Coeffs ni = r.n(i, j);
      for (int i2 = 0; i2 < r.p; ++i2)
        if (i2 != i) ni = poly::mul(ni, r.d(i2, j));
      ni = poly::scale(ni, 1.0 / lead);
      if (poly::degree(ni) > nj)
        throw ValidationError("entry is improper after the Mobius substitution");
      ni.resize(nj + 1, Cplx(0.0, 0.0));
      cj.dterm[i] = ni[nj];
      ni = poly::add(ni, poly::scale(cj.q, -ni[nj]));
      ni.resize(std::max(nj, 1), Cplx(0.0, 0.0));
      cj.s[i] = std::move(ni);
    }
    total += nj;
  }
  StateSpace out;
  out.A = Mat::Zero(total, total);
  out.B = Mat::Zero(total, r.m);
  out.C = Mat::Zero(r.p, total);
  out.D = Mat::Zero(r.p, r.m);
  int offset = 0;
  for (int j = 0; j < r.m; ++j) {
    const Column& cj = cols[j];
    const int nj = poly::degree(cj.q);
    for (int i = 0; i < r.p; ++i) out.D(i, j) = cj.dterm[i];
    if (nj == 0) continue;
    for (int k = 0; k + 1 < nj; ++k) out.A(offset + k, offset + k + 1) = 1.0;
    for (int k = 0; k < nj; ++k) out.A(offset + nj - 1, offset + k) = -cj.q[k];
    out.B(offset + nj - 1, j) = 1.0;
    for (int i = 0; i < r.p; ++i)
      for (int k = 0; k < nj && k < static_cast<int>(cj.s[i].size()); ++k)
        out.C(i, offset + k) = cj.s[i][k];
    offset += nj;
  }
  return out;
}

/// Spectrum a Mobius base point must avoid: state eigenvalues for state-space
/// bodies, denominator roots for rational bodies.
inline std::vector<Cplx> pole_spectrum(const PlantModel& P) {
  std::vector<Cplx> out;
  if (const auto* ss = std::get_if<StateSpace>(&P.body)) {
    if (ss->order() > 0) {
      Eigen::ComplexEigenSolver<Mat> es(ss->A, false);
      for (int i = 0; i < ss->order(); ++i) out.push_back(es.eigenvalues()(i));
    }
    return out;
  }
  if (const auto* rm = std::get_if<SymMat<RationalFn>>(&P.body)) {
    for (int i = 0; i < rm->rows(); ++i)
      for (int j = 0; j < rm->cols(); ++j)
        for (const Cplx& root : poly::roots(rm->at(i, j).den)) out.push_back(root);
    return out;
  }
  throw UnsupportedError("realizations exist for state-space and rational bodies only");
}

/// w-domain realization of a disk plant: transform the realization directly,
/// or substitute entrywise and realize the proper result.
inline StateSpace w_realization(const PlantModel& P, const MobiusMap& mob) {
  if (const auto* ss = std::get_if<StateSpace>(&P.body)) return mobius_state_space(*ss, mob);
  if (const auto* rm = std::get_if<SymMat<RationalFn>>(&P.body))
    return companion_realization(mobius_rational(*rm, mob));
  throw UnsupportedError("realizations exist for state-space and rational bodies only");
}

}  // namespace numetric
