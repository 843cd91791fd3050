#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "numetric/factorization.hpp"
#include "numetric/index.hpp"

namespace numetric {

/// Which branch produced a distance: the norm formula when the graph symbol
/// is invertible with neutral index, or the exact value 1 otherwise.
enum class NuBranch { Metric, DegenerateOne };

inline const char* to_string(NuBranch b) {
  return b == NuBranch::Metric ? "metric" : "degenerate-one";
}

/// Distance between two plants together with the evidence that selected the
/// branch. `value` always lies in [0, 1]; on the degenerate branch it is the
/// exact constant 1, not a computed norm.
struct NuResult {
  double value = 1.0;
  NuBranch branch = NuBranch::DegenerateOne;
  bool det_invertible = false;
  bool winding_condition_met = false;
  std::optional<IndexValue> index;  // absent when the determinant is not invertible
  int grid_size_used = 0;           // evaluation nodes behind the verdict
};

/// Stability margin of a plant/controller pair. `mu` is the infimum of the
/// smallest singular value of the loop symbol when the pair is stabilizing
/// and 0 otherwise; `h_norm` is the closed-loop sup norm, present exactly
/// when the pair stabilizes.
struct MarginResult {
  double mu = 0.0;
  bool stabilizes = false;
  std::optional<double> h_norm;
  bool det_invertible = false;
  std::optional<IndexValue> index_check;  // loop index, when the determinant allows one
};

/// Outcome of the robustness test: a controller with margin `mu0` on the
/// nominal plant keeps stabilizing every plant closer than `mu0`, with the
/// margin degrading by at most the arcsine rule. `actual_mu1` is computed
/// (and checked against the prediction) whenever the certificate is granted.
struct RobustCertificate {
  double mu0 = 0.0;
  double dnu = 1.0;
  bool certified = false;
  double predicted_margin_lower_bound = 0.0;
  std::optional<double> actual_mu1;
};

/// Worst-case summary of the metric axioms over a family of plants. Indices
/// refer to positions in the input vector; ties resolve to the first
/// offender in scan order, so reports are deterministic.
struct AxiomReport {
  int count = 0;
  double tolerance = 0.0;
  double self_tolerance = 1e-9;
  std::vector<std::vector<double>> distance;  // distance[i][j] = d(plant i, plant j)
  double worst_self_distance = 0.0;
  int worst_self_index = -1;
  double worst_symmetry_gap = 0.0;
  int worst_symmetry_i = -1, worst_symmetry_j = -1;
  double worst_triangle_slack = std::numeric_limits<double>::infinity();
  int worst_triangle_i = -1, worst_triangle_j = -1, worst_triangle_k = -1;
  double worst_identification_gap = 0.0;
  bool passed = false;
};

namespace detail {

inline void require_compatible_pair(const PlantModel& a, const PlantModel& b) {
  if (a.algebra != b.algebra)
    throw ValidationError("plants live over different algebras");
  if (a.p != b.p || a.m != b.m)
    throw ValidationError("plants have different input/output dimensions");
  if (a.algebra == Algebra::Polydisk && a.nvars() != b.nvars())
    throw ValidationError("plants use different variable counts");
}

inline void require_controller_shape(const PlantModel& P, const PlantModel& C) {
  if (P.algebra != C.algebra)
    throw ValidationError("plant and controller live over different algebras");
  if (C.p != P.m || C.m != P.p)
    throw ValidationError(
        "controller dimensions must transpose the plant's (expected " +
        std::to_string(P.m) + " x " + std::to_string(P.p) + ")");
  if (P.algebra == Algebra::Polydisk && P.nvars() != C.nvars())
    throw ValidationError("plant and controller use different variable counts");
}

inline void require_normalized(const CoprimeFactors& f) {
  if (!f.normalized)
    throw ValidationError("factor pair is not normalized within tolerance");
}

/// Plain product of two symbolic blocks with the same scalar kind.
inline SymbolicMatrix symbolic_times(const SymbolicMatrix& a, const SymbolicMatrix& b) {
  if (a.index() != b.index())
    throw ValidationError("mixed symbolic scalar kinds in one product");
  return std::visit(
      [&](const auto& x) -> SymbolicMatrix {
        using T = std::decay_t<decltype(x)>;
        return x.mul(std::get<T>(b));
      },
      a);
}

/// Repacks a controller's left factor row [-Dt_c, Nt_c] (m x (m+p)) into the
/// loop row [-Nt_c, Dt_c] (m x (p+m)): swap the column blocks and negate.
inline MatrixFunction controller_ktilde(const CoprimeFactors& fc, int p, int m) {
  const MatrixFunction& gt = fc.Gtilde;
  if (gt.rows() != m || gt.cols() != m + p)
    throw ValidationError("controller factors have the wrong shape for this plant");
  std::vector<Mat> s(static_cast<std::size_t>(gt.grid()->size()));
  for (int k = 0; k < gt.grid()->size(); ++k) {
    const Mat& g = gt.sample(k);
    Mat kt(m, p + m);
    kt.leftCols(p) = -g.rightCols(p);
    kt.rightCols(m) = -g.leftCols(m);
    s[static_cast<std::size_t>(k)] = std::move(kt);
  }
  MatrixFunction out = MatrixFunction::from_samples(gt.grid(), m, p + m, std::move(s));
  if (gt.has_sampler()) {
    auto sg = gt.sampler();
    out = out.with_sampler([sg, p, m](const EvalPoint& pt) {
      const Mat g = sg(pt);
      Mat kt(m, p + m);
      kt.leftCols(p) = -g.rightCols(p);
      kt.rightCols(m) = -g.leftCols(m);
      return kt;
    });
  }
  return out;
}

inline SymbolicMatrix controller_ktilde_sym(const SymbolicMatrix& gt, int p, int m) {
  return std::visit(
      [&](const auto& g) -> SymbolicMatrix {
        using T = std::decay_t<decltype(g)>;
        T kt(m, p + m);
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < p + m; ++j)
            kt.at(i, j) = (j < p ? g.at(i, m + j) : g.at(i, j - p)).neg();
        return kt;
      },
      gt);
}

/// Invertibility of a square symbol over the grid plus, when invertible, its
/// index. A refinement that uncovers a vanishing determinant downgrades the
/// verdict instead of guessing an index; an unresolved index propagates.
struct InvertibilityVerdict {
  bool invertible = false;
  std::optional<IndexValue> index;
  bool trivial = false;
};

inline InvertibilityVerdict invertibility_and_index(const MatrixFunction& f,
                                                    const std::optional<SymbolicMatrix>& sym,
                                                    Algebra a, const RunConfig& cfg) {
  InvertibilityVerdict v;
  if (!is_invertible_in_S(f, std::nullopt, cfg)) return v;
  v.invertible = true;
  try {
    v.index = index_of(SymbolicFunction{f, sym}, a, cfg);
  } catch (const NotInvertibleError&) {
    v.invertible = false;
    v.index.reset();
    return v;
  }
  v.trivial = v.index->trivial();
  return v;
}

/// Everything the loop analyses share: both factor pairs, the controller row
/// repacked for composition, and the loop symbol with its symbolic form when
/// the algebra's index map needs one.
struct LoopData {
  CoprimeFactors fp, fc;
  MatrixFunction ktilde;  // m x (p+m)
  MatrixFunction ktg;     // m x m
  std::optional<SymbolicMatrix> ktg_sym;
};

inline LoopData make_loop(const PlantModel& P, const PlantModel& C, const RunConfig& cfg) {
  require_controller_shape(P, C);
  LoopData d;
  d.fp = obtain_factors(P, cfg);
  d.fc = obtain_factors(C, cfg);
  require_normalized(d.fp);
  require_normalized(d.fc);
  d.ktilde = controller_ktilde(d.fc, P.p, P.m);
  d.ktg = compose(d.ktilde, d.fp.G);
  if (P.algebra != Algebra::Disk && d.fp.G_sym && d.fc.Gt_sym)
    d.ktg_sym = symbolic_times(controller_ktilde_sym(*d.fc.Gt_sym, P.p, P.m), *d.fp.G_sym);
  return d;
}

/// Closed-loop response assembled from the factor route G (KtG)^{-1} Kt.
inline MatrixFunction loop_response(const LoopData& d, bool parallel) {
  (void)parallel;  // assembly is sample-by-sample either way
  const int p = d.fp.p, m = d.fp.m;
  const int n = d.fp.G.grid()->size();
  std::vector<Mat> h(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    h[static_cast<std::size_t>(k)] =
        d.fp.G.sample(k) * d.ktg.sample(k).partialPivLu().solve(d.ktilde.sample(k));
  MatrixFunction out =
      MatrixFunction::from_samples(d.fp.G.grid(), p + m, p + m, std::move(h));
  if (d.fp.G.has_sampler() && d.ktilde.has_sampler() && d.ktg.has_sampler()) {
    auto sg = d.fp.G.sampler();
    auto skt = d.ktilde.sampler();
    auto sktg = d.ktg.sampler();
    out = out.with_sampler([sg, skt, sktg](const EvalPoint& pt) {
      return Mat(sg(pt) * Mat(sktg(pt)).partialPivLu().solve(Mat(skt(pt))));
    });
  }
  return out;
}

}  // namespace detail

/// Distance between two plants given their (already normalized) factor
/// pairs. The symbol G2^* G1 must be invertible over the algebra with
/// neutral index for the norm branch; otherwise the distance is exactly 1.
inline NuResult nu_from_factors(const CoprimeFactors& f1, const CoprimeFactors& f2,
                                Algebra algebra, const RunConfig& cfg = {}) {
  if (f1.p != f2.p || f1.m != f2.m)
    throw ValidationError("factor pairs have different plant dimensions");
  detail::require_normalized(f1);
  detail::require_normalized(f2);

  const MatrixFunction symbol = compose(involute(f2.G), f1.G);  // G2^* G1, m x m
  std::optional<SymbolicMatrix> sym;
  if (algebra != Algebra::Disk && f1.G_sym && f2.G_sym)
    sym = detail::symbolic_adjoint_times(*f2.G_sym, *f1.G_sym);

  const detail::InvertibilityVerdict v =
      detail::invertibility_and_index(symbol, sym, algebra, cfg);

  NuResult out;
  out.grid_size_used = f1.G.grid()->size();
  out.det_invertible = v.invertible;
  out.index = v.index;
  out.winding_condition_met = v.invertible && v.trivial;
  if (!out.winding_condition_met) {
    out.value = 1.0;
    out.branch = NuBranch::DegenerateOne;
    return out;
  }
  out.branch = NuBranch::Metric;
  out.value = std::min(1.0, sup_norm(compose(f2.Gtilde, f1.G), cfg.parallel));
  return out;
}

/// Distance between two plants over one algebra. Factors are constructed for
/// state-space and rational bodies and taken from explicit factor bodies
/// otherwise; unnormalized explicit factors are rejected.
inline NuResult nu_distance(const PlantModel& P1, const PlantModel& P2,
                            const RunConfig& cfg = {}) {
  validate(P1);
  validate(P2);
  detail::require_compatible_pair(P1, P2);
  const CoprimeFactors f1 = obtain_factors(P1, cfg);
  const CoprimeFactors f2 = obtain_factors(P2, cfg);
  return nu_from_factors(f1, f2, P1.algebra, cfg);
}

/// Closed-loop response of a plant/controller pair, built from the factor
/// route and cross-checked against the direct formula
/// [P; I](I - CP)^{-1}[-C, I] at well-conditioned points where both models
/// evaluate. A loop symbol that vanishes anywhere on the grid is refused.
inline MatrixFunction closed_loop(const PlantModel& P, const PlantModel& C,
                                  const RunConfig& cfg = {}) {
  validate(P);
  validate(C);
  const detail::LoopData d = detail::make_loop(P, C, cfg);
  if (!is_invertible_in_S(d.ktg, std::nullopt, cfg))
    throw SingularLoopError("closed-loop symbol vanishes on the evaluation grid");
  MatrixFunction H = detail::loop_response(d, cfg.parallel);

  // Independent route: evaluate the models directly where possible. Skipped
  // entirely for bodies that only exist as grid samples.
  bool evaluable = true;
  try {
    (void)evaluate(P, H.grid()->point(0));
    (void)evaluate(C, H.grid()->point(0));
  } catch (const UnsupportedError&) {
    evaluable = false;
  }
  if (evaluable) {
    const int p = P.p, m = P.m;
    const int n = H.grid()->size();
    const int stride = std::max(1, n / 64);
    const Mat eye = Mat::Identity(m, m);
    for (int k = 0; k < n; k += stride) {
      // Only compare where the loop is comfortably regular; near-singular
      // points amplify factor residuals without adding evidence.
      Eigen::JacobiSVD<Mat> sk(d.ktg.sample(k));
      if (sk.singularValues().minCoeff() < 1e-2) continue;
      const EvalPoint pt = H.grid()->point(k);
      const Mat pv = evaluate(P, pt);
      const Mat cv = evaluate(C, pt);
      const Mat loop = eye - cv * pv;
      Eigen::JacobiSVD<Mat> sl(loop);
      const double smax = sl.singularValues().maxCoeff();
      if (sl.singularValues().minCoeff() < 1e-6 * std::max(1.0, smax)) continue;
      Mat rhs(m, p + m);
      rhs.leftCols(p) = -cv;
      rhs.rightCols(m) = eye;
      Mat top(p + m, m);
      top.topRows(p) = pv;
      top.bottomRows(m) = eye;
      const Mat direct = top * loop.partialPivLu().solve(rhs);
      const double gap = (H.sample(k) - direct).norm();
      if (gap > 1e-6 * std::max(1.0, direct.norm()))
        throw FactorizationError("closed-loop routes disagree beyond tolerance");
    }
  }
  return H;
}

/// Stability margin of a plant/controller pair. The pair stabilizes exactly
/// when the loop symbol is invertible over the algebra with neutral index;
/// the margin and the closed-loop norm are then reciprocal, which is checked.
inline MarginResult stability_margin(const PlantModel& P, const PlantModel& C,
                                     const RunConfig& cfg = {}) {
  validate(P);
  validate(C);
  const detail::LoopData d = detail::make_loop(P, C, cfg);
  const detail::InvertibilityVerdict v =
      detail::invertibility_and_index(d.ktg, d.ktg_sym, P.algebra, cfg);

  MarginResult out;
  out.det_invertible = v.invertible;
  out.index_check = v.index;
  if (!v.invertible || !v.trivial) return out;

  out.stabilizes = true;
  out.mu = min_singular_inf(d.ktg, cfg.parallel);
  const MatrixFunction H = detail::loop_response(d, cfg.parallel);
  out.h_norm = sup_norm(H, cfg.parallel);
  // Route check on the raw grid profiles, where the reciprocal law holds
  // point for point. The reported values add vertex sharpening, a common
  // post-process that can move the two estimates apart near sharp dips, so
  // it stays out of the comparison.
  const SingularValueProfile sk = singular_profile(d.ktg, cfg.parallel);
  const SingularValueProfile sh = singular_profile(H, cfg.parallel);
  const double raw_mu = *std::min_element(sk.smin.begin(), sk.smin.end());
  const double raw_h = *std::max_element(sh.smax.begin(), sh.smax.end());
  if (std::abs(raw_mu * raw_h - 1.0) > 1e-6)
    throw FactorizationError("margin and closed-loop norm fail their reciprocal identity");
  return out;
}

/// Robustness certificate: if d(P0, P1) < mu(P0, C), then C stabilizes P1
/// with margin at least sin(asin(mu0) - asin(dnu)). When the certificate is
/// granted the achieved margin is computed and checked against both the
/// arcsine bound and the coarser linear one; a violation is an error, never
/// a silent `certified`.
inline RobustCertificate certify_robust(const PlantModel& P0, const PlantModel& C,
                                        const PlantModel& P1, const RunConfig& cfg = {}) {
  const MarginResult m0 = stability_margin(P0, C, cfg);
  const NuResult nu = nu_distance(P0, P1, cfg);

  RobustCertificate cert;
  cert.mu0 = m0.mu;
  cert.dnu = nu.value;
  cert.certified = m0.stabilizes && nu.value < m0.mu;

  const double c0 = std::min(cert.mu0, 1.0);
  const double cd = std::min(cert.dnu, 1.0);
  cert.predicted_margin_lower_bound = std::max(0.0, std::sin(std::asin(c0) - std::asin(cd)));
  if (!cert.certified) return cert;

  const MarginResult m1 = stability_margin(P1, C, cfg);
  if (!m1.stabilizes)
    throw CertificateError("a certified controller failed to stabilize the perturbed plant");
  cert.actual_mu1 = m1.mu;
  const double arcsin_slack =
      std::asin(std::min(m1.mu, 1.0)) - (std::asin(c0) - std::asin(cd));
  const double linear_slack = m1.mu - (cert.mu0 - cert.dnu);
  if (arcsin_slack < -cfg.tol.certificate || linear_slack < -cfg.tol.certificate)
    throw CertificateError("the achieved margin violates its guaranteed lower bound");
  return cert;
}

/// Checks the metric axioms on a family of plants over one algebra: zero
/// self-distance, symmetry, the triangle inequality, and identification of
/// zero-distance pairs through their graphs. Distances are reported for all
/// ordered pairs; worst offenders are tracked within the stated tolerances.
inline AxiomReport metric_axiom_suite(const std::vector<PlantModel>& plants, double tol,
                                      const RunConfig& cfg = {}) {
  if (plants.size() < 3)
    throw ValidationError("the axiom suite needs at least three plants");
  for (std::size_t i = 1; i < plants.size(); ++i)
    detail::require_compatible_pair(plants[0], plants[i]);

  const int n = static_cast<int>(plants.size());
  std::vector<CoprimeFactors> f;
  f.reserve(plants.size());
  for (const PlantModel& P : plants) f.push_back(obtain_factors(P, cfg));

  AxiomReport rep;
  rep.count = n;
  rep.tolerance = tol;
  rep.distance.assign(static_cast<std::size_t>(n),
                      std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      rep.distance[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          nu_from_factors(f[static_cast<std::size_t>(i)], f[static_cast<std::size_t>(j)],
                          plants[0].algebra, cfg)
              .value;
  auto d = [&rep](int i, int j) {
    return rep.distance[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  };

  rep.worst_self_index = 0;
  rep.worst_self_distance = d(0, 0);
  for (int i = 1; i < n; ++i) {
    if (d(i, i) > rep.worst_self_distance) {
      rep.worst_self_distance = d(i, i);
      rep.worst_self_index = i;
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double gap = std::abs(d(i, j) - d(j, i));
      if (gap > rep.worst_symmetry_gap) {
        rep.worst_symmetry_gap = gap;
        rep.worst_symmetry_i = i;
        rep.worst_symmetry_j = j;
      }
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      for (int k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        const double slack = d(i, k) + d(k, j) - d(i, j);
        if (slack < rep.worst_triangle_slack) {
          rep.worst_triangle_slack = slack;
          rep.worst_triangle_i = i;
          rep.worst_triangle_j = j;
          rep.worst_triangle_k = k;
        }
      }
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      // A vanishing distance must exhibit equal graphs; on the norm branch
      // the distance is that graph gap itself, so the check is direct.
      if (d(i, j) <= tol)
        rep.worst_identification_gap = std::max(rep.worst_identification_gap, d(i, j));
    }

  rep.passed = rep.worst_self_distance <= rep.self_tolerance &&
               rep.worst_symmetry_gap <= tol &&
               rep.worst_triangle_slack >= -tol &&
               rep.worst_identification_gap <= tol;
  return rep;
}

}  // namespace numetric
