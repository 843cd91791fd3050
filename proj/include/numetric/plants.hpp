#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "numetric/config.hpp"
#include "numetric/errors.hpp"
#include "numetric/grid.hpp"
#include "numetric/matrix_function.hpp"
#include "numetric/symbolic.hpp"

namespace numetric {

// Poles (and rational denominator roots) must keep this distance from the
// unit circle so grid evaluation and winding numbers stay well posed.
inline constexpr double kCircleMargin = 1e-6;

/// Discrete-time state-space realization in z: P(z) = D + C (zI - A)^{-1} B.
/// With stability meaning "analytic in the closed unit disk", eigenvalues of
/// A inside the open disk are the plant's unstable poles.
struct StateSpace {
  Mat A, B, C, D;

  int order() const { return static_cast<int>(A.rows()); }

  Mat eval(Cplx z) const {
    if (order() == 0) return D;
    Mat zi = z * Mat::Identity(order(), order()) - A;
    return D + C * zi.partialPivLu().solve(B);
  }
};

/// Entrywise quotients of finite exponential sums on the line.
struct ExpPolyQuotient {
  int p = 0, m = 0;
  std::vector<std::pair<ExpPoly, ExpPoly>> entries;  // row-major (num, den)

  const std::pair<ExpPoly, ExpPoly>& at(int i, int j) const {
    return entries[static_cast<std::size_t>(i) * m + j];
  }
};

/// Normalized (or to-be-verified) coprime factor pair of a plant, sampled on
/// one grid. G stacks the right factors [N; D] ((p+m) x m); Gtilde packs the
/// left factors [-Dt, Nt] (p x (p+m)). Bezout witnesses and symbolic entry
/// forms ride along when available.
struct CoprimeFactors {
  int p = 0, m = 0;
  MatrixFunction G;
  MatrixFunction Gtilde;
  std::optional<MatrixFunction> X, Y, Xt, Yt;
  std::optional<SymbolicMatrix> G_sym, Gt_sym;
  bool normalized = false;
  double r_right = -1.0, r_left = -1.0, r_double = -1.0;  // negative: unverified
};

/// Factor description carried by a plant file: either symbolic entry blocks
/// or raw samples bound to one specific grid. Materialization produces the
/// CoprimeFactors above on a requested grid.
struct FactorBody {
  int p = 0, m = 0;
  int nvars = 0;  // several-variable arity; 0 for other algebras

  std::optional<SymbolicMatrix> N, D, Nt, Dt;  // symbolic route

  struct Sampled {
    int grid_size = 0;
    double halfwidth = 0.0;
    std::vector<Mat> N, D, Nt, Dt;  // one sample per grid point
  };
  std::optional<Sampled> samples;

  bool symbolic() const { return N.has_value(); }
};

/// A plant over one of the four algebras. The body variant determines what
/// the model can do: state-space and rational bodies admit everything,
/// exponential-sum quotients evaluate but have no factor construction, and
/// factor bodies carry their factors explicitly.
struct PlantModel {
  Algebra algebra = Algebra::Disk;
  int p = 0, m = 0;
  std::variant<StateSpace, SymMat<RationalFn>, ExpPolyQuotient, FactorBody> body;

  bool is_state_space() const { return std::holds_alternative<StateSpace>(body); }
  bool is_rational() const { return std::holds_alternative<SymMat<RationalFn>>(body); }
  bool is_exp_quotient() const { return std::holds_alternative<ExpPolyQuotient>(body); }
  bool is_factors() const { return std::holds_alternative<FactorBody>(body); }

  int nvars() const {
    if (const auto* f = std::get_if<FactorBody>(&body)) return f->nvars;
    return 0;
  }
};

namespace detail {

inline void check_off_circle(const std::vector<Cplx>& roots, const char* what) {
  for (const Cplx& r : roots) {
    if (std::abs(std::abs(r) - 1.0) < kCircleMargin)
      throw ValidationError(std::string(what) +
                            " has a root within 1e-6 of the unit circle");
  }
}

inline std::pair<int, int> factor_block_dims(const SymbolicMatrix& m) {
  return symbolic_dims(m);
}

}  // namespace detail

/// Enforces the model invariants: positive dimensions, representation shapes,
/// and the pole-free annulus around the unit circle for rational bodies.
inline void validate(const PlantModel& P) {
  if (P.p <= 0 || P.m <= 0) throw ValidationError("plant dimensions must be positive");
  if (const auto* ss = std::get_if<StateSpace>(&P.body)) {
    const int n = ss->order();
    if (ss->A.cols() != n) throw ValidationError("state matrix must be square");
    if (ss->B.rows() != n || ss->B.cols() != P.m)
      throw ValidationError("input matrix dimensions do not match");
    if (ss->C.rows() != P.p || ss->C.cols() != n)
      throw ValidationError("output matrix dimensions do not match");
    if (ss->D.rows() != P.p || ss->D.cols() != P.m)
      throw ValidationError("feedthrough dimensions do not match");
    if (n > 0) {
      Eigen::ComplexEigenSolver<Mat> es(ss->A, false);
      for (int i = 0; i < n; ++i) {
        if (std::abs(std::abs(es.eigenvalues()(i)) - 1.0) < kCircleMargin)
          throw ValidationError("state matrix has an eigenvalue within 1e-6 of the unit circle");
      }
    }
    if (P.algebra != Algebra::Disk)
      throw ValidationError("state-space bodies belong to the disk algebra");
    return;
  }
  if (const auto* rm = std::get_if<SymMat<RationalFn>>(&P.body)) {
    if (rm->rows() != P.p || rm->cols() != P.m)
      throw ValidationError("rational matrix dimensions do not match");
    for (int i = 0; i < P.p; ++i)
      for (int j = 0; j < P.m; ++j) {
        const RationalFn& f = rm->at(i, j);
        if (f.den.empty() || std::abs(f.den.back()) == 0.0)
          throw ValidationError("rational entry has zero leading denominator coefficient");
        detail::check_off_circle(poly::roots(f.den), "rational entry denominator");
      }
    if (P.algebra != Algebra::Disk)
      throw ValidationError("rational bodies belong to the disk algebra");
    return;
  }
  if (const auto* eq = std::get_if<ExpPolyQuotient>(&P.body)) {
    if (eq->p != P.p || eq->m != P.m ||
        eq->entries.size() != static_cast<std::size_t>(P.p) * P.m)
      throw ValidationError("exponential-sum body dimensions do not match");
    for (const auto& [num, den] : eq->entries)
      if (den.is_zero())
        throw ValidationError("exponential-sum entry has zero denominator");
    if (P.algebra != Algebra::AP)
      throw ValidationError("exponential-sum quotient bodies belong to the line algebra");
    return;
  }
  const auto& fb = std::get<FactorBody>(P.body);
  if (fb.p != P.p || fb.m != P.m)
    throw ValidationError("factor body dimensions do not match");
  if (fb.symbolic()) {
    if (!fb.D || !fb.Nt || !fb.Dt)
      throw ValidationError("factor body must carry all four blocks");
    const auto nd = detail::factor_block_dims(*fb.N);
    const auto dd = detail::factor_block_dims(*fb.D);
    const auto ntd = detail::factor_block_dims(*fb.Nt);
    const auto dtd = detail::factor_block_dims(*fb.Dt);
    if (nd != std::pair<int, int>(P.p, P.m) || dd != std::pair<int, int>(P.m, P.m) ||
        ntd != std::pair<int, int>(P.p, P.m) || dtd != std::pair<int, int>(P.p, P.p))
      throw ValidationError("factor block dimensions do not match the plant dimensions");
  } else if (fb.samples) {
    const auto& s = *fb.samples;
    const std::size_t n = s.N.size();
    if (s.D.size() != n || s.Nt.size() != n || s.Dt.size() != n || n == 0)
      throw ValidationError("sampled factor blocks must share one grid");
  } else {
    throw ValidationError("factor body carries neither symbols nor samples");
  }
  if (P.algebra == Algebra::Polydisk && fb.nvars < 2)
    throw ValidationError("several-variable factor body needs arity >= 2");
}

/// Point evaluation of the transfer function. Factor bodies evaluate through
/// N D^{-1} when symbolic; sample-bound factor bodies cannot be evaluated at
/// arbitrary points.
inline Mat evaluate(const PlantModel& P, const EvalPoint& pt) {
  if (const auto* ss = std::get_if<StateSpace>(&P.body)) return ss->eval(pt.z);
  if (const auto* rm = std::get_if<SymMat<RationalFn>>(&P.body)) return rm->eval_matrix(pt);
  if (const auto* eq = std::get_if<ExpPolyQuotient>(&P.body)) {
    Mat out(P.p, P.m);
    for (int i = 0; i < P.p; ++i)
      for (int j = 0; j < P.m; ++j) {
        const auto& [num, den] = eq->at(i, j);
        const Cplx d = den.eval(pt.y);
        if (std::abs(d) < 1e-14)
          throw ValidationError("exponential-sum denominator vanishes at an evaluation point");
        out(i, j) = num.eval(pt.y) / d;
      }
    return out;
  }
  const auto& fb = std::get<FactorBody>(P.body);
  if (!fb.symbolic())
    throw UnsupportedError("sample-bound factors evaluate only on their stored grid");
  const Mat n = detail::symbolic_eval(*fb.N, pt);
  const Mat d = detail::symbolic_eval(*fb.D, pt);
  return n * d.partialPivLu().solve(Mat::Identity(P.m, P.m));
}

/// Builds the grid matching the plant's algebra (and arity, for the
/// several-variable backend).
inline GridPtr grid_for(const PlantModel& P, const RunConfig& cfg) {
  return std::make_shared<FrequencyGrid>(
      FrequencyGrid::make(P.algebra, cfg, P.algebra == Algebra::Polydisk ? P.nvars() : 2));
}

/// Materializes an explicit factor body on the requested grid. Symbolic
/// blocks are sampled (and keep samplers for refinement); sample-bound blocks
/// require the requested grid to match the stored one.
inline CoprimeFactors materialize_factors(const PlantModel& P, const RunConfig& cfg) {
  const auto* fb = std::get_if<FactorBody>(&P.body);
  if (fb == nullptr)
    throw ValidationError("plant does not carry explicit factors");
  GridPtr grid = grid_for(P, cfg);
  CoprimeFactors out;
  out.p = P.p;
  out.m = P.m;
  if (fb->symbolic()) {
    // Stack [N; D] and [-Dt, Nt] symbolically so the index backends can form
    // determinants later.
    const SymbolicMatrix& Nv = *fb->N;
    const SymbolicMatrix& Dv = *fb->D;
    const SymbolicMatrix& Ntv = *fb->Nt;
    const SymbolicMatrix& Dtv = *fb->Dt;
    if (Nv.index() != Dv.index() || Nv.index() != Ntv.index() || Nv.index() != Dtv.index())
      throw ValidationError("factor blocks use mixed scalar kinds");
    out.G_sym = std::visit(
        [&](const auto& n) -> SymbolicMatrix {
          using T = std::decay_t<decltype(n)>;
          const auto& d = std::get<T>(Dv);
          T g(P.p + P.m, P.m);
          for (int i = 0; i < P.p; ++i)
            for (int j = 0; j < P.m; ++j) g.at(i, j) = n.at(i, j);
          for (int i = 0; i < P.m; ++i)
            for (int j = 0; j < P.m; ++j) g.at(P.p + i, j) = d.at(i, j);
          return g;
        },
        Nv);
    out.Gt_sym = std::visit(
        [&](const auto& nt) -> SymbolicMatrix {
          using T = std::decay_t<decltype(nt)>;
          const auto& dt = std::get<T>(Dtv);
          T gt(P.p, P.p + P.m);
          for (int i = 0; i < P.p; ++i)
            for (int j = 0; j < P.p; ++j) gt.at(i, j) = dt.at(i, j).neg();
          for (int i = 0; i < P.p; ++i)
            for (int j = 0; j < P.m; ++j) gt.at(i, P.p + j) = nt.at(i, j);
          return gt;
        },
        Ntv);
    const SymbolicMatrix gs = *out.G_sym;
    const SymbolicMatrix gts = *out.Gt_sym;
    out.G = MatrixFunction::from_sampler(
        grid, P.p + P.m, P.m,
        [gs](const EvalPoint& pt) { return detail::symbolic_eval(gs, pt); }, cfg.parallel);
    out.Gtilde = MatrixFunction::from_sampler(
        grid, P.p, P.p + P.m,
        [gts](const EvalPoint& pt) { return detail::symbolic_eval(gts, pt); }, cfg.parallel);
    return out;
  }
  const auto& s = *fb->samples;
  if (static_cast<int>(s.N.size()) != grid->size())
    throw ValidationError(
        "sampled factors are bound to a grid of size " + std::to_string(s.N.size()) +
        "; requested " + std::to_string(grid->size()));
  std::vector<Mat> g(s.N.size()), gt(s.N.size());
  for (std::size_t k = 0; k < s.N.size(); ++k) {
    Mat gk(P.p + P.m, P.m);
    gk.topRows(P.p) = s.N[k];
    gk.bottomRows(P.m) = s.D[k];
    g[k] = gk;
    Mat gtk(P.p, P.p + P.m);
    gtk.leftCols(P.p) = -s.Dt[k];
    gtk.rightCols(P.m) = s.Nt[k];
    gt[k] = gtk;
  }
  out.G = MatrixFunction::from_samples(grid, P.p + P.m, P.m, std::move(g));
  out.Gtilde = MatrixFunction::from_samples(grid, P.p, P.p + P.m, std::move(gt));
  return out;
}

/// Deterministic splitmix-based generator; the library rolls its own normal
/// deviates so seeded runs produce identical plants everywhere.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform() {  // (0, 1)
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform(), u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  Cplx cnormal() {
    const double re = normal(), im = normal();
    return Cplx(re * M_SQRT1_2, im * M_SQRT1_2);
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Seeded random plant with a state-space body. Eigenvalues of A land in
/// {|l| <= 0.9} or {1.1 <= |l| <= 3} (a mix of poles on both sides of the
/// circle); B, C, D have standard normal entries.
inline PlantModel random_plant(int p, int m, int order, std::uint64_t seed,
                               Algebra algebra = Algebra::Disk) {
  if (algebra != Algebra::Disk)
    throw UnsupportedError("random plants are generated for the disk algebra only");
  if (p <= 0 || m <= 0 || order < 0)
    throw ValidationError("random plant needs positive dims and nonnegative order");
  RandomSource rng(seed ^ (0xD1B54A32D192ED03ULL + static_cast<std::uint64_t>(order) +
                           (static_cast<std::uint64_t>(p) << 20) +
                           (static_cast<std::uint64_t>(m) << 40)));
  StateSpace ss;
  ss.A = Mat::Zero(order, order);
  if (order > 0) {
    // Upper-triangular core with the prescribed spectrum, then a random
    // unitary similarity so the realization is not visibly triangular.
    Mat t = Mat::Zero(order, order);
    for (int i = 0; i < order; ++i) {
      const bool stable = rng.uniform() < 0.5;
      const double radius =
          stable ? 0.9 * std::sqrt(rng.uniform()) : 1.1 + 1.9 * rng.uniform();
      t(i, i) = std::polar(radius, 2.0 * M_PI * rng.uniform());
      for (int j = i + 1; j < order; ++j) t(i, j) = 0.5 * rng.cnormal();
    }
    Mat ginibre(order, order);
    for (int i = 0; i < order; ++i)
      for (int j = 0; j < order; ++j) ginibre(i, j) = rng.cnormal();
    const Mat q = Eigen::HouseholderQR<Mat>(ginibre).householderQ();
    ss.A = q * t * q.adjoint();
  }
  auto fill = [&rng](int r, int c) {
    Mat m2(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m2(i, j) = rng.cnormal();
    return m2;
  };
  ss.B = fill(order, m);
  ss.C = fill(p, order);
  ss.D = fill(p, m);
  PlantModel P{Algebra::Disk, p, m, std::move(ss)};
  validate(P);
  return P;
}

}  // namespace numetric
