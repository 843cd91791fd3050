#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "numetric/config.hpp"
#include "numetric/errors.hpp"
#include "numetric/grid.hpp"
#include "numetric/matrix_function.hpp"
#include "numetric/symbolic.hpp"

namespace numetric {

/// Value of the index homomorphism on an invertible element, tagged by the
/// algebra whose group it lives in: an integer winding number (disk, several
/// variables), a real average winding (line), or a pair of both (half-plane).
struct IndexValue {
  Algebra algebra = Algebra::Disk;
  bool has_average = false;
  bool has_winding = true;
  double average = 0.0;
  long winding = 0;

  static IndexValue disk(long w) { return {Algebra::Disk, false, true, 0.0, w}; }
  static IndexValue ap(double a) { return {Algebra::AP, true, false, a, 0}; }
  static IndexValue cd(double a, long w) { return {Algebra::CD, true, true, a, w}; }
  static IndexValue polydisk(long w) { return {Algebra::Polydisk, false, true, 0.0, w}; }

  /// True when this is the neutral element of the index group.
  bool trivial(double tol = 1e-9) const {
    return (!has_average || std::abs(average) <= tol) && (!has_winding || winding == 0);
  }
  bool same_as(const IndexValue& o, double tol = 1e-9) const {
    return algebra == o.algebra && has_average == o.has_average &&
           has_winding == o.has_winding &&
           (!has_average || std::abs(average - o.average) <= tol) &&
           (!has_winding || winding == o.winding);
  }
  IndexValue negated() const {
    IndexValue v = *this;
    v.average = -v.average;
    v.winding = -v.winding;
    return v;
  }
  std::string str() const {
    char buf[64];
    if (has_average && has_winding) {
      std::snprintf(buf, sizeof buf, "(%.9g, %ld)", average, winding);
    } else if (has_average) {
      std::snprintf(buf, sizeof buf, "%.9g", average);
    } else {
      std::snprintf(buf, sizeof buf, "%ld", winding);
    }
    return buf;
  }
};

namespace detail {

struct WindingScan {
  double min_abs = 0.0;
  double max_abs = 0.0;
  bool steps_ok = true;       // every phase increment below pi/2
  double total_phase = 0.0;   // accumulated principal-branch increments
};

/// Accumulates principal-branch phase increments along the sample sequence.
/// With a closure value the curve is taken to pass through that value between
/// the last and the first sample (closed curve); otherwise the scan is an
/// open arc. Increments of magnitude >= pi/2 mark the scan as under-resolved.
inline WindingScan winding_scan(const std::vector<Cplx>& v,
                                const std::optional<Cplx>& closure) {
  WindingScan s;
  if (v.empty()) return s;
  s.min_abs = s.max_abs = std::abs(v[0]);
  for (const auto& x : v) {
    const double a = std::abs(x);
    s.min_abs = std::min(s.min_abs, a);
    s.max_abs = std::max(s.max_abs, a);
  }
  if (closure) {
    const double a = std::abs(*closure);
    s.min_abs = std::min(s.min_abs, a);
    s.max_abs = std::max(s.max_abs, a);
  }
  auto step = [&s](Cplx from, Cplx to) {
    const double d = std::arg(to / from);
    if (!(std::abs(d) < 1.5707963267948966)) s.steps_ok = false;
    s.total_phase += d;
  };
  if (closure) step(*closure, v.front());
  for (std::size_t k = 0; k + 1 < v.size(); ++k) step(v[k], v[k + 1]);
  if (closure) step(v.back(), *closure);
  return s;
}

inline long nearest_integer_turns(double total_phase, double integrality_tol,
                                  const char* what) {
  const double turns = total_phase / (2.0 * M_PI);
  const double rounded = std::round(turns);
  if (std::abs(turns - rounded) > integrality_tol)
    throw NonIntegerWindingError(std::string(what) +
                                 ": accumulated phase is not an integer number of turns "
                                 "(raw = " + std::to_string(turns) + ")");
  return static_cast<long>(rounded);
}

/// Winding of a closed curve sampled through `eval` on a refinable grid.
/// `closure` carries the curve's value on the segment joining the ends of the
/// sampled parameter range, when that value is known exactly (open-interval
/// parameterizations); without it consecutive samples wrap around.
inline long winding_on_grid(GridPtr grid, const std::function<Cplx(const EvalPoint&)>& eval,
                            const std::optional<Cplx>& closure, const RunConfig& cfg,
                            const char* what) {
  for (;;) {
    std::vector<Cplx> v(grid->size());
    for (int k = 0; k < grid->size(); ++k) v[static_cast<std::size_t>(k)] = eval(grid->point(k));
    std::optional<Cplx> close = closure;
    if (!close) close = v.front();  // wrap: last sample steps back to the first
    WindingScan s = winding_scan(v, close);
    // Duplicate of the first sample in the closure leg contributes zero phase.
    if (s.min_abs <= cfg.tol.invertibility_rel * s.max_abs || s.max_abs == 0.0)
      throw NotInvertibleError(std::string(what) + ": values approach zero on the grid");
    if (s.steps_ok)
      return nearest_integer_turns(s.total_phase, cfg.tol.winding_integrality, what);
    grid = grid->refined(cfg.refinement_limit);
  }
}

}  // namespace detail

/// Winding number about the origin of a scalar function on the disk grid.
/// Refines the grid (through the stored sampler) until all phase steps are
/// below pi/2, then requires the accumulated phase to be an integer number of
/// turns within the configured tolerance.
inline long winding_number(const MatrixFunction& f, const RunConfig& cfg = {}) {
  if (f.rows() != 1 || f.cols() != 1)
    throw ValidationError("winding number expects a scalar function");
  // First pass over the stored samples; only refinement needs the sampler.
  GridPtr grid = f.grid();
  std::vector<Cplx> v(grid->size());
  for (int k = 0; k < grid->size(); ++k) v[static_cast<std::size_t>(k)] = f.sample(k)(0, 0);
  detail::WindingScan s = detail::winding_scan(v, v.front());
  if (s.min_abs <= cfg.tol.invertibility_rel * s.max_abs || s.max_abs == 0.0)
    throw NotInvertibleError("winding number: values approach zero on the grid");
  if (s.steps_ok)
    return detail::nearest_integer_turns(s.total_phase, cfg.tol.winding_integrality,
                                         "winding number");
  if (!f.has_sampler())
    throw UnresolvedError(
        "winding number: phase steps exceed pi/2 and no sampler is available to refine");
  const Sampler sampler = f.sampler();
  return detail::winding_on_grid(grid->refined(cfg.refinement_limit),
                                 [sampler](const EvalPoint& pt) { return sampler(pt)(0, 0); },
                                 std::nullopt, cfg, "winding number");
}

namespace detail {

/// Greatest common divisor of a set of real frequencies up to tolerance, or
/// nullopt when the set is not commensurate at a usable scale.
inline std::optional<double> real_lattice_step(const std::vector<double>& freqs) {
  double maxf = 0.0;
  for (double f : freqs) maxf = std::max(maxf, std::abs(f));
  if (maxf == 0.0) return std::nullopt;
  const double tol = 1e-9 * maxf;
  double g = 0.0;
  for (double f : freqs) {
    double a = std::abs(f);
    if (a <= tol) continue;
    if (g == 0.0) {
      g = a;
      continue;
    }
    double b = a;
    while (b > tol) {
      const double r = std::fmod(g, b);
      g = b;
      b = r;
    }
  }
  if (g <= tol) return std::nullopt;
  // Reject lattices so fine that the Laurent reduction would have huge degree.
  if (maxf / g > 4096.0) return std::nullopt;
  for (double f : freqs) {
    const double q = f / g;
    if (std::abs(q - std::round(q)) > 1e-6) return std::nullopt;
  }
  return g;
}

}  // namespace detail

/// Average winding number of a finite exponential sum on the line. When the
/// frequencies are commensurate the value is computed exactly through the
/// one-variable Laurent reduction; otherwise a truncated-window estimate is
/// returned, with an error bar requirement between the full and half windows.
inline double average_winding(const ExpPoly& f, const RunConfig& cfg = {}) {
  if (f.is_zero()) throw NotInvertibleError("average winding: zero function");
  // Invertibility gate on the truncated line grid.
  {
    GridPtr g = std::make_shared<FrequencyGrid>(
        FrequencyGrid::ap(cfg.grid_size, cfg.ap_halfwidth));
    double mn = 0.0, mx = 0.0;
    for (int k = 0; k < g->size(); ++k) {
      const double a = std::abs(f.eval(g->point(k).y));
      if (k == 0) mn = mx = a;
      mn = std::min(mn, a);
      mx = std::max(mx, a);
    }
    if (mn <= cfg.tol.invertibility_rel * mx || mx == 0.0)
      throw NotInvertibleError("average winding: values approach zero on the grid");
  }

  const std::vector<double> freqs = f.frequencies();
  bool all_zero = true;
  for (double x : freqs)
    if (x != 0.0) all_zero = false;
  if (all_zero) return 0.0;

  if (auto h = detail::real_lattice_step(freqs)) {
    // f(y) = g(e^{ihy}) for the Laurent polynomial g; the average winding is
    // h times the winding of g around the circle.
    std::vector<std::pair<long, Cplx>> lp;
    lp.reserve(f.terms().size());
    for (const auto& t : f.terms())
      lp.push_back({static_cast<long>(std::llround(t.lambda / *h)), t.coeff});
    auto eval = [lp](const EvalPoint& pt) {
      Cplx acc(0.0, 0.0);
      for (const auto& [n, c] : lp) acc += c * detail::cpow_int(pt.z, n);
      return acc;
    };
    GridPtr dg = std::make_shared<FrequencyGrid>(FrequencyGrid::disk(cfg.grid_size));
    const long w = detail::winding_on_grid(dg, eval, std::nullopt, cfg, "average winding");
    return *h * static_cast<double>(w);
  }

  // Incommensurate frequencies: accumulate phase over [-Y, Y] and compare the
  // full-window estimate against the half-window one.
  GridPtr grid = std::make_shared<FrequencyGrid>(
      FrequencyGrid::ap(cfg.grid_size, cfg.ap_halfwidth));
  for (;;) {
    const int n = grid->size();
    std::vector<Cplx> v(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = f.eval(grid->point(k).y);
    bool ok = true;
    double total = 0.0, inner = 0.0;
    for (int k = 0; k + 1 < n; ++k) {
      const double d = std::arg(v[static_cast<std::size_t>(k) + 1] / v[static_cast<std::size_t>(k)]);
      if (!(std::abs(d) < 1.5707963267948966)) {
        ok = false;
        break;
      }
      total += d;
      if (k >= n / 4 && k + 1 <= 3 * (n / 4)) inner += d;
    }
    if (!ok) {
      grid = grid->refined(cfg.refinement_limit);
      continue;
    }
    const double y0 = grid->point(0).y, y1 = grid->point(n - 1).y;
    const double w_full = total / (y1 - y0);
    const double y0i = grid->point(n / 4).y, y1i = grid->point(3 * (n / 4)).y;
    const double w_half = inner / (y1i - y0i);
    if (std::abs(w_full - w_half) > cfg.tol.average_winding_bar)
      throw NonLatticeError(
          "average winding: incommensurate frequencies and the truncated estimate has not "
          "converged (error bar " +
          std::to_string(std::abs(w_full - w_half)) + "); enlarge the window half-width");
    return w_full;
  }
}

/// Index of an invertible element of the half-plane algebra: the average
/// winding of the exponential-sum part, paired with the winding of
/// 1 + F_ap^{-1} f_a around the circle that compactifies the imaginary axis.
/// The curve closes through the value 1 at both ends of the axis because the
/// absolutely continuous part vanishes at infinity.
inline IndexValue cd_index(const CdScalar& F, const RunConfig& cfg = {}) {
  const ExpPoly& fap = F.ap_part();
  if (fap.is_zero())
    throw NotInvertibleError("half-plane index: exponential-sum part is zero");
  // Gate 1: the full boundary function never vanishes.
  {
    GridPtr g = std::make_shared<FrequencyGrid>(FrequencyGrid::cd(cfg.grid_size));
    double mn = 0.0, mx = 0.0;
    for (int k = 0; k < g->size(); ++k) {
      const double a = std::abs(F.eval(g->point(k).y));
      if (k == 0) mn = mx = a;
      mn = std::min(mn, a);
      mx = std::max(mx, a);
    }
    if (mn <= cfg.tol.invertibility_rel * mx || mx == 0.0)
      throw NotInvertibleError("half-plane index: boundary values approach zero");
  }
  const double first = average_winding(fap, cfg);

  auto eval = [&F, &fap](const EvalPoint& pt) {
    return Cplx(1.0, 0.0) + F.eval_l1(pt.y) / fap.eval(pt.y);
  };
  GridPtr cg = std::make_shared<FrequencyGrid>(FrequencyGrid::cd(cfg.grid_size));
  const long second =
      detail::winding_on_grid(cg, eval, Cplx(1.0, 0.0), cfg, "half-plane index");
  return IndexValue::cd(first, second);
}

/// Index on the several-variable algebra: invertibility is checked on the
/// torus lattice and on the circle through the diagonal restriction, and the
/// value is the winding number of the diagonal restriction.
inline IndexValue polydisk_index(const MultiPoly& f, const RunConfig& cfg = {}) {
  if (f.nvars() < 1) throw ValidationError("several-variable index needs at least one variable");
  {
    GridPtr pg = std::make_shared<FrequencyGrid>(
        FrequencyGrid::polydisk(f.nvars(), cfg.grid_size));
    double mn = 0.0, mx = 0.0;
    bool first = true;
    for (int k = 0; k < pg->lattice_size(); ++k) {
      const EvalPoint pt = pg->point(k);
      const double a = std::abs(f.eval(pt.coords, pt.ncoords));
      if (first) {
        mn = mx = a;
        first = false;
      }
      mn = std::min(mn, a);
      mx = std::max(mx, a);
    }
    if (mn <= cfg.tol.invertibility_rel * mx || mx == 0.0)
      throw NotInvertibleError("several-variable index: values approach zero on the torus");
  }
  const MultiPoly h = f.diagonal();
  auto eval = [h](const EvalPoint& pt) { return h.eval(&pt.z, 1); };
  GridPtr dg = std::make_shared<FrequencyGrid>(FrequencyGrid::disk(cfg.grid_size));
  const long w = detail::winding_on_grid(dg, eval, std::nullopt, cfg,
                                         "several-variable index (diagonal)");
  return IndexValue::polydisk(w);
}

/// True iff the determinant's magnitude stays above the threshold on the
/// whole grid. An explicit threshold is absolute; the default is relative to
/// the grid maximum. A positive verdict is confirmed on a doubled grid when
/// the function carries a sampler.
inline bool is_invertible_in_S(const MatrixFunction& f,
                               std::optional<double> threshold = std::nullopt,
                               const RunConfig& cfg = {}) {
  if (f.rows() != f.cols()) throw ValidationError("invertibility requires a square function");
  auto verdict = [&](const MatrixFunction& g) {
    double mn = 0.0, mx = 0.0;
    for (int k = 0; k < g.size(); ++k) {
      const double a = (g.rows() == 1) ? std::abs(g.sample(k)(0, 0))
                                       : std::abs(g.sample(k).determinant());
      if (k == 0) mn = mx = a;
      mn = std::min(mn, a);
      mx = std::max(mx, a);
    }
    const double thr = threshold ? *threshold : cfg.tol.invertibility_rel * mx;
    return mn > thr;
  };
  if (!verdict(f)) return false;
  if (f.has_sampler()) {
    const MatrixFunction refined = f.resampled(f.grid()->refined(cfg.refinement_limit),
                                               cfg.parallel);
    if (!verdict(refined)) return false;
  }
  return true;
}

/// A square matrix function together with the symbolic form of its entries,
/// when one is available. The numeric side feeds invertibility and circle
/// windings; the symbolic side is required by the line, half-plane, and
/// several-variable index maps.
struct SymbolicFunction {
  MatrixFunction numeric;
  std::optional<SymbolicMatrix> symbols;
};

namespace detail {

template <class S>
S symbolic_det_as(const SymbolicMatrix& m) {
  if (!std::holds_alternative<SymMat<S>>(m))
    throw ValidationError("symbolic entries do not match the requested algebra");
  return std::get<SymMat<S>>(m).det();
}

}  // namespace detail

/// Index of det(f) in the backend's group. The result is recomputed on a
/// doubled grid and must agree (integer parts exactly, real parts within
/// 1e-9); disagreement reports an unresolved index rather than guessing.
inline IndexValue index_of(const SymbolicFunction& f, Algebra backend,
                           const RunConfig& cfg = {}) {
  const MatrixFunction det = det_function(f.numeric);
  if (!is_invertible_in_S(det, std::nullopt, cfg))
    throw NotInvertibleError("index: determinant is not invertible over the grid");

  switch (backend) {
    case Algebra::Disk: {
      const long w1 = winding_number(det, cfg);
      if (det.has_sampler()) {
        const MatrixFunction d2 =
            det.resampled(det.grid()->refined(cfg.refinement_limit), cfg.parallel);
        const long w2 = winding_number(d2, cfg);
        if (w1 != w2)
          throw UnresolvedError("index: winding changed under grid refinement");
      }
      return IndexValue::disk(w1);
    }
    case Algebra::AP: {
      if (!f.symbols)
        throw UnsupportedError("index on the line algebra needs symbolic entries");
      const ExpPoly d = detail::symbolic_det_as<ExpPoly>(*f.symbols);
      const double a1 = average_winding(d, cfg);
      RunConfig c2 = cfg;
      c2.grid_size = std::min(cfg.grid_size * 2, cfg.refinement_limit);
      const double a2 = average_winding(d, c2);
      if (std::abs(a1 - a2) > 1e-9)
        throw UnresolvedError("index: average winding changed under grid refinement");
      return IndexValue::ap(a1);
    }
    case Algebra::CD: {
      if (!f.symbols)
        throw UnsupportedError("index on the half-plane algebra needs symbolic entries");
      const CdScalar d = detail::symbolic_det_as<CdScalar>(*f.symbols);
      const IndexValue v1 = cd_index(d, cfg);
      RunConfig c2 = cfg;
      c2.grid_size = std::min(cfg.grid_size * 2, cfg.refinement_limit);
      const IndexValue v2 = cd_index(d, c2);
      if (!v1.same_as(v2))
        throw UnresolvedError("index: half-plane index changed under grid refinement");
      return v1;
    }
    case Algebra::Polydisk: {
      if (!f.symbols)
        throw UnsupportedError("index on the several-variable algebra needs symbolic entries");
      const MultiPoly d = detail::symbolic_det_as<MultiPoly>(*f.symbols);
      const IndexValue v1 = polydisk_index(d, cfg);
      RunConfig c2 = cfg;
      c2.grid_size = std::min(cfg.grid_size * 2, cfg.refinement_limit);
      const IndexValue v2 = polydisk_index(d, c2);
      if (!v1.same_as(v2))
        throw UnresolvedError("index: several-variable index changed under grid refinement");
      return v1;
    }
  }
  throw ValidationError("unknown algebra backend");
}

/// Checks that the index is constant along a path of invertible functions.
/// Reports the offending parameter when the path leaves the invertible set.
inline bool homotopy_index_check(const std::function<SymbolicFunction(double)>& path,
                                 int steps, Algebra backend, const RunConfig& cfg = {}) {
  if (steps < 1) throw ValidationError("homotopy check needs at least one step");
  std::optional<IndexValue> first;
  for (int k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(steps);
    const SymbolicFunction f = path(t);
    if (!is_invertible_in_S(det_function(f.numeric), std::nullopt, cfg))
      throw NotInvertibleError("homotopy path leaves the invertible set", t);
    const IndexValue v = index_of(f, backend, cfg);
    if (!first) first = v;
    else if (!first->same_as(v)) return false;
  }
  return true;
}

}  // namespace numetric
