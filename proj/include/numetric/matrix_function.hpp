#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "numetric/errors.hpp"
#include "numetric/grid.hpp"
#include "numetric/parallel.hpp"

namespace numetric {

using Mat = Eigen::MatrixXcd;
using Cplx = std::complex<double>;

/// Evaluates a matrix function at one grid point. Samplers make functions
/// re-evaluable on refined grids; functions read from sample data alone
/// (e.g. from a file) have none and cannot be refined.
using Sampler = std::function<Mat(const EvalPoint&)>;

/// A p x m complex-matrix-valued function sampled on a frequency grid.
/// Immutable; all operations return new values.
class MatrixFunction {
 public:
  MatrixFunction() = default;

  static MatrixFunction from_samples(GridPtr grid, int rows, int cols,
                                     std::vector<Mat> samples) {
    if (static_cast<int>(samples.size()) != grid->size())
      throw ValidationError("sample count does not match grid size");
    for (const Mat& s : samples)
      if (s.rows() != rows || s.cols() != cols)
        throw ValidationError("sample dimensions are inconsistent");
    MatrixFunction f;
    f.grid_ = std::move(grid);
    f.rows_ = rows;
    f.cols_ = cols;
    f.samples_ = std::make_shared<std::vector<Mat>>(std::move(samples));
    return f;
  }

  static MatrixFunction from_sampler(GridPtr grid, int rows, int cols,
                                     Sampler sampler, bool parallel = false) {
    std::vector<Mat> samples(grid->size());
    const FrequencyGrid& g = *grid;
    for_index(g.size(), parallel, [&](int k) { samples[k] = sampler(g.point(k)); });
    for (const Mat& s : samples)
      if (s.rows() != rows || s.cols() != cols)
        throw ValidationError("sampler produced wrong dimensions");
    MatrixFunction f = from_samples(std::move(grid), rows, cols, std::move(samples));
    f.sampler_ = std::move(sampler);
    return f;
  }

  static MatrixFunction constant(GridPtr grid, const Mat& value) {
    Mat v = value;
    return from_sampler(std::move(grid), static_cast<int>(v.rows()),
                        static_cast<int>(v.cols()),
                        [v](const EvalPoint&) { return v; });
  }

  static MatrixFunction identity(GridPtr grid, int n) {
    return constant(std::move(grid), Mat::Identity(n, n));
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const GridPtr& grid() const { return grid_; }
  const Mat& sample(int k) const { return (*samples_)[k]; }
  int size() const { return grid_->size(); }
  bool has_sampler() const { return static_cast<bool>(sampler_); }
  const Sampler& sampler() const { return sampler_; }

  /// Same function on another grid of the same algebra. Needs a sampler.
  MatrixFunction resampled(GridPtr grid, bool parallel = false) const {
    if (!sampler_)
      throw UnresolvedError(
          "function has no sampler and cannot be re-evaluated on a new grid");
    if (grid->algebra() != grid_->algebra())
      throw ValidationError("resample across different algebras");
    return from_sampler(std::move(grid), rows_, cols_, sampler_, parallel);
  }

  /// Copy carrying the given sampler; the stored samples are kept as-is.
  MatrixFunction with_sampler(Sampler s) const {
    MatrixFunction f = *this;
    f.sampler_ = std::move(s);
    return f;
  }

 private:
  GridPtr grid_;
  int rows_ = 0, cols_ = 0;
  std::shared_ptr<const std::vector<Mat>> samples_;
  Sampler sampler_;
};

namespace detail {

inline void require_same_grid(const MatrixFunction& a, const MatrixFunction& b) {
  if (a.grid() != b.grid() && *a.grid() != *b.grid())
    throw ValidationError("operands live on different grids");
}

/// Vertex value of the parabola through three equispaced samples, used to
/// sharpen grid extrema. Falls back to the center value when the fit is
/// degenerate or the vertex leaves the bracket.
inline double parabolic_vertex(double s0, double s1, double s2, bool maximize) {
  const double denom = s0 - 2.0 * s1 + s2;
  if (std::abs(denom) < 1e-300) return s1;
  const double dx = 0.5 * (s0 - s2) / denom;
  if (!(std::abs(dx) <= 1.0)) return s1;
  const double v = s1 - 0.25 * (s0 - s2) * dx;
  return maximize ? std::max(v, s1) : std::min(v, s1);
}

inline double sharpen(const std::vector<double>& vals, const FrequencyGrid& grid,
                      int k, bool maximize) {
  for (const auto& seg : grid.segments()) {
    if (k < seg.start || k >= seg.start + seg.count) continue;
    if (seg.mode == FrequencyGrid::Segment::Mode::Flat || seg.count < 3)
      return vals[k];
    const int rel = k - seg.start;
    int prev, next;
    if (seg.mode == FrequencyGrid::Segment::Mode::Wrap) {
      prev = seg.start + (rel + seg.count - 1) % seg.count;
      next = seg.start + (rel + 1) % seg.count;
    } else {
      if (rel == 0 || rel == seg.count - 1) return vals[k];
      prev = k - 1;
      next = k + 1;
    }
    return parabolic_vertex(vals[prev], vals[k], vals[next], maximize);
  }
  return vals[k];
}

inline double largest_sv(const Mat& m) {
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  return Eigen::JacobiSVD<Mat>(m).singularValues()(0);
}

inline double smallest_sv(const Mat& m) {
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& sv = svd.singularValues();
  return sv(sv.size() - 1);
}

}  // namespace detail

/// Pointwise conjugate transpose: the Gelfand transform of the involuted
/// element (f*(z) = conj(f(z)) entrywise, transposed).
inline MatrixFunction involute(const MatrixFunction& f) {
  std::vector<Mat> samples(f.size());
  for (int k = 0; k < f.size(); ++k) samples[k] = f.sample(k).adjoint();
  MatrixFunction out = MatrixFunction::from_samples(f.grid(), f.cols(), f.rows(),
                                                    std::move(samples));
  if (f.has_sampler()) {
    Sampler inner = f.sampler();
    out = out.with_sampler(
        [inner](const EvalPoint& pt) { return Mat(inner(pt).adjoint()); });
  }
  return out;
}

/// Pointwise matrix product a(phi) * b(phi).
inline MatrixFunction compose(const MatrixFunction& a, const MatrixFunction& b) {
  detail::require_same_grid(a, b);
  if (a.cols() != b.rows())
    throw ValidationError("compose: inner dimensions differ");
  std::vector<Mat> samples(a.size());
  for (int k = 0; k < a.size(); ++k) samples[k] = a.sample(k) * b.sample(k);
  MatrixFunction out = MatrixFunction::from_samples(a.grid(), a.rows(), b.cols(),
                                                    std::move(samples));
  if (a.has_sampler() && b.has_sampler()) {
    Sampler sa = a.sampler(), sb = b.sampler();
    out = out.with_sampler(
        [sa, sb](const EvalPoint& pt) { return Mat(sa(pt) * sb(pt)); });
  }
  return out;
}

inline MatrixFunction add(const MatrixFunction& a, const MatrixFunction& b) {
  detail::require_same_grid(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ValidationError("add: dimensions differ");
  std::vector<Mat> samples(a.size());
  for (int k = 0; k < a.size(); ++k) samples[k] = a.sample(k) + b.sample(k);
  MatrixFunction out =
      MatrixFunction::from_samples(a.grid(), a.rows(), a.cols(), std::move(samples));
  if (a.has_sampler() && b.has_sampler()) {
    Sampler sa = a.sampler(), sb = b.sampler();
    out = out.with_sampler(
        [sa, sb](const EvalPoint& pt) { return Mat(sa(pt) + sb(pt)); });
  }
  return out;
}

inline MatrixFunction scale(const MatrixFunction& f, Cplx c) {
  std::vector<Mat> samples(f.size());
  for (int k = 0; k < f.size(); ++k) samples[k] = c * f.sample(k);
  MatrixFunction out =
      MatrixFunction::from_samples(f.grid(), f.rows(), f.cols(), std::move(samples));
  if (f.has_sampler()) {
    Sampler s = f.sampler();
    out = out.with_sampler(
        [s, c](const EvalPoint& pt) { return Mat(c * s(pt)); });
  }
  return out;
}

inline MatrixFunction subtract(const MatrixFunction& a, const MatrixFunction& b) {
  return add(a, scale(b, Cplx(-1.0, 0.0)));
}

/// Pointwise determinant as a scalar (1x1) function.
inline MatrixFunction det_function(const MatrixFunction& f) {
  if (f.rows() != f.cols()) throw ValidationError("determinant of a non-square function");
  std::vector<Mat> samples(f.size());
  for (int k = 0; k < f.size(); ++k) {
    Mat d(1, 1);
    d(0, 0) = f.sample(k).determinant();
    samples[k] = d;
  }
  MatrixFunction out = MatrixFunction::from_samples(f.grid(), 1, 1, std::move(samples));
  if (f.has_sampler()) {
    Sampler s = f.sampler();
    out = out.with_sampler([s](const EvalPoint& pt) {
      Mat d(1, 1);
      d(0, 0) = s(pt).determinant();
      return d;
    });
  }
  return out;
}

struct SingularValueProfile {
  std::vector<double> smax;  // largest singular value per grid point
  std::vector<double> smin;  // smallest singular value per grid point
};

inline SingularValueProfile singular_profile(const MatrixFunction& f,
                                             bool parallel = false) {
  SingularValueProfile p;
  p.smax.resize(f.size());
  p.smin.resize(f.size());
  for_index(f.size(), parallel, [&](int k) {
    const Mat& m = f.sample(k);
    if (m.rows() == 1 && m.cols() == 1) {
      p.smax[k] = p.smin[k] = std::abs(m(0, 0));
    } else if (m.rows() == 1 || m.cols() == 1) {
      p.smax[k] = p.smin[k] = m.norm();
    } else {
      Eigen::JacobiSVD<Mat> svd(m);
      const auto& sv = svd.singularValues();
      p.smax[k] = sv(0);
      p.smin[k] = sv(sv.size() - 1);
    }
  });
  return p;
}

/// Sup-norm over the grid: max of the largest singular value, sharpened by
/// parabolic interpolation at the maximizer. Result >= the plain grid max.
inline double sup_norm(const MatrixFunction& f, bool parallel = false) {
  std::vector<double> vals(f.size());
  for_index(f.size(), parallel,
            [&](int k) { vals[k] = detail::largest_sv(f.sample(k)); });
  int best = 0;
  for (int k = 1; k < f.size(); ++k)
    if (vals[k] > vals[best]) best = k;
  return detail::sharpen(vals, *f.grid(), best, /*maximize=*/true);
}

/// Inf over the grid of the smallest singular value, sharpened downward.
/// Result <= the plain grid min.
inline double min_singular_inf(const MatrixFunction& f, bool parallel = false) {
  std::vector<double> vals(f.size());
  for_index(f.size(), parallel,
            [&](int k) { vals[k] = detail::smallest_sv(f.sample(k)); });
  int best = 0;
  for (int k = 1; k < f.size(); ++k)
    if (vals[k] < vals[best]) best = k;
  return detail::sharpen(vals, *f.grid(), best, /*maximize=*/false);
}

}  // namespace numetric
