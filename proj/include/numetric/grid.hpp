#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <vector>

#include "numetric/config.hpp"
#include "numetric/errors.hpp"

namespace numetric {

enum class Algebra { Disk, AP, CD, Polydisk };

inline const char* algebra_name(Algebra a) {
  switch (a) {
    case Algebra::Disk: return "disk";
    case Algebra::AP: return "ap";
    case Algebra::CD: return "cd";
    case Algebra::Polydisk: return "polydisk";
  }
  return "?";
}

/// One evaluation point of the grid. Which members are meaningful depends on
/// the algebra: Disk uses z = e^{i theta}; AP uses the real frequency y;
/// CD uses theta on the Mobius circle together with y = cot(theta/2);
/// Polydisk points are either a torus lattice point (coords) or a point of
/// the separate diagonal circle (z).
struct EvalPoint {
  Algebra algebra = Algebra::Disk;
  bool diagonal = false;
  std::complex<double> z{1.0, 0.0};
  double theta = 0.0;
  double y = 0.0;
  const std::complex<double>* coords = nullptr;
  int ncoords = 0;
};

/// Finite sampling of (a dense subset of) the maximal ideal space of the
/// active algebra. Immutable; refinement returns a new grid.
class FrequencyGrid {
 public:
  struct Segment {
    enum class Mode { Wrap, Clamp, Flat };  // neighbor topology for extrema
    Mode mode = Mode::Wrap;
    int start = 0;
    int count = 0;
  };

  static FrequencyGrid disk(int n) {
    FrequencyGrid g(Algebra::Disk, n);
    g.thetas_.resize(n);
    g.zs_.resize(n);
    for (int k = 0; k < n; ++k) {
      const double th = 2.0 * std::numbers::pi * k / n;
      g.thetas_[k] = th;
      g.zs_[k] = std::polar(1.0, th);
    }
    g.segments_ = {{Segment::Mode::Wrap, 0, n}};
    return g;
  }

  static FrequencyGrid ap(int n, double halfwidth) {
    FrequencyGrid g(Algebra::AP, n);
    g.halfwidth_ = halfwidth;
    g.ys_.resize(n);
    for (int k = 0; k < n; ++k)
      g.ys_[k] = -halfwidth + 2.0 * halfwidth * k / n;
    g.segments_ = {{Segment::Mode::Clamp, 0, n}};
    return g;
  }

  // Angles (2k+1)pi/n exclude theta = 0, which corresponds to y = +-infinity
  // under the Mobius substitution iy = (1+e^{i theta})/(1-e^{i theta}).
  static FrequencyGrid cd(int n) {
    FrequencyGrid g(Algebra::CD, n);
    g.thetas_.resize(n);
    g.ys_.resize(n);
    g.zs_.resize(n);
    for (int k = 0; k < n; ++k) {
      const double th = (2.0 * k + 1.0) * std::numbers::pi / n;
      g.thetas_[k] = th;
      g.ys_[k] = 1.0 / std::tan(th / 2.0);
      g.zs_[k] = std::polar(1.0, th);
    }
    g.segments_ = {{Segment::Mode::Clamp, 0, n}};
    return g;
  }

  /// nominal is the circle-grid size; the torus lattice gets
  /// min(nominal, 2^floor(12/nvars)) points per axis (power of two >= 4) so
  /// the lattice stays within the 4096-point default budget.
  static FrequencyGrid polydisk(int nvars, int nominal) {
    if (nvars < 2) throw ValidationError("polydisk arity must be >= 2");
    FrequencyGrid g(Algebra::Polydisk, nominal);
    g.nvars_ = nvars;
    int axis_log = 12 / nvars;
    if (axis_log < 2) axis_log = 2;
    g.axis_n_ = 1 << axis_log;
    while (g.axis_n_ > nominal) g.axis_n_ >>= 1;
    if (g.axis_n_ < 4) g.axis_n_ = 4;
    g.build_polydisk_points();
    return g;
  }

  static FrequencyGrid make(Algebra a, const RunConfig& cfg, int nvars = 2) {
    cfg.validate();
    switch (a) {
      case Algebra::Disk: return disk(cfg.grid_size);
      case Algebra::AP: return ap(cfg.grid_size, cfg.ap_halfwidth);
      case Algebra::CD: return cd(cfg.grid_size);
      case Algebra::Polydisk: return polydisk(nvars, cfg.grid_size);
    }
    throw ValidationError("unknown algebra");
  }

  Algebra algebra() const { return algebra_; }
  int nominal() const { return nominal_; }
  int size() const { return total_; }
  double halfwidth() const { return halfwidth_; }
  int vars() const { return nvars_; }
  int axis_points() const { return axis_n_; }
  int lattice_size() const {
    if (algebra_ != Algebra::Polydisk) return 0;
    int n = 1;
    for (int i = 0; i < nvars_; ++i) n *= axis_n_;
    return n;
  }
  int circle_size() const {
    return algebra_ == Algebra::Polydisk ? nominal_ : total_;
  }
  int circle_start() const {
    return algebra_ == Algebra::Polydisk ? lattice_size() : 0;
  }
  const std::vector<Segment>& segments() const { return segments_; }

  EvalPoint point(int k) const {
    EvalPoint pt;
    pt.algebra = algebra_;
    switch (algebra_) {
      case Algebra::Disk:
        pt.theta = thetas_[k];
        pt.z = zs_[k];
        break;
      case Algebra::AP:
        pt.y = ys_[k];
        break;
      case Algebra::CD:
        pt.theta = thetas_[k];
        pt.y = ys_[k];
        pt.z = zs_[k];
        break;
      case Algebra::Polydisk: {
        const int nl = lattice_size();
        if (k < nl) {
          pt.coords = &coords_[static_cast<std::size_t>(k) * nvars_];
          pt.ncoords = nvars_;
        } else {
          pt.diagonal = true;
          pt.theta = thetas_[k - nl];
          pt.z = zs_[k - nl];
        }
        break;
      }
    }
    return pt;
  }

  /// Doubled grid (per axis for polydisk lattices). Throws UnresolvedError
  /// once the total point budget is exhausted.
  std::shared_ptr<const FrequencyGrid> refined(int limit_total) const {
    if (algebra_ == Algebra::Polydisk) {
      long next = 2L * nominal_;
      long lat = 1;
      for (int i = 0; i < nvars_; ++i) lat *= 2L * axis_n_;
      if (next + lat > limit_total)
        throw UnresolvedError("grid refinement budget exhausted (polydisk)");
      FrequencyGrid g(Algebra::Polydisk, 2 * nominal_);
      g.nvars_ = nvars_;
      g.axis_n_ = 2 * axis_n_;
      g.build_polydisk_points();
      return std::make_shared<FrequencyGrid>(std::move(g));
    }
    if (2L * nominal_ > limit_total)
      throw UnresolvedError("grid refinement budget exhausted");
    switch (algebra_) {
      case Algebra::Disk: return std::make_shared<FrequencyGrid>(disk(2 * nominal_));
      case Algebra::AP:
        return std::make_shared<FrequencyGrid>(ap(2 * nominal_, halfwidth_));
      case Algebra::CD: return std::make_shared<FrequencyGrid>(cd(2 * nominal_));
      default: break;
    }
    throw ValidationError("unknown algebra");
  }

  bool operator==(const FrequencyGrid& o) const {
    return algebra_ == o.algebra_ && nominal_ == o.nominal_ &&
           halfwidth_ == o.halfwidth_ && nvars_ == o.nvars_ &&
           axis_n_ == o.axis_n_;
  }
  bool operator!=(const FrequencyGrid& o) const { return !(*this == o); }

 private:
  FrequencyGrid(Algebra a, int nominal) : algebra_(a), nominal_(nominal) {
    if (nominal < 16 || (nominal & (nominal - 1)) != 0)
      throw ValidationError("grid size must be a power of two >= 16");
    total_ = nominal;
  }

  void build_polydisk_points() {
    const int nl = lattice_size();
    coords_.resize(static_cast<std::size_t>(nl) * nvars_);
    std::vector<std::complex<double>> axis(axis_n_);
    for (int k = 0; k < axis_n_; ++k)
      axis[k] = std::polar(1.0, 2.0 * std::numbers::pi * k / axis_n_);
    for (int k = 0; k < nl; ++k) {
      int rem = k;
      for (int v = nvars_ - 1; v >= 0; --v) {
        coords_[static_cast<std::size_t>(k) * nvars_ + v] = axis[rem % axis_n_];
        rem /= axis_n_;
      }
    }
    thetas_.resize(nominal_);
    zs_.resize(nominal_);
    for (int k = 0; k < nominal_; ++k) {
      const double th = 2.0 * std::numbers::pi * k / nominal_;
      thetas_[k] = th;
      zs_[k] = std::polar(1.0, th);
    }
    total_ = nl + nominal_;
    segments_ = {{Segment::Mode::Flat, 0, nl},
                 {Segment::Mode::Wrap, nl, nominal_}};
  }

  Algebra algebra_;
  int nominal_;
  int total_ = 0;
  double halfwidth_ = 0.0;
  int nvars_ = 0;
  int axis_n_ = 0;
  std::vector<double> thetas_;
  std::vector<double> ys_;
  std::vector<std::complex<double>> zs_;
  std::vector<std::complex<double>> coords_;
  std::vector<Segment> segments_;
};

using GridPtr = std::shared_ptr<const FrequencyGrid>;

}  // namespace numetric
