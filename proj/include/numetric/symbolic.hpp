#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "numetric/errors.hpp"
#include "numetric/grid.hpp"
#include "numetric/polynomials.hpp"

namespace numetric {

using Cplx = std::complex<double>;

namespace detail {

/// z^k for integer k, stable on the unit circle (negative powers via 1/z).
inline Cplx cpow_int(Cplx z, long k) {
  if (k < 0) return 1.0 / cpow_int(z, -k);
  Cplx acc(1.0, 0.0), base = z;
  while (k > 0) {
    if (k & 1) acc *= base;
    base *= base;
    k >>= 1;
  }
  return acc;
}

inline constexpr double kCoeffDropRel = 1e-12;
inline constexpr double kFreqMergeTol = 1e-12;

}  // namespace detail

/// Scalar rational function num/den with complex coefficients ascending in
/// the variable. The variable is z for disk-algebra entries and s (evaluated
/// on the imaginary axis) for absolutely continuous half-plane parts.
class RationalFn {
 public:
  poly::Coeffs num;
  poly::Coeffs den;

  RationalFn() : num{}, den{{1.0, 0.0}} {}
  RationalFn(poly::Coeffs n, poly::Coeffs d)
      : num(poly::trimmed(std::move(n))), den(poly::trimmed(std::move(d))) {
    if (den.empty()) throw ValidationError("rational function with zero denominator");
  }

  static RationalFn constant(Cplx c) { return RationalFn({c}, {{1.0, 0.0}}); }
  static RationalFn zero() { return RationalFn(); }
  static RationalFn one() { return constant({1.0, 0.0}); }

  bool is_zero() const { return num.empty(); }
  bool is_strictly_proper() const {
    return num.empty() || poly::degree(num) < poly::degree(den);
  }

  Cplx eval(Cplx x) const { return poly::eval(num, x) / poly::eval(den, x); }

  RationalFn add(const RationalFn& o) const {
    return RationalFn(poly::add(poly::mul(num, o.den), poly::mul(o.num, den)),
                      poly::mul(den, o.den));
  }
  RationalFn mul(const RationalFn& o) const {
    if (is_zero() || o.is_zero()) return zero();
    return RationalFn(poly::mul(num, o.num), poly::mul(den, o.den));
  }
  RationalFn scaled(Cplx s) const { return RationalFn(poly::scale(num, s), den); }
  RationalFn neg() const { return scaled({-1.0, 0.0}); }

  /// Pointwise conjugate on the unit circle: conj(f(z)) for |z| = 1 equals
  /// this rational function of z. This is the involution of the disk
  /// algebra, so it is what adjoints of rational blocks use.
  RationalFn conj() const { return conj_circle(); }

  RationalFn conj_circle() const {
    const int k = std::max(std::max(poly::degree(num), poly::degree(den)), 0);
    return RationalFn(poly::conj_reflect(num, k), poly::conj_reflect(den, k));
  }

  /// Pointwise conjugate on the imaginary axis: conj(f(iy)) equals this
  /// rational function evaluated at iy. Coefficients c_k -> conj(c_k)(-1)^k.
  RationalFn conj_imag() const {
    auto flip = [](poly::Coeffs c) {
      for (std::size_t k = 0; k < c.size(); ++k) {
        c[k] = std::conj(c[k]);
        if (k & 1) c[k] = -c[k];
      }
      return c;
    };
    return RationalFn(flip(num), flip(den));
  }
};

/// Finite exponential sum y -> sum_k c_k e^{i lambda_k y} on the real line.
/// Terms are kept sorted by frequency and merged; negligible coefficients
/// (relative 1e-12) are dropped so cancellation residue does not pollute the
/// frequency list.
class ExpPoly {
 public:
  struct Term {
    double lambda;
    Cplx coeff;
  };

  ExpPoly() = default;
  explicit ExpPoly(std::vector<Term> terms) { assign(std::move(terms)); }

  static ExpPoly constant(Cplx c) { return ExpPoly({{0.0, c}}); }
  static ExpPoly zero() { return {}; }
  static ExpPoly one() { return constant({1.0, 0.0}); }

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  std::vector<double> frequencies() const {
    std::vector<double> out;
    out.reserve(terms_.size());
    for (const auto& t : terms_) out.push_back(t.lambda);
    return out;
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (const auto& t : terms_) m = std::max(m, std::abs(t.coeff));
    return m;
  }

  Cplx eval(double y) const {
    Cplx acc(0.0, 0.0);
    for (const auto& t : terms_) acc += t.coeff * std::polar(1.0, t.lambda * y);
    return acc;
  }

  ExpPoly add(const ExpPoly& o) const {
    std::vector<Term> t = terms_;
    t.insert(t.end(), o.terms_.begin(), o.terms_.end());
    return ExpPoly(std::move(t));
  }
  ExpPoly mul(const ExpPoly& o) const {
    std::vector<Term> t;
    t.reserve(terms_.size() * o.terms_.size());
    for (const auto& a : terms_)
      for (const auto& b : o.terms_)
        t.push_back({a.lambda + b.lambda, a.coeff * b.coeff});
    return ExpPoly(std::move(t));
  }
  ExpPoly scaled(Cplx s) const {
    std::vector<Term> t = terms_;
    for (auto& x : t) x.coeff *= s;
    return ExpPoly(std::move(t));
  }
  ExpPoly neg() const { return scaled({-1.0, 0.0}); }
  ExpPoly conj() const {
    std::vector<Term> t;
    t.reserve(terms_.size());
    for (const auto& x : terms_) t.push_back({-x.lambda, std::conj(x.coeff)});
    return ExpPoly(std::move(t));
  }

 private:
  void assign(std::vector<Term> t) {
    std::stable_sort(t.begin(), t.end(),
                     [](const Term& a, const Term& b) { return a.lambda < b.lambda; });
    std::vector<Term> merged;
    for (const auto& x : t) {
      const double tol = detail::kFreqMergeTol * std::max(1.0, std::abs(x.lambda));
      if (!merged.empty() && x.lambda - merged.back().lambda <= tol) {
        merged.back().coeff += x.coeff;
      } else {
        merged.push_back(x);
      }
    }
    double maxc = 0.0;
    for (const auto& x : merged) maxc = std::max(maxc, std::abs(x.coeff));
    terms_.clear();
    for (const auto& x : merged)
      if (std::abs(x.coeff) > detail::kCoeffDropRel * maxc && x.coeff != Cplx(0.0, 0.0))
        terms_.push_back(x);
  }

  std::vector<Term> terms_;
};

/// Scalar of the half-plane convolution algebra: an exponential-sum part plus
/// an absolutely continuous part given as a finite sum of frequency-shifted
/// strictly proper rationals, y -> sum_j e^{i lambda_j y} r_j(iy). Closed
/// under ring operations and conjugation; the shifted-rational form keeps
/// products of two such scalars inside the class.
class CdScalar {
 public:
  struct L1Term {
    double lambda;
    RationalFn r;  // strictly proper; poles off the imaginary axis
  };

  CdScalar() = default;
  CdScalar(ExpPoly ap, std::vector<L1Term> l1) : ap_(std::move(ap)) { assign_l1(std::move(l1)); }

  static CdScalar from_ap(ExpPoly ap) { return CdScalar(std::move(ap), {}); }
  static CdScalar constant(Cplx c) { return from_ap(ExpPoly::constant(c)); }
  static CdScalar zero() { return {}; }
  static CdScalar one() { return constant({1.0, 0.0}); }

  const ExpPoly& ap_part() const { return ap_; }
  const std::vector<L1Term>& l1_part() const { return l1_; }
  bool is_zero() const { return ap_.is_zero() && l1_.empty(); }

  Cplx eval_l1(double y) const {
    Cplx acc(0.0, 0.0);
    const Cplx iy(0.0, y);
    for (const auto& t : l1_) acc += std::polar(1.0, t.lambda * y) * t.r.eval(iy);
    return acc;
  }
  Cplx eval(double y) const { return ap_.eval(y) + eval_l1(y); }

  CdScalar add(const CdScalar& o) const {
    std::vector<L1Term> l = l1_;
    l.insert(l.end(), o.l1_.begin(), o.l1_.end());
    return CdScalar(ap_.add(o.ap_), std::move(l));
  }
  CdScalar mul(const CdScalar& o) const {
    std::vector<L1Term> l;
    for (const auto& t : l1_)
      for (const auto& a : o.ap_.terms())
        l.push_back({t.lambda + a.lambda, t.r.scaled(a.coeff)});
    for (const auto& t : o.l1_)
      for (const auto& a : ap_.terms())
        l.push_back({t.lambda + a.lambda, t.r.scaled(a.coeff)});
    for (const auto& s : l1_)
      for (const auto& t : o.l1_)
        l.push_back({s.lambda + t.lambda, s.r.mul(t.r)});
    return CdScalar(ap_.mul(o.ap_), std::move(l));
  }
  CdScalar scaled(Cplx c) const {
    std::vector<L1Term> l = l1_;
    for (auto& t : l) t.r = t.r.scaled(c);
    return CdScalar(ap_.scaled(c), std::move(l));
  }
  CdScalar neg() const { return scaled({-1.0, 0.0}); }
  CdScalar conj() const {
    std::vector<L1Term> l;
    l.reserve(l1_.size());
    for (const auto& t : l1_) l.push_back({-t.lambda, t.r.conj_imag()});
    return CdScalar(ap_.conj(), std::move(l));
  }

 private:
  void assign_l1(std::vector<L1Term> l) {
    l1_.clear();
    for (auto& t : l) {
      if (!t.r.is_strictly_proper())
        throw ValidationError("absolutely continuous part must be strictly proper");
      if (!t.r.is_zero()) l1_.push_back(std::move(t));
    }
  }

  ExpPoly ap_;
  std::vector<L1Term> l1_;
};

/// Laurent polynomial in several variables with integer exponent vectors.
/// An arity of 0 denotes the zero element of as-yet-undetermined arity (the
/// additive identity used by generic accumulators); binary operations adopt
/// the other operand's arity in that case.
class MultiPoly {
 public:
  using Expo = std::vector<int>;

  MultiPoly() : nvars_(0) {}
  explicit MultiPoly(int nvars) : nvars_(nvars) {}

  static MultiPoly constant(int nvars, Cplx c) {
    MultiPoly p(nvars);
    if (c != Cplx(0.0, 0.0)) p.terms_[Expo(static_cast<std::size_t>(nvars), 0)] = c;
    return p;
  }

  int nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  const std::map<Expo, Cplx>& terms() const { return terms_; }

  void set(const Expo& e, Cplx c) {
    if (static_cast<int>(e.size()) != nvars_)
      throw ValidationError("exponent arity mismatch");
    if (c == Cplx(0.0, 0.0)) terms_.erase(e);
    else terms_[e] = c;
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

  Cplx eval(const Cplx* coords, int n) const {
    if (n != nvars_) throw ValidationError("evaluation arity mismatch");
    Cplx acc(0.0, 0.0);
    for (const auto& [e, c] : terms_) {
      Cplx t = c;
      for (int i = 0; i < nvars_; ++i) t *= detail::cpow_int(coords[i], e[i]);
      acc += t;
    }
    return acc;
  }

  /// Restriction to the diagonal z -> f(z, ..., z): a one-variable Laurent
  /// polynomial whose exponents are the coordinate sums.
  MultiPoly diagonal() const {
    MultiPoly out(1);
    for (const auto& [e, c] : terms_) {
      long s = 0;
      for (int x : e) s += x;
      Expo key{static_cast<int>(s)};
      auto it = out.terms_.find(key);
      if (it == out.terms_.end()) out.terms_[key] = c;
      else it->second += c;
    }
    out.clean();
    return out;
  }

  MultiPoly add(const MultiPoly& o) const {
    const int nv = joint_arity(o);
    MultiPoly out(nv);
    out.terms_ = terms_;
    for (const auto& [e, c] : o.terms_) {
      auto it = out.terms_.find(e);
      if (it == out.terms_.end()) out.terms_[e] = c;
      else it->second += c;
    }
    out.clean();
    return out;
  }
  MultiPoly mul(const MultiPoly& o) const {
    const int nv = joint_arity(o);
    MultiPoly out(nv);
    for (const auto& [ea, ca] : terms_)
      for (const auto& [eb, cb] : o.terms_) {
        Expo e(ea);
        for (int i = 0; i < nv; ++i) e[i] += eb[i];
        auto it = out.terms_.find(e);
        if (it == out.terms_.end()) out.terms_[e] = ca * cb;
        else it->second += ca * cb;
      }
    out.clean();
    return out;
  }
  MultiPoly scaled(Cplx s) const {
    MultiPoly out(nvars_);
    if (s == Cplx(0.0, 0.0)) return out;
    out.terms_ = terms_;
    for (auto& [e, c] : out.terms_) c *= s;
    return out;
  }
  MultiPoly neg() const { return scaled({-1.0, 0.0}); }

  /// Pointwise conjugate on the unit torus: exponents negate, coefficients
  /// conjugate.
  MultiPoly conj() const {
    MultiPoly out(nvars_);
    for (const auto& [e, c] : terms_) {
      Expo ne(e);
      for (int& x : ne) x = -x;
      out.terms_[ne] = std::conj(c);
    }
    return out;
  }

 private:
  int joint_arity(const MultiPoly& o) const {
    if (nvars_ == 0 && terms_.empty()) return o.nvars_;
    if (o.nvars_ == 0 && o.terms_.empty()) return nvars_;
    if (nvars_ != o.nvars_) throw ValidationError("variable-count mismatch");
    return nvars_;
  }
  void clean() {
    double maxc = max_abs_coeff();
    for (auto it = terms_.begin(); it != terms_.end();) {
      if (std::abs(it->second) <= detail::kCoeffDropRel * maxc) it = terms_.erase(it);
      else ++it;
    }
  }

  int nvars_;
  std::map<Expo, Cplx> terms_;
};

/// Evaluation of each scalar kind at a grid point of its algebra.
inline Cplx evaluate_symbol(const RationalFn& f, const EvalPoint& pt) {
  return f.eval(pt.z);
}
inline Cplx evaluate_symbol(const ExpPoly& f, const EvalPoint& pt) { return f.eval(pt.y); }
inline Cplx evaluate_symbol(const CdScalar& f, const EvalPoint& pt) { return f.eval(pt.y); }
inline Cplx evaluate_symbol(const MultiPoly& f, const EvalPoint& pt) {
  if (pt.coords != nullptr) return f.eval(pt.coords, pt.ncoords);
  // Circle-diagonal points carry only z; evaluate on the diagonal.
  std::vector<Cplx> coords(static_cast<std::size_t>(f.nvars()), pt.z);
  return f.eval(coords.data(), f.nvars());
}

/// Dense matrix over one of the scalar kinds. Supports the ring operations
/// needed to form determinants of small blocks symbolically.
template <class S>
class SymMat {
 public:
  SymMat() : rows_(0), cols_(0) {}
  SymMat(int rows, int cols, const S& fill = S())
      : rows_(rows), cols_(cols),
        e_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {
    if (rows < 0 || cols < 0) throw ValidationError("negative matrix dimension");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  S& at(int i, int j) { return e_[static_cast<std::size_t>(i) * cols_ + j]; }
  const S& at(int i, int j) const { return e_[static_cast<std::size_t>(i) * cols_ + j]; }

  SymMat adjoint() const {
    SymMat out(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) out.at(j, i) = at(i, j).conj();
    return out;
  }

  SymMat mul(const SymMat& o) const {
    if (cols_ != o.rows_) throw ValidationError("symbolic matrix shape mismatch");
    SymMat out(rows_, o.cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < o.cols_; ++j) {
        S acc;
        for (int k = 0; k < cols_; ++k) acc = acc.add(at(i, k).mul(o.at(k, j)));
        out.at(i, j) = acc;
      }
    return out;
  }

  /// Determinant by expansion along the first column; intended for the small
  /// square blocks arising from graph symbols.
  S det() const {
    if (rows_ != cols_) throw ValidationError("determinant of non-square matrix");
    if (rows_ == 0) throw ValidationError("determinant of empty matrix");
    if (rows_ == 1) return at(0, 0);
    S acc;
    for (int i = 0; i < rows_; ++i) {
      SymMat minor(rows_ - 1, cols_ - 1);
      for (int r = 0, mr = 0; r < rows_; ++r) {
        if (r == i) continue;
        for (int c = 1; c < cols_; ++c) minor.at(mr, c - 1) = at(r, c);
        ++mr;
      }
      S contrib = at(i, 0).mul(minor.det());
      acc = acc.add((i % 2 == 0) ? contrib : contrib.neg());
    }
    return acc;
  }

  Eigen::MatrixXcd eval_matrix(const EvalPoint& pt) const {
    Eigen::MatrixXcd m(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) m(i, j) = evaluate_symbol(at(i, j), pt);
    return m;
  }

 private:
  int rows_, cols_;
  std::vector<S> e_;
};

/// One symbolic block, tagged by the scalar kind its algebra uses.
using SymbolicMatrix =
    std::variant<SymMat<RationalFn>, SymMat<ExpPoly>, SymMat<CdScalar>, SymMat<MultiPoly>>;

namespace detail {

inline std::pair<int, int> symbolic_dims(const SymbolicMatrix& m) {
  return std::visit([](const auto& a) { return std::pair<int, int>(a.rows(), a.cols()); }, m);
}

inline Eigen::MatrixXcd symbolic_eval(const SymbolicMatrix& m, const EvalPoint& pt) {
  return std::visit([&](const auto& a) { return a.eval_matrix(pt); }, m);
}

/// adjoint(a) * b with matching scalar kinds.
inline SymbolicMatrix symbolic_adjoint_times(const SymbolicMatrix& a, const SymbolicMatrix& b) {
  if (a.index() != b.index())
    throw ValidationError("mixed symbolic scalar kinds in one product");
  return std::visit(
      [&](const auto& x) -> SymbolicMatrix {
        using T = std::decay_t<decltype(x)>;
        return x.adjoint().mul(std::get<T>(b));
      },
      a);
}

}  // namespace detail
}  // namespace numetric
