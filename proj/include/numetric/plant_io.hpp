#pragma once

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "numetric/plants.hpp"

namespace numetric {

namespace detail_io {

using njson = nlohmann::json;

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void put_cplx(std::string& s, Cplx c) {
  s += '[';
  s += fmt(c.real());
  s += ',';
  s += fmt(c.imag());
  s += ']';
}

inline void put_cvec(std::string& s, const std::vector<Cplx>& v) {
  s += '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    put_cplx(s, v[i]);
  }
  s += ']';
}

inline void put_mat(std::string& s, const Mat& m) {
  s += '[';
  for (int i = 0; i < m.rows(); ++i) {
    if (i) s += ',';
    s += '[';
    for (int j = 0; j < m.cols(); ++j) {
      if (j) s += ',';
      put_cplx(s, m(i, j));
    }
    s += ']';
  }
  s += ']';
}

inline void put_rational(std::string& s, const RationalFn& f) {
  s += "{\"num\":";
  put_cvec(s, f.num);
  s += ",\"den\":";
  put_cvec(s, f.den);
  s += '}';
}

inline void put_terms(std::string& s, const ExpPoly& e) {
  s += '[';
  bool first = true;
  for (const auto& t : e.terms()) {
    if (!first) s += ',';
    first = false;
    s += "{\"lambda\":";
    s += fmt(t.lambda);
    s += ",\"coeff\":";
    put_cplx(s, t.coeff);
    s += '}';
  }
  s += ']';
}

inline void put_cd(std::string& s, const CdScalar& f) {
  s += "{\"ap\":";
  put_terms(s, f.ap_part());
  s += ",\"l1\":[";
  bool first = true;
  for (const auto& t : f.l1_part()) {
    if (!first) s += ',';
    first = false;
    s += "{\"lambda\":";
    s += fmt(t.lambda);
    s += ",\"num\":";
    put_cvec(s, t.r.num);
    s += ",\"den\":";
    put_cvec(s, t.r.den);
    s += '}';
  }
  s += "]}";
}

inline void put_multi(std::string& s, const MultiPoly& f) {
  s += '[';
  bool first = true;
  for (const auto& [e, c] : f.terms()) {
    if (!first) s += ',';
    first = false;
    s += "{\"expo\":[";
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(e[i]);
    }
    s += "],\"coeff\":";
    put_cplx(s, c);
    s += '}';
  }
  s += ']';
}

inline void put_scalar(std::string& s, const RationalFn& f) { put_rational(s, f); }
inline void put_scalar(std::string& s, const ExpPoly& f) { put_terms(s, f); }
inline void put_scalar(std::string& s, const CdScalar& f) { put_cd(s, f); }
inline void put_scalar(std::string& s, const MultiPoly& f) { put_multi(s, f); }

template <class S>
inline void put_entry_grid(std::string& s, const SymMat<S>& m) {
  s += "{\"entries\":[";
  for (int i = 0; i < m.rows(); ++i) {
    if (i) s += ',';
    s += '[';
    for (int j = 0; j < m.cols(); ++j) {
      if (j) s += ',';
      put_scalar(s, m.at(i, j));
    }
    s += ']';
  }
  s += "]}";
}

inline void put_block(std::string& s, const SymbolicMatrix& m) {
  std::visit([&s](const auto& g) { put_entry_grid(s, g); }, m);
}

// ---- parsing helpers ----

[[noreturn]] inline void bail(const std::string& where, const std::string& what) {
  throw ValidationError(where + ": " + what);
}

inline double get_real(const njson& j, const std::string& where) {
  if (!j.is_number()) bail(where, "expected a number");
  return j.get<double>();
}

inline Cplx get_cplx(const njson& j, const std::string& where) {
  if (j.is_number()) return Cplx(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return Cplx(j[0].get<double>(), j[1].get<double>());
  bail(where, "expected a number or [re,im] pair");
}

inline std::vector<Cplx> get_cvec(const njson& j, const std::string& where) {
  if (!j.is_array()) bail(where, "expected a coefficient array");
  std::vector<Cplx> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(get_cplx(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline Mat get_mat(const njson& j, const std::string& where) {
  if (!j.is_array()) bail(where, "expected a matrix (array of rows)");
  const int rows = static_cast<int>(j.size());
  int cols = -1;
  Mat out;
  for (int i = 0; i < rows; ++i) {
    const njson& row = j[i];
    if (!row.is_array()) bail(where, "row " + std::to_string(i) + " is not an array");
    if (cols < 0) {
      cols = static_cast<int>(row.size());
      out = Mat::Zero(rows, cols);
    }
    if (static_cast<int>(row.size()) != cols) bail(where, "ragged rows");
    for (int k = 0; k < cols; ++k)
      out(i, k) = get_cplx(row[k], where + "[" + std::to_string(i) + "][" + std::to_string(k) + "]");
  }
  if (rows == 0) out = Mat::Zero(0, 0);
  return out;
}

inline const njson& get_field(const njson& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) bail(where, std::string("missing field \"") + key + "\"");
  return *it;
}

inline RationalFn get_rational(const njson& j, const std::string& where) {
  if (!j.is_object()) bail(where, "expected {num, den}");
  return RationalFn(get_cvec(get_field(j, "num", where), where + ".num"),
                    get_cvec(get_field(j, "den", where), where + ".den"));
}

inline ExpPoly get_terms(const njson& j, const std::string& where) {
  if (!j.is_array()) bail(where, "expected an array of terms");
  std::vector<ExpPoly::Term> terms;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string here = where + "[" + std::to_string(i) + "]";
    const njson& t = j[i];
    if (!t.is_object()) bail(here, "expected {lambda, coeff}");
    const double lambda = get_real(get_field(t, "lambda", here), here + ".lambda");
    if (lambda < 0.0) bail(here, "frequencies must be nonnegative");
    terms.push_back({lambda, get_cplx(get_field(t, "coeff", here), here + ".coeff")});
  }
  return ExpPoly(std::move(terms));
}

inline CdScalar get_cd(const njson& j, const std::string& where) {
  if (!j.is_object()) bail(where, "expected {ap, l1}");
  const ExpPoly ap = get_terms(get_field(j, "ap", where), where + ".ap");
  const njson& l1 = get_field(j, "l1", where);
  if (!l1.is_array()) bail(where + ".l1", "expected an array");
  std::vector<CdScalar::L1Term> terms;
  for (std::size_t i = 0; i < l1.size(); ++i) {
    const std::string here = where + ".l1[" + std::to_string(i) + "]";
    const njson& t = l1[i];
    if (!t.is_object()) bail(here, "expected {lambda, num, den}");
    const double lambda = get_real(get_field(t, "lambda", here), here + ".lambda");
    if (lambda < 0.0) bail(here, "frequencies must be nonnegative");
    terms.push_back({lambda, RationalFn(get_cvec(get_field(t, "num", here), here + ".num"),
                                        get_cvec(get_field(t, "den", here), here + ".den"))});
  }
  return CdScalar(ap, std::move(terms));
}

inline MultiPoly get_multi(const njson& j, int nvars, const std::string& where) {
  if (!j.is_array()) bail(where, "expected an array of monomials");
  MultiPoly out = MultiPoly::constant(nvars, Cplx(0.0, 0.0));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string here = where + "[" + std::to_string(i) + "]";
    const njson& t = j[i];
    if (!t.is_object()) bail(here, "expected {expo, coeff}");
    const njson& ej = get_field(t, "expo", here);
    if (!ej.is_array() || static_cast<int>(ej.size()) != nvars)
      bail(here + ".expo", "expected " + std::to_string(nvars) + " exponents");
    std::vector<int> e(nvars);
    for (int k = 0; k < nvars; ++k) {
      if (!ej[k].is_number_integer()) bail(here + ".expo", "exponents must be integers");
      e[k] = ej[k].get<int>();
      if (e[k] < 0) bail(here + ".expo", "exponents must be nonnegative");
    }
    auto it = out.terms().find(e);
    const Cplx prev = it == out.terms().end() ? Cplx(0.0, 0.0) : it->second;
    out.set(e, prev + get_cplx(get_field(t, "coeff", here), here + ".coeff"));
  }
  return out;
}

template <class S, class GetScalar>
inline SymMat<S> get_entry_grid(const njson& j, int rows, int cols, const std::string& where,
                                GetScalar&& get_scalar) {
  const njson& entries = get_field(j, "entries", where);
  if (!entries.is_array() || static_cast<int>(entries.size()) != rows)
    bail(where + ".entries", "expected " + std::to_string(rows) + " rows");
  SymMat<S> out(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const njson& row = entries[i];
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      bail(where + ".entries", "row " + std::to_string(i) + " needs " + std::to_string(cols) +
                                   " entries");
    for (int k = 0; k < cols; ++k)
      out.at(i, k) = get_scalar(row[k], where + ".entries[" + std::to_string(i) + "][" +
                                            std::to_string(k) + "]");
  }
  return out;
}

inline SymbolicMatrix get_block(const njson& j, Algebra a, int rows, int cols, int nvars,
                                const std::string& where) {
  switch (a) {
    case Algebra::Disk:
      return get_entry_grid<RationalFn>(j, rows, cols, where,
                                        [](const njson& s, const std::string& w) {
                                          return get_rational(s, w);
                                        });
    case Algebra::AP:
      return get_entry_grid<ExpPoly>(j, rows, cols, where,
                                     [](const njson& s, const std::string& w) {
                                       return get_terms(s, w);
                                     });
    case Algebra::CD:
      return get_entry_grid<CdScalar>(j, rows, cols, where,
                                      [](const njson& s, const std::string& w) {
                                        return get_cd(s, w);
                                      });
    case Algebra::Polydisk:
      return get_entry_grid<MultiPoly>(j, rows, cols, where,
                                       [nvars](const njson& s, const std::string& w) {
                                         return get_multi(s, nvars, w);
                                       });
  }
  bail(where, "unknown algebra");
}

}  // namespace detail_io

/// Parses a plant document. Malformed JSON raises SyntaxError with the byte
/// offset; structurally invalid documents raise ValidationError naming the
/// offending field.
inline PlantModel parse_plant(const std::string& text) {
  using detail_io::njson;
  njson j;
  try {
    j = njson::parse(text);
  } catch (const njson::parse_error& e) {
    throw SyntaxError(e.what(), e.byte);
  }
  if (!j.is_object()) throw ValidationError("document: expected a JSON object");
  const std::string astr =
      detail_io::get_field(j, "algebra", "document").get<std::string>();
  Algebra algebra;
  if (astr == "disk") algebra = Algebra::Disk;
  else if (astr == "ap") algebra = Algebra::AP;
  else if (astr == "cd") algebra = Algebra::CD;
  else if (astr == "polydisk") algebra = Algebra::Polydisk;
  else throw ValidationError("algebra: unknown value \"" + astr + "\"");
  const std::string kind = detail_io::get_field(j, "kind", "document").get<std::string>();
  const njson& pj = detail_io::get_field(j, "p", "document");
  const njson& mj = detail_io::get_field(j, "m", "document");
  if (!pj.is_number_integer() || !mj.is_number_integer())
    throw ValidationError("p, m: expected integers");
  const int p = pj.get<int>(), m = mj.get<int>();
  if (p <= 0 || m <= 0) throw ValidationError("p, m: must be positive");
  const njson& body = detail_io::get_field(j, "body", "document");
  if (!body.is_object()) throw ValidationError("body: expected an object");

  PlantModel P;
  P.algebra = algebra;
  P.p = p;
  P.m = m;

  if (kind == "state_space") {
    StateSpace ss;
    ss.A = detail_io::get_mat(detail_io::get_field(body, "A", "body"), "body.A");
    ss.B = detail_io::get_mat(detail_io::get_field(body, "B", "body"), "body.B");
    ss.C = detail_io::get_mat(detail_io::get_field(body, "C", "body"), "body.C");
    ss.D = detail_io::get_mat(detail_io::get_field(body, "D", "body"), "body.D");
    if (ss.A.rows() == 0) {  // order 0: block shapes collapse to empty
      ss.B = Mat::Zero(0, m);
      ss.C = Mat::Zero(p, 0);
    }
    P.body = std::move(ss);
  } else if (kind == "rational") {
    P.body = detail_io::get_entry_grid<RationalFn>(
        body, p, m, "body",
        [](const detail_io::njson& s, const std::string& w) {
          return detail_io::get_rational(s, w);
        });
  } else if (kind == "exp_poly") {
    const njson& entries = detail_io::get_field(body, "entries", "body");
    if (!entries.is_array() || static_cast<int>(entries.size()) != p)
      throw ValidationError("body.entries: expected " + std::to_string(p) + " rows");
    ExpPolyQuotient q;
    q.p = p;
    q.m = m;
    for (int i = 0; i < p; ++i) {
      const njson& row = entries[i];
      if (!row.is_array() || static_cast<int>(row.size()) != m)
        throw ValidationError("body.entries: ragged rows");
      for (int k = 0; k < m; ++k) {
        const std::string where =
            "body.entries[" + std::to_string(i) + "][" + std::to_string(k) + "]";
        const njson& e = row[k];
        if (!e.is_object()) detail_io::bail(where, "expected {num, den}");
        q.entries.emplace_back(
            detail_io::get_terms(detail_io::get_field(e, "num", where), where + ".num"),
            detail_io::get_terms(detail_io::get_field(e, "den", where), where + ".den"));
      }
    }
    P.body = std::move(q);
  } else if (kind == "coprime") {
    FactorBody fb;
    fb.p = p;
    fb.m = m;
    if (algebra == Algebra::Polydisk) {
      const njson& nv = detail_io::get_field(body, "nvars", "body");
      if (!nv.is_number_integer() || nv.get<int>() < 2)
        throw ValidationError("body.nvars: expected an integer >= 2");
      fb.nvars = nv.get<int>();
    }
    if (body.contains("blocks")) {
      const njson& blocks = body["blocks"];
      if (!blocks.is_object()) throw ValidationError("body.blocks: expected an object");
      fb.N = detail_io::get_block(detail_io::get_field(blocks, "N", "body.blocks"), algebra, p,
                                  m, fb.nvars, "body.blocks.N");
      fb.D = detail_io::get_block(detail_io::get_field(blocks, "D", "body.blocks"), algebra, m,
                                  m, fb.nvars, "body.blocks.D");
      fb.Nt = detail_io::get_block(detail_io::get_field(blocks, "Nt", "body.blocks"), algebra,
                                   p, m, fb.nvars, "body.blocks.Nt");
      fb.Dt = detail_io::get_block(detail_io::get_field(blocks, "Dt", "body.blocks"), algebra,
                                   p, p, fb.nvars, "body.blocks.Dt");
    } else if (body.contains("samples")) {
      const njson& s = body["samples"];
      if (!s.is_object()) throw ValidationError("body.samples: expected an object");
      FactorBody::Sampled sm;
      const njson& gs = detail_io::get_field(s, "grid_size", "body.samples");
      if (!gs.is_number_integer()) throw ValidationError("body.samples.grid_size: integer");
      sm.grid_size = gs.get<int>();
      sm.halfwidth = s.contains("halfwidth")
                         ? detail_io::get_real(s["halfwidth"], "body.samples.halfwidth")
                         : 200.0;
      auto read_block = [&](const char* key, int r, int c) {
        const njson& arr = detail_io::get_field(s, key, "body.samples");
        const std::string where = std::string("body.samples.") + key;
        if (!arr.is_array()) detail_io::bail(where, "expected an array of matrices");
        std::vector<Mat> out;
        out.reserve(arr.size());
        for (std::size_t i = 0; i < arr.size(); ++i) {
          Mat mk = detail_io::get_mat(arr[i], where + "[" + std::to_string(i) + "]");
          if (mk.rows() != r || mk.cols() != c)
            detail_io::bail(where, "sample " + std::to_string(i) + " has wrong shape");
          out.push_back(std::move(mk));
        }
        return out;
      };
      sm.N = read_block("N", p, m);
      sm.D = read_block("D", m, m);
      sm.Nt = read_block("Nt", p, m);
      sm.Dt = read_block("Dt", p, p);
      fb.samples = std::move(sm);
    } else {
      throw ValidationError("body: coprime bodies need \"blocks\" or \"samples\"");
    }
    P.body = std::move(fb);
  } else {
    throw ValidationError("kind: unknown value \"" + kind + "\"");
  }
  validate(P);
  return P;
}

/// Canonical serialization: fixed key order, complex numbers as [re,im],
/// floats with 17 significant digits, LF line endings. parse(serialize(P))
/// reproduces every field exactly.
inline std::string serialize_plant(const PlantModel& P) {
  using namespace detail_io;
  std::string s;
  s += "{\n  \"algebra\": \"";
  switch (P.algebra) {
    case Algebra::Disk: s += "disk"; break;
    case Algebra::AP: s += "ap"; break;
    case Algebra::CD: s += "cd"; break;
    case Algebra::Polydisk: s += "polydisk"; break;
  }
  s += "\",\n  \"kind\": \"";
  if (P.is_state_space()) s += "state_space";
  else if (P.is_rational()) s += "rational";
  else if (P.is_exp_quotient()) s += "exp_poly";
  else s += "coprime";
  s += "\",\n  \"p\": " + std::to_string(P.p);
  s += ",\n  \"m\": " + std::to_string(P.m);
  s += ",\n  \"body\": ";
  if (const auto* ss = std::get_if<StateSpace>(&P.body)) {
    s += "{\"A\":";
    put_mat(s, ss->A);
    s += ",\"B\":";
    put_mat(s, ss->B);
    s += ",\"C\":";
    put_mat(s, ss->C);
    s += ",\"D\":";
    put_mat(s, ss->D);
    s += '}';
  } else if (const auto* rm = std::get_if<SymMat<RationalFn>>(&P.body)) {
    put_entry_grid(s, *rm);
  } else if (const auto* eq = std::get_if<ExpPolyQuotient>(&P.body)) {
    s += "{\"entries\":[";
    for (int i = 0; i < P.p; ++i) {
      if (i) s += ',';
      s += '[';
      for (int k = 0; k < P.m; ++k) {
        if (k) s += ',';
        s += "{\"num\":";
        put_terms(s, eq->at(i, k).first);
        s += ",\"den\":";
        put_terms(s, eq->at(i, k).second);
        s += '}';
      }
      s += ']';
    }
    s += "]}";
  } else {
    const auto& fb = std::get<FactorBody>(P.body);
    s += '{';
    if (P.algebra == Algebra::Polydisk) s += "\"nvars\":" + std::to_string(fb.nvars) + ',';
    if (fb.symbolic()) {
      s += "\"blocks\":{\"N\":";
      put_block(s, *fb.N);
      s += ",\"D\":";
      put_block(s, *fb.D);
      s += ",\"Nt\":";
      put_block(s, *fb.Nt);
      s += ",\"Dt\":";
      put_block(s, *fb.Dt);
      s += '}';
    } else {
      const auto& sm = *fb.samples;
      s += "\"samples\":{\"grid_size\":" + std::to_string(sm.grid_size);
      s += ",\"halfwidth\":";
      s += fmt(sm.halfwidth);
      auto put_samples = [&s](const char* key, const std::vector<Mat>& v) {
        s += ",\"";
        s += key;
        s += "\":[";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) s += ',';
          put_mat(s, v[i]);
        }
        s += ']';
      };
      put_samples("N", sm.N);
      put_samples("D", sm.D);
      put_samples("Nt", sm.Nt);
      put_samples("Dt", sm.Dt);
      s += '}';
    }
    s += '}';
  }
  s += "\n}\n";
  return s;
}

}  // namespace numetric
