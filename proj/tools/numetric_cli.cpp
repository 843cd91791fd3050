// Command-line surface for the plant-distance library: pairwise distances,
// loop margins, robustness certificates, axiom suites over plant families,
// and parameter sweeps with CSV output. Exit codes: 0 success (a degenerate
// distance is still a success), 1 denied certificate or failed axiom suite,
// 2 parse/validation/computation error, 3 unresolved verdict.

#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "numetric/numetric.hpp"
#include "numetric/plant_io.hpp"

namespace {

using nlohmann::ordered_json;
using namespace numetric;

std::string f17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string f6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

const char* yesno(bool b) { return b ? "yes" : "no"; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PlantModel load_plant(const std::string& path) { return parse_plant(read_file(path)); }

ordered_json index_json(const std::optional<IndexValue>& idx) {
  if (!idx) return nullptr;
  ordered_json j;
  j["algebra"] = algebra_name(idx->algebra);
  if (idx->has_average) j["average"] = idx->average;
  if (idx->has_winding) j["winding"] = idx->winding;
  return j;
}

void emit(const std::string& s) { std::fwrite(s.data(), 1, s.size(), stdout); }

void emit_json(const ordered_json& j) { emit(j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// dist

int cmd_dist(const std::string& p1, const std::string& p2, const RunConfig& cfg,
             const std::string& format) {
  const NuResult r = nu_distance(load_plant(p1), load_plant(p2), cfg);
  if (format == "json") {
    ordered_json j;
    j["value"] = r.value;
    j["branch"] = to_string(r.branch);
    j["det_invertible"] = r.det_invertible;
    j["winding_condition_met"] = r.winding_condition_met;
    j["index"] = index_json(r.index);
    j["grid_size_used"] = r.grid_size_used;
    emit_json(j);
  } else if (format == "csv") {
    emit("value,branch,det_invertible,winding_condition_met,grid_size_used\n");
    emit(f17(r.value) + "," + to_string(r.branch) + "," +
         std::to_string(int(r.det_invertible)) + "," +
         std::to_string(int(r.winding_condition_met)) + "," +
         std::to_string(r.grid_size_used) + "\n");
  } else {
    emit("d_nu = " + f6(r.value) + "\n");
    emit(std::string("branch: ") + to_string(r.branch) + "\n");
    emit(std::string("determinant invertible: ") + yesno(r.det_invertible) + "\n");
    emit(std::string("winding condition met: ") + yesno(r.winding_condition_met) + "\n");
    if (r.index) emit("index: " + r.index->str() + "\n");
    emit("grid points: " + std::to_string(r.grid_size_used) + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// margin / stabilizes

void print_margin(const MarginResult& r, const std::string& format, bool verdict_first) {
  if (format == "json") {
    ordered_json j;
    j["mu"] = r.mu;
    j["stabilizes"] = r.stabilizes;
    j["h_norm"] = r.h_norm ? ordered_json(*r.h_norm) : ordered_json(nullptr);
    j["det_invertible"] = r.det_invertible;
    j["index_check"] = index_json(r.index_check);
    emit_json(j);
    return;
  }
  if (format == "csv") {
    emit("mu,stabilizes,h_norm,det_invertible\n");
    emit(f17(r.mu) + "," + std::to_string(int(r.stabilizes)) + "," +
         (r.h_norm ? f17(*r.h_norm) : std::string()) + "," +
         std::to_string(int(r.det_invertible)) + "\n");
    return;
  }
  if (verdict_first) emit(std::string("stabilizes: ") + yesno(r.stabilizes) + "\n");
  emit("mu = " + f6(r.mu) + "\n");
  if (!verdict_first) emit(std::string("stabilizes: ") + yesno(r.stabilizes) + "\n");
  if (r.h_norm) emit("h_norm = " + f6(*r.h_norm) + "\n");
  emit(std::string("determinant invertible: ") + yesno(r.det_invertible) + "\n");
  if (r.index_check) emit("loop index: " + r.index_check->str() + "\n");
}

int cmd_margin(const std::string& p, const std::string& c, const RunConfig& cfg,
               const std::string& format, bool verdict_first) {
  const MarginResult r = stability_margin(load_plant(p), load_plant(c), cfg);
  print_margin(r, format, verdict_first);
  return 0;
}

// ---------------------------------------------------------------------------
// certify

int cmd_certify(const std::string& p0, const std::string& c, const std::string& p1,
                const RunConfig& cfg, const std::string& format) {
  const RobustCertificate cert =
      certify_robust(load_plant(p0), load_plant(c), load_plant(p1), cfg);
  if (format == "json") {
    ordered_json j;
    j["mu0"] = cert.mu0;
    j["dnu"] = cert.dnu;
    j["certified"] = cert.certified;
    j["predicted_margin_lower_bound"] = cert.predicted_margin_lower_bound;
    j["actual_mu1"] = cert.actual_mu1 ? ordered_json(*cert.actual_mu1) : ordered_json(nullptr);
    emit_json(j);
  } else if (format == "csv") {
    emit("mu0,dnu,certified,predicted_margin_lower_bound,actual_mu1\n");
    emit(f17(cert.mu0) + "," + f17(cert.dnu) + "," +
         std::to_string(int(cert.certified)) + "," +
         f17(cert.predicted_margin_lower_bound) + "," +
         (cert.actual_mu1 ? f17(*cert.actual_mu1) : std::string()) + "\n");
  } else {
    emit("mu0 = " + f6(cert.mu0) + "\n");
    emit("d_nu = " + f6(cert.dnu) + "\n");
    emit(std::string("certified: ") + yesno(cert.certified) + "\n");
    emit("predicted margin >= " + f6(cert.predicted_margin_lower_bound) + "\n");
    if (cert.actual_mu1) emit("achieved margin = " + f6(*cert.actual_mu1) + "\n");
  }
  return cert.certified ? 0 : 1;
}

// ---------------------------------------------------------------------------
// axioms

std::vector<PlantModel> plants_from_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ValidationError("'" + dir + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<PlantModel> plants;
  plants.reserve(files.size());
  for (const auto& f : files) plants.push_back(load_plant(f.string()));
  return plants;
}

std::vector<PlantModel> random_family(int count, std::uint64_t seed) {
  if (count < 3) throw ValidationError("a random family needs at least three plants");
  std::vector<PlantModel> plants;
  plants.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    plants.push_back(random_plant(1, 1, 1 + (i % 4), seed * 1000003ULL + i));
  return plants;
}

int cmd_axioms(const std::string& dir, int random_n, const RunConfig& cfg,
               const std::string& format) {
  if (dir.empty() == (random_n == 0))
    throw ValidationError("pass exactly one of a plant directory or --random N");
  const std::vector<PlantModel> plants =
      dir.empty() ? random_family(random_n, cfg.seed) : plants_from_dir(dir);
  const AxiomReport rep = metric_axiom_suite(plants, cfg.tol.metric_axiom, cfg);

  if (format == "json") {
    ordered_json j;
    j["count"] = rep.count;
    j["tolerance"] = rep.tolerance;
    j["self_tolerance"] = rep.self_tolerance;
    j["passed"] = rep.passed;
    j["worst_self_distance"] = rep.worst_self_distance;
    j["worst_self_index"] = rep.worst_self_index;
    j["worst_symmetry_gap"] = rep.worst_symmetry_gap;
    j["worst_symmetry_pair"] = {rep.worst_symmetry_i, rep.worst_symmetry_j};
    j["worst_triangle_slack"] = rep.worst_triangle_slack;
    j["worst_triangle"] = {rep.worst_triangle_i, rep.worst_triangle_j, rep.worst_triangle_k};
    j["worst_identification_gap"] = rep.worst_identification_gap;
    j["distance"] = rep.distance;
    emit_json(j);
  } else if (format == "csv") {
    emit("check,worst,threshold,at\n");
    emit("self," + f17(rep.worst_self_distance) + "," + f17(rep.self_tolerance) + "," +
         std::to_string(rep.worst_self_index) + "\n");
    emit("symmetry," + f17(rep.worst_symmetry_gap) + "," + f17(rep.tolerance) + "," +
         std::to_string(rep.worst_symmetry_i) + ";" +
         std::to_string(rep.worst_symmetry_j) + "\n");
    emit("triangle," + f17(rep.worst_triangle_slack) + "," + f17(-rep.tolerance) + "," +
         std::to_string(rep.worst_triangle_i) + ";" +
         std::to_string(rep.worst_triangle_j) + ";" +
         std::to_string(rep.worst_triangle_k) + "\n");
    emit("identification," + f17(rep.worst_identification_gap) + "," +
         f17(rep.tolerance) + ",\n");
  } else {
    emit("plants: " + std::to_string(rep.count) + "\n");
    emit("worst self-distance: " + f17(rep.worst_self_distance) + " (plant " +
         std::to_string(rep.worst_self_index) + ")\n");
    emit("worst symmetry gap: " + f17(rep.worst_symmetry_gap) + " (pair " +
         std::to_string(rep.worst_symmetry_i) + "," +
         std::to_string(rep.worst_symmetry_j) + ")\n");
    emit("worst triangle slack: " + f17(rep.worst_triangle_slack) + " (triple " +
         std::to_string(rep.worst_triangle_i) + "," +
         std::to_string(rep.worst_triangle_j) + "," +
         std::to_string(rep.worst_triangle_k) + ")\n");
    emit("worst identification gap: " + f17(rep.worst_identification_gap) + "\n");
    emit(std::string("passed: ") + yesno(rep.passed) + "\n");
  }
  return rep.passed ? 0 : 1;
}

// ---------------------------------------------------------------------------
// sweep

PlantModel constant_plant(double k) {
  SymMat<RationalFn> m(1, 1);
  m.at(0, 0) = RationalFn({{k, 0.0}}, {{1.0, 0.0}});
  PlantModel P;
  P.algebra = Algebra::Disk;
  P.p = 1;
  P.m = 1;
  P.body = std::move(m);
  return P;
}

PlantModel scaled_plant(const PlantModel& base, double k) {
  PlantModel P = base;
  if (auto* ss = std::get_if<StateSpace>(&P.body)) {
    ss->C *= k;
    ss->D *= k;
    return P;
  }
  if (auto* rm = std::get_if<SymMat<RationalFn>>(&P.body)) {
    for (int i = 0; i < rm->rows(); ++i)
      for (int j = 0; j < rm->cols(); ++j) {
        RationalFn& f = rm->at(i, j);
        poly::Coeffs num = f.num;
        for (Cplx& c : num) c *= k;
        f = RationalFn(std::move(num), f.den);
      }
    return P;
  }
  throw UnsupportedError("the gain family needs a state-space or rational body");
}

PlantModel zero_controller(const PlantModel& P) {
  if (P.algebra != Algebra::Disk)
    throw UnsupportedError(
        "no default controller for this algebra; pass --controller");
  SymMat<RationalFn> m(P.m, P.p);
  for (int i = 0; i < P.m; ++i)
    for (int j = 0; j < P.p; ++j) m.at(i, j) = RationalFn({{0.0, 0.0}}, {{1.0, 0.0}});
  PlantModel C;
  C.algebra = Algebra::Disk;
  C.p = P.m;
  C.m = P.p;
  C.body = std::move(m);
  return C;
}

int cmd_sweep(const std::string& base_path, const std::string& family, double from,
              double to, int steps, const std::string& controller_path,
              const RunConfig& cfg, const std::string& format) {
  if (steps < 1) throw ValidationError("sweep needs at least one step");
  const PlantModel base = load_plant(base_path);
  const PlantModel C =
      controller_path.empty() ? zero_controller(base) : load_plant(controller_path);

  struct Row {
    double param, d_nu, mu;
    NuBranch branch;
  };
  std::vector<Row> rows;
  rows.reserve(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const double k = (steps == 1) ? from : from + (to - from) * i / (steps - 1);
    const PlantModel pk = (family == "constant") ? constant_plant(k) : scaled_plant(base, k);
    const NuResult r = nu_distance(base, pk, cfg);
    const MarginResult m = stability_margin(pk, C, cfg);
    rows.push_back({k, r.value, m.mu, r.branch});
  }

  if (format == "json") {
    ordered_json j = ordered_json::array();
    for (const Row& r : rows) {
      ordered_json row;
      row["param"] = r.param;
      row["d_nu"] = r.d_nu;
      row["mu"] = r.mu;
      row["branch"] = to_string(r.branch);
      j.push_back(row);
    }
    emit_json(j);
  } else if (format == "csv") {
    emit("param,d_nu,mu,branch\n");
    for (const Row& r : rows)
      emit(f17(r.param) + "," + f17(r.d_nu) + "," + f17(r.mu) + "," +
           to_string(r.branch) + "\n");
  } else {
    emit("param      d_nu       mu         branch\n");
    for (const Row& r : rows)
      emit(f6(r.param) + "   " + f6(r.d_nu) + "   " + f6(r.mu) + "   " +
           to_string(r.branch) + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------

int run_guarded(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const UnresolvedError& e) {
    std::fprintf(stderr, "unresolved: %s\n", e.what());
    return 3;
  } catch (const NonLatticeError& e) {
    std::fprintf(stderr, "unresolved: %s\n", e.what());
    return 3;
  } catch (const NonIntegerWindingError& e) {
    std::fprintf(stderr, "unresolved: %s\n", e.what());
    return 3;
  } catch (const SyntaxError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"plant distances, loop margins, and robustness certificates"};
  app.require_subcommand(1);

  int grid = 4096;
  std::string tolname = "default";
  std::uint64_t seed = 0;
  std::string format = "human";
  bool parallel = false;
  app.add_option("--grid", grid, "evaluation grid size, a power of two in [16, 2^20]")
      ->envname("NUMETRIC_GRID");
  app.add_option("--tol", tolname, "tolerance profile: default, strict, loose");
  app.add_option("--seed", seed, "seed for random plant families");
  app.add_option("--format", format, "output format")
      ->check(CLI::IsMember({"human", "json", "csv"}));
  app.add_flag("--parallel", parallel, "sample grids on all hardware threads");

  std::string dist_p1, dist_p2;
  CLI::App* dist = app.add_subcommand("dist", "distance between two plant files");
  dist->fallthrough();
  dist->add_option("plant1", dist_p1, "first plant file")->required();
  dist->add_option("plant2", dist_p2, "second plant file")->required();

  std::string margin_p, margin_c;
  CLI::App* margin = app.add_subcommand("margin", "stability margin of a plant/controller pair");
  margin->fallthrough();
  margin->add_option("plant", margin_p, "plant file")->required();
  margin->add_option("controller", margin_c, "controller file")->required();

  std::string stab_p, stab_c;
  CLI::App* stab = app.add_subcommand("stabilizes", "does the controller stabilize the plant");
  stab->fallthrough();
  stab->add_option("plant", stab_p, "plant file")->required();
  stab->add_option("controller", stab_c, "controller file")->required();

  std::string cert_p0, cert_c, cert_p1;
  CLI::App* cert = app.add_subcommand("certify", "robust stabilization certificate");
  cert->fallthrough();
  cert->add_option("nominal", cert_p0, "nominal plant file")->required();
  cert->add_option("controller", cert_c, "controller file")->required();
  cert->add_option("perturbed", cert_p1, "perturbed plant file")->required();

  std::string ax_dir;
  int ax_random = 0;
  CLI::App* ax = app.add_subcommand("axioms", "metric axiom suite over a plant family");
  ax->fallthrough();
  ax->add_option("dir", ax_dir, "directory of plant .json files");
  ax->add_option("--random", ax_random, "size of a seeded random family instead");

  std::string sw_base, sw_family = "constant", sw_controller;
  double sw_from = 0.0, sw_to = 0.0;
  int sw_steps = 0;
  CLI::App* sw = app.add_subcommand("sweep", "parameter sweep against a nominal plant");
  sw->fallthrough();
  sw->add_option("base", sw_base, "nominal plant file")->required();
  sw->add_option("--family", sw_family, "plant family: constant (gain k) or gain (k * base)")
      ->check(CLI::IsMember({"constant", "gain"}));
  sw->add_option("--from", sw_from, "first parameter value")->required();
  sw->add_option("--to", sw_to, "last parameter value")->required();
  sw->add_option("--steps", sw_steps, "number of samples, inclusive of both ends")
      ->required();
  sw->add_option("--controller", sw_controller,
                 "controller file for the margin column (default: zero controller)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  return run_guarded([&]() -> int {
    RunConfig cfg;
    cfg.grid_size = grid;
    cfg.tol = Tolerances::profile(tolname);
    cfg.seed = seed;
    cfg.parallel = parallel;
    cfg.validate();

    if (*dist) return cmd_dist(dist_p1, dist_p2, cfg, format);
    if (*margin) return cmd_margin(margin_p, margin_c, cfg, format, false);
    if (*stab) return cmd_margin(stab_p, stab_c, cfg, format, true);
    if (*cert) return cmd_certify(cert_p0, cert_c, cert_p1, cfg, format);
    if (*ax) return cmd_axioms(ax_dir, ax_random, cfg, format);
    if (*sw)
      return cmd_sweep(sw_base, sw_family, sw_from, sw_to, sw_steps, sw_controller, cfg,
                       format);
    return 2;
  });
}
