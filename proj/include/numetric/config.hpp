#pragma once

#include <cstdint>
#include <string>

#include "numetric/errors.hpp"

namespace numetric {

/// Tolerance profile. One knob set shared by every operation so that a run
/// is characterized by a single named profile.
struct Tolerances {
  double structural = 1e-8;       // normalization / Bezout / identity residuals
  double certificate = 1e-7;      // robustness certificate slack
  double metric_axiom = 1e-7;     // symmetry and triangle slack
  double invertibility_rel = 1e-9;   // |det| floor relative to its grid max
  double winding_integrality = 1e-6; // raw winding distance from an integer
  double average_winding_bar = 1e-3; // non-lattice estimate error bar
  double riccati = 1e-12;            // DARE convergence (relative)
  double evaluation = 1e-10;         // representation agreement

  static Tolerances profile(const std::string& name) {
    Tolerances t;
    if (name == "default") return t;
    if (name == "strict") {
      t.structural *= 0.1;
      t.certificate *= 0.1;
      t.metric_axiom *= 0.1;
      return t;
    }
    if (name == "loose") {
      t.structural *= 10;
      t.certificate *= 10;
      t.metric_axiom *= 10;
      return t;
    }
    throw ValidationError("unknown tolerance profile '" + name +
                          "' (expected default, strict, or loose)");
  }
};

/// Run-wide configuration: grid resolution, truncation radius for the
/// almost-periodic line grid, refinement budget, parallelism, seed.
struct RunConfig {
  int grid_size = 4096;            // power of two in [16, 2^20]
  double ap_halfwidth = 200.0;     // AP grid covers [-Y, Y]
  int refinement_limit = 1 << 20;  // max total points after doublings
  bool parallel = false;
  std::uint64_t seed = 0;
  Tolerances tol;

  void validate() const {
    if (grid_size < 16 || grid_size > (1 << 20) ||
        (grid_size & (grid_size - 1)) != 0) {
      throw ValidationError("grid size must be a power of two in [16, 2^20]");
    }
    if (ap_halfwidth <= 0) throw ValidationError("AP half-width must be positive");
  }
};

}  // namespace numetric
