// Closed-loop margin of a delay plant under a constant controller, the
// reciprocal law mu * ||H||_inf = 1, and a robustness certificate for a
// perturbed delay.
//
// Build:  make margin_and_certificate   (from the build directory)

#include <cstdio>

#include "numetric/numetric.hpp"
#include "numetric/plant_io.hpp"

namespace {

numetric::PlantModel rational_1x1(const char* num, const char* den) {
  std::string doc = R"({"algebra": "disk", "kind": "rational", "p": 1, "m": 1,
                        "body": {"entries": [[{"num": )";
  doc += num;
  doc += R"(, "den": )";
  doc += den;
  doc += "}]]}}";
  return numetric::parse_plant(doc);
}

}  // namespace

int main() {
  using namespace numetric;
  const RunConfig cfg;

  const PlantModel plant = rational_1x1("[1.0]", "[0.0, 1.0]");        // 1/z
  const PlantModel controller = rational_1x1("[2.0]", "[1.0]");        // 2
  const PlantModel perturbed = rational_1x1("[1.1]", "[0.0, 1.0]");    // 1.1/z

  const MarginResult m = stability_margin(plant, controller, cfg);
  std::printf("plant 1/z under controller 2:\n");
  std::printf("  stabilizes       : %s\n", m.stabilizes ? "yes" : "no");
  std::printf("  margin mu        : %.12f  (1/sqrt(10) = 0.316227766017)\n", m.mu);
  if (m.h_norm) {
    std::printf("  ||H(P, C)||_inf  : %.12f\n", *m.h_norm);
    std::printf("  mu * ||H||       : %.12f\n", m.mu * *m.h_norm);
  }

  const RobustCertificate c = certify_robust(plant, controller, perturbed, cfg);
  std::printf("\nsame controller on the perturbed plant 1.1/z:\n");
  std::printf("  distance d_nu            : %.12f\n", c.dnu);
  std::printf("  nominal margin mu0       : %.12f\n", c.mu0);
  std::printf("  guaranteed lower bound   : %.12f\n", c.predicted_margin_lower_bound);
  if (c.actual_mu1)
    std::printf("  achieved margin mu1      : %.12f\n", *c.actual_mu1);
  std::printf("  certified                : %s\n", c.certified ? "yes" : "no");
  return 0;
}
