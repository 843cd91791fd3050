// Distances between constant-gain plants, checked against the closed form
// k / sqrt(1 + k^2), plus one pair that lands on the degenerate branch.
//
// Build:  make distance_between_gains   (from the build directory)

#include <cmath>
#include <cstdio>
#include <string>

#include "numetric/numetric.hpp"
#include "numetric/plant_io.hpp"

namespace {

numetric::PlantModel gain(double k) {
  const std::string doc = R"({
    "algebra": "disk", "kind": "rational", "p": 1, "m": 1,
    "body": {"entries": [[{"num": [)" + std::to_string(k) + R"(], "den": [1.0]}]]}
  })";
  return numetric::parse_plant(doc);
}

}  // namespace

int main() {
  using namespace numetric;
  const RunConfig cfg;
  const PlantModel zero = gain(0.0);

  std::printf("distance from the zero plant to a constant gain k:\n");
  std::printf("%8s %18s %18s\n", "k", "computed", "k/sqrt(1+k^2)");
  for (const double k : {0.5, 1.0, 2.0, 5.0}) {
    const NuResult r = nu_distance(zero, gain(k), cfg);
    std::printf("%8.2f %18.12f %18.12f\n", k, r.value, k / std::sqrt(1.0 + k * k));
  }

  // A pure delay against the zero plant: the loop symbol picks up a winding,
  // so the metric branch is refused and the distance is exactly one.
  const PlantModel delay = parse_plant(R"({
    "algebra": "disk", "kind": "rational", "p": 1, "m": 1,
    "body": {"entries": [[{"num": [1.0], "den": [0.0, 1.0]}]]}
  })");
  const NuResult d = nu_distance(zero, delay, cfg);
  std::printf("\nzero vs 1/z: value = %.1f, branch = %s, index = %s\n", d.value,
              d.branch == NuBranch::Metric ? "metric" : "degenerate",
              d.index ? d.index->str().c_str() : "n/a");
  return 0;
}
