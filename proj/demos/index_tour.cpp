// One invertible scalar per algebra, with the index that certifies which
// component of the invertibles it sits in: a circle winding, an average
// winding per unit frequency, the (mean motion, winding) pair on the half
// plane, and a torus lattice degree.
//
// Build:  make index_tour   (from the build directory)

#include <cstdio>
#include <memory>

#include "numetric/numetric.hpp"

int main() {
  using namespace numetric;
  const RunConfig cfg;

  // Disk: (z - 0.5)(z - 2) has one root inside the circle, so winding 1.
  {
    auto grid = std::make_shared<FrequencyGrid>(FrequencyGrid::disk(cfg.grid_size));
    const MatrixFunction f =
        MatrixFunction::from_sampler(grid, 1, 1, [](const EvalPoint& pt) {
          Mat m(1, 1);
          m(0, 0) = (pt.z - 0.5) * (pt.z - 2.0);
          return m;
        });
    std::printf("disk      (z-0.5)(z-2)          winding = %ld\n",
                winding_number(f, cfg));
  }

  // Line: e^{1.5iy} + 0.25 stays near the dominant exponential, average 1.5.
  {
    const ExpPoly f({{1.5, Cplx(1.0, 0.0)}, {0.0, Cplx(0.25, 0.0)}});
    std::printf("line      e^{1.5iy} + 0.25      average = %.6f\n",
                average_winding(f, cfg));
  }

  // Half plane: e^{0.5iy} (s - 1)/(s + 2) pairs a drift with one unstable
  // zero, so the index is (0.5, 1).
  {
    const CdScalar f(ExpPoly({{0.5, Cplx(1.0, 0.0)}}),
                     {{0.5, RationalFn({Cplx(-3.0, 0.0)}, {Cplx(2.0, 0.0), Cplx(1.0, 0.0)})}});
    std::printf("halfplane e^{0.5iy}(s-1)/(s+2)  index = %s\n",
                cd_index(f, cfg).str().c_str());
  }

  // Torus: z1^2 z2 - 0.1 is dominated by its monomial, lattice degree 3.
  {
    MultiPoly f = MultiPoly::constant(2, Cplx(-0.1, 0.0));
    f.set({2, 1}, Cplx(1.0, 0.0));
    std::printf("torus     z1^2 z2 - 0.1         winding = %ld\n",
                polydisk_index(f, cfg).winding);
  }
  return 0;
}
