#include <gtest/gtest.h>

#include <cmath>

#include "numetric/plants.hpp"
#include "numetric/riccati.hpp"

namespace numetric {
namespace {

Mat scalar(double v) {
  Mat m(1, 1);
  m(0, 0) = v;
  return m;
}

// Scalar equation X = a^2 X + q - a^2 b^2 X^2 / (r + b^2 X) reduces to
// b^2 X^2 + (r - a^2 r - q b^2) X - q r = 0; the stabilizing root is the
// positive one. Solved here independently of the iteration under test.
double scalar_dare_oracle(double a, double b, double q, double r) {
  const double A = b * b;
  const double B = r - a * a * r - q * b * b;
  const double C = -q * r;
  return (-B + std::sqrt(B * B - 4.0 * A * C)) / (2.0 * A);
}

TEST(Dare, ScalarStablePlant) {
  DareProblem pb{scalar(0.5), scalar(1.0), scalar(1.0), scalar(1.0), scalar(0.0)};
  const DareSolution sol = solve_dare(pb);
  const double expected = scalar_dare_oracle(0.5, 1.0, 1.0, 1.0);
  EXPECT_NEAR(sol.X(0, 0).real(), expected, 1e-12);
  EXPECT_NEAR(sol.X(0, 0).imag(), 0.0, 1e-12);
  EXPECT_LT(std::abs(0.5 + sol.F(0, 0)), 1.0);  // closed loop is a contraction
  EXPECT_LE(sol.residual, 1e-12);
}

TEST(Dare, ScalarAntiStablePlant) {
  DareProblem pb{scalar(2.0), scalar(1.0), scalar(1.0), scalar(1.0), scalar(0.0)};
  const DareSolution sol = solve_dare(pb);
  // X^2 - 4X - 1 = 0 -> X = 2 + sqrt(5); closed loop 2/(3 + sqrt(5))
  EXPECT_NEAR(sol.X(0, 0).real(), 2.0 + std::sqrt(5.0), 1e-11);
  EXPECT_NEAR(std::abs(2.0 + sol.F(0, 0)), 2.0 / (3.0 + std::sqrt(5.0)), 1e-11);
}

TEST(Dare, ZeroOrderProblem) {
  DareProblem pb{Mat::Zero(0, 0), Mat::Zero(0, 2), Mat::Zero(0, 0), Mat::Identity(2, 2),
                 Mat::Zero(0, 2)};
  const DareSolution sol = solve_dare(pb);
  EXPECT_EQ(sol.X.rows(), 0);
  EXPECT_EQ(sol.F.rows(), 2);
  EXPECT_EQ(sol.F.cols(), 0);
  EXPECT_EQ(sol.residual, 0.0);
}

TEST(Dare, NormalizationFormResidualAndStability) {
  for (int seed = 0; seed < 10; ++seed) {
    RandomSource rng(7000 + static_cast<std::uint64_t>(seed));
    const int n = 2 + seed % 5, m = 1 + seed % 2, p = 1 + (seed / 2) % 2;
    auto fill = [&rng](int r, int c, double s) {
      Mat out(r, c);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) out(i, j) = s * rng.cnormal();
      return out;
    };
    const Mat A = fill(n, n, 0.9), B = fill(n, m, 1.0), C = fill(p, n, 1.0),
              D = fill(p, m, 1.0);
    DareProblem pb{A, B, C.adjoint() * C, Mat::Identity(m, m) + D.adjoint() * D,
                   C.adjoint() * D};
    const DareSolution sol = solve_dare(pb);
    EXPECT_LE(sol.residual, 1e-10) << "seed " << seed;
    EXPECT_LE((sol.X - sol.X.adjoint()).norm(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat> es(sol.X);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);  // PSD
    Eigen::ComplexEigenSolver<Mat> cles(A + B * sol.F, false);
    for (int i = 0; i < n; ++i)
      EXPECT_LT(std::abs(cles.eigenvalues()(i)), 1.0) << "seed " << seed;
  }
}

TEST(Dare, UnstabilizableProblemReportsItsHistory) {
  // a = 1 with b = 0: the mode cannot be moved, H doubles forever.
  DareProblem pb{scalar(1.0), scalar(0.0), scalar(1.0), scalar(1.0), scalar(0.0)};
  try {
    solve_dare(pb);
    FAIL() << "expected RiccatiError";
  } catch (const RiccatiError& e) {
    EXPECT_EQ(e.residual_history.size(), 500u);
    EXPECT_GT(e.residual_history.back(), 1e-3);
  }
}

TEST(Dare, RejectsInconsistentDimensions) {
  DareProblem pb{Mat::Zero(2, 2), Mat::Zero(1, 1), Mat::Zero(2, 2), Mat::Identity(1, 1),
                 Mat::Zero(2, 1)};
  EXPECT_THROW(solve_dare(pb), ValidationError);
}

TEST(InverseSqrt, SquaresBackToTheInverse) {
  RandomSource rng(99);
  Mat g(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g(i, j) = rng.cnormal();
  const Mat spd = Mat::Identity(3, 3) + g * g.adjoint();
  const Mat s = inverse_sqrt(spd);
  EXPECT_LE((s * spd * s - Mat::Identity(3, 3)).norm(), 1e-12);
  EXPECT_LE((s - s.adjoint()).norm(), 1e-13);
}

TEST(InverseSqrt, RejectsIndefiniteInput) {
  Mat m = -Mat::Identity(2, 2);
  EXPECT_THROW(inverse_sqrt(m), RiccatiError);
}

}  // namespace
}  // namespace numetric
