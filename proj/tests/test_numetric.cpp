#include "numetric/numetric.hpp"

#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "numetric/plant_io.hpp"

namespace numetric {
namespace {

const double kInvSqrt2 = 0.70710678118654746;

PlantModel scalar_rational(const RationalFn& f) {
  SymMat<RationalFn> m(1, 1);
  m.at(0, 0) = f;
  PlantModel P;
  P.algebra = Algebra::Disk;
  P.p = 1;
  P.m = 1;
  P.body = std::move(m);
  return P;
}

PlantModel constant_gain(double k) {
  return scalar_rational(RationalFn({{k, 0.0}}, {{1.0, 0.0}}));
}

// k / z: one pole inside the disk, so the plant is unstable under the
// poles-outside convention used everywhere in this library.
PlantModel scaled_delay_inverse(double k) {
  return scalar_rational(RationalFn({{k, 0.0}}, {{0.0, 0.0}, {1.0, 0.0}}));
}

PlantModel ap_factor_plant(const ExpPoly& n, const ExpPoly& d) {
  FactorBody b;
  b.p = 1;
  b.m = 1;
  SymMat<ExpPoly> nn(1, 1), dd(1, 1);
  nn.at(0, 0) = n;
  dd.at(0, 0) = d;
  b.N = SymbolicMatrix(nn);
  b.D = SymbolicMatrix(dd);
  b.Nt = SymbolicMatrix(nn);
  b.Dt = SymbolicMatrix(dd);
  PlantModel P;
  P.algebra = Algebra::AP;
  P.p = 1;
  P.m = 1;
  P.body = std::move(b);
  return P;
}

PlantModel cd_factor_plant(const CdScalar& n, const CdScalar& d) {
  FactorBody b;
  b.p = 1;
  b.m = 1;
  SymMat<CdScalar> nn(1, 1), dd(1, 1);
  nn.at(0, 0) = n;
  dd.at(0, 0) = d;
  b.N = SymbolicMatrix(nn);
  b.D = SymbolicMatrix(dd);
  b.Nt = SymbolicMatrix(nn);
  b.Dt = SymbolicMatrix(dd);
  PlantModel P;
  P.algebra = Algebra::CD;
  P.p = 1;
  P.m = 1;
  P.body = std::move(b);
  return P;
}

PlantModel polydisk_factor_plant(const MultiPoly& n, const MultiPoly& d) {
  FactorBody b;
  b.p = 1;
  b.m = 1;
  b.nvars = n.nvars();
  SymMat<MultiPoly> nn(1, 1, MultiPoly(n.nvars())), dd(1, 1, MultiPoly(n.nvars()));
  nn.at(0, 0) = n;
  dd.at(0, 0) = d;
  b.N = SymbolicMatrix(nn);
  b.D = SymbolicMatrix(dd);
  b.Nt = SymbolicMatrix(nn);
  b.Dt = SymbolicMatrix(dd);
  PlantModel P;
  P.algebra = Algebra::Polydisk;
  P.p = 1;
  P.m = 1;
  P.body = std::move(b);
  return P;
}

MultiPoly mono2(std::vector<int> expo, Cplx c) {
  MultiPoly f(2);
  f.set(std::move(expo), c);
  return f;
}

TEST(Distance, GainFamilyMatchesTheClosedForm) {
  RunConfig cfg;
  const PlantModel zero = constant_gain(0.0);
  const double ks[] = {0.5, 1.0, 2.0, 5.0};
  const double expected[] = {0.44721359549995793, 0.70710678118654746,
                             0.89442719099991586, 0.98058067569092022};
  for (int i = 0; i < 4; ++i) {
    const NuResult r = nu_distance(zero, constant_gain(ks[i]), cfg);
    EXPECT_EQ(r.branch, NuBranch::Metric);
    EXPECT_TRUE(r.det_invertible);
    EXPECT_TRUE(r.winding_condition_met);
    ASSERT_TRUE(r.index.has_value());
    EXPECT_TRUE(r.index->trivial());
    EXPECT_NEAR(r.value, expected[i], 1e-6);
  }
}

TEST(Distance, UnstablePlantAgainstZeroIsDegenerate) {
  RunConfig cfg;
  const NuResult r = nu_distance(constant_gain(0.0), scaled_delay_inverse(1.0), cfg);
  EXPECT_EQ(r.branch, NuBranch::DegenerateOne);
  EXPECT_EQ(r.value, 1.0);
  EXPECT_TRUE(r.det_invertible);
  EXPECT_FALSE(r.winding_condition_met);
  ASSERT_TRUE(r.index.has_value());
  EXPECT_EQ(r.index->winding, -1);
}

TEST(Distance, NeighboringDelaysStayOnTheMetricBranch) {
  RunConfig cfg;
  const PlantModel a = scaled_delay_inverse(1.0);
  const PlantModel b = scaled_delay_inverse(1.1);
  const NuResult ab = nu_distance(a, b, cfg);
  EXPECT_EQ(ab.branch, NuBranch::Metric);
  EXPECT_NEAR(ab.value, 0.047565149415449412, 1e-6);

  const NuResult ba = nu_distance(b, a, cfg);
  EXPECT_NEAR(ab.value, ba.value, 1e-8);

  RunConfig par = cfg;
  par.parallel = true;
  const NuResult abp = nu_distance(a, b, par);
  EXPECT_EQ(ab.value, abp.value);
}

TEST(Distance, UnitaryFactorMultiplesDescribeTheSamePlant) {
  // Two explicit factor bodies for P(z) = z differing by a constant unitary
  // right multiple. Distances from either description agree, and the two
  // descriptions are at distance zero from each other.
  RunConfig cfg;
  const Cplx u = std::exp(Cplx(0.0, M_PI / 7.0));
  auto body = [](Cplx phase) {
    FactorBody b;
    b.p = 1;
    b.m = 1;
    SymMat<RationalFn> n(1, 1), d(1, 1), nt(1, 1), dt(1, 1);
    n.at(0, 0) = RationalFn({{0.0, 0.0}, phase * kInvSqrt2}, {{1.0, 0.0}});
    d.at(0, 0) = RationalFn({phase * kInvSqrt2}, {{1.0, 0.0}});
    nt.at(0, 0) = RationalFn({{0.0, 0.0}, {kInvSqrt2, 0.0}}, {{1.0, 0.0}});
    dt.at(0, 0) = RationalFn({{kInvSqrt2, 0.0}}, {{1.0, 0.0}});
    b.N = SymbolicMatrix(n);
    b.D = SymbolicMatrix(d);
    b.Nt = SymbolicMatrix(nt);
    b.Dt = SymbolicMatrix(dt);
    PlantModel P;
    P.algebra = Algebra::Disk;
    P.p = 1;
    P.m = 1;
    P.body = std::move(b);
    return P;
  };
  const PlantModel pa = body(Cplx(1.0, 0.0));
  const PlantModel pb = body(u);
  const PlantModel q = constant_gain(0.5);

  const double da = nu_distance(pa, q, cfg).value;
  const double db = nu_distance(pb, q, cfg).value;
  EXPECT_NEAR(da, 0.94868329805051377, 1e-6);
  EXPECT_NEAR(da, db, 1e-9);

  const NuResult same = nu_distance(pa, pb, cfg);
  EXPECT_EQ(same.branch, NuBranch::Metric);
  EXPECT_LE(same.value, 1e-12);
}

TEST(Margin, HandComputedLoops) {
  RunConfig cfg;
  {
    const MarginResult r = stability_margin(constant_gain(1.0), constant_gain(0.0), cfg);
    EXPECT_TRUE(r.stabilizes);
    EXPECT_NEAR(r.mu, kInvSqrt2, 1e-6);
    ASSERT_TRUE(r.h_norm.has_value());
    EXPECT_NEAR(*r.h_norm, std::sqrt(2.0), 1e-5);
  }
  {
    const MarginResult r =
        stability_margin(scaled_delay_inverse(1.0), constant_gain(2.0), cfg);
    EXPECT_TRUE(r.stabilizes);
    EXPECT_NEAR(r.mu, 0.31622776601683794, 1e-6);
  }
  {
    const MarginResult r =
        stability_margin(scaled_delay_inverse(1.1), constant_gain(2.0), cfg);
    EXPECT_TRUE(r.stabilizes);
    EXPECT_NEAR(r.mu, 0.36099410255771208, 1e-6);
  }
  {
    // The zero controller leaves the unstable pole in the loop: the symbol
    // is invertible pointwise but carries winding 1, so nothing stabilizes.
    const MarginResult r =
        stability_margin(scaled_delay_inverse(1.0), constant_gain(0.0), cfg);
    EXPECT_FALSE(r.stabilizes);
    EXPECT_EQ(r.mu, 0.0);
    EXPECT_FALSE(r.h_norm.has_value());
    EXPECT_TRUE(r.det_invertible);
    ASSERT_TRUE(r.index_check.has_value());
    EXPECT_EQ(r.index_check->winding, 1);
  }
}

TEST(Margin, SymmetricAndReciprocalOnRandomPairs) {
  RunConfig cfg;
  cfg.grid_size = 512;
  int stabilizing = 0;
  for (std::uint64_t seed = 1; seed <= 24; ++seed) {
    const PlantModel P = random_plant(1, 1, 2 + static_cast<int>(seed % 3), seed);
    const PlantModel C = random_plant(1, 1, 1 + static_cast<int>(seed % 2), seed + 100);
    const MarginResult pc = stability_margin(P, C, cfg);
    const MarginResult cp = stability_margin(C, P, cfg);
    EXPECT_EQ(pc.stabilizes, cp.stabilizes) << "seed " << seed;
    EXPECT_NEAR(pc.mu, cp.mu, 1e-8) << "seed " << seed;
    EXPECT_LE(pc.mu, 1.0 + 1e-9);
    if (pc.stabilizes) {
      ++stabilizing;
      ASSERT_TRUE(pc.h_norm.has_value());
      EXPECT_NEAR(pc.mu * *pc.h_norm, 1.0, 1e-6) << "seed " << seed;
    }
  }
  EXPECT_GE(stabilizing, 3);
}

TEST(ClosedLoop, MatchesHandComputedResponses) {
  RunConfig cfg;
  cfg.grid_size = 256;
  {
    const MatrixFunction H =
        closed_loop(scaled_delay_inverse(1.0), constant_gain(2.0), cfg);
    for (int k = 0; k < H.grid()->size(); ++k) {
      const Cplx z = H.grid()->point(k).z;
      Mat expected(2, 2);
      expected << -2.0, 1.0, -2.0 * z, z;
      expected /= (z - 2.0);
      EXPECT_LE((H.sample(k) - expected).norm(), 1e-8);
    }
  }
  {
    const MatrixFunction H = closed_loop(constant_gain(1.0), constant_gain(0.0), cfg);
    Mat expected(2, 2);
    expected << 0.0, 1.0, 0.0, 1.0;
    for (int k = 0; k < H.grid()->size(); ++k)
      EXPECT_LE((H.sample(k) - expected).norm(), 1e-10);
  }
  {
    const MatrixFunction H = closed_loop(constant_gain(0.0), constant_gain(0.0), cfg);
    Mat expected(2, 2);
    expected << 0.0, 0.0, 0.0, 1.0;
    for (int k = 0; k < H.grid()->size(); ++k)
      EXPECT_LE((H.sample(k) - expected).norm(), 1e-10);
  }
}

TEST(ClosedLoop, VanishingLoopSymbolIsRefused) {
  RunConfig cfg;
  cfg.grid_size = 256;
  // Unity feedback around a unity plant: I - CP vanishes identically.
  EXPECT_THROW(closed_loop(constant_gain(1.0), constant_gain(1.0), cfg),
               SingularLoopError);
  const MarginResult r = stability_margin(constant_gain(1.0), constant_gain(1.0), cfg);
  EXPECT_FALSE(r.det_invertible);
  EXPECT_FALSE(r.stabilizes);
  EXPECT_EQ(r.mu, 0.0);
  EXPECT_FALSE(r.index_check.has_value());
}

TEST(Certificate, TripleMatchesTheArcsineRule) {
  RunConfig cfg;
  const RobustCertificate cert = certify_robust(
      scaled_delay_inverse(1.0), constant_gain(2.0), scaled_delay_inverse(1.1), cfg);
  EXPECT_TRUE(cert.certified);
  EXPECT_NEAR(cert.mu0, 0.31622776601683794, 1e-6);
  EXPECT_NEAR(cert.dnu, 0.047565149415449412, 1e-6);
  EXPECT_NEAR(cert.predicted_margin_lower_bound, 0.27074557691828405, 1e-5);
  ASSERT_TRUE(cert.actual_mu1.has_value());
  EXPECT_NEAR(*cert.actual_mu1, 0.36099410255771208, 1e-6);
  EXPECT_GE(*cert.actual_mu1, cert.predicted_margin_lower_bound - 1e-7);
}

TEST(Certificate, DeniedWhenTheDistanceIsTooLarge) {
  RunConfig cfg;
  // The zero controller holds margin 1 on the zero plant, but the inverse
  // delay sits at the maximal distance 1, so nothing can be certified.
  const RobustCertificate cert = certify_robust(
      constant_gain(0.0), constant_gain(0.0), scaled_delay_inverse(1.0), cfg);
  EXPECT_FALSE(cert.certified);
  EXPECT_NEAR(cert.mu0, 1.0, 1e-9);
  EXPECT_EQ(cert.dnu, 1.0);
  EXPECT_EQ(cert.predicted_margin_lower_bound, 0.0);
  EXPECT_FALSE(cert.actual_mu1.has_value());
}

TEST(Axioms, SeededFamilyPassesAndReportsDeterministically) {
  RunConfig cfg;
  cfg.grid_size = 512;
  std::vector<PlantModel> plants;
  for (std::uint64_t seed = 1; seed <= 6; ++seed)
    plants.push_back(random_plant(1, 1, 1 + static_cast<int>(seed % 3), seed));

  const AxiomReport rep = metric_axiom_suite(plants, 1e-7, cfg);
  EXPECT_TRUE(rep.passed);
  EXPECT_EQ(rep.count, 6);
  EXPECT_LE(rep.worst_self_distance, 1e-9);
  EXPECT_LE(rep.worst_symmetry_gap, 1e-7);
  EXPECT_GE(rep.worst_triangle_slack, -1e-7);

  const AxiomReport again = metric_axiom_suite(plants, 1e-7, cfg);
  EXPECT_EQ(rep.distance, again.distance);
  EXPECT_EQ(rep.worst_triangle_i, again.worst_triangle_i);
  EXPECT_EQ(rep.worst_triangle_j, again.worst_triangle_j);
  EXPECT_EQ(rep.worst_triangle_k, again.worst_triangle_k);
}

TEST(Axioms, NeedsAtLeastThreePlants) {
  std::vector<PlantModel> two = {constant_gain(0.0), constant_gain(1.0)};
  EXPECT_THROW(metric_axiom_suite(two, 1e-7, {}), ValidationError);
}

TEST(LineAlgebra, DistancesAndMargins) {
  RunConfig cfg;
  cfg.grid_size = 512;
  const PlantModel zero =
      ap_factor_plant(ExpPoly(), ExpPoly::constant(1.0));
  // P = e^{1.5 iy}: unimodular and stable, so N = P/sqrt(2), D = 1/sqrt(2).
  const PlantModel shifted = ap_factor_plant(ExpPoly({{1.5, Cplx(kInvSqrt2, 0.0)}}),
                                             ExpPoly::constant(kInvSqrt2));
  const NuResult metric = nu_distance(zero, shifted, cfg);
  EXPECT_EQ(metric.branch, NuBranch::Metric);
  EXPECT_NEAR(metric.value, kInvSqrt2, 1e-9);

  // P = e^{-1.5 iy} factors as N = 1/sqrt(2), D = e^{1.5 iy}/sqrt(2); the
  // graph symbol against the zero plant carries average winding -1.5.
  const PlantModel advanced = ap_factor_plant(ExpPoly::constant(kInvSqrt2),
                                              ExpPoly({{1.5, Cplx(kInvSqrt2, 0.0)}}));
  const NuResult degen = nu_distance(zero, advanced, cfg);
  EXPECT_EQ(degen.branch, NuBranch::DegenerateOne);
  EXPECT_EQ(degen.value, 1.0);
  ASSERT_TRUE(degen.index.has_value());
  EXPECT_NEAR(degen.index->average, -1.5, 1e-6);

  const MarginResult m = stability_margin(shifted, zero, cfg);
  EXPECT_TRUE(m.stabilizes);
  EXPECT_NEAR(m.mu, kInvSqrt2, 1e-9);
  ASSERT_TRUE(m.h_norm.has_value());
  EXPECT_NEAR(m.mu * *m.h_norm, 1.0, 1e-6);
}

TEST(HalfPlaneAlgebra, StableAndUnstableNeighborsOfZero) {
  RunConfig cfg;
  cfg.grid_size = 1024;
  const double s2 = std::sqrt(2.0);
  const PlantModel zero = cd_factor_plant(
      CdScalar(), CdScalar::from_ap(ExpPoly::constant(1.0)));

  // 1/(s+1): N = 1/(s+sqrt(2)), D = (s+1)/(s+sqrt(2)).
  const PlantModel stable = cd_factor_plant(
      CdScalar(ExpPoly(), {{0.0, RationalFn({{1.0, 0.0}}, {{s2, 0.0}, {1.0, 0.0}})}}),
      CdScalar(ExpPoly::constant(1.0),
               {{0.0, RationalFn({{1.0 - s2, 0.0}}, {{s2, 0.0}, {1.0, 0.0}})}}));
  const NuResult metric = nu_distance(zero, stable, cfg);
  EXPECT_EQ(metric.branch, NuBranch::Metric);
  EXPECT_NEAR(metric.value, kInvSqrt2, 1e-6);

  // 1/(s-1): D = (s-1)/(s+sqrt(2)) puts one zero in the right half plane,
  // so the graph symbol against zero winds once and the distance is 1.
  const PlantModel unstable = cd_factor_plant(
      CdScalar(ExpPoly(), {{0.0, RationalFn({{1.0, 0.0}}, {{s2, 0.0}, {1.0, 0.0}})}}),
      CdScalar(ExpPoly::constant(1.0),
               {{0.0, RationalFn({{-1.0 - s2, 0.0}}, {{s2, 0.0}, {1.0, 0.0}})}}));
  const NuResult degen = nu_distance(zero, unstable, cfg);
  EXPECT_EQ(degen.branch, NuBranch::DegenerateOne);
  EXPECT_EQ(degen.value, 1.0);
  ASSERT_TRUE(degen.index.has_value());
  EXPECT_EQ(degen.index->winding, -1);
  EXPECT_NEAR(degen.index->average, 0.0, 1e-9);
}

TEST(SeveralVariables, MonomialNeighborsOfZero) {
  RunConfig cfg;
  const PlantModel zero =
      polydisk_factor_plant(MultiPoly(2), mono2({0, 0}, 1.0));
  const PlantModel stable = polydisk_factor_plant(mono2({1, 1}, kInvSqrt2),
                                                  mono2({0, 0}, kInvSqrt2));
  const NuResult metric = nu_distance(zero, stable, cfg);
  EXPECT_EQ(metric.branch, NuBranch::Metric);
  EXPECT_NEAR(metric.value, kInvSqrt2, 1e-9);

  const PlantModel unstable = polydisk_factor_plant(mono2({0, 0}, kInvSqrt2),
                                                    mono2({1, 1}, kInvSqrt2));
  const NuResult degen = nu_distance(zero, unstable, cfg);
  EXPECT_EQ(degen.branch, NuBranch::DegenerateOne);
  EXPECT_EQ(degen.value, 1.0);
  ASSERT_TRUE(degen.index.has_value());
  EXPECT_EQ(degen.index->winding, -2);
}

TEST(Validation, MismatchedOrUnnormalizedInputsAreRejected) {
  RunConfig cfg;
  const PlantModel disk = constant_gain(0.0);
  const PlantModel ap = ap_factor_plant(ExpPoly(), ExpPoly::constant(1.0));
  EXPECT_THROW(nu_distance(disk, ap, cfg), ValidationError);

  // A factor body that is coprime but not normalized: N = D = 1.
  FactorBody b;
  b.p = 1;
  b.m = 1;
  SymMat<RationalFn> one(1, 1);
  one.at(0, 0) = RationalFn({{1.0, 0.0}}, {{1.0, 0.0}});
  b.N = SymbolicMatrix(one);
  b.D = SymbolicMatrix(one);
  b.Nt = SymbolicMatrix(one);
  b.Dt = SymbolicMatrix(one);
  PlantModel raw;
  raw.algebra = Algebra::Disk;
  raw.p = 1;
  raw.m = 1;
  raw.body = std::move(b);
  EXPECT_THROW(nu_distance(raw, disk, cfg), ValidationError);

  PlantModel wide = random_plant(1, 2, 2, 7);
  EXPECT_THROW(nu_distance(disk, wide, cfg), ValidationError);
  EXPECT_THROW(stability_margin(wide, wide, cfg), ValidationError);
}

}  // namespace
}  // namespace numetric
