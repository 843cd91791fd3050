#include <gtest/gtest.h>

#include <complex>
#include <string>

#include "numetric/plant_io.hpp"
#include "numetric/plants.hpp"
#include "numetric/realization.hpp"

namespace numetric {
namespace {

EvalPoint disk_point(Cplx z) {
  EvalPoint pt;
  pt.algebra = Algebra::Disk;
  pt.z = z;
  pt.theta = std::arg(z);
  return pt;
}

PlantModel scalar_rational(RationalFn f) {
  SymMat<RationalFn> m(1, 1);
  m.at(0, 0) = std::move(f);
  return PlantModel{Algebra::Disk, 1, 1, std::move(m)};
}

TEST(PlantValidation, RejectsCircleDenominatorRoot) {
  // 1/(z-1): denominator root exactly on the circle
  PlantModel P = scalar_rational(RationalFn({{1.0, 0.0}}, {{-1.0, 0.0}, {1.0, 0.0}}));
  EXPECT_THROW(validate(P), ValidationError);
}

TEST(PlantValidation, RejectsCircleEigenvalue) {
  StateSpace ss;
  ss.A = Mat::Identity(1, 1);
  ss.B = Mat::Ones(1, 1);
  ss.C = Mat::Ones(1, 1);
  ss.D = Mat::Zero(1, 1);
  PlantModel P{Algebra::Disk, 1, 1, std::move(ss)};
  EXPECT_THROW(validate(P), ValidationError);
}

TEST(PlantValidation, AcceptsPoleOutsideMargin) {
  PlantModel P = scalar_rational(RationalFn({{1.0, 0.0}}, {{-1.01, 0.0}, {1.0, 0.0}}));
  EXPECT_NO_THROW(validate(P));
}

TEST(PlantValidation, RejectsDimensionMismatch) {
  StateSpace ss;
  ss.A = Mat::Zero(2, 2);
  ss.B = Mat::Ones(1, 1);  // should be 2 x 1
  ss.C = Mat::Ones(1, 2);
  ss.D = Mat::Zero(1, 1);
  PlantModel P{Algebra::Disk, 1, 1, std::move(ss)};
  EXPECT_THROW(validate(P), ValidationError);
}

TEST(PlantValidation, RejectsAlgebraBodyMismatch) {
  PlantModel P = scalar_rational(RationalFn({{1.0, 0.0}}, {{1.0, 0.0}}));
  P.algebra = Algebra::AP;
  EXPECT_THROW(validate(P), ValidationError);
}

TEST(Evaluation, RationalIdentityFunction) {
  // P(z) = z evaluated at z = i gives i
  PlantModel P = scalar_rational(RationalFn({{0.0, 0.0}, {1.0, 0.0}}, {{1.0, 0.0}}));
  const Mat v = evaluate(P, disk_point(Cplx(0.0, 1.0)));
  EXPECT_NEAR(std::abs(v(0, 0) - Cplx(0.0, 1.0)), 0.0, 1e-15);
}

TEST(Evaluation, StateSpaceResolvent) {
  // P(z) = 1/(z - 0.5); at z = 1 the value is 2
  StateSpace ss;
  ss.A = 0.5 * Mat::Identity(1, 1);
  ss.B = Mat::Ones(1, 1);
  ss.C = Mat::Ones(1, 1);
  ss.D = Mat::Zero(1, 1);
  PlantModel P{Algebra::Disk, 1, 1, std::move(ss)};
  const Mat v = evaluate(P, disk_point(Cplx(1.0, 0.0)));
  EXPECT_NEAR(std::abs(v(0, 0) - Cplx(2.0, 0.0)), 0.0, 1e-12);
}

TEST(Evaluation, ExpQuotient) {
  ExpPolyQuotient q;
  q.p = q.m = 1;
  q.entries.emplace_back(ExpPoly({{2.0, {1.0, 0.0}}, {0.0, {1.0, 0.0}}}),
                         ExpPoly::constant({2.0, 0.0}));
  PlantModel P{Algebra::AP, 1, 1, std::move(q)};
  validate(P);
  EvalPoint pt;
  pt.algebra = Algebra::AP;
  pt.y = 0.7;
  const Cplx expected = (std::polar(1.0, 1.4) + 1.0) / 2.0;
  EXPECT_NEAR(std::abs(evaluate(P, pt)(0, 0) - expected), 0.0, 1e-15);
}

TEST(Evaluation, FactorBodyEvaluatesThroughTheQuotient) {
  // N = z, D = 1: the plant is z itself
  FactorBody fb;
  fb.p = fb.m = 1;
  SymMat<RationalFn> n(1, 1), d(1, 1), one(1, 1);
  n.at(0, 0) = RationalFn({{0.0, 0.0}, {1.0, 0.0}}, {{1.0, 0.0}});
  d.at(0, 0) = RationalFn::one();
  one.at(0, 0) = RationalFn::one();
  fb.N = SymbolicMatrix(n);
  fb.D = SymbolicMatrix(d);
  fb.Nt = SymbolicMatrix(n);
  fb.Dt = SymbolicMatrix(one);
  PlantModel P{Algebra::Disk, 1, 1, std::move(fb)};
  validate(P);
  const Cplx z = std::polar(1.0, 0.9);
  EXPECT_NEAR(std::abs(evaluate(P, disk_point(z))(0, 0) - z), 0.0, 1e-14);
}

TEST(RandomPlants, DeterministicInSeed) {
  const PlantModel a = random_plant(2, 3, 5, 42);
  const PlantModel b = random_plant(2, 3, 5, 42);
  const auto& sa = std::get<StateSpace>(a.body);
  const auto& sb = std::get<StateSpace>(b.body);
  EXPECT_EQ((sa.A - sb.A).norm(), 0.0);
  EXPECT_EQ((sa.B - sb.B).norm(), 0.0);
  EXPECT_EQ((sa.C - sb.C).norm(), 0.0);
  EXPECT_EQ((sa.D - sb.D).norm(), 0.0);
}

TEST(RandomPlants, SeedChangesTheDraw) {
  const PlantModel a = random_plant(1, 1, 3, 1);
  const PlantModel b = random_plant(1, 1, 3, 2);
  const auto& sa = std::get<StateSpace>(a.body);
  const auto& sb = std::get<StateSpace>(b.body);
  EXPECT_GT((sa.A - sb.A).norm(), 1e-6);
}

TEST(RandomPlants, EigenvaluesAvoidTheCircleAnnulus) {
  for (int seed = 0; seed < 50; ++seed) {
    const PlantModel P = random_plant(1 + seed % 2, 1 + (seed / 2) % 2, 1 + seed % 8,
                                      static_cast<std::uint64_t>(seed));
    const auto& ss = std::get<StateSpace>(P.body);
    Eigen::ComplexEigenSolver<Mat> es(ss.A, false);
    for (int i = 0; i < ss.order(); ++i) {
      const double a = std::abs(es.eigenvalues()(i));
      EXPECT_TRUE(a < 0.95 || a > 1.05) << "seed " << seed << " eigenvalue " << a;
      EXPECT_LE(a, 3.0 + 1e-9);
    }
  }
}

TEST(RandomPlants, OrderZeroHasEmptyState) {
  const PlantModel P = random_plant(2, 2, 0, 9);
  const auto& ss = std::get<StateSpace>(P.body);
  EXPECT_EQ(ss.order(), 0);
  EXPECT_EQ((evaluate(P, disk_point({1.0, 0.0})) - ss.D).norm(), 0.0);
}

TEST(RoundTrip, StateSpaceSerializeParseIsFieldExact) {
  for (int seed = 0; seed < 200; ++seed) {
    const PlantModel P = random_plant(1 + seed % 3, 1 + (seed / 3) % 3, seed % 7,
                                      1000 + static_cast<std::uint64_t>(seed));
    const std::string s1 = serialize_plant(P);
    const PlantModel Q = parse_plant(s1);
    const auto& sp = std::get<StateSpace>(P.body);
    const auto& sq = std::get<StateSpace>(Q.body);
    ASSERT_EQ(P.p, Q.p);
    ASSERT_EQ(P.m, Q.m);
    ASSERT_EQ((sp.A - sq.A).norm(), 0.0) << "seed " << seed;
    ASSERT_EQ((sp.B - sq.B).norm(), 0.0);
    ASSERT_EQ((sp.C - sq.C).norm(), 0.0);
    ASSERT_EQ((sp.D - sq.D).norm(), 0.0);
    ASSERT_EQ(s1, serialize_plant(Q)) << "seed " << seed;
  }
}

TEST(RoundTrip, RationalDocumentWithBareRealCoefficients) {
  const std::string doc = R"({
    "algebra": "disk", "kind": "rational", "p": 1, "m": 1,
    "body": {"entries": [[{"num": [0, 1], "den": [1]}]]}
  })";
  const PlantModel P = parse_plant(doc);
  EXPECT_NEAR(std::abs(evaluate(P, disk_point({0.0, 1.0}))(0, 0) - Cplx(0.0, 1.0)), 0.0,
              1e-15);
  const std::string s1 = serialize_plant(P);
  EXPECT_EQ(s1, serialize_plant(parse_plant(s1)));
}

TEST(RoundTrip, ExpPolyDocument) {
  const std::string doc = R"({
    "algebra": "ap", "kind": "exp_poly", "p": 1, "m": 1,
    "body": {"entries": [[{
      "num": [{"lambda": 1.0, "coeff": [1, 0]}],
      "den": [{"lambda": 0.0, "coeff": [2, 0]}]
    }]]}
  })";
  const PlantModel P = parse_plant(doc);
  EvalPoint pt;
  pt.algebra = Algebra::AP;
  pt.y = 0.3;
  EXPECT_NEAR(std::abs(evaluate(P, pt)(0, 0) - std::polar(0.5, 0.3)), 0.0, 1e-15);
  const std::string s1 = serialize_plant(P);
  EXPECT_EQ(s1, serialize_plant(parse_plant(s1)));
}

TEST(RoundTrip, HalfPlaneFactorDocument) {
  // Factors of 1/(s-1): N = 1/(s+r2), D = (s-1)/(s+r2) with r2 = sqrt(2);
  // |N|^2 + |D|^2 = (1 + 1 + y^2) / (2 + y^2) = 1 on the line.
  const std::string doc = R"({
    "algebra": "cd", "kind": "coprime", "p": 1, "m": 1,
    "body": {"blocks": {
      "N":  {"entries": [[{"ap": [], "l1": [{"lambda": 0, "num": [1], "den": [1.4142135623730951, 1]}]}]]},
      "D":  {"entries": [[{"ap": [{"lambda": 0, "coeff": [1, 0]}],
                           "l1": [{"lambda": 0, "num": [-2.4142135623730951], "den": [1.4142135623730951, 1]}]}]]},
      "Nt": {"entries": [[{"ap": [], "l1": [{"lambda": 0, "num": [1], "den": [1.4142135623730951, 1]}]}]]},
      "Dt": {"entries": [[{"ap": [{"lambda": 0, "coeff": [1, 0]}],
                           "l1": [{"lambda": 0, "num": [-2.4142135623730951], "den": [1.4142135623730951, 1]}]}]]}
    }}
  })";
  const PlantModel P = parse_plant(doc);
  EXPECT_EQ(P.algebra, Algebra::CD);
  EXPECT_TRUE(P.is_factors());
  RunConfig cfg;
  cfg.grid_size = 256;
  const CoprimeFactors f = materialize_factors(P, cfg);
  for (int k = 0; k < f.G.grid()->size(); ++k) {
    const Mat& g = f.G.sample(k);
    EXPECT_NEAR(std::abs((g.adjoint() * g)(0, 0) - 1.0), 0.0, 1e-12);
  }
  const std::string s1 = serialize_plant(P);
  EXPECT_EQ(s1, serialize_plant(parse_plant(s1)));
}

TEST(RoundTrip, SeveralVariableFactorDocument) {
  // N = 1/sqrt(2), D = z1 z2 / sqrt(2): normalized everywhere on the torus.
  const std::string doc = R"({
    "algebra": "polydisk", "kind": "coprime", "p": 1, "m": 1,
    "body": {"nvars": 2, "blocks": {
      "N":  {"entries": [[[{"expo": [0, 0], "coeff": [0.70710678118654746, 0]}]]]},
      "D":  {"entries": [[[{"expo": [1, 1], "coeff": [0.70710678118654746, 0]}]]]},
      "Nt": {"entries": [[[{"expo": [0, 0], "coeff": [0.70710678118654746, 0]}]]]},
      "Dt": {"entries": [[[{"expo": [1, 1], "coeff": [0.70710678118654746, 0]}]]]}
    }}
  })";
  const PlantModel P = parse_plant(doc);
  EXPECT_EQ(P.nvars(), 2);
  RunConfig cfg;
  cfg.grid_size = 64;
  const CoprimeFactors f = materialize_factors(P, cfg);
  for (int k = 0; k < f.G.grid()->size(); ++k) {
    const Mat& g = f.G.sample(k);
    EXPECT_NEAR(std::abs((g.adjoint() * g)(0, 0) - 1.0), 0.0, 1e-12);
  }
  const std::string s1 = serialize_plant(P);
  EXPECT_EQ(s1, serialize_plant(parse_plant(s1)));
}

TEST(RoundTrip, SampledFactorDocumentBindsItsGrid) {
  // Constant factors of P = 2: [N; D] = [2; 1]/sqrt(5).
  std::string doc = R"({
    "algebra": "disk", "kind": "coprime", "p": 1, "m": 1,
    "body": {"samples": {"grid_size": 16, "halfwidth": 200, )";
  const double n0 = 2.0 / std::sqrt(5.0), d0 = 1.0 / std::sqrt(5.0);
  auto rep = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string out = "[";
    for (int k = 0; k < 16; ++k) {
      if (k) out += ",";
      out += std::string("[[") + buf + "]]";
    }
    return out + "]";
  };
  doc += "\"N\": " + rep(n0) + ", \"D\": " + rep(d0) + ", \"Nt\": " + rep(n0) +
         ", \"Dt\": " + rep(d0) + "}}}";
  const PlantModel P = parse_plant(doc);
  RunConfig cfg;
  cfg.grid_size = 16;
  const CoprimeFactors f = materialize_factors(P, cfg);
  EXPECT_EQ(f.G.grid()->size(), 16);
  EXPECT_NEAR(std::abs(f.G.sample(3)(0, 0) - n0), 0.0, 1e-9);
  cfg.grid_size = 32;
  EXPECT_THROW(materialize_factors(P, cfg), ValidationError);
  const std::string s1 = serialize_plant(P);
  EXPECT_EQ(s1, serialize_plant(parse_plant(s1)));
}

TEST(ParseErrors, MalformedJsonCarriesBytePosition) {
  try {
    parse_plant("{ \"algebra\": ");
    FAIL() << "expected SyntaxError";
  } catch (const SyntaxError& e) {
    EXPECT_GT(e.position, 0u);
  }
}

TEST(ParseErrors, NegativeFrequencyIsRejected) {
  const std::string doc = R"({
    "algebra": "ap", "kind": "exp_poly", "p": 1, "m": 1,
    "body": {"entries": [[{
      "num": [{"lambda": -1.0, "coeff": [1, 0]}],
      "den": [{"lambda": 0.0, "coeff": [1, 0]}]
    }]]}
  })";
  EXPECT_THROW(parse_plant(doc), ValidationError);
}

TEST(ParseErrors, NegativeExponentIsRejected) {
  const std::string doc = R"({
    "algebra": "polydisk", "kind": "coprime", "p": 1, "m": 1,
    "body": {"nvars": 2, "blocks": {
      "N":  {"entries": [[[{"expo": [-1, 0], "coeff": [1, 0]}]]]},
      "D":  {"entries": [[[{"expo": [0, 0], "coeff": [1, 0]}]]]},
      "Nt": {"entries": [[[{"expo": [0, 0], "coeff": [1, 0]}]]]},
      "Dt": {"entries": [[[{"expo": [0, 0], "coeff": [1, 0]}]]]}
    }}
  })";
  EXPECT_THROW(parse_plant(doc), ValidationError);
}

TEST(ParseErrors, UnknownKindAndAlgebra) {
  EXPECT_THROW(
      parse_plant(R"({"algebra": "disk", "kind": "foo", "p": 1, "m": 1, "body": {}})"),
      ValidationError);
  EXPECT_THROW(
      parse_plant(R"({"algebra": "torus", "kind": "rational", "p": 1, "m": 1, "body": {}})"),
      ValidationError);
}

TEST(Realization, MobiusTransformPreservesTheTransferFunction) {
  const PlantModel P = random_plant(2, 2, 4, 7);
  const auto& ss = std::get<StateSpace>(P.body);
  const MobiusMap mob = choose_mobius(pole_spectrum(P));
  const StateSpace ws = mobius_state_space(ss, mob);
  double worst = 0.0;
  for (int k = 0; k < 32; ++k) {
    const Cplx z = std::polar(1.0, 2.0 * M_PI * k / 32.0);
    worst = std::max(worst, (ss.eval(z) - ws.eval(mob.to_w(z))).norm());
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Realization, CompanionMatchesRationalEvaluation) {
  RandomSource rng(31337);
  for (int trial = 0; trial < 20; ++trial) {
    const int deg = 1 + static_cast<int>(rng.uniform() * 6.0) % 6;
    poly::Coeffs den{Cplx(1.0, 0.0)};
    for (int i = 0; i < deg; ++i) {
      const bool inside = rng.uniform() < 0.5;
      const double r = inside ? 0.2 + 0.6 * rng.uniform() : 1.2 + 1.5 * rng.uniform();
      const Cplx root = std::polar(r, 2.0 * M_PI * rng.uniform());
      den = poly::mul(den, {-root, Cplx(1.0, 0.0)});
    }
    poly::Coeffs num(deg + 1);
    for (auto& c : num) c = rng.cnormal();
    PlantModel P = scalar_rational(RationalFn(num, den));
    validate(P);
    const MobiusMap mob = choose_mobius(pole_spectrum(P));
    const StateSpace ws = w_realization(P, mob);
    double worst = 0.0, scale = 1.0;
    for (int k = 0; k < 64; ++k) {
      const Cplx z = std::polar(1.0, (2.0 * k + 1.0) * M_PI / 64.0);
      const Cplx direct = poly::eval(num, z) / poly::eval(den, z);
      scale = std::max(scale, std::abs(direct));
      worst = std::max(worst, std::abs(direct - ws.eval(mob.to_w(z))(0, 0)));
    }
    EXPECT_LE(worst / scale, 1e-10) << "trial " << trial;
  }
}

TEST(Realization, ImproperEntriesAreRealizableAfterTheSubstitution) {
  // P(z) = [[z, 1/(z-2)], [(z^2+1)/(z-3), 2]]: z-improper entries everywhere.
  SymMat<RationalFn> m(2, 2);
  m.at(0, 0) = RationalFn({{0.0, 0.0}, {1.0, 0.0}}, {{1.0, 0.0}});
  m.at(0, 1) = RationalFn({{1.0, 0.0}}, {{-2.0, 0.0}, {1.0, 0.0}});
  m.at(1, 0) = RationalFn({{1.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}}, {{-3.0, 0.0}, {1.0, 0.0}});
  m.at(1, 1) = RationalFn({{2.0, 0.0}}, {{1.0, 0.0}});
  PlantModel P{Algebra::Disk, 2, 2, std::move(m)};
  validate(P);
  const MobiusMap mob = choose_mobius(pole_spectrum(P));
  const StateSpace ws = w_realization(P, mob);
  double worst = 0.0;
  for (int k = 0; k < 48; ++k) {
    const Cplx z = std::polar(1.0, (2.0 * k + 1.0) * M_PI / 48.0);
    worst = std::max(worst, (evaluate(P, disk_point(z)) - ws.eval(mob.to_w(z))).norm());
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Realization, BasePointAvoidsTheSpectrum) {
  // Spectrum sitting on the first default candidates pushes the choice on.
  const std::vector<Cplx> avoid{{0.0, 0.0}, {0.4, 0.0}, {-0.35, 0.0}};
  const MobiusMap mob = choose_mobius(avoid);
  for (const Cplx& s : avoid) EXPECT_GT(std::abs(mob.a - s), 0.2);
  EXPECT_LT(std::abs(mob.a), 1.0);
}

}  // namespace
}  // namespace numetric
