#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "sgtomo/estimator.hpp"
#include "sgtomo/experiment.hpp"
#include "sgtomo/grid_oracle.hpp"
#include "test_support.hpp"

using namespace sgtomo;
using sgtomo::testing::axes;
using sgtomo::testing::Gen;
using sgtomo::testing::noiseless_records;
using sgtomo::testing::records_from_counts;
using sgtomo::testing::settings_for;

namespace {

std::vector<MeasurementRecord> random_instance(Gen& gen, std::size_t m, std::int64_t n,
                                               double radius) {
  const Polarization r(gen.in_ball(radius));
  return simulate_campaign(r, settings_for(gen.directions(m), n), RngSeed{gen.seed()});
}

// Likelihood evaluated as a plain product, independent of the library's sums.
double direct_product_log(const Vec3& r, const std::vector<MeasurementRecord>& recs) {
  double prod = 1.0;
  for (const auto& rec : recs) {
    const double u = rec.direction().dot(r);
    prod *= std::pow(1.0 + u, 0.5 * rec.total() * (1.0 + rec.x)) *
            std::pow(1.0 - u, 0.5 * rec.total() * (1.0 - rec.x));
  }
  return std::log(prod);
}

// Distance of v from span{a^j}.
double off_span(const Vec3& v, const std::vector<MeasurementRecord>& recs) {
  Eigen::MatrixXd basis(3, static_cast<Eigen::Index>(recs.size()));
  for (std::size_t j = 0; j < recs.size(); ++j) {
    basis.col(static_cast<Eigen::Index>(j)) = recs[j].direction().vec();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis, Eigen::ComputeThinU);
  svd.setThreshold(1e-10);
  const auto u = svd.matrixU().leftCols(svd.rank());
  return (v - u * (u.transpose() * v)).norm();
}

} // namespace

// ---------------------------------------------------------------- linear inversion

TEST(LinearInversion, BalancedCounts) {
  const auto recs = records_from_counts(axes(), {15, 15, 15}, 20);
  const auto lin = linear_inversion(recs);
  EXPECT_LT((lin.r - Vec3(0.5, 0.5, 0.5)).norm(), 1e-15);
  EXPECT_FALSE(lin.out_of_ball);
  EXPECT_NEAR(lin.r.norm(), 0.8660254037844386, 1e-15);
}

TEST(LinearInversion, SaturatedCountsLeaveTheBall) {
  const auto recs = records_from_counts(axes(), {20, 20, 20}, 20);
  const auto lin = linear_inversion(recs);
  EXPECT_EQ(lin.r, Vec3(1, 1, 1));
  EXPECT_TRUE(lin.out_of_ball);
  EXPECT_NEAR(lin.r.norm(), std::sqrt(3.0), 1e-15);
}

TEST(LinearInversion, NoiselessIsExact) {
  const auto recs = noiseless_records(axes(), Vec3(0.3, -0.2, 0.5), 20);
  EXPECT_LT((linear_inversion(recs).r - Vec3(0.3, -0.2, 0.5)).norm(), 1e-15);
}

TEST(LinearInversion, RotatedFrame) {
  const std::vector<Direction> frame{Direction(1, 1, 0), Direction(1, -1, 0), Direction(0, 0, 1)};
  const Vec3 r(0.1, 0.4, -0.2);
  std::vector<MeasurementRecord> recs;
  // N = 10^6 with rounding: exact inversion within the count granularity.
  for (const auto& rec : noiseless_records(frame, r, 1'000'000)) recs.push_back(rec);
  EXPECT_LT((linear_inversion(recs).r - r).norm(), 2e-6);
}

TEST(LinearInversion, InvalidFrames) {
  const auto two = records_from_counts({Direction(1, 0, 0), Direction(0, 1, 0)}, {5, 5}, 10);
  EXPECT_THROW(linear_inversion(two), InvalidFrame);
  const auto skew = records_from_counts(
      {Direction(1, 0, 0), Direction(1, 1, 0), Direction(0, 0, 1)}, {5, 5, 5}, 10);
  EXPECT_THROW(linear_inversion(skew), InvalidFrame);
}

// ---------------------------------------------------------------- likelihood

TEST(LogLikelihood, OriginValues) {
  const auto recs = records_from_counts(default_directions(), {17, 18, 12, 15, 16}, 20);
  EXPECT_EQ(log_likelihood(Polarization(), recs), 0.0);
  EXPECT_NEAR(log_probability(Polarization(), recs), -100.0 * std::numbers::ln2, 1e-12);
}

TEST(LogLikelihood, SingleSettingFrozenValue) {
  const auto recs = records_from_counts({Direction(0, 0, 1)}, {14}, 20);
  ASSERT_DOUBLE_EQ(recs[0].x, 0.4);
  // 20 (0.7 ln 1.4 + 0.3 ln 0.6), evaluated independently.
  const double expected = 1.6456575701010356;
  EXPECT_NEAR(log_likelihood(Polarization(0, 0, 0.4), recs), expected, 1e-13);
  EXPECT_NEAR(direct_product_log(Vec3(0, 0, 0.4), recs), expected, 1e-13);
}

TEST(LogLikelihood, AgreesWithDirectProduct) {
  Gen gen(71);
  for (int t = 0; t < 50; ++t) {
    const auto recs = random_instance(gen, 4, 10, 0.9);
    const Vec3 r = gen.in_ball(0.95);
    EXPECT_NEAR(log_likelihood(Polarization(r), recs), direct_product_log(r, recs), 1e-10);
  }
}

TEST(LogLikelihood, PureStateConventions) {
  const auto balanced = records_from_counts({Direction(0, 0, 1)}, {10}, 20);
  EXPECT_EQ(log_likelihood(Polarization(0, 0, 1), balanced),
            -std::numeric_limits<double>::infinity());
  const auto aligned = records_from_counts({Direction(0, 0, 1)}, {20}, 20);
  EXPECT_NEAR(log_likelihood(Polarization(0, 0, 1), aligned), 20.0 * std::numbers::ln2, 1e-13);
}

TEST(LogLikelihood, ConsistentStateIsTheGridMaximum) {
  const Vec3 truth(0.3, -0.2, 0.5);
  const auto recs = noiseless_records(axes(), truth, 20);
  const double best = log_likelihood(Polarization(truth), recs);
  const double h = 0.05;
  for (int i = -20; i <= 20; ++i) {
    for (int j = -20; j <= 20; ++j) {
      for (int k = -20; k <= 20; ++k) {
        Vec3 p(i * h, j * h, k * h);
        if (p.norm() > 1.0) p.normalize();
        EXPECT_LE(log_likelihood(Polarization(p), recs), best + 1e-12);
      }
    }
  }
}

TEST(LogLikelihood, IncrementMatchesDifference) {
  Gen gen(72);
  for (int t = 0; t < 50; ++t) {
    const auto recs = random_instance(gen, 5, 20, 0.9);
    const Vec3 a = gen.in_ball(0.9);
    const Vec3 b = gen.in_ball(0.9);
    const double diff =
        log_likelihood(Polarization(b), recs) - log_likelihood(Polarization(a), recs);
    EXPECT_NEAR(log_likelihood_increment(a, b, recs), diff, 1e-10);
  }
}

// ---------------------------------------------------------------- R and K

TEST(RK, AtOrigin) {
  const auto recs = records_from_counts(default_directions(), {17, 18, 12, 15, 16}, 20);
  EXPECT_NEAR(compute_R(Vec3::Zero(), recs), 1.0, 1e-15);
  Vec3 expected = Vec3::Zero();
  for (const auto& r : recs) expected += r.x * r.direction().vec();
  expected /= 5.0;
  EXPECT_LT((compute_K(Vec3::Zero(), recs) - expected).norm(), 1e-15);
}

TEST(RK, SimplifiedFormsAgree) {
  Gen gen(73);
  for (int t = 0; t < 100; ++t) {
    const auto recs = random_instance(gen, 5, 20, 0.9);
    const Vec3 r = gen.in_ball(0.9);
    double r_simple = 0.0;
    Vec3 k_simple = Vec3::Zero();
    for (const auto& rec : recs) {
      const double u = rec.direction().dot(r);
      r_simple += (1.0 - u * rec.x) / (1.0 - u * u);
      k_simple += (rec.x - u) / (1.0 - u * u) * rec.direction().vec();
    }
    r_simple /= 5.0;
    k_simple /= 5.0;
    EXPECT_NEAR(compute_R(r, recs), r_simple, 1e-13);
    EXPECT_LT((compute_K(r, recs) - k_simple).norm(), 1e-13);
  }
}

TEST(RK, RIsOneMinusRDotK) {
  Gen gen(74);
  for (int t = 0; t < 100; ++t) {
    const auto recs = random_instance(gen, 5, 20, 0.9);
    const Vec3 r = gen.in_ball(0.95);
    EXPECT_NEAR(compute_R(r, recs), 1.0 - r.dot(compute_K(r, recs)), 1e-13);
  }
}

TEST(RK, SingularDenominator) {
  const auto recs = records_from_counts({Direction(0, 0, 1)}, {14}, 20);
  EXPECT_THROW(compute_R(Vec3(0, 0, 1), recs), SingularDenominator);
  EXPECT_THROW(compute_K(Vec3(0, 0, -1), recs), SingularDenominator);
  EXPECT_THROW(gradient_residual(Vec3(0, 0, 1), recs), SingularDenominator);
}

TEST(GradientResidual, EqualsMTimesK) {
  Gen gen(75);
  for (int t = 0; t < 100; ++t) {
    const auto recs = random_instance(gen, 5, 20, 0.9);
    const Vec3 r = gen.in_ball(0.95);
    EXPECT_LT((gradient_residual(r, recs) - 5.0 * compute_K(r, recs)).norm(), 1e-13);
  }
}

TEST(GradientResidual, MatchesFiniteDifferences) {
  Gen gen(76);
  const double h = 1e-6;
  for (int inst = 0; inst < 5; ++inst) {
    const auto recs = random_instance(gen, 5, 20, 0.9);
    for (int t = 0; t < 10; ++t) {
      const Vec3 r = gen.in_ball(0.8);
      Vec3 fd;
      for (int i = 0; i < 3; ++i) {
        Vec3 e = Vec3::Zero();
        e[i] = h;
        fd[i] = (log_likelihood(Polarization(r + e), recs) -
                 log_likelihood(Polarization(r - e), recs)) /
                (2.0 * h);
      }
      const Vec3 analytic = 20.0 * gradient_residual(r, recs);
      EXPECT_LT((fd - analytic).norm() / analytic.norm(), 1e-5);
    }
  }
}

// ---------------------------------------------------------------- fixed point

TEST(FixedPoint, SingleSettingOneStep) {
  const auto recs = records_from_counts({Direction(0, 0, 1)}, {14}, 20);
  const auto res = maxlik_fixed_point(recs);
  EXPECT_TRUE(res.converged);
  EXPECT_FALSE(res.boundary);
  EXPECT_EQ(res.iterations, 1);
  EXPECT_LT((res.r_est.vec() - Vec3(0, 0, 0.4)).norm(), 1e-15);
  EXPECT_NEAR(res.r_value, 1.0, 1e-15);
}

TEST(FixedPoint, NoiselessThreeAxes) {
  const Vec3 truth(0.3, -0.2, 0.5);
  const auto recs = noiseless_records(axes(), truth, 20);
  const auto res = maxlik_fixed_point(recs);
  EXPECT_TRUE(res.converged);
  EXPECT_LE(res.iterations, 200);
  EXPECT_LT((res.r_est.vec() - truth).norm(), 1e-8);
  EXPECT_LT((res.r_est.vec() - linear_inversion(recs).r).norm(), 1e-8);
  EXPECT_LE(res.k_residual, 1e-10);
}

TEST(FixedPoint, OriginIsAFixedPointForZeroFrequencies) {
  const auto recs = records_from_counts(default_directions(), {10, 10, 10, 10, 10}, 20);
  const auto res = maxlik_fixed_point(recs);
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.iterations, 0);
  EXPECT_EQ(res.r_est.vec(), Vec3::Zero());
}

TEST(FixedPoint, SaturatedCountsGiveBoundarySolution) {
  const auto recs = records_from_counts(axes(), {20, 20, 20}, 20);
  SolverOptions opts;
  opts.keep_trace = true;
  const auto res = maxlik_fixed_point(recs, opts);
  EXPECT_TRUE(res.converged);
  EXPECT_TRUE(res.boundary);
  EXPECT_LE(res.r_est.norm(), 1.0);
  EXPECT_GE(res.r_est.norm(), 1.0 - 2.0 * opts.ball_margin);
  EXPECT_LT((res.r_est.vec().normalized() - Vec3(1, 1, 1).normalized()).norm(), 1e-6);
  for (double g : res.trace.increments) EXPECT_GE(g, 0.0);
}

TEST(FixedPoint, AgreesWithGridOracleOnFiveAnalyzerData) {
  const auto recs = simulate_campaign(Polarization(0, 0, 1),
                                      settings_for(default_directions(), 20), RngSeed{20240611});
  const auto res = maxlik_fixed_point(recs);
  const auto g = grid_oracle(recs, 0.02);
  EXPECT_TRUE(res.converged);
  EXPECT_LE((res.r_est.vec() - g.r).norm(), 0.04);
  EXPECT_GE(res.log_likelihood, g.log_likelihood - 1e-9);
}

TEST(FixedPoint, EmptyRecordsRejected) {
  EXPECT_THROW(maxlik_fixed_point({}), ValidationError);
  SolverOptions bad;
  bad.damping_min = 2.0;
  const auto recs = records_from_counts({Direction(0, 0, 1)}, {14}, 20);
  EXPECT_THROW(maxlik_fixed_point(recs, bad), ValidationError);
}

TEST(FixedPoint, NonConvergenceIsReported) {
  const auto recs = noiseless_records(axes(), Vec3(0.3, -0.2, 0.5), 20);
  SolverOptions opts;
  opts.max_iterations = 3;
  const auto res = maxlik_fixed_point(recs, opts);
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.iterations, 3);
}

// Properties over random instances: monotone ascent, span confinement,
// K = 0 at interior solutions, KKT at boundary solutions.
TEST(FixedPoint, RandomInstanceProperties) {
  Gen gen(77);
  int interior = 0, boundary = 0, unconverged = 0;
  for (int t = 0; t < 150; ++t) {
    const std::size_t m = 1 + t % 6;
    const auto recs = random_instance(gen, m, 20, 1.0);
    SolverOptions opts;
    opts.keep_trace = true;
    const auto res = maxlik_fixed_point(recs, opts);
    EXPECT_LE(res.r_est.norm(), 1.0);

    for (double g : res.trace.increments) EXPECT_GE(g, 0.0);
    for (std::size_t i = 1; i < res.trace.log_likelihood.size(); ++i) {
      const double prev = res.trace.log_likelihood[i - 1];
      EXPECT_GE(res.trace.log_likelihood[i], prev - 1e-12 * (1.0 + std::abs(prev)));
    }
    for (const auto& it : res.trace.iterates) EXPECT_LT(off_span(it, recs), 1e-12);

    if (!res.converged) {
      // Nearly coplanar analyzers leave a flat ridge that the undamped map
      // crosses slowly. Such runs must use up the budget, not stall.
      ++unconverged;
      EXPECT_EQ(res.iterations, opts.max_iterations) << "instance " << t;
      continue;
    }
    const Vec3& last = res.trace.iterates.back();
    const Vec3 k = compute_K(last, recs);
    if (res.boundary) {
      ++boundary;
      const Vec3 dir = last.normalized();
      EXPECT_LE((k - k.dot(dir) * dir).norm(), opts.tol_k);
      EXPECT_GE(k.dot(dir), -opts.tol_k);
    } else {
      ++interior;
      EXPECT_LE(k.norm(), opts.tol_k);
      EXPECT_NEAR(compute_R(last, recs), 1.0, 1e-9);
    }
  }
  EXPECT_GT(interior, 10);
  EXPECT_GT(boundary, 10);
  EXPECT_LE(unconverged, 10);
}

TEST(FixedPoint, SingleSettingGivesMinimumNormMaximizer) {
  Gen gen(78);
  for (int t = 0; t < 20; ++t) {
    const Direction a = gen.direction();
    const auto n_plus = static_cast<std::int64_t>(gen.uniform(1.0, 19.0));
    const auto recs = records_from_counts({a}, {n_plus}, 20);
    const auto res = maxlik_fixed_point(recs);
    EXPECT_LT((res.r_est.vec() - recs[0].x * a.vec()).norm(), 1e-12);
  }
}

TEST(FixedPoint, MatchesLinearInversionInsideTheBall) {
  Gen gen(79);
  int checked = 0;
  for (int t = 0; t < 60; ++t) {
    const auto recs = simulate_campaign(Polarization(gen.in_ball(0.7)),
                                        settings_for(axes(), 50), RngSeed{gen.seed()});
    const auto lin = linear_inversion(recs);
    if (lin.r.norm() >= 1.0 - 1e-6) continue;
    ++checked;
    const auto res = maxlik_fixed_point(recs);
    EXPECT_TRUE(res.converged);
    EXPECT_LT((res.r_est.vec() - lin.r).norm(), 1e-8);
  }
  EXPECT_GT(checked, 30);
}

TEST(FixedPoint, UnequalBudgetsSolveTheWeightedGradient) {
  Gen gen(80);
  for (int t = 0; t < 20; ++t) {
    const auto dirs = gen.directions(4);
    std::vector<MeasurementSetting> settings;
    for (std::size_t j = 0; j < dirs.size(); ++j) {
      settings.emplace_back(dirs[j], 10 + 15 * static_cast<std::int64_t>(j));
    }
    const auto recs =
        simulate_campaign(Polarization(gen.in_ball(0.6)), settings, RngSeed{gen.seed()});
    const auto res = maxlik_fixed_point(recs);
    ASSERT_TRUE(res.converged);
    if (res.boundary) continue;
    Vec3 grad = Vec3::Zero();
    double total = 0.0;
    for (const auto& rec : recs) {
      const double u = rec.direction().dot(res.r_est.vec());
      grad += rec.total() * (rec.x - u) / (1.0 - u * u) * rec.direction().vec();
      total += rec.total();
    }
    EXPECT_LE(grad.norm() / total, 1e-10);
  }
}

// ---------------------------------------------------------------- overcompleteness

TEST(Overcompleteness, NoiselessTruthIsExact) {
  const Vec3 truth(0.3, -0.2, 0.5);
  const auto recs = noiseless_records(axes(), truth, 20);
  EXPECT_LT(overcompleteness_defect(recs, density_from_polarization(Polarization(truth))), 1e-12);
}

TEST(Overcompleteness, SingleSettingMatched) {
  const auto recs = records_from_counts({Direction(1, 2, 2)}, {13}, 20);
  const Polarization r(recs[0].x * recs[0].direction().vec());
  EXPECT_LT(overcompleteness_defect(recs, density_from_polarization(r)), 1e-12);
}

TEST(Overcompleteness, NoisyDataCannotBeMatched) {
  const auto recs = simulate_campaign(Polarization(0, 0, 1),
                                      settings_for(default_directions(), 20), RngSeed{20240611});
  const auto res = maxlik_fixed_point(recs);
  EXPECT_GT(overcompleteness_defect(recs, density_from_polarization(res.r_est)), 1e-3);
}
