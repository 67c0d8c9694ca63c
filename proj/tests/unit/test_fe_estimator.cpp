#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "plfe/error.hpp"
#include "plfe/fe_estimator.hpp"

using namespace plfe;

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// Noiseless Y = X beta + a + b Z + D alpha on a random design.
PanelDataset noiseless_linear(std::mt19937_64& gen, std::size_t n, std::size_t T,
                              const Eigen::VectorXd& beta, double a, double b,
                              Eigen::VectorXd* alpha_out = nullptr) {
  PanelDataset base = oracle::random_panel(gen, n, T, static_cast<std::size_t>(beta.size()));
  std::normal_distribution<double> nd;
  Eigen::VectorXd alpha(static_cast<Eigen::Index>(n));
  for (auto& v : alpha) v = nd(gen);
  alpha(0) = -alpha.tail(alpha.size() - 1).sum();
  Eigen::VectorXd y = base.X() * beta + (a + b * base.z().array()).matrix();
  for (Eigen::Index k = 0; k < y.size(); ++k) y(k) += alpha(k / static_cast<Eigen::Index>(T));
  if (alpha_out) *alpha_out = alpha;
  return base.with_response(y);
}

}  // namespace

TEST(Projections, AlgebraicIdentities) {
  std::mt19937_64 gen(1);
  for (int rep = 0; rep < 4; ++rep) {
    const PanelDataset ds = oracle::random_panel(gen, 4, 3, 2);
    const ProjectionSet ps = build_projections(ds, smoothing_matrix(ds, 1.2, epanechnikov()));
    const Eigen::MatrixXd D = build_dummy_matrix(4, 3);
    EXPECT_LT(max_abs(ps.Q1 * D), 1e-8);
    EXPECT_LT(max_abs(ps.Q1 * ps.Q1 - ps.Q1), 1e-8);
    EXPECT_LT(max_abs(ps.Q2 * ps.Q2 - ps.Q2), 1e-8);
    EXPECT_LT(max_abs(ps.P - ps.P.transpose()), 1e-12);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ps.P);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-8 * ps.P.norm());
  }
}

TEST(Projections, MatchDenseOracle) {
  std::mt19937_64 gen(2);
  const PanelDataset ds = oracle::random_panel(gen, 3, 2, 1);
  const ProjectionSet ps = build_projections(ds, smoothing_matrix(ds, 1.5, epanechnikov()));
  const oracle::Dense d = oracle::dense(ds, 1.5);
  EXPECT_LT(max_abs(ps.Q1 - d.Q1), 1e-8);
  EXPECT_LT(max_abs(ps.Q2 - d.Q2), 1e-8);
  EXPECT_LT(max_abs(ps.hat_diag - d.L.diagonal()), 1e-8);
}

TEST(Projections, NoRegressorsMeansQ2IsIdentity) {
  std::mt19937_64 gen(3);
  const PanelDataset ds = oracle::random_panel(gen, 4, 3, 0);
  const ProjectionSet ps = build_projections(ds, smoothing_matrix(ds, 1.0, epanechnikov()));
  EXPECT_EQ(ps.Q2, Eigen::MatrixXd::Identity(12, 12));
}

TEST(Projections, CollinearRegressorIsSingular) {
  std::mt19937_64 gen(4);
  PanelDataset base = oracle::random_panel(gen, 4, 3, 1);
  Eigen::MatrixXd X(12, 2);
  X << base.X(), 2.0 * base.X();
  const PanelDataset ds(4, 3, base.y(), X, base.z());
  try {
    fit(ds, 1.0, epanechnikov());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularProjection);
  }
}

TEST(ProfileOperator, FactoredRouteMatchesDenseRoute) {
  std::mt19937_64 gen(5);
  const PanelDataset ds = oracle::random_panel(gen, 6, 4, 2);
  const SmootherMatrix M = smoothing_matrix(ds, 0.9, epanechnikov());
  const ProjectionSet ps = build_projections(ds, M);
  const auto op = ProfileOperator::build(ds, M);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(24, 24);
  const Eigen::MatrixXd R = (I - ps.M) * ps.Q1 * ps.Q2;
  EXPECT_LT(max_abs(op->apply_q1(I) - ps.Q1), 1e-10);
  EXPECT_LT(max_abs(op->right_apply_q1(I) - ps.Q1), 1e-10);
  EXPECT_LT(max_abs(op->residuals(ds.y()) - R * ds.y()), 1e-10);
  EXPECT_LT(max_abs(op->residual_diag() - R.diagonal()), 1e-10);
  const double trace = (ps.Q2.transpose() * ps.Q1.transpose() * ps.P * ps.Q1 * ps.Q2).trace();
  EXPECT_NEAR(op->residual_trace(), trace, 1e-9);
  EXPECT_LT(max_abs(op->beta_map() * ds.y() - op->beta(ds.y())), 1e-10);
}

TEST(Fit, MatchesBruteForceProfileObjective) {
  std::mt19937_64 gen(6);
  for (int rep = 0; rep < 5; ++rep) {
    const PanelDataset ds = oracle::random_panel(gen, 3, 2, 1);
    const double h = 1.5;
    const FitResult fr = fit(ds, h, epanechnikov());
    const oracle::BruteForce bf = oracle::brute_force(ds, h);
    EXPECT_LT(max_abs(fr.beta_hat - bf.beta), 1e-8);
    EXPECT_LT(max_abs(fr.alpha_hat.tail(2) - bf.free_effects), 1e-8);
    for (Eigen::Index g = 0; g < fr.grid.size(); g += 10) {
      EXPECT_NEAR(fr.g_hat(g), oracle::brute_force_g(ds, bf, h, fr.grid(g)), 1e-8);
    }
  }
}

TEST(Fit, NoiselessLinearDataIsReproduced) {
  std::mt19937_64 gen(7);
  const Eigen::Vector2d beta(1.5, -2.0);
  Eigen::VectorXd alpha;
  const PanelDataset ds = noiseless_linear(gen, 8, 4, beta, 0.7, -1.3, &alpha);
  const FitResult fr = fit(ds, 0.8, epanechnikov());
  EXPECT_LT(max_abs(fr.beta_hat - beta), 1e-6);
  EXPECT_LT(max_abs(fr.alpha_hat - alpha), 1e-6);
  for (Eigen::Index g = 0; g < fr.grid.size(); ++g) {
    EXPECT_NEAR(fr.g_hat(g), 0.7 - 1.3 * fr.grid(g), 1e-6);
    EXPECT_NEAR(fr.g_prime(g), -1.3, 1e-6);
  }
  EXPECT_LT(max_abs(fr.residuals), 1e-6);
  const LevelSlope at = g_at(fr, ds, epanechnikov(), 0.123);
  EXPECT_NEAR(at.level, 0.7 - 1.3 * 0.123, 1e-6);
  EXPECT_NEAR(at.slope, -1.3, 1e-6);
}

TEST(Fit, EffectsSumToZeroAndResidualsReconstruct) {
  std::mt19937_64 gen(8);
  const PanelDataset ds = oracle::random_panel(gen, 7, 5, 3);
  const FitResult fr = fit(ds, 0.7, epanechnikov());
  EXPECT_NEAR(fr.alpha_hat.sum(), 0.0, 1e-8);
  // y_hat = g_hat(Z) + X beta + D alpha, with g_hat at the sample points.
  const auto op = fr.projections;
  const Eigen::VectorXd g_at_z = op->smoother() * fr.partialled;
  Eigen::VectorXd y_hat = g_at_z + ds.X() * fr.beta_hat;
  for (Eigen::Index k = 0; k < y_hat.size(); ++k) y_hat(k) += fr.alpha_hat(k / 5);
  EXPECT_LT(max_abs(ds.y() - y_hat - fr.residuals), 1e-8);
}

TEST(Fit, GridValueMatchesPointEvaluation) {
  std::mt19937_64 gen(9);
  const PanelDataset ds = oracle::random_panel(gen, 6, 3, 1);
  const FitResult fr = fit(ds, 0.9, epanechnikov());
  for (Eigen::Index g : {0, 37, 100}) {
    const LevelSlope ls = g_at(fr, ds, epanechnikov(), fr.grid(g));
    EXPECT_EQ(ls.level, fr.g_hat(g));
    EXPECT_EQ(ls.slope, fr.g_prime(g));
  }
}

TEST(Fit, FixedEffectsInvariance) {
  std::mt19937_64 gen(10);
  const PanelDataset ds = oracle::random_panel(gen, 6, 4, 2);
  std::normal_distribution<double> nd;
  Eigen::VectorXd alpha(6);
  for (auto& v : alpha) v = 5.0 * nd(gen);
  alpha(0) = -alpha.tail(5).sum();
  Eigen::VectorXd shifted = ds.y();
  for (Eigen::Index k = 0; k < shifted.size(); ++k) shifted(k) += alpha(k / 4);
  const FitResult a = fit(ds, 0.8, epanechnikov());
  const FitResult b = fit(ds.with_response(shifted), 0.8, epanechnikov());
  EXPECT_LT(max_abs(a.beta_hat - b.beta_hat), 1e-8);
  EXPECT_LT(max_abs(a.g_hat - b.g_hat), 1e-8);
  EXPECT_LT(max_abs(a.residuals - b.residuals), 1e-8);
  EXPECT_LT(max_abs(b.alpha_hat - a.alpha_hat - alpha), 1e-8);
}

TEST(Fit, LinearInResponse) {
  std::mt19937_64 gen(11);
  const PanelDataset ds = oracle::random_panel(gen, 5, 4, 2);
  const PanelDataset other = oracle::random_panel(gen, 5, 4, 2);
  const double a = 1.7, b = -0.4;
  const FitResult f1 = fit(ds, 0.8, epanechnikov());
  const FitResult f2 = fit(ds.with_response(other.y()), 0.8, epanechnikov());
  const FitResult f3 = fit(ds.with_response(a * ds.y() + b * other.y()), 0.8, epanechnikov());
  const double tol = 1e-12 * (1.0 + ds.y().cwiseAbs().maxCoeff());
  EXPECT_LT(max_abs(f3.beta_hat - (a * f1.beta_hat + b * f2.beta_hat)), 1e3 * tol);
  EXPECT_LT(max_abs(f3.alpha_hat - (a * f1.alpha_hat + b * f2.alpha_hat)), 1e3 * tol);
  EXPECT_LT(max_abs(f3.g_hat - (a * f1.g_hat + b * f2.g_hat)), 1e3 * tol);
  EXPECT_LT(max_abs(f3.residuals - (a * f1.residuals + b * f2.residuals)), 1e3 * tol);
}

TEST(Fit, RequiresAtLeastTwoUnits) {
  const PanelDataset ds(1, 5, Eigen::VectorXd::LinSpaced(5, 0, 1), Eigen::MatrixXd::Zero(5, 0),
                        Eigen::VectorXd::LinSpaced(5, 0, 1));
  try {
    fit(ds, 0.5, epanechnikov());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidShape);
  }
}

TEST(Variance, SandwichMatchesDenseOracle) {
  std::mt19937_64 gen(12);
  for (int rep = 0; rep < 3; ++rep) {
    const PanelDataset ds = oracle::random_panel(gen, 4, 3, 1);
    const FitResult fr = fit(ds, 1.2, epanechnikov());
    for (double z : {-0.5, 0.0, 0.4}) {
      const double v = conditional_variance(fr, ds, epanechnikov(), z);
      EXPECT_NEAR(v, oracle::dense_sandwich(ds, 1.2, z), 1e-10 * std::max(1.0, v));
    }
  }
}

TEST(Variance, SigmaMatchesDenseTraceFormula) {
  std::mt19937_64 gen(13);
  const PanelDataset ds = oracle::random_panel(gen, 5, 3, 2);
  const FitResult fr = fit(ds, 1.0, epanechnikov());
  const oracle::Dense d = oracle::dense(ds, 1.0);
  const Eigen::VectorXd V = d.R * ds.y();
  const double trace = (d.Q2.transpose() * d.Q1.transpose() * d.P * d.Q1 * d.Q2).trace();
  EXPECT_NEAR(fr.sigma2_hat, V.squaredNorm() / trace, 1e-10);
}

TEST(Variance, ScalesQuadraticallyAndGridAgrees) {
  std::mt19937_64 gen(14);
  const PanelDataset ds = oracle::random_panel(gen, 8, 4, 1);
  const FitResult a = fit(ds, 0.8, epanechnikov());
  const FitResult b = fit(ds.with_response(3.0 * ds.y()), 0.8, epanechnikov());
  const double va = conditional_variance(a, ds, epanechnikov(), 0.1);
  EXPECT_NEAR(conditional_variance(b, ds, epanechnikov(), 0.1), 9.0 * va, 1e-12 * va * 9.0 * 10);
  EXPECT_GT(va, 0.0);
  const Eigen::VectorXd grid = Eigen::Vector3d(-0.3, 0.1, 0.6);
  const Eigen::VectorXd vg = conditional_variance_grid(a, ds, epanechnikov(), grid);
  const Eigen::VectorXd sg = slope_conditional_variance_grid(a, ds, epanechnikov(), grid);
  for (Eigen::Index g = 0; g < 3; ++g) {
    EXPECT_NEAR(vg(g), conditional_variance(a, ds, epanechnikov(), grid(g)), 1e-14);
    EXPECT_NEAR(sg(g), slope_conditional_variance(a, ds, epanechnikov(), grid(g)), 1e-12);
    EXPECT_GT(sg(g), 0.0);
  }
}
