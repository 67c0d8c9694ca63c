#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "plfe/bandwidth.hpp"
#include "plfe/error.hpp"
#include "plfe/scb_asymptotic.hpp"

using namespace plfe;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(GumbelQuantile, ClosedFormAndMonotone) {
  const double a0 = 1.0 - std::exp(-2.0);
  EXPECT_NEAR(gumbel_quantile(a0), 0.0, 1e-12);
  EXPECT_NEAR(gumbel_quantile(0.05), 3.663342, 1e-6);
  EXPECT_GT(gumbel_quantile(0.01), gumbel_quantile(0.05));
  EXPECT_GT(gumbel_quantile(0.05), gumbel_quantile(0.10));
  for (double a : {0.01, 0.05, 0.2, 0.5}) {
    EXPECT_NEAR(std::exp(-2.0 * std::exp(-gumbel_quantile(a))), 1.0 - a, 1e-12);
  }
  EXPECT_EQ(code_of([] { gumbel_quantile(0.0); }), ErrorCode::DomainError);
  EXPECT_EQ(code_of([] { gumbel_quantile(1.0); }), ErrorCode::DomainError);
}

TEST(Dn, EpanechnikovClosedForm) {
  const KernelSpec k = epanechnikov();
  EXPECT_NEAR(compute_dn(0.1, k), oracle::dn_vanishing(0.1, 0.6, 1.5), 1e-12);
  EXPECT_NEAR(compute_dn(0.1, k), 1.3935154, 1e-5);
  EXPECT_NEAR(compute_dn(0.1, k), 1.39353, 1e-4);
  EXPECT_GT(compute_dn(0.05, k), compute_dn(0.1, k));
}

TEST(Dn, UniformKernelTakesBoundaryBranch) {
  const KernelSpec k = uniform();
  EXPECT_NEAR(compute_dn(0.1, k), oracle::dn_boundary(0.1, 0.5, 0.5), 1e-12);
  EXPECT_NEAR(compute_dn(0.02, k), oracle::dn_boundary(0.02, 0.5, 0.5), 1e-12);
}

TEST(Dn, RejectsLargeBandwidth) {
  EXPECT_EQ(code_of([] { compute_dn(1.0, epanechnikov()); }), ErrorCode::BandwidthTooLarge);
  EXPECT_EQ(code_of([] { compute_dn1(1.5, epanechnikov()); }), ErrorCode::BandwidthTooLarge);
}

TEST(Dn1, EpanechnikovClosedFormAndCaseRestriction) {
  const KernelSpec k = epanechnikov();
  EXPECT_NEAR(compute_dn1(0.1, k), oracle::dn1_closed(0.1, 3.0 / 35.0, 0.9), 1e-12);
  EXPECT_NEAR(compute_dn1(0.1, k), 1.8373920, 1e-5);
  EXPECT_NEAR(compute_dn1(0.1, k), 1.83735, 1e-4);
  EXPECT_EQ(code_of([] { compute_dn1(0.1, uniform()); }), ErrorCode::KernelCaseUnsupported);
}

TEST(Dn1, DifferenceFromDnScalesLikeInverseRoot) {
  const KernelSpec k = epanechnikov();
  auto scaled = [&](double h) {
    return (compute_dn1(h, k) - compute_dn(h, k)) * std::sqrt(-2.0 * std::log(h));
  };
  EXPECT_NEAR(scaled(0.05), scaled(0.1), 1e-10);
}

TEST(AsymptoticConstants, CollectsPieces) {
  const AsymptoticConstants c = asymptotic_constants(0.1, epanechnikov(), 0.05);
  EXPECT_NEAR(c.d_n, compute_dn(0.1, epanechnikov()), 1e-15);
  ASSERT_TRUE(c.d_n1.has_value());
  EXPECT_NEAR(*c.d_n1, compute_dn1(0.1, epanechnikov()), 1e-15);
  EXPECT_NEAR(c.u_alpha, gumbel_quantile(0.05), 1e-15);
  EXPECT_NEAR(c.log_h_eff, -2.0 * std::log(0.1), 1e-15);
  EXPECT_FALSE(asymptotic_constants(0.1, uniform(), 0.05).d_n1.has_value());
}

TEST(EffectiveBandwidth, RescalesByIntervalWidth) {
  EXPECT_DOUBLE_EQ(effective_bandwidth(0.3, Interval{-1.0, 1.0}), 0.15);
  EXPECT_DOUBLE_EQ(effective_bandwidth(0.3, Interval{0.0, 1.0}), 0.3);
}

TEST(BiasCorrection, LinearAndQuadraticTruth) {
  std::mt19937_64 gen(1);
  PanelDataset base = oracle::random_panel(gen, 60, 5, 1);
  const KernelSpec k = epanechnikov();
  const Eigen::VectorXd grid = Eigen::Vector3d(-0.4, 0.0, 0.4);

  const Eigen::VectorXd lin = base.X().col(0) * 2.0 + (0.5 + 1.5 * base.z().array()).matrix();
  const PanelDataset ds_lin = base.with_response(lin);
  const FitResult fl = fit(ds_lin, 0.4, k);
  const Eigen::VectorXd bl = bias_correction(fl, ds_lin, k, grid, 0.4, 0.6);
  EXPECT_LT(bl.cwiseAbs().maxCoeff(), 1e-8 * 0.16);

  const Eigen::VectorXd quad = base.X().col(0) * 2.0 + base.z().array().square().matrix();
  const PanelDataset ds_q = base.with_response(quad);
  const FitResult fq = fit(ds_q, 0.4, k);
  const Eigen::VectorXd bq = bias_correction(fq, ds_q, k, grid, 0.4, 0.8);
  for (Eigen::Index g = 0; g < 3; ++g) EXPECT_NEAR(bq(g) / (0.4 * 0.4 / 5.0), 1.0, 0.02);
}

TEST(AsymptoticBand, StructureAndMonotoneInLevel) {
  std::mt19937_64 gen(2);
  const PanelDataset ds = oracle::random_panel(gen, 40, 4, 1);
  const KernelSpec k = epanechnikov();
  const FitResult fr = fit(ds, 0.4, k);
  const BandResult b05 = asymptotic_band(fr, ds, k, fr.grid, 0.05);
  const BandResult b20 = asymptotic_band(fr, ds, k, fr.grid, 0.20);
  EXPECT_EQ(b05.method, BandMethod::AsymptoticLevel);
  ASSERT_TRUE(b05.h_star.has_value());
  EXPECT_DOUBLE_EQ(*b05.h_star, pilot_bandwidth(ds));
  for (Eigen::Index g = 0; g < fr.grid.size(); ++g) {
    EXPECT_LT(b05.lower(g), b05.center(g));
    EXPECT_LT(b05.center(g), b05.upper(g));
    EXPECT_LE(b05.lower(g), b20.lower(g));
    EXPECT_GE(b05.upper(g), b20.upper(g));
  }
  const double h_eff = effective_bandwidth(0.4, ds.interval());
  const double expected = compute_dn(h_eff, k) + gumbel_quantile(0.05) / std::sqrt(-2 * std::log(h_eff));
  EXPECT_NEAR(b05.critical, expected, 1e-12);
  const double sd = std::sqrt(conditional_variance(fr, ds, k, fr.grid(50)));
  EXPECT_NEAR(b05.upper(50) - b05.center(50), expected * sd, 1e-12);
}

TEST(AsymptoticBand, NearlyNoiselessLinearDataGivesTightBandAtTruth) {
  std::mt19937_64 gen(3);
  PanelDataset base = oracle::random_panel(gen, 30, 4, 1);
  std::normal_distribution<double> nd;
  const Eigen::VectorXd y = base.X().col(0) * -1.0 + (2.0 - 0.5 * base.z().array()).matrix() +
                            1e-9 * Eigen::VectorXd::NullaryExpr(base.size(), [&] { return nd(gen); });
  const PanelDataset ds = base.with_response(y);
  const FitResult fr = fit(ds, 0.5, epanechnikov());
  const BandResult b = asymptotic_band(fr, ds, epanechnikov(), fr.grid, 0.05);
  for (Eigen::Index g = 0; g < fr.grid.size(); ++g) {
    const double truth = 2.0 - 0.5 * fr.grid(g);
    EXPECT_NEAR(b.center(g), truth, 1e-6);
    EXPECT_LT(b.upper(g) - b.lower(g), 1e-6);
    EXPECT_GT(b.upper(g), b.lower(g));
  }
}

TEST(AsymptoticBand, IntervalRescalingInvariance) {
  // Mapping z -> (z - c) / (d - c) with h -> h / (d - c) leaves the critical
  // multiplier unchanged and the standard deviations equal point by point.
  std::mt19937_64 gen(4);
  const PanelDataset ds = oracle::random_panel(gen, 25, 4, 1);
  const Interval iv = ds.interval();
  const double w = iv.width();
  const Eigen::VectorXd mapped = ((ds.z().array() - iv.lo) / w).matrix();
  const PanelDataset unit(ds.n(), ds.T(), ds.y(), ds.X(), mapped, Interval{0.0, 1.0});
  const KernelSpec k = epanechnikov();
  const double h = 0.5;
  const FitResult fa = fit(ds, h, k);
  const FitResult fb = fit(unit, h / w, k);
  const BandResult a = asymptotic_band(fa, ds, k, fa.grid, 0.05, 0.9);
  const BandResult b = asymptotic_band(fb, unit, k, fb.grid, 0.05, 0.9 / w);
  EXPECT_NEAR(a.critical, b.critical, 1e-10);
  for (Eigen::Index g = 0; g < fa.grid.size(); g += 7) {
    EXPECT_NEAR(a.upper(g) - a.center(g), b.upper(g) - b.center(g), 1e-9);
  }
}

TEST(AsymptoticBand, GridMustStayInsideInterval) {
  std::mt19937_64 gen(5);
  const PanelDataset ds = oracle::random_panel(gen, 20, 3, 1);
  const FitResult fr = fit(ds, 0.6, epanechnikov());
  Eigen::VectorXd grid = fr.grid;
  grid(0) -= 0.5;
  EXPECT_THROW(asymptotic_band(fr, ds, epanechnikov(), grid, 0.05), Error);
}

TEST(DerivativeBand, NoiselessLinearCenteredAtSlope) {
  std::mt19937_64 gen(6);
  PanelDataset base = oracle::random_panel(gen, 30, 4, 1);
  std::normal_distribution<double> nd;
  const Eigen::VectorXd y = (1.0 + 0.75 * base.z().array()).matrix() + base.X().col(0) +
                            1e-9 * Eigen::VectorXd::NullaryExpr(base.size(), [&] { return nd(gen); });
  const PanelDataset ds = base.with_response(y);
  const FitResult fr = fit(ds, 0.5, epanechnikov());
  const BandResult b = derivative_band(fr, ds, epanechnikov(), fr.grid, 0.05);
  EXPECT_EQ(b.method, BandMethod::AsymptoticDerivative);
  for (Eigen::Index g = 0; g < fr.grid.size(); ++g) EXPECT_NEAR(b.center(g), 0.75, 1e-6);
  EXPECT_EQ(code_of([&] { derivative_band(fr, ds, uniform(), fr.grid, 0.05); }),
            ErrorCode::KernelCaseUnsupported);
}

TEST(BandMethod, TagRoundTrip) {
  for (BandMethod m : {BandMethod::AsymptoticLevel, BandMethod::AsymptoticDerivative,
                       BandMethod::Bootstrap}) {
    EXPECT_EQ(band_method_from_string(to_string(m)), m);
  }
  EXPECT_EQ(to_string(BandMethod::AsymptoticLevel), "asymptotic-level");
  EXPECT_EQ(code_of([] { band_method_from_string("other"); }), ErrorCode::InvalidArgument);
}
