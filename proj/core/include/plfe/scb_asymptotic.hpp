#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "plfe/fe_estimator.hpp"
#include "plfe/kernels.hpp"
#include "plfe/panel_data.hpp"

namespace plfe {

enum class BandMethod { AsymptoticLevel, AsymptoticDerivative, Bootstrap };

std::string to_string(BandMethod method);
/// Inverse of to_string; throws InvalidArgument for unknown tags.
BandMethod band_method_from_string(const std::string& tag);

/// A simultaneous band over a grid. `critical` is the multiplier applied to
/// the pointwise standard deviation: d_n + u_alpha (-2 log h_eff)^{-1/2} for
/// the asymptotic bands, c_hat for the bootstrap band.
struct BandResult {
  Eigen::VectorXd grid;
  Eigen::VectorXd center;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double alpha = 0.05;
  BandMethod method = BandMethod::AsymptoticLevel;
  double critical = 0.0;
  double h = 0.0;
  std::optional<double> h_star;
};

/// u with exp(-2 exp(-u)) = 1 - alpha, i.e. log 2 - log(-log(1 - alpha)).
double gumbel_quantile(double alpha);

/// Centering constant for the sup-deviation of g_hat. The case is chosen by
/// whether K vanishes at its support endpoint. Throws BandwidthTooLarge for
/// h_eff >= 1.
double compute_dn(double h_eff, const KernelSpec& k);
/// Centering constant for the sup-deviation of g_hat'. Only defined for
/// kernels with K(A) = 0 (KernelCaseUnsupported otherwise).
double compute_dn1(double h_eff, const KernelSpec& k);

/// h / (d - c) for data living on [c, d].
double effective_bandwidth(double h, const Interval& interval);

struct AsymptoticConstants {
  double d_n = 0.0;
  std::optional<double> d_n1;  // absent when K(A) != 0
  double u_alpha = 0.0;
  double log_h_eff = 0.0;      // -2 log(h_eff)
  std::optional<double> Sigma_g;
  std::optional<double> Sigma_gp;
};

AsymptoticConstants asymptotic_constants(double h_eff, const KernelSpec& k, double alpha);

/// Estimated bias h^2 mu_2 g''(z) / 2 along `grid`, with g'' from a local cubic
/// fit of the partialled response at pilot bandwidth h_star.
Eigen::VectorXd bias_correction(const FitResult& fr, const PanelDataset& ds, const KernelSpec& k,
                                const Eigen::VectorXd& grid, double h, double h_star);

/// Gumbel plug-in band for g: (g_hat - bias) +/- (d_n + u_alpha (-2 log h_eff)^{-1/2}) sd(z).
/// h_star defaults to pilot_bandwidth(ds).
BandResult asymptotic_band(const FitResult& fr, const PanelDataset& ds, const KernelSpec& k,
                           const Eigen::VectorXd& grid, double alpha,
                           std::optional<double> h_star = std::nullopt);

/// Band for g' centered at g_hat' (no bias term), using d_n1 and the slope-row
/// plug-in variance.
BandResult derivative_band(const FitResult& fr, const PanelDataset& ds, const KernelSpec& k,
                           const Eigen::VectorXd& grid, double alpha);

}  // namespace plfe
