#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "plfe/fe_estimator.hpp"
#include "plfe/kernels.hpp"
#include "plfe/panel_data.hpp"
#include "plfe/scb_asymptotic.hpp"

namespace plfe {

struct BootstrapConfig {
  std::size_t reps = 200;
  std::uint64_t seed = 0;
  Eigen::VectorXd grid;  // empty: use the fit's grid
};

struct BootstrapResult {
  double c_hat = 0.0;
  Eigen::VectorXd var_star;  // pointwise sample variance of g*_k, N - 1 divisor
  BandResult band;
  Eigen::VectorXd T_stats;   // sup statistic of each replicate
  Eigen::MatrixXd g_star;    // grid x N
  Eigen::MatrixXd beta_star; // p x N, diagnostics only
};

/// Wild bootstrap band: Y*_k = Y_hat + V_hat .* eps_k with eps_k ~ N(0, I)
/// drawn from stream (seed, k); g*_k is the same linear map of Y*_k as the
/// original fit. Throws DegenerateVariance when the bootstrap spread vanishes.
BootstrapResult bootstrap_band(const PanelDataset& ds, const FitResult& fr, const KernelSpec& k,
                               double alpha, const BootstrapConfig& cfg);

/// Grid operator A with g_hat(grid) = A Y for this design and bandwidth.
Eigen::MatrixXd level_operator(const FitResult& fr, const PanelDataset& ds, const KernelSpec& k,
                               const Eigen::VectorXd& grid);

/// max_g |g_star - g_hat| / sqrt(var_star).
double sup_statistic(const Eigen::VectorXd& g_star, const Eigen::VectorXd& g_hat,
                     const Eigen::VectorXd& var_star);

/// ceil((1 - alpha) N)-th order statistic.
double percentile_upper(std::span<const double> samples, double alpha);

}  // namespace plfe
