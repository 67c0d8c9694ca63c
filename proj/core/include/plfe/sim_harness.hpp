#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "plfe/kernels.hpp"
#include "plfe/panel_data.hpp"

namespace plfe {

/// Simulation design:
///   Y_it = X_it^T beta + 0.8 cos(pi Z_it) + alpha_i + V_it,
///   X_it ~ U[-1,1]^p, Z_it ~ U[-1,1], V_it ~ N(0,1),
///   alpha_i = eps_i + c * mean_t Z_it (i >= 2), eps_i ~ N(0,1), alpha_1 = -sum.
struct DgpConfig {
  std::size_t n = 100;
  std::size_t T = 5;
  double c = 0.0;
  Eigen::VectorXd beta = (Eigen::VectorXd(3) << -1.0, 3.0, 5.0).finished();
  std::uint64_t seed = 1;
};

struct GroundTruth {
  Eigen::VectorXd beta;
  Eigen::VectorXd alpha;  // all n effects, sums to zero

  static double g(double z);
  static double g_prime(double z);
  static double g_second(double z);
};

struct SimulatedPanel {
  PanelDataset data;
  GroundTruth truth;
};

/// Throws InvalidConfig for n < 2 or T < 2.
SimulatedPanel generate(const DgpConfig& cfg);

/// Population quantities of the simulation design, known in closed form and
/// used only as test oracles:
///   f(z) = sum_t f_t(z) = T / 2 on [-1, 1]
///   sigma_t^2 = Var(V_it - mean_s V_is) = 1 - 1/T
///   sigma_bar^2(z) = sum_t sigma_t^2 f_t(z) = (T - 1) / 2
///   Sigma_g = nu_0 sigma_bar^2 / f^2,  Sigma_g' = nu_2 sigma_bar^2 / (f^2 mu_2^2)
struct PopulationOracle {
  std::size_t T = 5;

  double density() const;
  double sigma_bar2() const;
  double Sigma_g(const KernelSpec& k) const;
  double Sigma_gp(const KernelSpec& k) const;
};

struct BandwidthPolicy {
  enum class Kind { Fixed, CrossValidation };
  Kind kind = Kind::Fixed;
  /// Fixed bandwidth; when absent, n^{-1/4} * (range of Z) per replicate.
  std::optional<double> h;
  std::size_t cv_steps = 20;

  std::string describe() const;
};

double fixed_rule_bandwidth(const PanelDataset& ds);

enum class CoverageMethod { Asymptotic, Bootstrap };

struct CoefficientSummary {
  double bias = 0.0;  // mean(beta_hat - beta)
  double sd = 0.0;    // sample SD, N - 1 divisor
  double mse = 0.0;   // mean((beta_hat - beta)^2)
};

struct McReport {
  int table = 1;
  DgpConfig config;
  std::size_t reps = 0;
  std::size_t failures = 0;
  std::vector<std::string> failure_messages;
  std::string bandwidth_policy;
  std::string kernel = "epanechnikov";
  std::vector<CoefficientSummary> coefficients;
  /// Table 2 only.
  std::optional<CoverageMethod> method;
  double alpha = 0.05;
  std::size_t boot_reps = 0;
  std::optional<double> coverage;
  std::optional<double> mean_half_width;
  double wall_clock_seconds = 0.0;
};

/// Replicate r uses seed derive_seed(cfg.seed, {r}). Fails with
/// TooManyFailures if more than 5% of replicates fail.
McReport run_table1(const DgpConfig& cfg, std::size_t reps, const BandwidthPolicy& policy = {},
                    const KernelSpec& k = epanechnikov());

McReport run_table2(const DgpConfig& cfg, std::size_t reps, CoverageMethod method, double alpha,
                    std::size_t boot_reps, const BandwidthPolicy& policy = {},
                    const KernelSpec& k = epanechnikov());

std::string to_string(CoverageMethod method);

}  // namespace plfe
