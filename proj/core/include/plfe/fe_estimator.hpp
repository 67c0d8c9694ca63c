#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "plfe/kernels.hpp"
#include "plfe/local_poly.hpp"
#include "plfe/panel_data.hpp"

namespace plfe {

/// Explicit nT x nT projection matrices of the profile least-squares
/// dummy-variable estimator:
///   P      = (I - M)^T (I - M)
///   Qtilde = I - Dt (Dt^T Dt)^{-1} Dt^T,           Dt = (I - M) D
///   Q1     = I - D (D^T P D)^{-1} D^T P
///   Q2     = I - X (X^T P Q1 X)^{-1} X^T P Q1
///   hat_diag = diag(I - (I - M) Q1 Q2)
/// Quadratic in memory; intended for small problems and cross-checks.
struct ProjectionSet {
  Eigen::MatrixXd M;
  Eigen::MatrixXd P;
  Eigen::MatrixXd Qtilde;
  Eigen::MatrixXd Q1;
  Eigen::MatrixXd Q2;
  Eigen::VectorXd hat_diag;
};

/// Throws SingularProjection naming the Gram matrix that failed to factor.
ProjectionSet build_projections(const PanelDataset& ds, const SmootherMatrix& M);

/// Factored form of the same linear maps. Everything downstream (fit, the
/// bootstrap, cross-validation) goes through this class; it never forms
/// P, Q1 or Q2 explicitly. Immutable once built.
class ProfileOperator {
 public:
  static std::shared_ptr<const ProfileOperator> build(const PanelDataset& ds, SmootherMatrix M);

  std::size_t n() const noexcept { return n_; }
  std::size_t T() const noexcept { return T_; }
  std::size_t p() const noexcept { return static_cast<std::size_t>(X_.cols()); }
  double bandwidth() const noexcept { return h_; }
  const Eigen::MatrixXd& smoother() const noexcept { return M_; }

  /// beta = (Xt^T Qtilde Xt)^{-1} Xt^T Qtilde Yt.
  Eigen::VectorXd beta(const Eigen::VectorXd& y) const;
  /// (alpha_2, ..., alpha_n) = (Dt^T Dt)^{-1} Dt^T (Yt - Xt beta).
  Eigen::VectorXd free_effects(const Eigen::VectorXd& y, const Eigen::VectorXd& beta) const;
  /// Q1 v, column-wise.
  Eigen::MatrixXd apply_q1(const Eigen::MatrixXd& v) const;
  /// rows * Q1 for a matrix with nT columns.
  Eigen::MatrixXd right_apply_q1(const Eigen::MatrixXd& rows) const;
  /// (I - M) Q1 Q2 y.
  Eigen::VectorXd residuals(const Eigen::VectorXd& y) const;
  /// p x nT matrix B with beta(y) = B y.
  Eigen::MatrixXd beta_map() const;

  /// Diagonal of (I - M) Q1 Q2, i.e. 1 - l_kk.
  const Eigen::VectorXd& residual_diag() const noexcept { return residual_diag_; }
  /// tr(Q2^T Q1^T P Q1 Q2).
  double residual_trace() const noexcept { return residual_trace_; }

  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  ProfileOperator() = default;

  Eigen::VectorXd smooth_residual(const Eigen::VectorXd& v) const { return v - M_ * v; }

  std::size_t n_ = 0;
  std::size_t T_ = 0;
  double h_ = 0.0;
  Eigen::MatrixXd M_;
  Eigen::MatrixXd X_;
  Eigen::MatrixXd Dt_;                 // (I - M) D
  Eigen::LLT<Eigen::MatrixXd> dgram_;  // Dt^T Dt = D^T P D
  Eigen::MatrixXd C_;                  // Dt^T (I - M) = D^T P
  Eigen::MatrixXd Xt_;                 // (I - M) X
  Eigen::MatrixXd Xq_;                 // Qtilde Xt
  Eigen::LLT<Eigen::MatrixXd> xgram_;  // Xt^T Qtilde Xt = X^T P Q1 X
  Eigen::VectorXd residual_diag_;
  double residual_trace_ = 0.0;
  std::vector<std::string> warnings_;
};

struct FitOptions {
  /// Evaluation grid for g; defaults to `grid_points` equispaced points over
  /// the dataset interval.
  std::optional<Eigen::VectorXd> grid;
  std::size_t grid_points = 101;
};

struct FitResult {
  Eigen::VectorXd beta_hat;
  Eigen::VectorXd alpha_hat;  // all n effects, alpha_1 = -sum of the rest
  Eigen::VectorXd grid;
  Eigen::VectorXd g_hat;
  Eigen::VectorXd g_prime;
  Eigen::VectorXd residuals;
  /// Q1 (Y - X beta_hat): the response with the parametric part and the fixed
  /// effects removed. g_hat(z) = m(z)^T partialled.
  Eigen::VectorXd partialled;
  double sigma2_hat = 0.0;
  double h = 0.0;
  std::shared_ptr<const ProfileOperator> projections;
  std::vector<std::string> warnings;

  Eigen::VectorXd fitted(const PanelDataset& ds) const { return ds.y() - residuals; }
};

Eigen::VectorXd default_grid(const Interval& interval, std::size_t points = 101);

/// Profile least-squares dummy-variable fit at bandwidth h.
FitResult fit(const PanelDataset& ds, double h, const KernelSpec& k, const FitOptions& opts = {});
/// Same, reusing an operator built for this design and bandwidth.
FitResult fit_with(const PanelDataset& ds, std::shared_ptr<const ProfileOperator> op,
                   const KernelSpec& k, const FitOptions& opts = {});

struct LevelSlope {
  double level = 0.0;
  double slope = 0.0;
};

/// g_hat(z) and g_hat'(z) at an arbitrary z.
LevelSlope g_at(const FitResult& fr, const PanelDataset& ds, const KernelSpec& k, double z);

/// Plug-in Var{g_hat(z) | D} = e1^T (Z^T W Z)^{-1} (Z^T W Q1 W Z) (Z^T W Z)^{-1} e1 * sigma2_hat.
double conditional_variance(const FitResult& fr, const PanelDataset& ds, const KernelSpec& k,
                            double z);
/// Slope-row analogue (e2 in place of e1), used by the derivative band.
double slope_conditional_variance(const FitResult& fr, const PanelDataset& ds,
                                  const KernelSpec& k, double z);

/// Both variances over a grid in one pass.
Eigen::VectorXd conditional_variance_grid(const FitResult& fr, const PanelDataset& ds,
                                          const KernelSpec& k, const Eigen::VectorXd& grid);
Eigen::VectorXd slope_conditional_variance_grid(const FitResult& fr, const PanelDataset& ds,
                                                const KernelSpec& k, const Eigen::VectorXd& grid);

}  // namespace plfe
