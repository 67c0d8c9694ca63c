#pragma once

#include <Eigen/Dense>

#include "plfe/kernels.hpp"
#include "plfe/panel_data.hpp"

namespace plfe {

/// Local-linear design at a target point z: rows (1, Z_k - z) and the kernel
/// weights K_h(Z_k - z).
struct LocalDesign {
  Eigen::MatrixXd Zz;  // nT x 2
  Eigen::VectorXd Wz;  // diagonal of the weight matrix
};

/// Throws NonPositiveBandwidth, or EmptyWindow when every weight is zero.
LocalDesign local_design(double z, const Eigen::VectorXd& covariate, double h, const KernelSpec& k);
LocalDesign local_design(double z, const PanelDataset& ds, double h, const KernelSpec& k);

/// The two rows of (Z^T W Z)^{-1} Z^T W at z: `level` applied to a response
/// gives the local-linear intercept, `slope` the local slope.
struct SmootherRows {
  Eigen::RowVectorXd level;
  Eigen::RowVectorXd slope;
};

/// Throws EmptyWindow, or SingularLocalFit when the 2x2 local Gram matrix is
/// singular (fewer than two distinct covariate values in the window).
SmootherRows smoother_row(double z, const Eigen::VectorXd& covariate, double h, const KernelSpec& k);
SmootherRows smoother_row(double z, const PanelDataset& ds, double h, const KernelSpec& k);

/// Dense nT x nT smoothing matrix; row k is the level row at Z_k.
struct SmootherMatrix {
  Eigen::MatrixXd M;
  double h = 0.0;
};

SmootherMatrix smoothing_matrix(const PanelDataset& ds, double h, const KernelSpec& k);
SmootherMatrix smoothing_matrix(const Eigen::VectorXd& covariate, double h, const KernelSpec& k);

/// Stacks level (or slope) rows for every point of `grid`: a grid.size() x nT
/// operator.
Eigen::MatrixXd level_rows(const Eigen::VectorXd& grid, const Eigen::VectorXd& covariate, double h,
                           const KernelSpec& k);
Eigen::MatrixXd slope_rows(const Eigen::VectorXd& grid, const Eigen::VectorXd& covariate, double h,
                           const KernelSpec& k);

/// Second derivative at z of a local cubic fit of `targets` on the covariate,
/// using pilot bandwidth h_star. Requires four distinct in-window values.
double local_cubic_d2(const Eigen::VectorXd& targets, const Eigen::VectorXd& covariate,
                      double h_star, const KernelSpec& k, double z);
double local_cubic_d2(const Eigen::VectorXd& targets, const PanelDataset& ds, double h_star,
                      const KernelSpec& k, double z);

}  // namespace plfe
