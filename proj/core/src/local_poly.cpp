#include "plfe/local_poly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "plfe/error.hpp"

namespace plfe {

namespace {

void check_bandwidth(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    raise(ErrorCode::NonPositiveBandwidth, "h = " + std::to_string(h));
  }
}

std::string at(double z) {
  std::ostringstream os;
  os << "z = " << z;
  return os.str();
}

// Kernel weights K_h(Z_k - z); returns the number of positive weights.
Eigen::Index fill_weights(double z, const Eigen::VectorXd& covariate, double h, const KernelSpec& k,
                          Eigen::VectorXd& w) {
  w.resize(covariate.size());
  Eigen::Index positive = 0;
  for (Eigen::Index j = 0; j < covariate.size(); ++j) {
    w(j) = k.eval((covariate(j) - z) / h) / h;
    if (w(j) > 0.0) ++positive;
  }
  return positive;
}

void rows_into(double z, const Eigen::VectorXd& covariate, double h, const KernelSpec& k,
               Eigen::Ref<Eigen::RowVectorXd> level, Eigen::Ref<Eigen::RowVectorXd> slope,
               bool want_level, bool want_slope) {
  check_bandwidth(h);
  Eigen::VectorXd w;
  if (fill_weights(z, covariate, h, k, w) == 0) {
    raise(ErrorCode::EmptyWindow, "no observation within A*h of " + at(z));
  }
  const Eigen::ArrayXd d = covariate.array() - z;
  const double s0 = w.sum();
  const double s1 = (w.array() * d).sum();
  const double s2 = (w.array() * d * d).sum();
  const double det = s0 * s2 - s1 * s1;
  const double trace = s0 + s2;
  if (!(det > 1e-12 * trace * trace)) {
    raise(ErrorCode::SingularLocalFit, "local linear Gram matrix singular at " + at(z));
  }
  // (Z^T W Z)^{-1} = [s2 -s1; -s1 s0] / det
  if (want_level) level = (w.array() * (s2 - s1 * d) / det).matrix().transpose();
  if (want_slope) slope = (w.array() * (s0 * d - s1) / det).matrix().transpose();
}

}  // namespace

LocalDesign local_design(double z, const Eigen::VectorXd& covariate, double h,
                         const KernelSpec& k) {
  check_bandwidth(h);
  LocalDesign out;
  if (fill_weights(z, covariate, h, k, out.Wz) == 0) {
    raise(ErrorCode::EmptyWindow, "no observation within A*h of " + at(z));
  }
  out.Zz.resize(covariate.size(), 2);
  out.Zz.col(0).setOnes();
  out.Zz.col(1) = covariate.array() - z;
  return out;
}

LocalDesign local_design(double z, const PanelDataset& ds, double h, const KernelSpec& k) {
  return local_design(z, ds.z(), h, k);
}

SmootherRows smoother_row(double z, const Eigen::VectorXd& covariate, double h,
                          const KernelSpec& k) {
  SmootherRows rows;
  rows.level.resize(covariate.size());
  rows.slope.resize(covariate.size());
  rows_into(z, covariate, h, k, rows.level, rows.slope, true, true);
  return rows;
}

SmootherRows smoother_row(double z, const PanelDataset& ds, double h, const KernelSpec& k) {
  return smoother_row(z, ds.z(), h, k);
}

SmootherMatrix smoothing_matrix(const Eigen::VectorXd& covariate, double h, const KernelSpec& k) {
  SmootherMatrix out;
  out.h = h;
  out.M = level_rows(covariate, covariate, h, k);
  return out;
}

SmootherMatrix smoothing_matrix(const PanelDataset& ds, double h, const KernelSpec& k) {
  return smoothing_matrix(ds.z(), h, k);
}

namespace {

Eigen::MatrixXd stacked_rows(const Eigen::VectorXd& grid, const Eigen::VectorXd& covariate,
                             double h, const KernelSpec& k, bool level) {
  // Row-major so each row is a contiguous RowVectorXd block.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(grid.size(),
                                                                            covariate.size());
  Eigen::RowVectorXd scratch(covariate.size());
  for (Eigen::Index r = 0; r < grid.size(); ++r) {
    try {
      if (level) {
        rows_into(grid(r), covariate, h, k, out.row(r), scratch, true, false);
      } else {
        rows_into(grid(r), covariate, h, k, scratch, out.row(r), false, true);
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NonPositiveBandwidth) throw;
      raise(e.code(), std::string(e.what()) + " (row " + std::to_string(r) + ")");
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXd level_rows(const Eigen::VectorXd& grid, const Eigen::VectorXd& covariate, double h,
                           const KernelSpec& k) {
  return stacked_rows(grid, covariate, h, k, true);
}

Eigen::MatrixXd slope_rows(const Eigen::VectorXd& grid, const Eigen::VectorXd& covariate, double h,
                           const KernelSpec& k) {
  return stacked_rows(grid, covariate, h, k, false);
}

double local_cubic_d2(const Eigen::VectorXd& targets, const Eigen::VectorXd& covariate,
                      double h_star, const KernelSpec& k, double z) {
  check_bandwidth(h_star);
  if (targets.size() != covariate.size()) {
    raise(ErrorCode::LengthMismatch, "targets and covariate differ in length");
  }
  Eigen::VectorXd w;
  fill_weights(z, covariate, h_star, k, w);

  std::vector<double> in_window;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    if (w(j) > 0.0) in_window.push_back(covariate(j));
  }
  std::sort(in_window.begin(), in_window.end());
  const auto distinct = std::unique(in_window.begin(), in_window.end()) - in_window.begin();
  if (distinct < 4) {
    raise(ErrorCode::SingularLocalFit, "local cubic needs 4 distinct points at " + at(z) +
                                           ", found " + std::to_string(distinct));
  }

  // Powers of the scaled offset u = (Z - z) / h_star keep the Gram matrix well
  // conditioned; the quadratic coefficient is rescaled by h_star^2 afterwards.
  Eigen::Matrix4d gram = Eigen::Matrix4d::Zero();
  Eigen::Vector4d rhs = Eigen::Vector4d::Zero();
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    if (w(j) <= 0.0) continue;
    const double u = (covariate(j) - z) / h_star;
    const Eigen::Vector4d basis(1.0, u, u * u, u * u * u);
    gram.noalias() += w(j) * basis * basis.transpose();
    rhs.noalias() += w(j) * targets(j) * basis;
  }
  const double det = gram.determinant();
  const double scale = gram.diagonal().prod();
  if (!(det > 1e-12 * scale)) {
    raise(ErrorCode::SingularLocalFit, "local cubic Gram matrix singular at " + at(z));
  }
  const Eigen::Vector4d coef = gram.partialPivLu().solve(rhs);
  return 2.0 * coef(2) / (h_star * h_star);
}

double local_cubic_d2(const Eigen::VectorXd& targets, const PanelDataset& ds, double h_star,
                      const KernelSpec& k, double z) {
  return local_cubic_d2(targets, ds.z(), h_star, k, z);
}

}  // namespace plfe
