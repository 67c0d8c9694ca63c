#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace plfe {

/// Closed interval [lo, hi] carrying the smoothing covariate.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double width() const noexcept { return hi - lo; }
  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

/// Balanced panel of n units observed over T periods. Rows are stored in
/// unit-major order: row k = i*T + t (zero-based) holds unit i, period t.
class PanelDataset {
 public:
  /// Throws InvalidShape if the lengths disagree with n*T, and InvalidArgument
  /// if an explicit interval does not contain every covariate value. When the
  /// interval is omitted it defaults to [min z, max z].
  PanelDataset(std::size_t n, std::size_t T, Eigen::VectorXd y, Eigen::MatrixXd X,
               Eigen::VectorXd z, std::optional<Interval> interval = std::nullopt);

  std::size_t n() const noexcept { return n_; }
  std::size_t T() const noexcept { return T_; }
  std::size_t p() const noexcept { return static_cast<std::size_t>(X_.cols()); }
  std::size_t size() const noexcept { return n_ * T_; }

  const Eigen::VectorXd& y() const noexcept { return y_; }
  const Eigen::MatrixXd& X() const noexcept { return X_; }
  const Eigen::VectorXd& z() const noexcept { return z_; }
  const Interval& interval() const noexcept { return interval_; }

  static std::size_t row(std::size_t unit, std::size_t period, std::size_t T) noexcept {
    return unit * T + period;
  }

  /// Same design (X, z, interval) with a different response vector.
  PanelDataset with_response(Eigen::VectorXd y) const;
  PanelDataset with_interval(Interval interval) const;

 private:
  std::size_t n_;
  std::size_t T_;
  Eigen::VectorXd y_;
  Eigen::MatrixXd X_;
  Eigen::VectorXd z_;
  Interval interval_;
};

/// Reads `unit,time,y,z,x1,...,xp`. Unit and time identifiers are numeric and
/// are sorted ascending; the (unit, time) cells must form a complete grid.
PanelDataset load_csv(std::istream& in, std::optional<Interval> interval = std::nullopt);
PanelDataset load_csv_file(const std::string& path,
                           std::optional<Interval> interval = std::nullopt);

/// D = [-e_{n-1}, I_{n-1}]^T (x) e_T, the (nT) x (n-1) dummy matrix encoding
/// fixed effects under the sum-to-zero constraint.
using DummyMatrix = Eigen::MatrixXd;

DummyMatrix build_dummy_matrix(std::size_t n, std::size_t T);

/// D * free_effects, computed without materializing D.
Eigen::VectorXd apply_dummy(const Eigen::VectorXd& free_effects, std::size_t n, std::size_t T);
/// D^T * v (or D^T * V column-wise) without materializing D.
Eigen::MatrixXd apply_dummy_transpose(const Eigen::MatrixXd& v, std::size_t n, std::size_t T);
/// V * D for a matrix with nT columns.
Eigen::MatrixXd right_apply_dummy(const Eigen::MatrixXd& v, std::size_t n, std::size_t T);

/// Expands (alpha_2..alpha_n) to all n effects with alpha_1 = -sum.
Eigen::VectorXd full_effects(const Eigen::VectorXd& free_effects);

struct ValidationReport {
  std::size_t observations = 0;
  std::size_t regressors = 0;
  double z_min = 0.0;
  double z_max = 0.0;
  std::vector<std::string> warnings;
  std::vector<std::string> info;
};

ValidationReport validate(const PanelDataset& ds);

}  // namespace plfe
