#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "plfe/kernels.hpp"
#include "plfe/panel_data.hpp"

namespace plfe {

/// CV(h) = sum_k (V_k / (1 - l_kk))^2 with V = (I - M) Q1 Q2 Y and l_kk the
/// diagonal of I - (I - M) Q1 Q2. Throws LeverageOne when some
/// |1 - l_kk| < 1e-10.
double cv_score(const PanelDataset& ds, double h, const KernelSpec& k);

struct CvCurve {
  Eigen::VectorXd grid;
  Eigen::VectorXd scores;  // +inf where the fit failed
  double h_cv = 0.0;
  std::vector<std::size_t> failures;
  std::vector<std::string> failure_reasons;
  bool in_rate_window = true;
};

/// Scores every candidate and returns the minimizer (smallest h on ties).
/// Candidates that fail are recorded; throws AllCandidatesFailed if none fit.
CvCurve select_bandwidth(const PanelDataset& ds, const KernelSpec& k, const Eigen::VectorXd& h_grid);

/// `steps` log-spaced candidates over [0.5 n^{-1/3}, 2 n^{-1/5}] * (d - c).
Eigen::VectorXd default_bandwidth_grid(const PanelDataset& ds, std::size_t steps = 20);

/// [n^{-1/3}, n^{-1/5}] * (d - c), the undersmoothing window for the bands.
std::pair<double, double> rate_window(const PanelDataset& ds);
bool in_rate_window(double h, const PanelDataset& ds);

/// h* = sd(Z) * n^{-1/7} with n the number of units. Throws
/// DegenerateCovariate for constant Z.
double pilot_bandwidth(const PanelDataset& ds);

}  // namespace plfe
