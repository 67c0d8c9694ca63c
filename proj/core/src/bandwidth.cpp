#include "plfe/bandwidth.hpp"

#include <cmath>
#include <limits>

#include "plfe/error.hpp"
#include "plfe/fe_estimator.hpp"
#include "plfe/parallel.hpp"

namespace plfe {

double cv_score(const PanelDataset& ds, double h, const KernelSpec& k) {
  const auto op = ProfileOperator::build(ds, smoothing_matrix(ds, h, k));
  const Eigen::VectorXd resid = op->residuals(ds.y());
  const Eigen::VectorXd& denom = op->residual_diag();
  double score = 0.0;
  for (Eigen::Index i = 0; i < resid.size(); ++i) {
    if (std::abs(denom(i)) < 1e-10) {
      raise(ErrorCode::LeverageOne,
            "1 - l_kk = " + std::to_string(denom(i)) + " at row " + std::to_string(i));
    }
    const double r = resid(i) / denom(i);
    score += r * r;
  }
  return score;
}

CvCurve select_bandwidth(const PanelDataset& ds, const KernelSpec& k,
                         const Eigen::VectorXd& h_grid) {
  if (h_grid.size() == 0) raise(ErrorCode::InvalidArgument, "empty bandwidth grid");
  for (Eigen::Index i = 0; i < h_grid.size(); ++i) {
    if (!(h_grid(i) > 0.0)) {
      raise(ErrorCode::NonPositiveBandwidth, "candidate " + std::to_string(h_grid(i)));
    }
    if (i > 0 && !(h_grid(i) > h_grid(i - 1))) {
      raise(ErrorCode::InvalidArgument, "bandwidth grid must be strictly increasing");
    }
  }

  CvCurve curve;
  curve.grid = h_grid;
  curve.scores = Eigen::VectorXd::Constant(h_grid.size(), std::numeric_limits<double>::infinity());
  std::vector<std::string> reasons(static_cast<std::size_t>(h_grid.size()));
  parallel_for(static_cast<std::size_t>(h_grid.size()), [&](std::size_t i) {
    const auto idx = static_cast<Eigen::Index>(i);
    try {
      curve.scores(idx) = cv_score(ds, h_grid(idx), k);
    } catch (const Error& e) {
      reasons[i] = e.what();
    }
  });

  Eigen::Index best = -1;
  for (Eigen::Index i = 0; i < h_grid.size(); ++i) {
    if (!reasons[static_cast<std::size_t>(i)].empty() || !std::isfinite(curve.scores(i))) {
      curve.failures.push_back(static_cast<std::size_t>(i));
      curve.failure_reasons.push_back(reasons[static_cast<std::size_t>(i)]);
      curve.scores(i) = std::numeric_limits<double>::infinity();
      continue;
    }
    if (best < 0 || curve.scores(i) < curve.scores(best)) best = i;
  }
  if (best < 0) {
    raise(ErrorCode::AllCandidatesFailed,
          "no candidate bandwidth could be fitted; first failure: " +
              (curve.failure_reasons.empty() ? std::string("none") : curve.failure_reasons.front()));
  }
  curve.h_cv = h_grid(best);
  curve.in_rate_window = in_rate_window(curve.h_cv, ds);
  return curve;
}

std::pair<double, double> rate_window(const PanelDataset& ds) {
  const double n = static_cast<double>(ds.n());
  const double width = ds.interval().width();
  return {std::pow(n, -1.0 / 3.0) * width, std::pow(n, -1.0 / 5.0) * width};
}

bool in_rate_window(double h, const PanelDataset& ds) {
  const auto [lo, hi] = rate_window(ds);
  return h >= lo && h <= hi;
}

Eigen::VectorXd default_bandwidth_grid(const PanelDataset& ds, std::size_t steps) {
  if (steps < 1) raise(ErrorCode::InvalidArgument, "need at least one bandwidth candidate");
  const auto [lo, hi] = rate_window(ds);
  const double a = std::log(0.5 * lo);
  const double b = std::log(2.0 * hi);
  Eigen::VectorXd grid(static_cast<Eigen::Index>(steps));
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = steps == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(steps - 1);
    grid(static_cast<Eigen::Index>(i)) = std::exp(a + t * (b - a));
  }
  return grid;
}

double pilot_bandwidth(const PanelDataset& ds) {
  if (ds.n() < 2) raise(ErrorCode::InvalidShape, "pilot bandwidth needs n >= 2");
  const Eigen::VectorXd& z = ds.z();
  const double mean = z.mean();
  const double var = (z.array() - mean).square().sum() / static_cast<double>(z.size() - 1);
  const double sd = std::sqrt(var);
  if (!(sd > 0.0)) raise(ErrorCode::DegenerateCovariate, "smoothing covariate is constant");
  return sd * std::pow(static_cast<double>(ds.n()), -1.0 / 7.0);
}

}  // namespace plfe
