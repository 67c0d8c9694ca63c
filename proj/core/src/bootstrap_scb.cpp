#include "plfe/bootstrap_scb.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "plfe/error.hpp"
#include "plfe/parallel.hpp"
#include "plfe/rng.hpp"

namespace plfe {

double sup_statistic(const Eigen::VectorXd& g_star, const Eigen::VectorXd& g_hat,
                     const Eigen::VectorXd& var_star) {
  if (g_star.size() != g_hat.size() || g_star.size() != var_star.size()) {
    raise(ErrorCode::LengthMismatch, "sup statistic inputs differ in length");
  }
  double sup = 0.0;
  for (Eigen::Index g = 0; g < g_star.size(); ++g) {
    if (!(var_star(g) > 0.0)) {
      raise(ErrorCode::DegenerateVariance, "zero bootstrap variance at grid index " +
                                               std::to_string(g));
    }
    sup = std::max(sup, std::abs(g_star(g) - g_hat(g)) / std::sqrt(var_star(g)));
  }
  return sup;
}

double percentile_upper(std::span<const double> samples, double alpha) {
  if (samples.empty()) raise(ErrorCode::EmptySample, "no samples");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    raise(ErrorCode::DomainError, "alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double N = static_cast<double>(sorted.size());
  // Guard the ceiling against representation error in (1 - alpha) N,
  // e.g. 0.95 * 100 = 95.00000000000001.
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * N - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

Eigen::MatrixXd level_operator(const FitResult& fr, const PanelDataset& ds, const KernelSpec& k,
                               const Eigen::VectorXd& grid) {
  const ProfileOperator& op = *fr.projections;
  Eigen::MatrixXd A = op.right_apply_q1(level_rows(grid, ds.z(), fr.h, k));
  if (ds.p() > 0) A -= (A * ds.X()) * op.beta_map();
  return A;
}

BootstrapResult bootstrap_band(const PanelDataset& ds, const FitResult& fr, const KernelSpec& k,
                               double alpha, const BootstrapConfig& cfg) {
  if (cfg.reps < 2) raise(ErrorCode::InvalidArgument, "bootstrap needs at least 2 replicates");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    raise(ErrorCode::DomainError, "alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
  const Eigen::VectorXd grid = cfg.grid.size() > 0 ? cfg.grid : fr.grid;
  const Interval& iv = ds.interval();
  const double slack = 1e-12 * std::max(1.0, iv.width());
  if (grid.minCoeff() < iv.lo - slack || grid.maxCoeff() > iv.hi + slack) {
    raise(ErrorCode::InvalidArgument, "bootstrap grid leaves the data interval");
  }

  Eigen::VectorXd g_hat(grid.size());
  if (grid.size() == fr.grid.size() && grid == fr.grid) {
    g_hat = fr.g_hat;
  } else {
    for (Eigen::Index g = 0; g < grid.size(); ++g) g_hat(g) = g_at(fr, ds, k, grid(g)).level;
  }

  const Eigen::MatrixXd A = level_operator(fr, ds, k, grid);
  const Eigen::MatrixXd B = fr.projections->beta_map();
  const Eigen::VectorXd fitted = fr.fitted(ds);
  const Eigen::VectorXd& resid = fr.residuals;
  const auto N = static_cast<Eigen::Index>(cfg.reps);
  const auto nT = static_cast<Eigen::Index>(ds.size());

  BootstrapResult out;
  out.g_star.resize(grid.size(), N);
  out.beta_star.resize(static_cast<Eigen::Index>(ds.p()), N);
  parallel_for(cfg.reps, [&](std::size_t rep) {
    auto gen = make_stream(cfg.seed, {static_cast<std::uint64_t>(rep)});
    const Eigen::VectorXd y_star =
        fitted + resid.cwiseProduct(standard_normals(gen, nT));
    const auto col = static_cast<Eigen::Index>(rep);
    out.g_star.col(col) = A * y_star;
    if (B.rows() > 0) out.beta_star.col(col) = B * y_star;
  });

  const Eigen::VectorXd mean = out.g_star.rowwise().mean();
  out.var_star = (out.g_star.colwise() - mean).rowwise().squaredNorm() / static_cast<double>(N - 1);
  const double scale = std::max(1.0, ds.y().cwiseAbs().maxCoeff());
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    if (!(std::sqrt(out.var_star(g)) > 1e-10 * scale)) {
      raise(ErrorCode::DegenerateVariance,
            "bootstrap variance vanishes at grid index " + std::to_string(g) +
                " (residuals are numerically zero)");
    }
  }

  out.T_stats.resize(N);
  for (Eigen::Index rep = 0; rep < N; ++rep) {
    out.T_stats(rep) = sup_statistic(out.g_star.col(rep), g_hat, out.var_star);
  }
  out.c_hat = percentile_upper(std::span<const double>(out.T_stats.data(), out.T_stats.size()),
                               alpha);

  BandResult& band = out.band;
  band.grid = grid;
  band.center = g_hat;
  band.method = BandMethod::Bootstrap;
  band.alpha = alpha;
  band.critical = out.c_hat;
  band.h = fr.h;
  const Eigen::VectorXd half = out.c_hat * out.var_star.array().sqrt().matrix();
  band.lower = g_hat - half;
  band.upper = g_hat + half;
  return out;
}

}  // namespace plfe
