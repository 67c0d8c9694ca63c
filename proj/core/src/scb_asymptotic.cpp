#include "plfe/scb_asymptotic.hpp"

#include <cmath>
#include <numbers>

#include "plfe/bandwidth.hpp"
#include "plfe/error.hpp"

namespace plfe {

std::string to_string(BandMethod method) {
  switch (method) {
    case BandMethod::AsymptoticLevel: return "asymptotic-level";
    case BandMethod::AsymptoticDerivative: return "asymptotic-derivative";
    case BandMethod::Bootstrap: return "bootstrap";
  }
  return "unknown";
}

BandMethod band_method_from_string(const std::string& tag) {
  if (tag == "asymptotic-level") return BandMethod::AsymptoticLevel;
  if (tag == "asymptotic-derivative") return BandMethod::AsymptoticDerivative;
  if (tag == "bootstrap") return BandMethod::Bootstrap;
  raise(ErrorCode::InvalidArgument, "unknown band method '" + tag + "'");
}

double gumbel_quantile(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    raise(ErrorCode::DomainError, "alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
  return std::numbers::ln2 - std::log(-std::log1p(-alpha));
}

namespace {

double check_h_eff(double h_eff) {
  if (!(h_eff > 0.0)) {
    raise(ErrorCode::NonPositiveBandwidth, "h_eff = " + std::to_string(h_eff));
  }
  if (!(std::log(h_eff) < 0.0)) {
    raise(ErrorCode::BandwidthTooLarge,
          "effective bandwidth " + std::to_string(h_eff) + " must be below 1");
  }
  return std::sqrt(-2.0 * std::log(h_eff));
}

}  // namespace

double compute_dn(double h_eff, const KernelSpec& k) {
  const double root = check_h_eff(h_eff);
  const KernelMoments& m = k.moments();
  double log_term = 0.0;
  if (k.vanishes_at_boundary()) {
    log_term = std::log(m.int_dk_sq / (4.0 * m.nu0 * std::numbers::pi));
  } else {
    const double ka = k.boundary_value();
    log_term = std::log(ka * ka / (m.nu0 * std::sqrt(std::numbers::pi))) +
               0.5 * std::log(std::log(1.0 / h_eff));
  }
  return root + log_term / root;
}

double compute_dn1(double h_eff, const KernelSpec& k) {
  if (!k.vanishes_at_boundary()) {
    raise(ErrorCode::KernelCaseUnsupported,
          "derivative band needs K(A) = 0; kernel '" + k.name() + "' has K(A) = " +
              std::to_string(k.boundary_value()));
  }
  const double root = check_h_eff(h_eff);
  const KernelMoments& m = k.moments();
  const double c = std::sqrt(m.int_z2_dk_sq) / (2.0 * std::numbers::pi * std::sqrt(m.nu2));
  return root + std::log(c) / root;
}

double effective_bandwidth(double h, const Interval& interval) {
  if (!(interval.width() > 0.0)) {
    raise(ErrorCode::DegenerateCovariate, "covariate interval has zero width");
  }
  return h / interval.width();
}

AsymptoticConstants asymptotic_constants(double h_eff, const KernelSpec& k, double alpha) {
  AsymptoticConstants c;
  c.d_n = compute_dn(h_eff, k);
  if (k.vanishes_at_boundary()) c.d_n1 = compute_dn1(h_eff, k);
  c.u_alpha = gumbel_quantile(alpha);
  c.log_h_eff = -2.0 * std::log(h_eff);
  return c;
}

Eigen::VectorXd bias_correction(const FitResult& fr, const PanelDataset& ds, const KernelSpec& k,
                                const Eigen::VectorXd& grid, double h, double h_star) {
  const double factor = h * h * k.moments().mu2 / 2.0;
  Eigen::VectorXd out(grid.size());
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    try {
      out(g) = factor * local_cubic_d2(fr.partialled, ds.z(), h_star, k, grid(g));
    } catch (const Error& e) {
      raise(e.code(), std::string(e.what()) + " (grid index " + std::to_string(g) + ")");
    }
  }
  return out;
}

namespace {

void check_grid(const Eigen::VectorXd& grid, const PanelDataset& ds) {
  if (grid.size() == 0) raise(ErrorCode::InvalidArgument, "empty grid");
  const Interval& iv = ds.interval();
  const double slack = 1e-12 * std::max(1.0, iv.width());
  if (grid.minCoeff() < iv.lo - slack || grid.maxCoeff() > iv.hi + slack) {
    raise(ErrorCode::InvalidArgument, "grid leaves the data interval");
  }
}

}  // namespace

BandResult asymptotic_band(const FitResult& fr, const PanelDataset& ds, const KernelSpec& k,
                           const Eigen::VectorXd& grid, double alpha,
                           std::optional<double> h_star) {
  check_grid(grid, ds);
  const double pilot = h_star ? *h_star : pilot_bandwidth(ds);
  const double h_eff = effective_bandwidth(fr.h, ds.interval());
  const double u = gumbel_quantile(alpha);
  const double critical = compute_dn(h_eff, k) + u / std::sqrt(-2.0 * std::log(h_eff));

  BandResult band;
  band.grid = grid;
  band.method = BandMethod::AsymptoticLevel;
  band.alpha = alpha;
  band.critical = critical;
  band.h = fr.h;
  band.h_star = pilot;

  Eigen::VectorXd g_hat(grid.size());
  for (Eigen::Index g = 0; g < grid.size(); ++g) g_hat(g) = g_at(fr, ds, k, grid(g)).level;
  band.center = g_hat - bias_correction(fr, ds, k, grid, fr.h, pilot);
  const Eigen::VectorXd half =
      critical * conditional_variance_grid(fr, ds, k, grid).array().sqrt().matrix();
  band.lower = band.center - half;
  band.upper = band.center + half;
  return band;
}

BandResult derivative_band(const FitResult& fr, const PanelDataset& ds, const KernelSpec& k,
                           const Eigen::VectorXd& grid, double alpha) {
  check_grid(grid, ds);
  const double h_eff = effective_bandwidth(fr.h, ds.interval());
  const double dn1 = compute_dn1(h_eff, k);
  const double critical = dn1 + gumbel_quantile(alpha) / std::sqrt(-2.0 * std::log(h_eff));

  BandResult band;
  band.grid = grid;
  band.method = BandMethod::AsymptoticDerivative;
  band.alpha = alpha;
  band.critical = critical;
  band.h = fr.h;

  band.center.resize(grid.size());
  for (Eigen::Index g = 0; g < grid.size(); ++g) band.center(g) = g_at(fr, ds, k, grid(g)).slope;
  const Eigen::VectorXd half =
      critical * slope_conditional_variance_grid(fr, ds, k, grid).array().sqrt().matrix();
  band.lower = band.center - half;
  band.upper = band.center + half;
  return band;
}

}  // namespace plfe
