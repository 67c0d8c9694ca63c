#include "plfe/sim_harness.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "plfe/bandwidth.hpp"
#include "plfe/bootstrap_scb.hpp"
#include "plfe/error.hpp"
#include "plfe/fe_estimator.hpp"
#include "plfe/parallel.hpp"
#include "plfe/rng.hpp"
#include "plfe/scb_asymptotic.hpp"

namespace plfe {

double GroundTruth::g(double z) { return 0.8 * std::cos(std::numbers::pi * z); }
double GroundTruth::g_prime(double z) {
  return -0.8 * std::numbers::pi * std::sin(std::numbers::pi * z);
}
double GroundTruth::g_second(double z) {
  return -0.8 * std::numbers::pi * std::numbers::pi * std::cos(std::numbers::pi * z);
}

SimulatedPanel generate(const DgpConfig& cfg) {
  if (cfg.n < 2 || cfg.T < 2) {
    raise(ErrorCode::InvalidConfig, "simulation needs n >= 2 and T >= 2");
  }
  const auto n = static_cast<Eigen::Index>(cfg.n);
  const auto T = static_cast<Eigen::Index>(cfg.T);
  const Eigen::Index N = n * T;
  const Eigen::Index p = cfg.beta.size();

  auto gen = make_stream(cfg.seed, {});
  Eigen::MatrixXd X(N, p);
  for (Eigen::Index k = 0; k < N; ++k) X.row(k) = uniforms(gen, p, -1.0, 1.0).transpose();
  const Eigen::VectorXd z = uniforms(gen, N, -1.0, 1.0);
  const Eigen::VectorXd v = standard_normals(gen, N);
  const Eigen::VectorXd eps = standard_normals(gen, n - 1);

  Eigen::VectorXd alpha(n);
  for (Eigen::Index i = 1; i < n; ++i) {
    alpha(i) = eps(i - 1) + cfg.c * z.segment(i * T, T).mean();
  }
  alpha(0) = -alpha.tail(n - 1).sum();

  Eigen::VectorXd y(N);
  for (Eigen::Index k = 0; k < N; ++k) {
    double xb = p > 0 ? X.row(k).dot(cfg.beta) : 0.0;
    y(k) = xb + GroundTruth::g(z(k)) + alpha(k / T) + v(k);
  }
  return {PanelDataset(cfg.n, cfg.T, std::move(y), std::move(X), z), {cfg.beta, alpha}};
}

double PopulationOracle::density() const { return static_cast<double>(T) / 2.0; }

double PopulationOracle::sigma_bar2() const {
  const double t = static_cast<double>(T);
  const double sigma_t2 = 1.0 - 1.0 / t;
  return t * sigma_t2 * 0.5;
}

double PopulationOracle::Sigma_g(const KernelSpec& k) const {
  const double f = density();
  return k.moments().nu0 * sigma_bar2() / (f * f);
}

double PopulationOracle::Sigma_gp(const KernelSpec& k) const {
  const double f = density();
  const double mu2 = k.moments().mu2;
  return k.moments().nu2 * sigma_bar2() / (f * f * mu2 * mu2);
}

std::string BandwidthPolicy::describe() const {
  std::ostringstream os;
  if (kind == Kind::CrossValidation) {
    os << "cross-validation per replicate (" << cv_steps << " log-spaced candidates)";
  } else if (h) {
    os << "fixed h = " << *h;
  } else {
    os << "fixed h = n^(-1/4) * range(Z) per replicate";
  }
  return os.str();
}

double fixed_rule_bandwidth(const PanelDataset& ds) {
  const double range = ds.z().maxCoeff() - ds.z().minCoeff();
  return std::pow(static_cast<double>(ds.n()), -0.25) * range;
}

std::string to_string(CoverageMethod method) {
  return method == CoverageMethod::Asymptotic ? "asymptotic" : "bootstrap";
}

namespace {

double choose_bandwidth(const PanelDataset& ds, const KernelSpec& k, const BandwidthPolicy& policy) {
  if (policy.kind == BandwidthPolicy::Kind::CrossValidation) {
    return select_bandwidth(ds, k, default_bandwidth_grid(ds, policy.cv_steps)).h_cv;
  }
  return policy.h ? *policy.h : fixed_rule_bandwidth(ds);
}

struct ReplicateOutcome {
  bool ok = false;
  std::string error;
  Eigen::VectorXd beta_error;
  bool covered = false;
  double mean_half_width = 0.0;
};

template <typename Body>
std::vector<ReplicateOutcome> run_replicates(const DgpConfig& cfg, std::size_t reps, Body&& body) {
  std::vector<ReplicateOutcome> outcomes(reps);
  parallel_for(reps, [&](std::size_t r) {
    DgpConfig rc = cfg;
    rc.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(r)});
    try {
      const SimulatedPanel sim = generate(rc);
      outcomes[r] = body(sim, rc.seed);
      outcomes[r].ok = true;
    } catch (const Error& e) {
      outcomes[r].error = e.what();
    }
  });
  return outcomes;
}

void tally(McReport& report, const std::vector<ReplicateOutcome>& outcomes) {
  for (const auto& o : outcomes) {
    if (!o.ok) {
      ++report.failures;
      if (report.failure_messages.size() < 10) report.failure_messages.push_back(o.error);
    }
  }
  if (static_cast<double>(report.failures) > 0.05 * static_cast<double>(report.reps)) {
    raise(ErrorCode::TooManyFailures,
          std::to_string(report.failures) + " of " + std::to_string(report.reps) +
              " replicates failed; first: " +
              (report.failure_messages.empty() ? "" : report.failure_messages.front()));
  }
}

std::vector<CoefficientSummary> summarize(const std::vector<ReplicateOutcome>& outcomes,
                                          Eigen::Index p) {
  std::vector<CoefficientSummary> out(static_cast<std::size_t>(p));
  std::vector<const Eigen::VectorXd*> ok;
  for (const auto& o : outcomes) {
    if (o.ok) ok.push_back(&o.beta_error);
  }
  const double m = static_cast<double>(ok.size());
  for (Eigen::Index j = 0; j < p; ++j) {
    double sum = 0.0, sum2 = 0.0;
    for (const auto* e : ok) {
      sum += (*e)(j);
      sum2 += (*e)(j) * (*e)(j);
    }
    const double mean = sum / m;
    double ss = 0.0;
    for (const auto* e : ok) ss += ((*e)(j) - mean) * ((*e)(j) - mean);
    auto& s = out[static_cast<std::size_t>(j)];
    s.bias = mean;
    s.sd = m > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
    s.mse = sum2 / m;
  }
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

McReport run_table1(const DgpConfig& cfg, std::size_t reps, const BandwidthPolicy& policy,
                    const KernelSpec& k) {
  if (reps < 2) raise(ErrorCode::InvalidConfig, "need at least 2 replicates");
  const auto start = std::chrono::steady_clock::now();
  McReport report;
  report.table = 1;
  report.config = cfg;
  report.reps = reps;
  report.bandwidth_policy = policy.describe();
  report.kernel = k.name();

  const auto outcomes = run_replicates(cfg, reps, [&](const SimulatedPanel& sim, std::uint64_t) {
    const double h = choose_bandwidth(sim.data, k, policy);
    FitOptions opts;
    opts.grid_points = 2;
    const FitResult fr = fit(sim.data, h, k, opts);
    ReplicateOutcome o;
    o.beta_error = fr.beta_hat - sim.truth.beta;
    return o;
  });
  tally(report, outcomes);
  report.coefficients = summarize(outcomes, cfg.beta.size());
  report.wall_clock_seconds = seconds_since(start);
  return report;
}

McReport run_table2(const DgpConfig& cfg, std::size_t reps, CoverageMethod method, double alpha,
                    std::size_t boot_reps, const BandwidthPolicy& policy, const KernelSpec& k) {
  if (reps < 2) raise(ErrorCode::InvalidConfig, "need at least 2 replicates");
  if (method == CoverageMethod::Bootstrap && boot_reps < 2) {
    raise(ErrorCode::InvalidConfig, "bootstrap needs at least 2 replications");
  }
  const auto start = std::chrono::steady_clock::now();
  McReport report;
  report.table = 2;
  report.config = cfg;
  report.reps = reps;
  report.method = method;
  report.alpha = alpha;
  report.boot_reps = method == CoverageMethod::Bootstrap ? boot_reps : 0;
  report.bandwidth_policy = policy.describe();
  report.kernel = k.name();

  const auto outcomes =
      run_replicates(cfg, reps, [&](const SimulatedPanel& sim, std::uint64_t seed) {
        const PanelDataset& ds = sim.data;
        const double h = choose_bandwidth(ds, k, policy);
        const FitResult fr = fit(ds, h, k);
        BandResult band;
        if (method == CoverageMethod::Asymptotic) {
          band = asymptotic_band(fr, ds, k, fr.grid, alpha);
        } else {
          BootstrapConfig bc;
          bc.reps = boot_reps;
          bc.seed = derive_seed(seed, {0xB007});
          band = bootstrap_band(ds, fr, k, alpha, bc).band;
        }
        ReplicateOutcome o;
        o.beta_error = fr.beta_hat - sim.truth.beta;
        o.covered = true;
        for (Eigen::Index g = 0; g < band.grid.size(); ++g) {
          const double truth = GroundTruth::g(band.grid(g));
          if (truth < band.lower(g) || truth > band.upper(g)) {
            o.covered = false;
            break;
          }
        }
        o.mean_half_width = 0.5 * (band.upper - band.lower).mean();
        return o;
      });
  tally(report, outcomes);
  report.coefficients = summarize(outcomes, cfg.beta.size());
  double covered = 0.0, width = 0.0, ok = 0.0;
  for (const auto& o : outcomes) {
    if (!o.ok) continue;
    ok += 1.0;
    covered += o.covered ? 1.0 : 0.0;
    width += o.mean_half_width;
  }
  report.coverage = covered / ok;
  report.mean_half_width = width / ok;
  report.wall_clock_seconds = seconds_since(start);
  return report;
}

}  // namespace plfe
