#include "commands.hpp"

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "io.hpp"
#include "plfe/bandwidth.hpp"
#include "plfe/bootstrap_scb.hpp"
#include "plfe/error.hpp"
#include "plfe/fe_estimator.hpp"
#include "plfe/kernels.hpp"
#include "plfe/panel_data.hpp"
#include "plfe/parallel.hpp"
#include "plfe/scb_asymptotic.hpp"
#include "plfe/sim_harness.hpp"

namespace plfe::cli {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct DataFlags {
  std::string data;
  std::string kernel = "epanechnikov";
  std::string bandwidth = "auto";
  std::size_t grid = 101;
  std::string out;
};

struct BandFlags {
  std::string method = "asymptotic";
  double alpha = 0.05;
  std::string pilot = "auto";
  std::size_t boot_reps = 200;
  std::uint64_t seed = 1;
};

struct CvFlags {
  std::optional<double> h_min, h_max;
  std::size_t h_steps = 20;
};

struct SimFlags {
  int table = 1;
  std::size_t n = 100, T = 5, reps = 200, boot_reps = 100;
  double c = 0.0, alpha = 0.05;
  std::string method = "asymptotic";
  std::string bandwidth = "rule";
  std::string kernel = "epanechnikov";
  std::uint64_t seed = 1;
  std::string out;
};

const std::vector<std::string> kKernels{"epanechnikov", "uniform"};

// "auto" or a positive number.
CLI::Validator auto_or_positive() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        if (s == "auto") return {};
        try {
          std::size_t used = 0;
          const double v = std::stod(s, &used);
          if (used == s.size() && v > 0.0) return {};
        } catch (const std::exception&) {
        }
        return "expected 'auto' or a positive number, got '" + s + "'";
      },
      "auto|H");
}

void add_data_flags(CLI::App* cmd, DataFlags& f) {
  cmd->add_option("--data", f.data, "Panel CSV: unit,time,y,z,x1,...,xp")->required();
  cmd->add_option("--kernel", f.kernel, "Kernel")->check(CLI::IsMember(kKernels));
  cmd->add_option("--grid", f.grid, "Number of evaluation points")->check(CLI::Range(2, 100000));
  cmd->add_option("--out", f.out, "Output file (stdout when omitted)");
}

struct Loaded {
  PanelDataset ds;
  KernelSpec k;
  nlohmann::json warnings;
};

Loaded load(const DataFlags& f, std::ostream& err) {
  PanelDataset ds = load_csv_file(f.data);
  const ValidationReport rep = validate(ds);
  for (const auto& w : rep.warnings) err << "warning: " << w << "\n";
  return {std::move(ds), kernel_by_name(f.kernel), rep.warnings};
}

double resolve_bandwidth(const std::string& flag, const PanelDataset& ds, const KernelSpec& k,
                         nlohmann::json& extra) {
  if (flag != "auto") {
    extra["bandwidth_source"] = "given";
    return std::stod(flag);
  }
  const CvCurve c = select_bandwidth(ds, k, default_bandwidth_grid(ds));
  extra["bandwidth_source"] = "cross-validation";
  extra["in_rate_window"] = c.in_rate_window;
  return c.h_cv;
}

// Writes `text` to --out (with its manifest beside it) or to stdout.
void emit(const std::string& out_path, const std::string& text, RunManifest& m, Clock::time_point t0,
          std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  write_text(out_path, text);
  m.wall_clock_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  write_manifest(out_path, m);
}

RunManifest manifest_for(const std::string& command, int argc, const char* const* argv,
                         const CLI::App* cmd) {
  RunManifest m;
  m.command = command;
  for (int i = 0; i < argc; ++i) m.argv.emplace_back(argv[i]);
  m.flags = nlohmann::json::object();
  for (const CLI::Option* opt : cmd->get_options()) {
    if (opt->get_single_name() == "help") continue;
    const auto res = opt->results();
    if (!res.empty()) m.flags[opt->get_single_name()] = res.back();
  }
  return m;
}

void add_input(RunManifest& m, const std::string& path) {
  m.input = path;
  m.input_digest = file_digest(path);
}

int cmd_fit(const DataFlags& f, RunManifest m, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  const Loaded in = load(f, err);
  add_input(m, f.data);
  m.extra["data_warnings"] = in.warnings;
  const double h = resolve_bandwidth(f.bandwidth, in.ds, in.k, m.extra);
  FitOptions opts;
  opts.grid_points = f.grid;
  const FitResult fr = fit(in.ds, h, in.k, opts);
  if (f.out.empty()) {
    out << fit_json(fr);
    return 0;
  }
  fs::path grid_path = f.out;
  grid_path.replace_extension(".grid.csv");
  write_text(grid_path, fit_grid_csv(fr));
  m.extra["grid_file"] = grid_path.string();
  emit(f.out, fit_json(fr), m, t0, out);
  return 0;
}

int cmd_band(const DataFlags& f, const BandFlags& b, RunManifest m, std::ostream& out,
             std::ostream& err) {
  const auto t0 = Clock::now();
  const Loaded in = load(f, err);
  add_input(m, f.data);
  m.extra["data_warnings"] = in.warnings;
  const double h = resolve_bandwidth(f.bandwidth, in.ds, in.k, m.extra);
  FitOptions opts;
  opts.grid_points = f.grid;
  const FitResult fr = fit(in.ds, h, in.k, opts);

  BandResult band;
  if (b.method == "asymptotic") {
    std::optional<double> pilot;
    if (b.pilot != "auto") pilot = std::stod(b.pilot);
    band = asymptotic_band(fr, in.ds, in.k, fr.grid, b.alpha, pilot);
  } else if (b.method == "derivative") {
    band = derivative_band(fr, in.ds, in.k, fr.grid, b.alpha);
  } else {
    BootstrapConfig bc;
    bc.reps = b.boot_reps;
    bc.seed = b.seed;
    const BootstrapResult br = bootstrap_band(in.ds, fr, in.k, b.alpha, bc);
    band = br.band;
    m.seeds.push_back(b.seed);
  }
  m.extra["band"] = band_metadata(band);
  emit(f.out, band_csv(band), m, t0, out);
  return 0;
}

int cmd_cv(const DataFlags& f, const CvFlags& c, RunManifest m, std::ostream& out,
           std::ostream& err) {
  const auto t0 = Clock::now();
  const Loaded in = load(f, err);
  add_input(m, f.data);
  m.extra["data_warnings"] = in.warnings;
  Eigen::VectorXd grid;
  if (c.h_min || c.h_max) {
    if (!c.h_min || !c.h_max) raise(ErrorCode::InvalidArgument, "give both --h-min and --h-max");
    if (c.h_steps == 1) {
      grid = Eigen::VectorXd::Constant(1, *c.h_min);
    } else {
      grid.resize(static_cast<Eigen::Index>(c.h_steps));
      const double ratio = std::log(*c.h_max / *c.h_min) / static_cast<double>(c.h_steps - 1);
      for (Eigen::Index i = 0; i < grid.size(); ++i) {
        grid(i) = *c.h_min * std::exp(ratio * static_cast<double>(i));
      }
      grid(grid.size() - 1) = *c.h_max;
    }
  } else {
    grid = default_bandwidth_grid(in.ds, c.h_steps);
  }
  const CvCurve curve = select_bandwidth(in.ds, in.k, grid);
  if (!curve.in_rate_window) err << "warning: h_cv lies outside the undersmoothing rate window\n";
  for (std::size_t i = 0; i < curve.failures.size(); ++i) {
    err << "warning: h = " << format_double(curve.grid(static_cast<Eigen::Index>(curve.failures[i])))
        << " failed: " << curve.failure_reasons[i] << "\n";
  }
  m.extra["h_cv"] = curve.h_cv;
  m.extra["in_rate_window"] = curve.in_rate_window;
  emit(f.out, cv_csv(curve), m, t0, out);
  return 0;
}

int cmd_simulate(const SimFlags& s, RunManifest m, std::ostream& out) {
  const auto t0 = Clock::now();
  DgpConfig cfg;
  cfg.n = s.n;
  cfg.T = s.T;
  cfg.c = s.c;
  cfg.seed = s.seed;
  BandwidthPolicy policy;
  if (s.bandwidth == "cv") {
    policy.kind = BandwidthPolicy::Kind::CrossValidation;
  } else if (s.bandwidth != "rule") {
    policy.h = std::stod(s.bandwidth);
  }
  const KernelSpec k = kernel_by_name(s.kernel);
  const McReport r =
      s.table == 1 ? run_table1(cfg, s.reps, policy, k)
                   : run_table2(cfg, s.reps,
                                s.method == "bootstrap" ? CoverageMethod::Bootstrap
                                                        : CoverageMethod::Asymptotic,
                                s.alpha, s.boot_reps, policy, k);
  m.seeds.push_back(s.seed);
  emit(s.out, report_json(r).dump(2) + "\n", m, t0, out);
  return 0;
}

int cmd_kernel_info(const std::string& name, bool json, std::ostream& out) {
  const KernelSpec k = kernel_by_name(name);
  const KernelMoments& m = k.moments();
  const std::vector<std::pair<std::string, double>> rows{
      {"A", k.support()},         {"K(A)", k.boundary_value()}, {"mu0", m.mu0},
      {"mu2", m.mu2},             {"nu0", m.nu0},               {"nu2", m.nu2},
      {"int_dK2", m.int_dk_sq},   {"int_z2_dK2", m.int_z2_dk_sq},
  };
  if (json) {
    nlohmann::json j;
    j["kernel"] = k.name();
    for (const auto& [key, v] : rows) j[key] = v;
    j["d_n_case"] = k.vanishes_at_boundary() ? "vanishing" : "boundary";
    out << j.dump(2) << "\n";
    return 0;
  }
  out << "kernel " << k.name() << "\n" << std::setprecision(12);
  for (const auto& [key, v] : rows) out << key << " = " << v << "\n";
  out << "d_n case: " << (k.vanishes_at_boundary() ? "K(A) = 0" : "K(A) != 0") << "\n";
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Partially linear panel models with fixed effects: fits and confidence bands"};
  app.name("plfe");
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker threads (0: all cores)");

  DataFlags fit_f, band_f, cv_f;
  BandFlags band_b;
  CvFlags cv_c;
  SimFlags sim;
  std::string kernel_name = "epanechnikov";
  bool kernel_json = false;

  CLI::App* fit_cmd = app.add_subcommand("fit", "Estimate beta, alpha, sigma^2 and g on a grid");
  add_data_flags(fit_cmd, fit_f);
  fit_cmd->add_option("--bandwidth", fit_f.bandwidth, "h, or auto for cross-validation")
      ->check(auto_or_positive());

  CLI::App* band_cmd = app.add_subcommand("band", "Simultaneous confidence band");
  add_data_flags(band_cmd, band_f);
  band_cmd->add_option("--bandwidth", band_f.bandwidth, "h, or auto for cross-validation")
      ->check(auto_or_positive());
  band_cmd->add_option("--method", band_b.method, "Band construction")
      ->check(CLI::IsMember({"asymptotic", "bootstrap", "derivative"}));
  band_cmd->add_option("--alpha", band_b.alpha, "1 - nominal level")->check(CLI::Range(1e-6, 0.999999));
  band_cmd->add_option("--pilot", band_b.pilot, "Pilot bandwidth h*, or auto")->check(auto_or_positive());
  band_cmd->add_option("--boot-reps", band_b.boot_reps, "Bootstrap replicates")->check(CLI::Range(2, 1000000));
  band_cmd->add_option("--seed", band_b.seed, "Bootstrap seed");

  CLI::App* cv_cmd = app.add_subcommand("cv", "Cross-validation curve and h_cv");
  add_data_flags(cv_cmd, cv_f);
  cv_cmd->add_option("--h-min", cv_c.h_min, "Smallest candidate")->check(CLI::PositiveNumber);
  cv_cmd->add_option("--h-max", cv_c.h_max, "Largest candidate")->check(CLI::PositiveNumber);
  cv_cmd->add_option("--h-steps", cv_c.h_steps, "Number of log-spaced candidates")
      ->check(CLI::Range(1, 10000));

  CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte Carlo tables on the simulation design");
  sim_cmd->add_option("--table", sim.table, "1: coefficient accuracy, 2: band coverage")
      ->required()
      ->check(CLI::IsMember({1, 2}));
  sim_cmd->add_option("--n", sim.n, "Units")->check(CLI::Range(2, 100000));
  sim_cmd->add_option("--T", sim.T, "Periods")->check(CLI::Range(2, 100000));
  sim_cmd->add_option("--c", sim.c, "Correlation of the fixed effects with Z");
  sim_cmd->add_option("--reps", sim.reps, "Replicates")->check(CLI::Range(1, 10000000));
  sim_cmd->add_option("--method", sim.method, "Band for table 2")
      ->check(CLI::IsMember({"asymptotic", "bootstrap"}));
  sim_cmd->add_option("--alpha", sim.alpha, "1 - nominal level")->check(CLI::Range(1e-6, 0.999999));
  sim_cmd->add_option("--boot-reps", sim.boot_reps, "Bootstrap replicates")->check(CLI::Range(2, 1000000));
  sim_cmd->add_option("--bandwidth", sim.bandwidth, "rule (n^-1/4 range), cv, or a fixed h");
  sim_cmd->add_option("--kernel", sim.kernel, "Kernel")->check(CLI::IsMember(kKernels));
  sim_cmd->add_option("--seed", sim.seed, "Master seed");
  sim_cmd->add_option("--out", sim.out, "Report JSON (stdout when omitted)");

  CLI::App* kinfo = app.add_subcommand("kernel-info", "Print kernel constants");
  kinfo->add_option("--kernel", kernel_name, "Kernel")->check(CLI::IsMember(kKernels));
  kinfo->add_flag("--json", kernel_json, "Emit JSON");

  try {
    app.parse(argc, argv);
    if (sim_cmd->parsed() && sim.bandwidth != "rule" && sim.bandwidth != "cv") {
      std::size_t used = 0;
      double h = 0.0;
      try {
        h = std::stod(sim.bandwidth, &used);
      } catch (const std::exception&) {
      }
      if (used != sim.bandwidth.size() || !(h > 0.0)) {
        throw CLI::ValidationError("--bandwidth", "expected rule, cv or a positive number");
      }
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
      return 0;
    }
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  if (threads > 0) set_max_threads(threads);

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit_f, manifest_for("fit", argc, argv, fit_cmd), out, err);
    if (band_cmd->parsed()) {
      return cmd_band(band_f, band_b, manifest_for("band", argc, argv, band_cmd), out, err);
    }
    if (cv_cmd->parsed()) return cmd_cv(cv_f, cv_c, manifest_for("cv", argc, argv, cv_cmd), out, err);
    if (sim_cmd->parsed()) return cmd_simulate(sim, manifest_for("simulate", argc, argv, sim_cmd), out);
    return cmd_kernel_info(kernel_name, kernel_json, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace plfe::cli
