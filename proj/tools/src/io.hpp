#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "plfe/bandwidth.hpp"
#include "plfe/fe_estimator.hpp"
#include "plfe/scb_asymptotic.hpp"
#include "plfe/sim_harness.hpp"

namespace plfe::cli {

/// Shortest decimal that parses back to the same double; "inf", "-inf", "nan"
/// for non-finite values.
std::string format_double(double v);
double parse_double(const std::string& text);

/// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::json flags;
  std::vector<std::uint64_t> seeds;
  std::string input;
  std::string input_digest;
  double wall_clock_seconds = 0.0;
  /// Command-specific entries merged into the top level (e.g. "band").
  nlohmann::json extra = nlohmann::json::object();

  nlohmann::json to_json() const;
};

/// `out.csv` -> `out.manifest.json`; manifests sit next to the file they describe.
std::filesystem::path manifest_path(const std::filesystem::path& out);
void write_manifest(const std::filesystem::path& out, const RunManifest& m);

void write_text(const std::filesystem::path& path, const std::string& text);

std::string fit_json(const FitResult& fr);
/// z,g,g_prime
std::string fit_grid_csv(const FitResult& fr);

/// z,center,lower,upper
std::string band_csv(const BandResult& b);
/// method, alpha, critical, h, h_star: everything in BandResult that is not a column.
nlohmann::json band_metadata(const BandResult& b);
/// Rebuilds a BandResult from the CSV and the metadata written beside it.
BandResult read_band(const std::filesystem::path& csv, const std::filesystem::path& manifest);

/// h,score
std::string cv_csv(const CvCurve& c);

nlohmann::json report_json(const McReport& r);

}  // namespace plfe::cli
