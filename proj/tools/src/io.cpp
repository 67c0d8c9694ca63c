#include "io.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <system_error>

#include "plfe/error.hpp"
#include "plfe/version.hpp"

namespace plfe::cli {

namespace {

void check_columns(const std::vector<std::string>& cells, std::size_t expected, std::size_t line) {
  if (cells.size() != expected) {
    raise(ErrorCode::InvalidShape, "band file line " + std::to_string(line) + " has " +
                                       std::to_string(cells.size()) + " fields");
  }
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream s(line);
  std::string cell;
  while (std::getline(s, cell, ',')) out.push_back(cell);
  return out;
}

nlohmann::json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.begin(), v.end()); }

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  if (text == "inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  if (text == "nan") return NAN;
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    raise(ErrorCode::NonNumericField, "not a number: '" + text + "'");
  }
  return v;
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::EmptyInput, "cannot open '" + path.string() + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::istreambuf_iterator<char> it(in), end; it != end; ++it) {
    h ^= static_cast<unsigned char>(*it);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["argv"] = argv;
  j["flags"] = flags;
  j["seeds"] = seeds;
  j["library_version"] = kVersion;
  if (!input.empty()) {
    j["input"] = input;
    j["input_digest"] = {{"fnv1a64", input_digest}};
  }
  j["wall_clock_seconds"] = wall_clock_seconds;
  for (const auto& [key, value] : extra.items()) j[key] = value;
  return j;
}

std::filesystem::path manifest_path(const std::filesystem::path& out) {
  std::filesystem::path p = out;
  p.replace_extension(".manifest.json");
  return p;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) raise(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
  f << text;
  if (!f) raise(ErrorCode::InvalidArgument, "failed writing '" + path.string() + "'");
}

void write_manifest(const std::filesystem::path& out, const RunManifest& m) {
  write_text(manifest_path(out), m.to_json().dump(2) + "\n");
}

std::string fit_json(const FitResult& fr) {
  nlohmann::json j;
  j["h"] = fr.h;
  j["beta_hat"] = vec(fr.beta_hat);
  j["alpha_hat"] = vec(fr.alpha_hat);
  j["sigma2_hat"] = fr.sigma2_hat;
  j["warnings"] = fr.warnings;
  return j.dump(2) + "\n";
}

std::string fit_grid_csv(const FitResult& fr) {
  std::string s = "z,g,g_prime\n";
  for (Eigen::Index i = 0; i < fr.grid.size(); ++i) {
    s += format_double(fr.grid(i)) + "," + format_double(fr.g_hat(i)) + "," +
         format_double(fr.g_prime(i)) + "\n";
  }
  return s;
}

std::string band_csv(const BandResult& b) {
  std::string s = "z,center,lower,upper\n";
  for (Eigen::Index i = 0; i < b.grid.size(); ++i) {
    s += format_double(b.grid(i)) + "," + format_double(b.center(i)) + "," +
         format_double(b.lower(i)) + "," + format_double(b.upper(i)) + "\n";
  }
  return s;
}

nlohmann::json band_metadata(const BandResult& b) {
  nlohmann::json j;
  j["method"] = to_string(b.method);
  j["alpha"] = b.alpha;
  j["critical"] = b.critical;
  j["h"] = b.h;
  j["h_star"] = b.h_star ? nlohmann::json(*b.h_star) : nlohmann::json(nullptr);
  return j;
}

BandResult read_band(const std::filesystem::path& csv, const std::filesystem::path& manifest) {
  std::ifstream in(csv);
  if (!in) raise(ErrorCode::EmptyInput, "cannot open '" + csv.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != "z,center,lower,upper") {
    raise(ErrorCode::BadHeader, "expected header z,center,lower,upper");
  }
  std::vector<double> cols[4];
  for (std::size_t n = 2; std::getline(in, line); ++n) {
    const auto cells = split(line);
    check_columns(cells, 4, n);
    for (int c = 0; c < 4; ++c) cols[c].push_back(parse_double(cells[static_cast<std::size_t>(c)]));
  }
  const auto to_vec = [](const std::vector<double>& v) {
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  BandResult b;
  b.grid = to_vec(cols[0]);
  b.center = to_vec(cols[1]);
  b.lower = to_vec(cols[2]);
  b.upper = to_vec(cols[3]);

  std::ifstream mf(manifest);
  if (!mf) raise(ErrorCode::EmptyInput, "cannot open '" + manifest.string() + "'");
  const nlohmann::json meta = nlohmann::json::parse(mf).at("band");
  b.method = band_method_from_string(meta.at("method").get<std::string>());
  b.alpha = meta.at("alpha").get<double>();
  b.critical = meta.at("critical").get<double>();
  b.h = meta.at("h").get<double>();
  if (!meta.at("h_star").is_null()) b.h_star = meta.at("h_star").get<double>();
  return b;
}

std::string cv_csv(const CvCurve& c) {
  std::string s = "h,score\n";
  for (Eigen::Index i = 0; i < c.grid.size(); ++i) {
    s += format_double(c.grid(i)) + "," + format_double(c.scores(i)) + "\n";
  }
  return s;
}

nlohmann::json report_json(const McReport& r) {
  nlohmann::json j;
  j["table"] = r.table;
  j["config"] = {{"n", r.config.n},
                 {"T", r.config.T},
                 {"c", r.config.c},
                 {"beta", vec(r.config.beta)},
                 {"seed", r.config.seed}};
  j["reps"] = r.reps;
  j["failures"] = r.failures;
  j["failure_messages"] = r.failure_messages;
  j["bandwidth_policy"] = r.bandwidth_policy;
  j["kernel"] = r.kernel;
  nlohmann::json coefs = nlohmann::json::array();
  for (const auto& c : r.coefficients) {
    coefs.push_back({{"bias", c.bias}, {"sd", c.sd}, {"mse", c.mse}});
  }
  j["coefficients"] = coefs;
  if (r.method) {
    j["method"] = to_string(*r.method);
    j["alpha"] = r.alpha;
    j["boot_reps"] = r.boot_reps;
    j["coverage"] = *r.coverage;
    j["mean_half_width"] = *r.mean_half_width;
  }
  return j;
}

}  // namespace plfe::cli
