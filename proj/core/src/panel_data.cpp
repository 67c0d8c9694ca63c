#include "plfe/panel_data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string_view>

#include "plfe/error.hpp"

namespace plfe {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(std::string_view field, std::size_t line_no, std::size_t col) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = field.data() + field.size();
  if (!field.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    raise(ErrorCode::NonNumericField, "line " + std::to_string(line_no) + ", column " +
                                          std::to_string(col + 1) + ": '" +
                                          std::string(field) + "'");
  }
  return value;
}

void check_header(const std::vector<std::string_view>& header) {
  static constexpr std::string_view kFixed[] = {"unit", "time", "y", "z"};
  if (header.size() < 4) {
    raise(ErrorCode::BadHeader, "expected at least unit,time,y,z");
  }
  for (std::size_t c = 0; c < 4; ++c) {
    if (header[c] != kFixed[c]) {
      raise(ErrorCode::BadHeader, "column " + std::to_string(c + 1) + " must be '" +
                                      std::string(kFixed[c]) + "', got '" +
                                      std::string(header[c]) + "'");
    }
  }
  for (std::size_t c = 4; c < header.size(); ++c) {
    const std::string expected = "x" + std::to_string(c - 3);
    if (header[c] != expected) {
      raise(ErrorCode::BadHeader, "unexpected column '" + std::string(header[c]) +
                                      "' (expected '" + expected + "')");
    }
  }
}

Interval empirical_range(const Eigen::VectorXd& z) {
  if (z.size() == 0) return {};
  return {z.minCoeff(), z.maxCoeff()};
}

}  // namespace

PanelDataset::PanelDataset(std::size_t n, std::size_t T, Eigen::VectorXd y, Eigen::MatrixXd X,
                           Eigen::VectorXd z, std::optional<Interval> interval)
    : n_(n), T_(T), y_(std::move(y)), X_(std::move(X)), z_(std::move(z)) {
  if (n_ == 0 || T_ == 0) {
    raise(ErrorCode::InvalidShape, "n and T must be positive");
  }
  const auto rows = static_cast<Eigen::Index>(n_ * T_);
  if (y_.size() != rows || z_.size() != rows || X_.rows() != rows) {
    raise(ErrorCode::InvalidShape,
          "expected " + std::to_string(rows) + " rows, got y=" + std::to_string(y_.size()) +
              " z=" + std::to_string(z_.size()) + " X=" + std::to_string(X_.rows()));
  }
  if (!y_.allFinite() || !z_.allFinite() || !X_.allFinite()) {
    raise(ErrorCode::NonNumericField, "non-finite value in panel");
  }
  if (interval) {
    if (!(interval->lo < interval->hi)) {
      raise(ErrorCode::InvalidArgument, "interval requires lo < hi");
    }
    if (z_.minCoeff() < interval->lo || z_.maxCoeff() > interval->hi) {
      raise(ErrorCode::InvalidArgument, "interval does not contain every z value");
    }
    interval_ = *interval;
  } else {
    interval_ = empirical_range(z_);
  }
}

PanelDataset PanelDataset::with_response(Eigen::VectorXd y) const {
  return PanelDataset(n_, T_, std::move(y), X_, z_, interval_.lo < interval_.hi
                                                        ? std::optional<Interval>(interval_)
                                                        : std::nullopt);
}

PanelDataset PanelDataset::with_interval(Interval interval) const {
  return PanelDataset(n_, T_, y_, X_, z_, interval);
}

PanelDataset load_csv(std::istream& in, std::optional<Interval> interval) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string_view> header;
  std::string header_line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header_line = line;
      header = split_commas(header_line);
      break;
    }
  }
  if (header.empty()) raise(ErrorCode::EmptyInput, "no header row");
  check_header(header);
  const std::size_t width = header.size();
  const std::size_t p = width - 4;

  struct Record {
    double unit, time, y, z;
    std::vector<double> x;
  };
  std::vector<Record> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != width) {
      raise(ErrorCode::BadHeader, "line " + std::to_string(line_no) + " has " +
                                      std::to_string(fields.size()) + " fields, header has " +
                                      std::to_string(width));
    }
    Record r;
    r.unit = parse_number(fields[0], line_no, 0);
    r.time = parse_number(fields[1], line_no, 1);
    r.y = parse_number(fields[2], line_no, 2);
    r.z = parse_number(fields[3], line_no, 3);
    r.x.reserve(p);
    for (std::size_t c = 4; c < width; ++c) r.x.push_back(parse_number(fields[c], line_no, c));
    records.push_back(std::move(r));
  }
  if (records.empty()) raise(ErrorCode::EmptyInput, "no data rows");

  std::map<double, std::size_t> units;
  std::map<double, std::size_t> times;
  for (const auto& r : records) {
    units.emplace(r.unit, 0);
    times.emplace(r.time, 0);
  }
  std::size_t idx = 0;
  for (auto& [key, value] : units) value = idx++;
  idx = 0;
  for (auto& [key, value] : times) value = idx++;

  const std::size_t n = units.size();
  const std::size_t T = times.size();
  std::vector<int> seen(n * T, 0);
  Eigen::VectorXd y(n * T);
  Eigen::VectorXd z(n * T);
  Eigen::MatrixXd X(n * T, p);
  for (const auto& r : records) {
    const std::size_t k = PanelDataset::row(units[r.unit], times[r.time], T);
    if (seen[k]++ > 0) {
      std::ostringstream msg;
      msg << "duplicate cell (unit " << r.unit << ", time " << r.time << ")";
      raise(ErrorCode::UnbalancedPanel, msg.str());
    }
    y(k) = r.y;
    z(k) = r.z;
    for (std::size_t j = 0; j < p; ++j) X(k, j) = r.x[j];
  }
  for (const auto& [unit, i] : units) {
    for (const auto& [time, t] : times) {
      if (seen[PanelDataset::row(i, t, T)] == 0) {
        std::ostringstream msg;
        msg << "missing cell (unit " << unit << ", time " << time << ")";
        raise(ErrorCode::UnbalancedPanel, msg.str());
      }
    }
  }
  return PanelDataset(n, T, std::move(y), std::move(X), std::move(z), interval);
}

PanelDataset load_csv_file(const std::string& path, std::optional<Interval> interval) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::EmptyInput, "cannot open '" + path + "'");
  return load_csv(in, interval);
}

DummyMatrix build_dummy_matrix(std::size_t n, std::size_t T) {
  if (n < 2 || T < 1) {
    raise(ErrorCode::InvalidShape, "dummy matrix needs n >= 2 and T >= 1");
  }
  DummyMatrix D = DummyMatrix::Zero(static_cast<Eigen::Index>(n * T),
                                    static_cast<Eigen::Index>(n - 1));
  for (std::size_t t = 0; t < T; ++t) D.row(static_cast<Eigen::Index>(t)).setConstant(-1.0);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t t = 0; t < T; ++t) {
      D(static_cast<Eigen::Index>(i * T + t), static_cast<Eigen::Index>(i - 1)) = 1.0;
    }
  }
  return D;
}

Eigen::VectorXd apply_dummy(const Eigen::VectorXd& free_effects, std::size_t n, std::size_t T) {
  const auto Ti = static_cast<Eigen::Index>(T);
  Eigen::VectorXd out(static_cast<Eigen::Index>(n * T));
  out.head(Ti).setConstant(-free_effects.sum());
  for (std::size_t i = 1; i < n; ++i) {
    out.segment(static_cast<Eigen::Index>(i) * Ti, Ti)
        .setConstant(free_effects(static_cast<Eigen::Index>(i - 1)));
  }
  return out;
}

Eigen::MatrixXd apply_dummy_transpose(const Eigen::MatrixXd& v, std::size_t n, std::size_t T) {
  const auto Ti = static_cast<Eigen::Index>(T);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n - 1), v.cols());
  const Eigen::RowVectorXd first = v.topRows(Ti).colwise().sum();
  for (std::size_t i = 1; i < n; ++i) {
    out.row(static_cast<Eigen::Index>(i - 1)) =
        v.middleRows(static_cast<Eigen::Index>(i) * Ti, Ti).colwise().sum() - first;
  }
  return out;
}

Eigen::MatrixXd right_apply_dummy(const Eigen::MatrixXd& v, std::size_t n, std::size_t T) {
  const auto Ti = static_cast<Eigen::Index>(T);
  Eigen::MatrixXd out(v.rows(), static_cast<Eigen::Index>(n - 1));
  const Eigen::VectorXd first = v.leftCols(Ti).rowwise().sum();
  for (std::size_t i = 1; i < n; ++i) {
    out.col(static_cast<Eigen::Index>(i - 1)) =
        v.middleCols(static_cast<Eigen::Index>(i) * Ti, Ti).rowwise().sum() - first;
  }
  return out;
}

Eigen::VectorXd full_effects(const Eigen::VectorXd& free_effects) {
  Eigen::VectorXd out(free_effects.size() + 1);
  out(0) = -free_effects.sum();
  out.tail(free_effects.size()) = free_effects;
  return out;
}

ValidationReport validate(const PanelDataset& ds) {
  ValidationReport report;
  report.observations = ds.size();
  report.regressors = ds.p();
  report.z_min = ds.z().minCoeff();
  report.z_max = ds.z().maxCoeff();

  if (report.z_min == report.z_max) {
    report.warnings.emplace_back("degenerate smoothing covariate");
  } else if (ds.size() >= 20) {
    // Smaller samples always have a large share of points at the extremes.
    const Interval& iv = ds.interval();
    const double edge = 0.01 * iv.width();
    const auto near_edge = std::count_if(ds.z().begin(), ds.z().end(), [&](double v) {
      return v - iv.lo <= edge || iv.hi - v <= edge;
    });
    if (static_cast<double>(near_edge) > 0.25 * static_cast<double>(ds.size())) {
      report.warnings.emplace_back("z values concentrated at boundary");
    }
  }
  if (ds.n() < 2) {
    report.warnings.emplace_back("single unit: fixed effects are not identifiable");
  }
  if (ds.p() == 0) {
    report.info.emplace_back("pure nonparametric panel model");
  }
  return report;
}

}  // namespace plfe
