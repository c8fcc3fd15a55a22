#include "skillchair/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "skillchair/error.hpp"
#include "skillchair/log_io.hpp"

namespace skillchair {

std::size_t feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (kFeatureNames[i] == name) {
      return i;
    }
  }
  throw std::out_of_range("unknown feature " + std::string(name));
}

namespace {

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

// Two-pass population moments.
Moments moments(std::span<const double> series) {
  const double n = static_cast<double>(series.size());
  double sum = 0.0;
  for (double v : series) {
    sum += v;
  }
  Moments m;
  m.mean = sum / n;
  double sq = 0.0;
  for (double v : series) {
    const double d = v - m.mean;
    sq += d * d;
  }
  m.std = std::sqrt(sq / n);
  return m;
}

void require_length(std::span<const double> series, std::size_t minimum) {
  if (series.size() < minimum) {
    throw Error(ErrorCode::EmptySeries,
                "series has " + std::to_string(series.size()) + " samples, need " + std::to_string(minimum));
  }
}

}  // namespace

double active_portion(std::span<const double> series) {
  require_length(series, 2);
  const Moments m = moments(series);
  if (m.std == 0.0) {
    return 0.0;
  }
  const double limit = 3.0 * m.std;
  std::size_t count = 0;
  for (double v : series) {
    if (std::abs(v - m.mean) > limit) {
      ++count;
    }
  }
  return static_cast<double>(count) / static_cast<double>(series.size());
}

double quiescent_dispersion(std::span<const double> series) {
  require_length(series, 2);
  const Moments m = moments(series);
  const double limit = 3.0 * m.std;
  std::size_t count = 0;
  double sum = 0.0;
  for (double v : series) {
    if (std::abs(v - m.mean) <= limit) {
      sum += v;
      ++count;
    }
  }
  if (count < 2) {
    return 0.0;
  }
  const double mean = sum / static_cast<double>(count);
  double sq = 0.0;
  for (double v : series) {
    if (std::abs(v - m.mean) <= limit) {
      const double d = v - mean;
      sq += d * d;
    }
  }
  return sq / static_cast<double>(count);
}

double lean_back_portion(std::span<const double> az, double threshold_g) {
  require_length(az, 1);
  const auto below = std::count_if(az.begin(), az.end(), [&](double v) { return v < threshold_g; });
  return static_cast<double>(below) / static_cast<double>(az.size());
}

FeatureVector extract_features(const SessionWindow& window, double threshold_g) {
  static constexpr std::array<Channel, 6> kMotionChannels = {Channel::ax, Channel::ay, Channel::az,
                                                             Channel::gx, Channel::gy, Channel::gz};
  FeatureVector fv;
  fv.player_id = window.player_id;
  fv.window_index = window.window_index;
  fv.skill = window.skill;
  for (std::size_t i = 0; i < kMotionChannels.size(); ++i) {
    const auto series = window.series(kMotionChannels[i]);
    fv.values[i] = active_portion(series);
    fv.values[7 + i] = quiescent_dispersion(series);
  }
  fv.values[6] = lean_back_portion(window.series(Channel::az), threshold_g);
  return fv;
}

std::vector<std::string> Dataset::players() const {
  std::vector<std::string> out;
  for (const auto& g : groups) {
    if (std::find(out.begin(), out.end(), g) == out.end()) {
      out.push_back(g);
    }
  }
  return out;
}

int Dataset::player_label(const std::string& player) const {
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i] == player) {
      return labels[i];
    }
  }
  throw Error(ErrorCode::MalformedRecord, "player not in dataset", player);
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(kFeatureCount));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(rows[r]));
    out.labels.push_back(labels[rows[r]]);
    out.groups.push_back(groups[rows[r]]);
    out.window_index.push_back(window_index[rows[r]]);
  }
  return out;
}

bool Dataset::operator==(const Dataset& other) const {
  if (labels != other.labels || groups != other.groups || window_index != other.window_index) {
    return false;
  }
  if (features.rows() != other.features.rows() || features.cols() != other.features.cols()) {
    return false;
  }
  return (features.array() == other.features.array()).all();
}

Dataset make_dataset(std::span<const FeatureVector> vectors) {
  Dataset ds;
  ds.features.resize(static_cast<Eigen::Index>(vectors.size()), static_cast<Eigen::Index>(kFeatureCount));
  for (std::size_t r = 0; r < vectors.size(); ++r) {
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = vectors[r].values[c];
    }
    ds.labels.push_back(skill_value(vectors[r].skill));
    ds.groups.push_back(vectors[r].player_id);
    ds.window_index.push_back(vectors[r].window_index);
  }
  return ds;
}

Dataset build_dataset(std::span<const PlayerLog> logs, const FeatureOptions& options) {
  std::vector<FeatureVector> vectors;
  for (const auto& log : logs) {
    for (const auto& w : segment_windows(log, options.windowing)) {
      vectors.push_back(extract_features(w, options.threshold_g));
    }
  }
  return make_dataset(vectors);
}

CorrelationMatrix correlation_matrix(const Dataset& dataset) {
  const auto n = static_cast<Eigen::Index>(dataset.rows());
  if (n < 2) {
    throw Error(ErrorCode::InsufficientRows, "correlation needs at least 2 rows, got " + std::to_string(n));
  }
  constexpr auto vars = static_cast<Eigen::Index>(kFeatureCount + 1);
  Eigen::MatrixXd data(n, vars);
  data.leftCols(static_cast<Eigen::Index>(kFeatureCount)) = dataset.features;
  for (Eigen::Index r = 0; r < n; ++r) {
    data(r, vars - 1) = dataset.labels[static_cast<std::size_t>(r)];
  }

  CorrelationMatrix corr;
  for (auto name : kFeatureNames) {
    corr.names.emplace_back(name);
  }
  corr.names.emplace_back("skill");

  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - mean;
  Eigen::VectorXd ss(vars);
  for (Eigen::Index j = 0; j < vars; ++j) {
    ss(j) = centered.col(j).squaredNorm();
    corr.constant.push_back(ss(j) == 0.0);
  }

  corr.values = Eigen::MatrixXd::Identity(vars, vars);
  for (Eigen::Index i = 0; i < vars; ++i) {
    for (Eigen::Index j = i + 1; j < vars; ++j) {
      double r = 0.0;
      if (ss(i) > 0.0 && ss(j) > 0.0) {
        r = centered.col(i).dot(centered.col(j)) / std::sqrt(ss(i) * ss(j));
        r = std::clamp(r, -1.0, 1.0);
      }
      corr.values(i, j) = r;
      corr.values(j, i) = r;
    }
  }
  return corr;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') {
    cells.emplace_back();
  }
  return cells;
}

double parse_double(const std::string& text, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::MalformedRecord, "bad number '" + text + "'", "line " + std::to_string(line_no));
  }
  return v;
}

}  // namespace

void write_dataset_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::StorageError, "cannot open for writing", path.string());
  }
  std::string buf;
  for (auto name : kFeatureNames) {
    buf += name;
    buf += ',';
  }
  buf += "player_id,window_index,skill\n";
  for (std::size_t r = 0; r < dataset.rows(); ++r) {
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      append_double(buf, dataset.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
      buf += ',';
    }
    buf += dataset.groups[r];
    buf += ',';
    buf += std::to_string(dataset.window_index[r]);
    buf += ',';
    buf += std::to_string(dataset.labels[r]);
    buf += '\n';
  }
  out << buf;
  if (!out) {
    throw Error(ErrorCode::StorageError, "write failed", path.string());
  }
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::StorageError, "cannot open for reading", path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::MalformedRecord, "empty dataset file", path.string());
  }
  const auto header = split_csv_line(line);
  if (header.size() != kFeatureCount + 3) {
    throw Error(ErrorCode::MalformedRecord, "unexpected header", path.string());
  }
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    if (header[c] != kFeatureNames[c]) {
      throw Error(ErrorCode::MalformedRecord, "column " + std::to_string(c) + " should be " +
                                                  std::string(kFeatureNames[c]), path.string());
    }
  }
  std::vector<FeatureVector> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const auto cells = split_csv_line(line);
    if (cells.size() != kFeatureCount + 3) {
      throw Error(ErrorCode::MalformedRecord, "wrong cell count", "line " + std::to_string(line_no));
    }
    FeatureVector fv;
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      fv.values[c] = parse_double(cells[c], line_no);
    }
    fv.player_id = cells[kFeatureCount];
    fv.window_index = static_cast<std::size_t>(parse_double(cells[kFeatureCount + 1], line_no));
    fv.skill = skill_from_int(static_cast<long long>(parse_double(cells[kFeatureCount + 2], line_no)));
    rows.push_back(std::move(fv));
  }
  return make_dataset(rows);
}

void write_correlation_csv(const CorrelationMatrix& corr, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::StorageError, "cannot open for writing", path.string());
  }
  std::string buf = "variable";
  for (const auto& n : corr.names) {
    buf += ',' + n;
  }
  buf += '\n';
  for (Eigen::Index i = 0; i < corr.values.rows(); ++i) {
    buf += corr.names[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < corr.values.cols(); ++j) {
      buf += ',';
      append_double(buf, corr.values(i, j));
    }
    buf += '\n';
  }
  out << buf;
}

}  // namespace skillchair
