#include "skillchair/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "skillchair/error.hpp"
#include "skillchair/log_io.hpp"

namespace skillchair {

namespace fs = std::filesystem;
using nlohmann::json;

json report_to_json(const EvalReport& report) {
  json doc;
  doc["format"] = "skillchair-report";
  doc["version"] = 1;
  doc["settings"] = {{"repeats", report.settings.repeats},
                     {"holdout", report.settings.holdout},
                     {"seed", report.settings.seed},
                     {"per_player", report.settings.experiment.per_player},
                     {"roc_repeat", report.settings.experiment.roc_repeat},
                     {"permute_labels", report.settings.permute_labels}};
  doc["dataset"] = {{"rows", report.rows}, {"players", report.players}};
  json models = json::array();
  for (const auto& m : report.models) {
    json roc = json::array();
    for (const auto& p : m.roc) {
      roc.push_back({p.fpr, p.tpr});
    }
    models.push_back({{"model", model_key(m.kind)},
                      {"name", model_display_name(m.kind)},
                      {"auc_mean", m.auc_mean},
                      {"auc_std", m.auc_std},
                      {"auc_per_repeat", m.auc_per_repeat},
                      {"roc", roc}});
  }
  doc["models"] = models;
  if (report.importance) {
    json imp = json::array();
    for (const auto& v : *report.importance) {
      imp.push_back({{"feature", v.name}, {"coefficient", v.value}});
    }
    doc["importance"] = imp;
  } else {
    doc["importance"] = nullptr;
  }
  json matrix = json::array();
  for (Eigen::Index i = 0; i < report.correlations.values.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < report.correlations.values.cols(); ++j) {
      row.push_back(report.correlations.values(i, j));
    }
    matrix.push_back(row);
  }
  doc["correlations"] = {{"names", report.correlations.names},
                         {"matrix", matrix},
                         {"constant", report.correlations.constant}};
  return doc;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) {
    throw Error(ErrorCode::StorageError, "write failed", path.string());
  }
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

void write_report(const EvalReport& report, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::StorageError, "cannot create report directory", dir.string());
  }
  const json doc = report_to_json(report);
  write_text(dir / "report.json", doc.dump(2) + "\n");

  std::string auc = "model,name,auc_mean,auc_std\n";
  for (const auto& m : report.models) {
    auc += std::string(model_key(m.kind)) + "," + std::string(model_display_name(m.kind)) + ",";
    append_double(auc, m.auc_mean);
    auc += ',';
    append_double(auc, m.auc_std);
    auc += '\n';
  }
  write_text(dir / "auc_table.csv", auc);

  std::string roc = "model,fpr,tpr\n";
  for (const auto& m : report.models) {
    for (const auto& p : m.roc) {
      roc += std::string(model_key(m.kind)) + ",";
      append_double(roc, p.fpr);
      roc += ',';
      append_double(roc, p.tpr);
      roc += '\n';
    }
  }
  write_text(dir / "roc_curve.csv", roc);

  std::string imp = "feature,coefficient\n";
  if (report.importance) {
    for (const auto& v : *report.importance) {
      imp += v.name + ",";
      append_double(imp, v.value);
      imp += '\n';
    }
  }
  write_text(dir / "importance.csv", imp);

  write_correlation_csv(report.correlations, dir / "correlations.csv");
}

std::string format_auc_table(const json& report) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof(line), "%-24s | %-9s | %-8s\n", "Method", "AUC, mean", "AUC, std");
  out << line << std::string(47, '-') << '\n';
  for (const auto& m : report.at("models")) {
    std::string name = m.at("name").get<std::string>();
    const auto key = m.at("model").get<std::string>();
    if (key == "knn") {
      name = "KNN, 5 neighbours";
    } else if (key == "rf") {
      name = "Random Forest, depth 4";
    }
    std::snprintf(line, sizeof(line), "%-24s | %-9s | %-8s\n", name.c_str(),
                  fixed(m.at("auc_mean").get<double>(), 2).c_str(), fixed(m.at("auc_std").get<double>(), 2).c_str());
    out << line;
  }
  return out.str();
}

std::string roc_svg(const json& roc_points, const std::string& title) {
  constexpr double size = 400.0;
  constexpr double pad = 50.0;
  std::ostringstream svg;
  svg << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << size + 2 * pad << R"(" height=")" << size + 2 * pad
      << R"(" font-family="sans-serif" font-size="12">)" << '\n';
  svg << R"(<rect x=")" << pad << R"(" y=")" << pad << R"(" width=")" << size << R"(" height=")" << size
      << R"(" fill="none" stroke="#444"/>)" << '\n';
  svg << R"(<line x1=")" << pad << R"(" y1=")" << pad + size << R"(" x2=")" << pad + size << R"(" y2=")" << pad
      << R"(" stroke="#bbb" stroke-dasharray="4,4"/>)" << '\n';
  svg << R"(<polyline fill="none" stroke="#1f77b4" stroke-width="2" points=")";
  for (const auto& p : roc_points) {
    const double x = pad + p.at(0).get<double>() * size;
    const double y = pad + size - p.at(1).get<double>() * size;
    svg << fixed(x, 2) << ',' << fixed(y, 2) << ' ';
  }
  svg << R"("/>)" << '\n';
  svg << R"(<text x=")" << pad + size / 2 << R"(" y=")" << pad + size + 35
      << R"(" text-anchor="middle">False positive rate</text>)" << '\n';
  svg << R"(<text x="15" y=")" << pad + size / 2 << R"x(" transform="rotate(-90 15 )x" << pad + size / 2
      << R"x()" text-anchor="middle">True positive rate</text>)x" << '\n';
  svg << R"(<text x=")" << pad + size / 2 << R"(" y="30" text-anchor="middle">)" << title << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

std::string importance_svg(const json& importance) {
  constexpr double bar_height = 22.0;
  constexpr double label_width = 60.0;
  constexpr double half = 220.0;
  const double height = 40.0 + bar_height * static_cast<double>(importance.size());
  double max_abs = 1e-12;
  for (const auto& v : importance) {
    max_abs = std::max(max_abs, std::abs(v.at("coefficient").get<double>()));
  }
  const double axis = label_width + half;
  std::ostringstream svg;
  svg << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << label_width + 2 * half + 20 << R"(" height=")"
      << height << R"(" font-family="sans-serif" font-size="12">)" << '\n';
  svg << R"(<line x1=")" << axis << R"(" y1="10" x2=")" << axis << R"(" y2=")" << height - 10
      << R"(" stroke="#444"/>)" << '\n';
  double y = 20.0;
  for (const auto& v : importance) {
    const double c = v.at("coefficient").get<double>();
    const double w = std::abs(c) / max_abs * (half - 10.0);
    const double x = c >= 0 ? axis : axis - w;
    svg << R"(<text x="5" y=")" << fixed(y + 15, 1) << R"(">)" << v.at("feature").get<std::string>() << "</text>";
    svg << R"(<rect x=")" << fixed(x, 2) << R"(" y=")" << fixed(y + 3, 1) << R"(" width=")" << fixed(w, 2)
        << R"(" height=")" << bar_height - 6 << R"(" fill=")" << (c >= 0 ? "#2ca02c" : "#d62728") << R"("/>)" << '\n';
    y += bar_height;
  }
  svg << "</svg>\n";
  return svg.str();
}

void render_report_svgs(const json& report, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const json* roc = nullptr;
  for (const auto& m : report.at("models")) {
    if (m.at("model") == "lr" || roc == nullptr) {
      roc = &m;
    }
  }
  if (roc != nullptr) {
    write_text(dir / "roc.svg", roc_svg(roc->at("roc"), "ROC - " + roc->at("name").get<std::string>()));
  }
  if (report.contains("importance") && report["importance"].is_array()) {
    write_text(dir / "importance.svg", importance_svg(report["importance"]));
  }
}

}  // namespace skillchair
