#include "csen/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "csen/error.hpp"

namespace csen {

namespace {

std::string exact(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string lpad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

void text_confusion(std::ostream& out, const ConfusionMatrix& cm) {
  std::size_t w = 9;
  for (const auto& n : cm.class_names) w = std::max(w, n.size() + 2);
  out << pad("actual\\pred", w);
  for (const auto& n : cm.class_names) out << lpad(n, w);
  out << '\n';
  for (int i = 0; i < cm.classes(); ++i) {
    out << pad(cm.class_names[static_cast<std::size_t>(i)], w);
    for (int j = 0; j < cm.classes(); ++j)
      out << lpad(std::to_string(cm.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]), w);
    out << '\n';
  }
}

void text_metrics(std::ostream& out, const std::vector<std::string>& names, const MetricsReport& m) {
  std::size_t w = 9;
  for (const auto& n : names) w = std::max(w, n.size() + 2);
  out << pad("class", w) << lpad("accuracy", 13) << lpad("sensitivity", 13)
      << lpad("specificity", 13) << '\n';
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << pad(names[i], w) << lpad(fixed3(m.accuracy[i]), 13) << lpad(fixed3(m.sensitivity[i]), 13)
        << lpad(fixed3(m.specificity[i]), 13) << '\n';
  }
  out << "overall accuracy: " << fixed3(m.overall_accuracy) << '\n';
}

void csv_metrics(std::ostream& out, const std::string& tag, const std::vector<std::string>& names,
                 const MetricsReport& m) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << tag << ',' << names[i] << ',' << exact(m.accuracy[i]) << ',' << exact(m.sensitivity[i])
        << ',' << exact(m.specificity[i]) << '\n';
  }
  out << tag << "_overall," << exact(m.overall_accuracy) << '\n';
}

void csv_confusion(std::ostream& out, const std::string& tag, const ConfusionMatrix& cm) {
  for (int i = 0; i < cm.classes(); ++i) {
    out << tag << ',' << cm.class_names[static_cast<std::size_t>(i)];
    for (auto v : cm.counts[static_cast<std::size_t>(i)]) out << ',' << v;
    out << '\n';
  }
}

nlohmann::ordered_json json_metrics(const std::vector<std::string>& names, const MetricsReport& m) {
  nlohmann::ordered_json j;
  j["overall_accuracy"] = m.overall_accuracy;
  auto& per = j["per_class"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < names.size(); ++i) {
    per.push_back({{"class", names[i]},
                   {"accuracy", m.accuracy[i]},
                   {"sensitivity", m.sensitivity[i]},
                   {"specificity", m.specificity[i]}});
  }
  return j;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

ReportFormat parse_report_format(const std::string& name) {
  if (name == "text") return ReportFormat::text;
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  fail(ErrorKind::usage, "unknown report format '" + name + "' (text, csv, json)");
}

ReportFormat report_format_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension();
  if (ext == ".csv") return ReportFormat::csv;
  if (ext == ".json") return ReportFormat::json;
  return ReportFormat::text;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string render_report(const EvaluationReport& r, ReportFormat format,
                          const std::string& timestamp) {
  std::ostringstream out;
  switch (format) {
    case ReportFormat::text: {
      out << "# generated " << timestamp << '\n';
      out << "method: " << r.method << "  folds: " << r.folds.size() << "  seed: " << r.seed << "\n\n";
      out << "cumulative confusion matrix (rows actual, columns predicted)\n";
      text_confusion(out, r.cumulative);
      out << "\nmetrics on cumulative confusion matrix\n";
      text_metrics(out, r.class_names, r.cumulative_metrics);
      out << "\nmetrics averaged over folds\n";
      text_metrics(out, r.class_names, r.fold_mean_metrics);
      for (std::size_t f = 0; f < r.folds.size(); ++f) {
        const auto& fold = r.folds[f];
        out << "\nfold " << f << " (train " << fold.train_size << ", test " << fold.test_size << ")\n";
        text_confusion(out, fold.confusion);
        text_metrics(out, r.class_names, fold.metrics);
      }
      break;
    }
    case ReportFormat::csv: {
      out << "# generated " << timestamp << '\n';
      out << "method," << r.method << '\n';
      out << "seed," << r.seed << '\n';
      out << "classes";
      for (const auto& n : r.class_names) out << ',' << n;
      out << '\n';
      out << "# section,class,accuracy,sensitivity,specificity\n";
      csv_confusion(out, "confusion", r.cumulative);
      csv_metrics(out, "cumulative", r.class_names, r.cumulative_metrics);
      csv_metrics(out, "fold_mean", r.class_names, r.fold_mean_metrics);
      for (std::size_t f = 0; f < r.folds.size(); ++f) {
        const auto& fold = r.folds[f];
        const std::string tag = "fold" + std::to_string(f);
        out << tag << "_sizes," << fold.train_size << ',' << fold.test_size << '\n';
        csv_confusion(out, tag + "_confusion", fold.confusion);
        csv_metrics(out, tag, r.class_names, fold.metrics);
      }
      break;
    }
    case ReportFormat::json: {
      nlohmann::ordered_json j;
      j["method"] = r.method;
      j["seed"] = r.seed;
      j["classes"] = r.class_names;
      j["confusion"] = r.cumulative.counts;
      j["cumulative"] = json_metrics(r.class_names, r.cumulative_metrics);
      j["fold_mean"] = json_metrics(r.class_names, r.fold_mean_metrics);
      auto& folds = j["folds"] = nlohmann::ordered_json::array();
      for (const auto& fold : r.folds) {
        nlohmann::ordered_json fj;
        fj["train_size"] = fold.train_size;
        fj["test_size"] = fold.test_size;
        fj["confusion"] = fold.confusion.counts;
        fj["metrics"] = json_metrics(r.class_names, fold.metrics);
        folds.push_back(std::move(fj));
      }
      // Timestamp on its own first line, ahead of the document.
      out << "{\"generated\": \"" << timestamp << "\",\n";
      const std::string body = j.dump(2);
      out << body.substr(2);
      out << '\n';
      break;
    }
  }
  return out.str();
}

void write_report(const EvaluationReport& report, const std::filesystem::path& path,
                  ReportFormat format) {
  std::ofstream out(path, std::ios::trunc);
  require(static_cast<bool>(out), ErrorKind::data, "cannot write report " + path.string());
  out << render_report(report, format, utc_timestamp());
  require(static_cast<bool>(out), ErrorKind::data, "write failed for " + path.string());
}

EvaluationReport read_report_csv(std::istream& in, const std::string& source) {
  EvaluationReport r;
  std::string line;
  std::size_t line_no = 0;
  auto error = [&](const std::string& what) {
    fail(ErrorKind::parse, source + ":" + std::to_string(line_no) + ": " + what);
  };
  auto num = [&](const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) error("bad number '" + s + "'");
    return v;
  };
  auto count = [&](const std::string& s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) error("bad count '" + s + "'");
    return v;
  };
  auto fold_at = [&](std::size_t f) -> FoldResult& {
    while (r.folds.size() <= f) {
      FoldResult fr;
      fr.confusion = ConfusionMatrix(r.class_names);
      r.folds.push_back(std::move(fr));
    }
    return r.folds[f];
  };
  auto metrics_row = [&](MetricsReport& m, const std::vector<std::string>& cells) {
    if (cells.size() != 5) error("metric row needs 5 fields");
    m.accuracy.push_back(num(cells[2]));
    m.sensitivity.push_back(num(cells[3]));
    m.specificity.push_back(num(cells[4]));
  };
  auto confusion_row = [&](ConfusionMatrix& cm, const std::vector<std::string>& cells) {
    if (cells.size() != r.class_names.size() + 2) error("confusion row has wrong width");
    const auto it = std::find(r.class_names.begin(), r.class_names.end(), cells[1]);
    if (it == r.class_names.end()) error("unknown class '" + cells[1] + "'");
    const auto i = static_cast<std::size_t>(it - r.class_names.begin());
    for (std::size_t j = 0; j < r.class_names.size(); ++j) cm.counts[i][j] = count(cells[j + 2]);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line);
    const std::string& tag = cells[0];
    if (tag == "method") {
      if (cells.size() != 2) error("method row");
      r.method = cells[1];
    } else if (tag == "seed") {
      if (cells.size() != 2) error("seed row");
      r.seed = count(cells[1]);
    } else if (tag == "classes") {
      r.class_names.assign(cells.begin() + 1, cells.end());
      r.cumulative = ConfusionMatrix(r.class_names);
    } else if (tag == "confusion") {
      confusion_row(r.cumulative, cells);
    } else if (tag == "cumulative") {
      metrics_row(r.cumulative_metrics, cells);
    } else if (tag == "cumulative_overall") {
      r.cumulative_metrics.overall_accuracy = num(cells.at(1));
    } else if (tag == "fold_mean") {
      metrics_row(r.fold_mean_metrics, cells);
    } else if (tag == "fold_mean_overall") {
      r.fold_mean_metrics.overall_accuracy = num(cells.at(1));
    } else if (tag.rfind("fold", 0) == 0) {
      std::size_t f = 0;
      const auto* first = tag.data() + 4;
      const auto res = std::from_chars(first, tag.data() + tag.size(), f);
      if (res.ec != std::errc()) error("bad fold tag '" + tag + "'");
      const std::string rest(res.ptr, tag.data() + tag.size());
      auto& fold = fold_at(f);
      if (rest.empty()) metrics_row(fold.metrics, cells);
      else if (rest == "_overall") fold.metrics.overall_accuracy = num(cells.at(1));
      else if (rest == "_confusion") confusion_row(fold.confusion, cells);
      else if (rest == "_sizes") {
        if (cells.size() != 3) error("sizes row");
        fold.train_size = count(cells[1]);
        fold.test_size = count(cells[2]);
      } else {
        error("unknown row '" + tag + "'");
      }
    } else {
      error("unknown row '" + tag + "'");
    }
  }
  if (r.class_names.empty()) fail(ErrorKind::parse, source + ": no classes row");
  return r;
}

}  // namespace csen
