#include "temviro/report.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "temviro/error.hpp"

namespace temviro::metrics {
namespace {

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string real(const std::optional<double>& v) { return v ? real(*v) : "undefined"; }

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

std::string percent(const std::optional<double>& v) { return v ? percent(*v) : "-"; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::CorruptFile, "report key " + key + ": not a number: " + v);
}

std::optional<double> parse_optional(const std::string& key, const std::string& v) {
  if (v == "undefined") return std::nullopt;
  return parse_real(key, v);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  fail(ErrorCode::CorruptFile, "report key " + key + ": expected true/false");
}

}  // namespace

std::string report_text(const MetricsReport& r, const ReportSettings& settings) {
  std::ostringstream out;
  out << "# temviro metrics report\n";
  out << "version = " << kReportVersion << "\n";
  for (const auto& [k, v] : settings) out << "setting." << k << " = " << v << "\n";
  out << "epoch = " << r.epoch << "\n";
  out << "samples = " << r.samples << "\n";
  out << "accuracy = " << real(r.accuracy) << "\n";
  out << "loss = " << real(r.loss) << "\n";
  out << "kld = " << real(r.kld) << "\n";
  out << "qwk = " << real(r.qwk) << "\n";
  out << "macro.precision = " << real(r.macro_precision) << "\n";
  out << "macro.recall = " << real(r.macro_recall) << "\n";
  out << "macro.f1 = " << real(r.macro_f1) << "\n";
  out << "macro.auc = " << real(r.macro_auc) << "\n";
  for (std::size_t i = 0; i < r.per_class.size(); ++i) {
    const auto& c = r.per_class[i];
    const std::string p = "class." + std::to_string(i) + ".";
    out << p << "name = " << c.name << "\n";
    out << p << "precision = " << real(c.precision) << "\n";
    out << p << "recall = " << real(c.recall) << "\n";
    out << p << "f1 = " << real(c.f1) << "\n";
    out << p << "auc = " << real(c.auc) << "\n";
    out << p << "precision_defined = " << (c.precision_defined ? "true" : "false") << "\n";
    out << p << "recall_defined = " << (c.recall_defined ? "true" : "false") << "\n";
  }
  return out.str();
}

MetricsReport parse_report_text(std::string_view text, ReportSettings* settings) {
  MetricsReport r;
  bool versioned = false;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view l = trim(line);
    if (l.empty() || l.front() == '#') continue;
    const auto eq = l.find('=');
    if (eq == std::string_view::npos) fail(ErrorCode::CorruptFile, "report line without '=': " + std::string(l));
    const std::string key(trim(l.substr(0, eq)));
    const std::string value(trim(l.substr(eq + 1)));

    if (key == "version") {
      if (value != std::to_string(kReportVersion)) fail(ErrorCode::VersionMismatch, "report version " + value);
      versioned = true;
    } else if (key.rfind("setting.", 0) == 0) {
      if (settings) (*settings)[key.substr(8)] = value;
    } else if (key == "epoch") {
      r.epoch = static_cast<int>(parse_real(key, value));
    } else if (key == "samples") {
      r.samples = static_cast<std::uint64_t>(parse_real(key, value));
    } else if (key == "accuracy") {
      r.accuracy = parse_real(key, value);
    } else if (key == "loss") {
      r.loss = parse_real(key, value);
    } else if (key == "kld") {
      r.kld = parse_real(key, value);
    } else if (key == "qwk") {
      r.qwk = parse_optional(key, value);
    } else if (key == "macro.precision") {
      r.macro_precision = parse_real(key, value);
    } else if (key == "macro.recall") {
      r.macro_recall = parse_real(key, value);
    } else if (key == "macro.f1") {
      r.macro_f1 = parse_real(key, value);
    } else if (key == "macro.auc") {
      r.macro_auc = parse_optional(key, value);
    } else if (key.rfind("class.", 0) == 0) {
      const auto dot = key.find('.', 6);
      if (dot == std::string::npos) fail(ErrorCode::CorruptFile, "bad report key " + key);
      std::size_t idx = 0;
      const auto [ptr, ec] = std::from_chars(key.data() + 6, key.data() + dot, idx);
      if (ec != std::errc{} || ptr != key.data() + dot || idx > 4096) fail(ErrorCode::CorruptFile, "bad report key " + key);
      if (r.per_class.size() <= idx) r.per_class.resize(idx + 1);
      auto& c = r.per_class[idx];
      const std::string field = key.substr(dot + 1);
      if (field == "name") c.name = value;
      else if (field == "precision") c.precision = parse_real(key, value);
      else if (field == "recall") c.recall = parse_real(key, value);
      else if (field == "f1") c.f1 = parse_real(key, value);
      else if (field == "auc") c.auc = parse_optional(key, value);
      else if (field == "precision_defined") c.precision_defined = parse_bool(key, value);
      else if (field == "recall_defined") c.recall_defined = parse_bool(key, value);
      else fail(ErrorCode::CorruptFile, "unknown report key " + key);
    } else {
      fail(ErrorCode::CorruptFile, "unknown report key " + key);
    }
  }
  if (!versioned) fail(ErrorCode::CorruptFile, "report has no version line");
  return r;
}

std::string report_csv(const MetricsReport& r) {
  std::ostringstream out;
  out << "class,precision,recall,f1,auc\n";
  for (const auto& c : r.per_class) {
    out << c.name << ',' << real(c.precision) << ',' << real(c.recall) << ',' << real(c.f1) << ',' << real(c.auc) << '\n';
  }
  out << "Average," << real(r.macro_precision) << ',' << real(r.macro_recall) << ',' << real(r.macro_f1) << ','
      << real(r.macro_auc) << '\n';
  return out.str();
}

std::string report_table(const MetricsReport& r) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-10s %10s %10s %10s %10s\n", "Class", "Precision", "Recall", "F1", "AUC");
  out << line;
  for (const auto& c : r.per_class) {
    std::snprintf(line, sizeof line, "%-10s %10s %10s %10s %10s\n", c.name.c_str(), percent(c.precision).c_str(),
                  percent(c.recall).c_str(), percent(c.f1).c_str(), percent(c.auc).c_str());
    out << line;
  }
  std::snprintf(line, sizeof line, "%-10s %10s %10s %10s %10s\n", "Average", percent(r.macro_precision).c_str(),
                percent(r.macro_recall).c_str(), percent(r.macro_f1).c_str(), percent(r.macro_auc).c_str());
  out << line;
  out << "accuracy " << percent(r.accuracy) << "%  samples " << r.samples;
  if (r.qwk) {
    std::snprintf(line, sizeof line, "  qwk %.4f", *r.qwk);
    out << line;
  } else {
    out << "  qwk undefined";
  }
  std::snprintf(line, sizeof line, "  kld %.4f  loss %.4f\n", r.kld, r.loss);
  out << line;
  return out.str();
}

std::string confusion_csv(const ConfusionMatrix& cm, const std::vector<std::string>& class_names) {
  if (class_names.size() != cm.classes) fail(ErrorCode::ShapeMismatch, "class name count differs from matrix size");
  std::ostringstream out;
  out << "true\\pred";
  for (const auto& n : class_names) out << ',' << n;
  out << '\n';
  for (std::size_t t = 0; t < cm.classes; ++t) {
    out << class_names[t];
    for (std::size_t p = 0; p < cm.classes; ++p) out << ',' << cm.at(t, p);
    out << '\n';
  }
  return out.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

}  // namespace temviro::metrics
