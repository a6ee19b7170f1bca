#include "temviro/history.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "temviro/error.hpp"
#include "temviro/report.hpp"

namespace temviro {
namespace {

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::array<double, 6> values(const SplitMetrics& m) { return {m.accuracy, m.precision, m.recall, m.f1, m.loss, m.kld}; }

SplitMetrics from_values(const double* v) { return {v[0], v[1], v[2], v[3], v[4], v[5]}; }

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

const EpochRecord& TrainingHistory::best() const {
  for (const auto& r : records) {
    if (r.epoch == best_epoch) return r;
  }
  fail(ErrorCode::InvalidArgument, "history has no record for best epoch " + std::to_string(best_epoch));
}

int select_best_epoch(const std::vector<EpochRecord>& records) {
  const EpochRecord* best = nullptr;
  for (const auto& r : records) {
    if (best == nullptr || r.test.accuracy > best->test.accuracy) best = &r;
  }
  return best ? best->epoch : 0;
}

std::string history_text(const TrainingHistory& h) {
  std::ostringstream out;
  out << "# temviro training history\n";
  out << "version = " << kHistoryVersion << "\n";
  for (const auto& [k, v] : h.settings) out << "setting." << k << " = " << v << "\n";
  out << "best_epoch = " << h.best_epoch << "\n";
  out << "# record = epoch, then accuracy precision recall f1 loss kld for train and for test\n";
  for (const auto& r : h.records) {
    out << "record = " << r.epoch;
    for (double v : values(r.train)) out << ' ' << real(v);
    for (double v : values(r.test)) out << ' ' << real(v);
    out << "\n";
  }
  return out.str();
}

TrainingHistory parse_history_text(std::string_view text) {
  TrainingHistory h;
  bool versioned = false;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::CorruptFile, "history line without '=': " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "version") {
      if (value != std::to_string(kHistoryVersion)) fail(ErrorCode::VersionMismatch, "history version " + value);
      versioned = true;
    } else if (key.rfind("setting.", 0) == 0) {
      h.settings[key.substr(8)] = value;
    } else if (key == "best_epoch") {
      h.best_epoch = std::stoi(value);
    } else if (key == "record") {
      std::istringstream fields(value);
      EpochRecord r;
      double v[12];
      if (!(fields >> r.epoch)) fail(ErrorCode::CorruptFile, "bad history record: " + value);
      for (double& x : v) {
        std::string tok;
        if (!(fields >> tok)) fail(ErrorCode::CorruptFile, "short history record: " + value);
        x = std::strtod(tok.c_str(), nullptr);
      }
      std::string extra;
      if (fields >> extra) fail(ErrorCode::CorruptFile, "long history record: " + value);
      r.train = from_values(v);
      r.test = from_values(v + 6);
      h.records.push_back(r);
    } else {
      fail(ErrorCode::CorruptFile, "unknown history key " + key);
    }
  }
  if (!versioned) fail(ErrorCode::CorruptFile, "history has no version line");
  return h;
}

void save_history(const std::filesystem::path& path, const TrainingHistory& h) {
  metrics::write_text_file(path, history_text(h));
}

TrainingHistory load_history(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_history_text(buf.str());
}

void export_curves(const TrainingHistory& h, const std::filesystem::path& out_dir) {
  if (h.records.empty()) fail(ErrorCode::InvalidArgument, "cannot export curves of an empty history");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + out_dir.string() + ": " + ec.message());
  for (std::size_t k = 0; k < kCurveNames.size(); ++k) {
    std::string csv = "epoch,train,test\n";
    for (const auto& r : h.records) {
      csv += std::to_string(r.epoch) + "," + real(values(r.train)[k]) + "," + real(values(r.test)[k]) + "\n";
    }
    metrics::write_text_file(out_dir / (std::string(kCurveNames[k]) + ".csv"), csv);
  }
}

}  // namespace temviro
