#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "temviro/metrics.hpp"

namespace temviro::metrics {

inline constexpr int kReportVersion = 1;

// Run settings echoed into every report (batch size, learning rate, ...).
using ReportSettings = std::map<std::string, std::string>;

// Structured text, one `key = value` per line:
//
//   version = 1
//   setting.<name> = <value>
//   epoch, samples, accuracy, loss, kld, qwk
//   macro.precision, macro.recall, macro.f1, macro.auc
//   class.<i>.name, class.<i>.precision, class.<i>.recall, class.<i>.f1,
//   class.<i>.auc, class.<i>.precision_defined, class.<i>.recall_defined
//
// Reals use %.17g; an undefined AUC or QWK is written as `undefined`.
std::string report_text(const MetricsReport& r, const ReportSettings& settings = {});
MetricsReport parse_report_text(std::string_view text, ReportSettings* settings = nullptr);

// `class,precision,recall,f1,auc` with one row per class and an `Average`
// row of macro values. Full precision.
std::string report_csv(const MetricsReport& r);

// Fixed-width table for terminals; percentages to 2 decimals.
std::string report_table(const MetricsReport& r);

// `true\pred,<names...>` header then one row per true class.
std::string confusion_csv(const ConfusionMatrix& cm, const std::vector<std::string>& class_names);

void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace temviro::metrics
