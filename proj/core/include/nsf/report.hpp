#pragma once

#include <string>

#include "nsf/inference.hpp"
#include "nsf/metrics.hpp"

namespace nsf {

/// One row per label: subject,id,name,volume_mm3,dice (dice empty when unknown).
std::string roi_report_csv(const ROIReport& report, const std::string& subject);
std::string roi_report_json(const ROIReport& report, const std::string& subject);

/// Per-case rows in the same layout as roi_report_csv.
std::string dataset_cases_csv(const DatasetReport& report);
/// Two blocks: mean Dice per label, then volume correlations per structure.
std::string dataset_summary_csv(const DatasetReport& report, const LabelSchema& schema);
std::string dataset_report_json(const DatasetReport& report, const LabelSchema& schema);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

} // namespace nsf
