#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "btrf/config.hpp"

namespace btrf {

/// One relocalized frame. Errors are +inf when no pose was produced.
struct FrameRow {
  int frame = 0;
  double trans_err_m = 0.0;
  double rot_err_deg = 0.0;
  int inliers = 0;
  bool correct = false;
  double runtime_ms = 0.0;

  bool operator==(const FrameRow&) const = default;
};

/// Aggregate metrics for one backtracking budget.
struct SummaryRow {
  int n_max = 0;
  int frames = 0;
  double percent_correct = 0.0;
  double median_trans_err_m = 0.0;
  double median_rot_err_deg = 0.0;
  double mean_runtime_ms = 0.0;

  bool operator==(const SummaryRow&) const = default;
};

/// CSV columns: frame,trans_err_m,rot_err_deg,inliers,correct,runtime_ms.
void write_frame_report(std::ostream& out, const std::vector<FrameRow>& rows, ReportFormat format);
void write_summary_report(std::ostream& out, const std::vector<SummaryRow>& rows, ReportFormat format);

/// Inverse of the json-lines writers. Infinite errors are written as null.
std::vector<FrameRow> read_frame_rows_jsonl(std::istream& in);
std::vector<SummaryRow> read_summary_rows_jsonl(std::istream& in);

/// File extension for a report format, without the dot.
const char* report_extension(ReportFormat format);

}  // namespace btrf
