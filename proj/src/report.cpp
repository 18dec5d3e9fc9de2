#include "btrf/report.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace btrf {

namespace {

using nlohmann::json;

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double from_json_number(const json& v) {
  return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
}

std::string csv_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

std::string fixed(double v, int digits) {
  if (std::isinf(v)) return "inf";
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

json parse_line(const std::string& line, int line_no) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw DataError("json-lines report line " + std::to_string(line_no) + ": " + e.what());
  }
}

}  // namespace

const char* report_extension(ReportFormat format) {
  switch (format) {
    case ReportFormat::Text: return "txt";
    case ReportFormat::Csv: return "csv";
    case ReportFormat::JsonLines: return "jsonl";
  }
  return "txt";
}

void write_frame_report(std::ostream& out, const std::vector<FrameRow>& rows, ReportFormat format) {
  switch (format) {
    case ReportFormat::Csv:
      out << "frame,trans_err_m,rot_err_deg,inliers,correct,runtime_ms\n";
      for (const auto& r : rows)
        out << r.frame << ',' << csv_number(r.trans_err_m) << ',' << csv_number(r.rot_err_deg) << ','
            << r.inliers << ',' << (r.correct ? 1 : 0) << ',' << csv_number(r.runtime_ms) << '\n';
      break;
    case ReportFormat::JsonLines:
      for (const auto& r : rows) {
        const json j = {{"frame", r.frame},
                        {"trans_err_m", finite_or_null(r.trans_err_m)},
                        {"rot_err_deg", finite_or_null(r.rot_err_deg)},
                        {"inliers", r.inliers},
                        {"correct", r.correct},
                        {"runtime_ms", r.runtime_ms}};
        out << j.dump() << '\n';
      }
      break;
    case ReportFormat::Text:
      out << std::left << std::setw(8) << "frame" << std::setw(14) << "trans_err_m" << std::setw(14)
          << "rot_err_deg" << std::setw(9) << "inliers" << std::setw(9) << "correct"
          << "runtime_ms\n";
      for (const auto& r : rows)
        out << std::left << std::setw(8) << r.frame << std::setw(14) << fixed(r.trans_err_m, 4)
            << std::setw(14) << fixed(r.rot_err_deg, 3) << std::setw(9) << r.inliers << std::setw(9)
            << (r.correct ? "yes" : "no") << fixed(r.runtime_ms, 1) << '\n';
      break;
  }
}

void write_summary_report(std::ostream& out, const std::vector<SummaryRow>& rows, ReportFormat format) {
  switch (format) {
    case ReportFormat::Csv:
      out << "n_max,frames,percent_correct,median_trans_err_m,median_rot_err_deg,mean_runtime_ms\n";
      for (const auto& r : rows)
        out << r.n_max << ',' << r.frames << ',' << csv_number(r.percent_correct) << ','
            << csv_number(r.median_trans_err_m) << ',' << csv_number(r.median_rot_err_deg) << ','
            << csv_number(r.mean_runtime_ms) << '\n';
      break;
    case ReportFormat::JsonLines:
      for (const auto& r : rows) {
        const json j = {{"n_max", r.n_max},
                        {"frames", r.frames},
                        {"percent_correct", r.percent_correct},
                        {"median_trans_err_m", finite_or_null(r.median_trans_err_m)},
                        {"median_rot_err_deg", finite_or_null(r.median_rot_err_deg)},
                        {"mean_runtime_ms", r.mean_runtime_ms}};
        out << j.dump() << '\n';
      }
      break;
    case ReportFormat::Text:
      out << std::left << std::setw(7) << "n_max" << std::setw(8) << "frames" << std::setw(11)
          << "correct" << std::setw(16) << "median_trans_m" << std::setw(16) << "median_rot_deg"
          << "mean_runtime_ms\n";
      for (const auto& r : rows)
        out << std::left << std::setw(7) << r.n_max << std::setw(8) << r.frames << std::setw(11)
            << (fixed(100.0 * r.percent_correct, 1) + "%") << std::setw(16)
            << fixed(r.median_trans_err_m, 4) << std::setw(16) << fixed(r.median_rot_err_deg, 3)
            << fixed(r.mean_runtime_ms, 1) << '\n';
      break;
  }
}

std::vector<FrameRow> read_frame_rows_jsonl(std::istream& in) {
  std::vector<FrameRow> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = parse_line(line, line_no);
    try {
      FrameRow r;
      r.frame = j.at("frame").get<int>();
      r.trans_err_m = from_json_number(j.at("trans_err_m"));
      r.rot_err_deg = from_json_number(j.at("rot_err_deg"));
      r.inliers = j.at("inliers").get<int>();
      r.correct = j.at("correct").get<bool>();
      r.runtime_ms = j.at("runtime_ms").get<double>();
      rows.push_back(r);
    } catch (const json::exception& e) {
      throw DataError("json-lines report line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

std::vector<SummaryRow> read_summary_rows_jsonl(std::istream& in) {
  std::vector<SummaryRow> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = parse_line(line, line_no);
    try {
      SummaryRow r;
      r.n_max = j.at("n_max").get<int>();
      r.frames = j.at("frames").get<int>();
      r.percent_correct = j.at("percent_correct").get<double>();
      r.median_trans_err_m = from_json_number(j.at("median_trans_err_m"));
      r.median_rot_err_deg = from_json_number(j.at("median_rot_err_deg"));
      r.mean_runtime_ms = j.at("mean_runtime_ms").get<double>();
      rows.push_back(r);
    } catch (const json::exception& e) {
      throw DataError("json-lines report line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace btrf
