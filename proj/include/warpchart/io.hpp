#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "warpchart/distsummary.hpp"
#include "warpchart/fpca.hpp"
#include "warpchart/pipeline.hpp"
#include "warpchart/rankchart.hpp"
#include "warpchart/simgen.hpp"

namespace warpchart::io {

using nlohmann::json;

/// Single-column (value) or two-column (timestamp,value) CSV; a non-numeric
/// first line is treated as a header.
DsfSeries read_dsf_csv(const std::filesystem::path& path);
void write_dsf_csv(const std::filesystem::path& path, const DsfSeries& series);

struct PdfSidecar {
  std::size_t grid_size = kDefaultGridSize;
  double alpha_mix = 0.0;
  SupportInterval support;
  std::size_t count = 0;
};

/// One row of G values per density, plus `<path>.json` with the sidecar.
void write_pdf_csv(const std::filesystem::path& path, const PdfSequence& pdfs, const PdfSidecar& sidecar);
PdfSequence read_pdf_csv(const std::filesystem::path& path);
std::optional<PdfSidecar> read_pdf_sidecar(const std::filesystem::path& csv_path);

json to_json(const SupportInterval& s);
json to_json(const FpcModel& model);
FpcModel model_from_json(const json& j);
json to_json(const MonitorConfig& cfg);
MonitorConfig monitor_config_from_json(const json& j);
json to_json(const MonitorVerdict& v);
json to_json(const ChartState& chart);
json session_json(const Monitor& monitor);
Monitor monitor_from_session(const json& j);
json event_json(const IngestResult& r);

struct CalibrationRow {
  std::size_t m = 30;
  std::size_t m0 = 4;
  double lambda = 0.05;
  double ic_arl = 500.0;
  double h = 0.0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
};

std::vector<CalibrationRow> read_calibration_table(const std::filesystem::path& path);
void append_calibration_row(const std::filesystem::path& path, const CalibrationRow& row);
std::optional<double> lookup_limit(const std::vector<CalibrationRow>& table, std::size_t m, std::size_t m0,
                                   double lambda, double ic_arl);

/// n,ymax,control_limit,alarmed rows for one chart.
void write_chart_csv(const std::filesystem::path& path, const std::vector<ChartPoint>& points);

void write_power_report(const std::filesystem::path& csv_path, const PowerStudyReport& report);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Shortest round-trip decimal form (17 significant digits at most).
std::string format_double(double x);

}  // namespace warpchart::io
