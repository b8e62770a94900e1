#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "warpchart/distsummary.hpp"
#include "warpchart/fpca.hpp"
#include "warpchart/grid.hpp"
#include "warpchart/rankchart.hpp"

namespace warpchart {

enum class Method { WarpRank, PdfFpcaCc, DirectChart };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

struct MonitorConfig {
  std::size_t n0 = 30;
  std::size_t m = 30;
  double alpha_mix = 0.1;
  std::size_t grid_size = kDefaultGridSize;
  double var_frac = 0.99;
  RankChartConfig chart_t2;
  RankChartConfig chart_spe;
  Method method = Method::WarpRank;
  double alpha_direct = 0.01;
  std::size_t direct_tune = 100;  // tuning length of the direct chart

  /// Same rank-chart settings (with m taken from this config) for both charts.
  void set_chart(std::size_t m0, double lambda, double h, double ic_arl = 500.0);
  void validate() const;
};

struct ChartVerdict {
  bool alarmed = false;
  std::size_t n_at_alarm = 0;
  std::size_t change_point_global = 0;
  double ymax = 0.0;
};

struct MonitorVerdict {
  ChartVerdict t2;
  ChartVerdict spe;
  bool combined_alarm = false;
  std::size_t clamp_count = 0;
  std::size_t degenerate_subgroup_count = 0;
};

struct ChartPoint {
  std::size_t n = 0;  // future index; 0 while tuning
  double feature = 0.0;
  std::optional<double> ymax;  // Y-max, or the raw feature for the direct chart
  double control_limit = 0.0;
  bool alarmed = false;  // latched alarm state after this ingest
};

struct IngestResult {
  std::size_t k = 0;  // 1-based index in the post-training stream
  FeaturePair feature;
  ChartPoint t2;
  ChartPoint spe;
  MonitorVerdict verdict;
};

struct StageCounters {
  std::size_t warpings = 0;
  std::size_t fpca_fits = 0;
  std::size_t ingests = 0;
};

/// Builds the FPC model from the first n0 densities.
FpcModel train(std::span<const PdfOnGrid> training_pdfs, const MonitorConfig& cfg,
               StageCounters* counters = nullptr);

// Direct charting on one feature stream: UCL from the tuning prefix.
struct DirectChartState {
  std::size_t n_tune = 100;
  double alpha = 0.01;
  std::vector<double> tuning;
  std::optional<double> ucl;
  std::size_t n_future = 0;
  std::optional<std::size_t> first_flag;  // future index of the first flag
};

// The monitoring procedure: train once, then ingest densities one at a time.
// Both charts latch on their first alarm.
class Monitor {
 public:
  explicit Monitor(MonitorConfig cfg);

  void train(std::span<const PdfOnGrid> training_pdfs);
  bool trained() const noexcept { return model_.has_value(); }

  IngestResult ingest(const PdfOnGrid& f);

  const MonitorConfig& config() const noexcept { return cfg_; }
  const FpcModel& model() const;
  const MonitorVerdict& verdict() const noexcept { return verdict_; }
  const StageCounters& counters() const noexcept { return counters_; }
  const ChartState& chart_t2() const { return *chart_t2_; }
  const ChartState& chart_spe() const { return *chart_spe_; }
  const std::vector<FeaturePair>& features() const noexcept { return features_; }

  void set_diagnostics(std::size_t clamp_count, std::size_t degenerate_subgroups);

  /// Restores a monitor from a model and its stored feature stream.
  static Monitor restore(MonitorConfig cfg, FpcModel model, std::span<const FeaturePair> features);

 private:
  ChartPoint step_rank(ChartState& chart, ChartVerdict& verdict, double feature);
  ChartPoint step_direct(DirectChartState& chart, ChartVerdict& verdict, double feature);
  void feed(const FeaturePair& fp, IngestResult& out);

  MonitorConfig cfg_;
  std::optional<FpcModel> model_;
  std::optional<ChartState> chart_t2_;
  std::optional<ChartState> chart_spe_;
  DirectChartState direct_t2_;
  DirectChartState direct_spe_;
  std::vector<FeaturePair> features_;
  MonitorVerdict verdict_;
  StageCounters counters_;
};

/// Trains on the first n0 densities and ingests the rest.
Monitor run_monitor(std::span<const PdfOnGrid> pdfs, const MonitorConfig& cfg);

// Shewhart baselines on subgroup means and standard deviations.
struct ShewhartChart {
  double center = 0.0;
  double lcl = 0.0;
  double ucl = 0.0;
  std::vector<double> points;
  std::vector<std::size_t> flagged;  // 1-based subgroup indices outside the limits
};

struct XbarSResult {
  ShewhartChart xbar;
  ShewhartChart s;
};

/// c4(m) = sqrt(2/(m-1)) Gamma(m/2) / Gamma((m-1)/2).
double c4_constant(std::size_t m);

XbarSResult xbar_s_baseline(std::span<const Subgroup> subgroups, std::size_t n_calibration);

struct DirectChartResult {
  double ucl = 0.0;
  std::vector<bool> flags;            // one per post-tuning feature
  std::vector<std::size_t> flagged;   // 1-based indices into `features`
};

DirectChartResult direct_chart_baseline(std::span<const double> features, std::size_t n_tune,
                                        double alpha = 0.01);

}  // namespace warpchart
