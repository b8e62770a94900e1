#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace warpchart {

struct RankChartConfig {
  std::size_t m = 30;   // tuning length
  std::size_t m0 = 4;   // WMA starts at j = m - m0
  double lambda = 0.05;
  double control_limit = 0.0;  // h
  double ic_arl = 500.0;

  void validate() const;
};

/// R_k = #{i : x_i <= x_k}; ties share the largest count.
std::vector<std::size_t> ranks(std::span<const double> data);

/// Tie correction factor for the variance of the Mann-Whitney statistic.
double tie_correction(std::span<const double> data);

/// Standardized Mann-Whitney statistic of the split after the first j points.
/// Ties use average ranks. Returns 0 when every value is tied.
double smw(std::span<const double> data, std::size_t j);

/// smw(data, j) for j = 1 .. N-1 (element j-1).
std::vector<double> smw_all(std::span<const double> data);

/// argmax_{m <= t < N} |SMW_t|, smallest t on ties.
std::size_t change_point_estimate(std::span<const double> data, std::size_t m);

struct AlarmEvent {
  std::size_t n_at_alarm = 0;
  double ymax = 0.0;
  std::size_t change_point_local = 0;   // t*
  std::size_t change_point_global = 0;  // t* + N0
};

struct YmaxPoint {
  std::size_t n = 0;
  double ymax = 0.0;
};

struct StepResult {
  std::size_t n = 0;
  double ymax = 0.0;
  bool alarm = false;  // this step exceeds the limit
};

// Sequential rank chart. The first m values fill the tuning window; every
// later value is a future observation that yields a Y-max value. Rank counts
// are maintained incrementally, so one step costs O(N) at stream length N.
class ChartState {
 public:
  explicit ChartState(RankChartConfig config, std::size_t n0 = 0);

  /// Appends a value. Returns nothing while the tuning window is filling.
  std::optional<StepResult> push(double value);

  const RankChartConfig& config() const noexcept { return config_; }
  std::size_t n0() const noexcept { return n0_; }
  std::span<const double> observed() const noexcept { return observed_; }
  std::size_t n_future() const noexcept;
  bool tuning_complete() const noexcept { return observed_.size() >= config_.m; }
  const std::vector<YmaxPoint>& ymax_history() const noexcept { return history_; }
  const std::optional<AlarmEvent>& alarm() const noexcept { return alarm_; }

  /// SMW_{j,N} for j = 1..N-1 at the current stream length.
  std::vector<double> current_smw() const;

  /// Rebuilds a state from a stored stream; history and alarm are recomputed.
  static ChartState replay(RankChartConfig config, std::size_t n0, std::span<const double> observed);

 private:
  double ymax_from(std::span<const double> smw_values) const;

  RankChartConfig config_;
  std::size_t n0_;
  std::vector<double> observed_;
  std::vector<std::uint32_t> less_;        // #{i : x_i <  x_k}
  std::vector<std::uint32_t> less_equal_;  // #{i : x_i <= x_k}
  std::vector<YmaxPoint> history_;
  std::optional<AlarmEvent> alarm_;
};

/// Free-function form of one monitoring step.
StepResult ymax_step(ChartState& state, double new_value);

/// Local change point t* of the first alarm; throws NoAlarm before one fires.
std::size_t change_point(const ChartState& state);

struct CalibrationResult {
  double h = 0.0;
  double arl = 0.0;  // simulated ARL at h
  std::size_t iterations = 0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
};

struct CalibrationOptions {
  std::size_t m = 30;
  std::size_t m0 = 4;
  double lambda = 0.05;
  double ic_arl = 500.0;
  std::size_t reps = 2000;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  double tolerance = 0.05;  // relative ARL tolerance
};

/// Control limit h whose simulated in-control ARL matches ic_arl. In-control
/// streams are i.i.d. uniforms; ranks make the result distribution free.
CalibrationResult calibrate_limit(const CalibrationOptions& opts);

/// Mean run length at a fixed h over `reps` simulated in-control streams.
/// Runs are truncated at `cap` future samples.
double simulate_arl(const RankChartConfig& config, std::size_t reps, std::uint64_t seed,
                    std::size_t cap, std::size_t workers = 1);

}  // namespace warpchart
