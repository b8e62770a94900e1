#pragma once

// Raw DSF stream -> sequence of densities on [0,1].

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "warpchart/grid.hpp"

namespace warpchart {

struct DsfSeries {
  std::vector<double> values;
  // Optional monotone instants, seconds since the Unix epoch.
  std::vector<std::int64_t> timestamps;
};

struct Subgroup {
  std::size_t index = 0;  // 1-based
  std::vector<double> values;
};

struct SupportInterval {
  double lb_star = 0.0;
  double ub_star = 1.0;
  double theta_widen = 0.4;

  double width() const noexcept { return ub_star - lb_star; }
};

std::vector<Subgroup> partition_equal(const DsfSeries& series, std::size_t m);

/// Splits a timestamped series into calendar days (UTC). Days with fewer than
/// `min_size` samples are skipped.
std::vector<Subgroup> partition_daily(const DsfSeries& series, std::size_t min_size = 5);

/// Linear-interpolation sample quantile (type 7).
double sample_quantile(std::span<const double> values, double p);
double sample_mean(std::span<const double> values);
double sample_stddev(std::span<const double> values);

/// Keeps values inside [Q1 - k IQR, Q3 + k IQR], preserving order.
std::vector<double> boxplot_filter(std::span<const double> values, double k = 1.5);

/// Bounds from min/max padded by s/sqrt(N), then widened by theta times the width.
SupportInterval estimate_support(std::span<const double> training, double theta_widen = 0.4);

struct ScaledValues {
  std::vector<double> values;
  std::size_t clamped = 0;  // how many fell outside [0,1] before clamping
};

ScaledValues scale_to_unit(std::span<const double> values, const SupportInterval& support);

inline constexpr double kBandwidthFloor = 1e-3;

/// Silverman's rule 0.9 min(s, IQR/1.34) n^(-1/5), floored at kBandwidthFloor.
double silverman_bandwidth(std::span<const double> values);

/// Gaussian KDE on [0,1]. At each grid point the kernel sum is divided by the
/// kernel mass inside [0,1] there; the curve is then renormalized to unit
/// trapezoidal integral.
PdfOnGrid kde_unit(std::span<const double> values, std::size_t grid_size = kDefaultGridSize);

/// (1 - alpha) f + alpha on [0,1]; output is bounded below by alpha.
PdfOnGrid mix_with_uniform(const PdfOnGrid& f, double alpha_mix = 0.1);

struct DistributionSummary {
  PdfSequence pdfs;
  SupportInterval support;
  std::size_t clamp_count = 0;
  std::size_t degenerate_subgroup_count = 0;  // bandwidth floor engaged
};

struct SummaryOptions {
  std::size_t n_training = 30;  // subgroups used to estimate the support
  double theta_widen = 0.4;
  double boxplot_k = 1.5;
  std::size_t grid_size = kDefaultGridSize;
  // Use this support instead of estimating one.
  std::optional<SupportInterval> support;
};

/// Support estimation on the first n_training subgroups, scaling with clamping,
/// and one KDE per subgroup.
DistributionSummary summarize(std::span<const Subgroup> subgroups, const SummaryOptions& opts);

}  // namespace warpchart
