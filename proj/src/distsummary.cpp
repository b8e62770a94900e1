#include "warpchart/distsummary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "warpchart/error.hpp"

namespace warpchart {

namespace {

void require_finite(std::span<const double> values, const char* where) {
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidParameter, std::string(where) + ": non-finite value");
  }
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

std::vector<Subgroup> partition_equal(const DsfSeries& series, std::size_t m) {
  if (m < 2) throw Error(ErrorKind::InvalidParameter, "subgroup size must be at least 2");
  if (series.values.size() < m) {
    throw Error(ErrorKind::InsufficientData, "series shorter than one subgroup");
  }
  require_finite(series.values, "partition_equal");
  const std::size_t count = series.values.size() / m;
  std::vector<Subgroup> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    const auto first = series.values.begin() + static_cast<std::ptrdiff_t>(j * m);
    out.push_back({j + 1, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(m))});
  }
  return out;
}

std::vector<Subgroup> partition_daily(const DsfSeries& series, std::size_t min_size) {
  if (series.timestamps.size() != series.values.size()) {
    throw Error(ErrorKind::InvalidParameter, "daily split needs one timestamp per value");
  }
  constexpr std::int64_t kDay = 86400;
  auto day_of = [](std::int64_t t) { return t >= 0 ? t / kDay : (t - kDay + 1) / kDay; };
  std::vector<Subgroup> out;
  std::size_t i = 0;
  while (i < series.values.size()) {
    const std::int64_t day = day_of(series.timestamps[i]);
    Subgroup g;
    while (i < series.values.size() && day_of(series.timestamps[i]) == day) {
      g.values.push_back(series.values[i]);
      ++i;
    }
    if (g.values.size() >= min_size) {
      g.index = out.size() + 1;
      out.push_back(std::move(g));
    }
  }
  return out;
}

double sample_quantile(std::span<const double> values, double p) {
  if (values.empty()) throw Error(ErrorKind::InsufficientData, "quantile of empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double t = pos - static_cast<double>(lo);
  return sorted[lo] + t * (sorted[hi] - sorted[lo]);
}

double sample_mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::InsufficientData, "mean of empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_stddev(std::span<const double> values) {
  if (values.size() < 2) throw Error(ErrorKind::InsufficientData, "standard deviation needs two values");
  const double mean = sample_mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

std::vector<double> boxplot_filter(std::span<const double> values, double k) {
  if (!(k > 0.0)) throw Error(ErrorKind::InvalidParameter, "fence multiplier must be positive");
  require_finite(values, "boxplot_filter");
  // Quartile fences are not meaningful for fewer than four points.
  if (values.size() < 4) return {values.begin(), values.end()};
  const double q1 = sample_quantile(values, 0.25);
  const double q3 = sample_quantile(values, 0.75);
  const double iqr = q3 - q1;
  if (iqr <= 0.0) return {values.begin(), values.end()};
  const double lo = q1 - k * iqr;
  const double hi = q3 + k * iqr;
  std::vector<double> kept;
  kept.reserve(values.size());
  std::copy_if(values.begin(), values.end(), std::back_inserter(kept),
               [&](double v) { return v >= lo && v <= hi; });
  return kept;
}

SupportInterval estimate_support(std::span<const double> training, double theta_widen) {
  if (training.size() < 2) throw Error(ErrorKind::InsufficientData, "support estimate needs two values");
  if (!(theta_widen >= 0.0) || theta_widen > 1.0) {
    throw Error(ErrorKind::InvalidParameter, "widening factor must lie in [0, 1]");
  }
  require_finite(training, "estimate_support");
  const double s = sample_stddev(training);
  if (!(s > 0.0)) throw Error(ErrorKind::DegenerateSupport, "training data has zero spread");
  const auto [mn, mx] = std::minmax_element(training.begin(), training.end());
  const double pad = s / std::sqrt(static_cast<double>(training.size()));
  const double lb = *mn - pad;
  const double ub = *mx + pad;
  const double widen = theta_widen * (ub - lb);
  return {lb - widen, ub + widen, theta_widen};
}

ScaledValues scale_to_unit(std::span<const double> values, const SupportInterval& support) {
  if (!(support.ub_star > support.lb_star)) {
    throw Error(ErrorKind::DegenerateSupport, "support upper bound must exceed the lower bound");
  }
  ScaledValues out;
  out.values.reserve(values.size());
  const double width = support.width();
  for (double v : values) {
    double z = (v - support.lb_star) / width;
    if (z < 0.0 || z > 1.0) {
      ++out.clamped;
      z = std::clamp(z, 0.0, 1.0);
    }
    out.values.push_back(z);
  }
  return out;
}

double silverman_bandwidth(std::span<const double> values) {
  const double n = static_cast<double>(values.size());
  const double s = sample_stddev(values);
  const double iqr = sample_quantile(values, 0.75) - sample_quantile(values, 0.25);
  const double h = 0.9 * std::min(s, iqr / 1.34) * std::pow(n, -0.2);
  return std::max(h, kBandwidthFloor);
}

PdfOnGrid kde_unit(std::span<const double> values, std::size_t grid_size) {
  if (values.size() < 5) throw Error(ErrorKind::InsufficientData, "kernel density estimate needs 5 values");
  require_finite(values, "kde_unit");
  const double h = silverman_bandwidth(values);
  const auto x = grid_points(grid_size);
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * h);
  // Kernels further than this many bandwidths contribute below double precision.
  const double reach = 40.0 * h;

  std::vector<double> density(grid_size, 0.0);
  for (double xi : values) {
    const std::size_t lo = static_cast<std::size_t>(std::max(0.0, std::floor((xi - reach) * (grid_size - 1))));
    const std::size_t hi = std::min(grid_size - 1, static_cast<std::size_t>(std::max(0.0, std::ceil((xi + reach) * (grid_size - 1)))));
    for (std::size_t k = lo; k <= hi; ++k) {
      const double z = (x[k] - xi) / h;
      density[k] += norm * std::exp(-0.5 * z * z);
    }
  }
  // Boundary weight: inverse kernel mass inside [0,1] at the evaluation point.
  for (std::size_t k = 0; k < grid_size; ++k) {
    density[k] /= normal_cdf((1.0 - x[k]) / h) - normal_cdf(-x[k] / h);
  }
  const double total = integrate(density);
  for (double& d : density) d /= total;
  return PdfOnGrid(std::move(density));
}

PdfOnGrid mix_with_uniform(const PdfOnGrid& f, double alpha_mix) {
  if (!(alpha_mix >= 0.0 && alpha_mix < 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "mixing coefficient must lie in [0, 1)");
  }
  PdfOnGrid out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = (1.0 - alpha_mix) * f[i] + alpha_mix;
  return out;
}

DistributionSummary summarize(std::span<const Subgroup> subgroups, const SummaryOptions& opts) {
  if (subgroups.empty()) throw Error(ErrorKind::InsufficientData, "no subgroups to summarize");
  DistributionSummary out;
  if (opts.support) {
    out.support = *opts.support;
  } else {
    const std::size_t n_tr = std::min(opts.n_training, subgroups.size());
    std::vector<double> training;
    for (std::size_t j = 0; j < n_tr; ++j) {
      training.insert(training.end(), subgroups[j].values.begin(), subgroups[j].values.end());
    }
    out.support = estimate_support(boxplot_filter(training, opts.boxplot_k), opts.theta_widen);
  }
  out.pdfs.reserve(subgroups.size());
  for (const auto& g : subgroups) {
    auto scaled = scale_to_unit(g.values, out.support);
    out.clamp_count += scaled.clamped;
    if (silverman_bandwidth(scaled.values) <= kBandwidthFloor) ++out.degenerate_subgroup_count;
    out.pdfs.push_back(kde_unit(scaled.values, opts.grid_size));
  }
  return out;
}

}  // namespace warpchart
