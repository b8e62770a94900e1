#include "warpchart/rankchart.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "warpchart/error.hpp"
#include "warpchart/random.hpp"

namespace warpchart {

namespace {

struct RankCounts {
  std::vector<std::uint32_t> less;
  std::vector<std::uint32_t> less_equal;
};

RankCounts count_ranks(std::span<const double> data) {
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  RankCounts rc;
  rc.less.reserve(data.size());
  rc.less_equal.reserve(data.size());
  for (double x : data) {
    rc.less.push_back(static_cast<std::uint32_t>(std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin()));
    rc.less_equal.push_back(
        static_cast<std::uint32_t>(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin()));
  }
  return rc;
}

// SMW_{j,N} for j = 1..N-1 into out[j-1]. Average ranks are (less + 1 + less_equal) / 2;
// each tie group of size w contributes w copies of (w^2 - 1) to the tie sum.
void smw_from_counts(std::span<const std::uint32_t> less, std::span<const std::uint32_t> less_equal,
                     std::vector<double>& out) {
  const std::size_t n = less.size();
  out.assign(n > 0 ? n - 1 : 0, 0.0);
  if (n < 2) return;
  std::uint64_t tie_sum = 0;  // sum over tie groups of w (w^2 - 1)
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t w = less_equal[k] - less[k];
    tie_sum += w * w - 1;
  }
  const double nd = static_cast<double>(n);
  const double c_tie = 1.0 - static_cast<double>(tie_sum) / (nd * (nd * nd - 1.0));
  if (!(c_tie > 0.0)) return;
  double w_sum = 0.0;
  for (std::size_t j = 1; j < n; ++j) {
    w_sum += 0.5 * (static_cast<double>(less[j - 1]) + 1.0 + static_cast<double>(less_equal[j - 1]));
    const double jd = static_cast<double>(j);
    const double mw = w_sum - jd * (jd + 1.0) / 2.0;
    const double e0 = jd * (nd - jd) / 2.0;
    const double var0 = c_tie * jd * (nd - jd) * (nd + 1.0) / 12.0;
    out[j - 1] = (mw - e0) / std::sqrt(var0);
  }
}

std::size_t argmax_abs_from(std::span<const double> smw_values, std::size_t m) {
  // smw_values[t-1] holds SMW_t; search m <= t <= N-1.
  std::size_t best = m;
  double best_val = -1.0;
  for (std::size_t t = m; t <= smw_values.size(); ++t) {
    const double a = std::abs(smw_values[t - 1]);
    if (a > best_val) {
      best_val = a;
      best = t;
    }
  }
  return best;
}

}  // namespace

void RankChartConfig::validate() const {
  if (!(lambda > 0.0 && lambda < 1.0)) throw Error(ErrorKind::InvalidParameter, "lambda must lie in (0, 1)");
  if (m0 < 4 || m0 > 10) throw Error(ErrorKind::InvalidParameter, "m0 must lie in [4, 10]");
  if (m <= m0) throw Error(ErrorKind::InvalidParameter, "tuning length m must exceed m0");
  if (!(control_limit >= 0.0) || !std::isfinite(control_limit)) {
    throw Error(ErrorKind::InvalidParameter, "control limit must be finite and nonnegative");
  }
  if (!(ic_arl > 0.0)) throw Error(ErrorKind::InvalidParameter, "IC ARL must be positive");
}

std::vector<std::size_t> ranks(std::span<const double> data) {
  const auto rc = count_ranks(data);
  return {rc.less_equal.begin(), rc.less_equal.end()};
}

double tie_correction(std::span<const double> data) {
  const auto rc = count_ranks(data);
  const double n = static_cast<double>(data.size());
  if (data.size() < 2) return 1.0;
  std::uint64_t tie_sum = 0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const std::uint64_t w = rc.less_equal[k] - rc.less[k];
    tie_sum += w * w - 1;
  }
  return 1.0 - static_cast<double>(tie_sum) / (n * (n * n - 1.0));
}

std::vector<double> smw_all(std::span<const double> data) {
  const auto rc = count_ranks(data);
  std::vector<double> out;
  smw_from_counts(rc.less, rc.less_equal, out);
  return out;
}

double smw(std::span<const double> data, std::size_t j) {
  if (j < 1 || j >= data.size()) throw Error(ErrorKind::OutOfRange, "split index must satisfy 1 <= j < N");
  return smw_all(data)[j - 1];
}

std::size_t change_point_estimate(std::span<const double> data, std::size_t m) {
  if (m < 1 || m >= data.size()) throw Error(ErrorKind::OutOfRange, "need 1 <= m < N");
  return argmax_abs_from(smw_all(data), m);
}

ChartState::ChartState(RankChartConfig config, std::size_t n0) : config_(config), n0_(n0) {
  config_.validate();
}

std::size_t ChartState::n_future() const noexcept {
  return observed_.size() > config_.m ? observed_.size() - config_.m : 0;
}

std::vector<double> ChartState::current_smw() const {
  std::vector<double> out;
  smw_from_counts(less_, less_equal_, out);
  return out;
}

double ChartState::ymax_from(std::span<const double> smw_values) const {
  const std::size_t n_total = observed_.size();
  double y = 0.0;
  double ymax = 0.0;
  for (std::size_t j = config_.m - config_.m0; j < n_total; ++j) {
    y = config_.lambda * smw_values[j - 1] + (1.0 - config_.lambda) * y;
    ymax = std::max(ymax, std::abs(y));
  }
  return ymax;
}

std::optional<StepResult> ChartState::push(double value) {
  if (!std::isfinite(value)) throw Error(ErrorKind::InvalidParameter, "chart input must be finite");
  std::uint32_t below = 0;
  std::uint32_t at_or_below = 1;
  for (std::size_t i = 0; i < observed_.size(); ++i) {
    const double x = observed_[i];
    if (value < x) {
      ++less_[i];
      ++less_equal_[i];
    } else if (value == x) {
      ++less_equal_[i];
      ++at_or_below;
    } else {
      ++below;
      ++at_or_below;
    }
  }
  observed_.push_back(value);
  less_.push_back(below);
  less_equal_.push_back(at_or_below);
  if (observed_.size() <= config_.m) return std::nullopt;

  const auto smw_values = current_smw();
  StepResult r;
  r.n = n_future();
  r.ymax = ymax_from(smw_values);
  r.alarm = r.ymax > config_.control_limit;
  history_.push_back({r.n, r.ymax});
  if (r.alarm && !alarm_) {
    AlarmEvent ev;
    ev.n_at_alarm = r.n;
    ev.ymax = r.ymax;
    ev.change_point_local = argmax_abs_from(smw_values, config_.m);
    ev.change_point_global = ev.change_point_local + n0_;
    alarm_ = ev;
  }
  return r;
}

ChartState ChartState::replay(RankChartConfig config, std::size_t n0, std::span<const double> observed) {
  ChartState state(config, n0);
  for (double v : observed) state.push(v);
  return state;
}

StepResult ymax_step(ChartState& state, double new_value) {
  if (!state.tuning_complete()) {
    throw Error(ErrorKind::InsufficientTuning, "tuning window is not full yet");
  }
  return *state.push(new_value);
}

std::size_t change_point(const ChartState& state) {
  if (!state.alarm()) throw Error(ErrorKind::NoAlarm, "no alarm has been raised");
  return state.alarm()->change_point_local;
}

namespace {

// One simulated in-control stream, advanced until its running Y-max maximum
// exceeds a stopping level or the cap is reached. Records (n, new maximum)
// whenever the running maximum grows, which fixes the run length at every
// h below the stopping level.
struct Replica {
  ChartState state;
  Rng rng;
  std::vector<YmaxPoint> records;
  double running_max = -1.0;

  Replica(const RankChartConfig& cfg, std::uint64_t seed) : state(cfg), rng(seed) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < cfg.m; ++i) state.push(u(rng));
  }

  void advance(double stop_level, std::size_t cap) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    while (running_max <= stop_level && state.n_future() < cap) {
      const auto r = *state.push(u(rng));
      if (r.ymax > running_max) {
        running_max = r.ymax;
        records.push_back({r.n, r.ymax});
      }
    }
  }

  std::size_t run_length(double h, std::size_t cap) const {
    for (const auto& rec : records) {
      if (rec.ymax > h) return rec.n;
    }
    return cap;
  }
};

template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

double mean_run_length(const std::vector<Replica>& reps, double h, std::size_t cap) {
  double total = 0.0;
  for (const auto& r : reps) total += static_cast<double>(r.run_length(h, cap));
  return total / static_cast<double>(reps.size());
}

std::size_t default_cap(double ic_arl) {
  return static_cast<std::size_t>(std::max(200.0, 20.0 * ic_arl));
}

}  // namespace

CalibrationResult calibrate_limit(const CalibrationOptions& opts) {
  RankChartConfig cfg{opts.m, opts.m0, opts.lambda, 0.0, opts.ic_arl};
  cfg.validate();
  if (opts.reps < 1) throw Error(ErrorKind::InvalidParameter, "calibration needs at least one replication");
  const std::size_t cap = default_cap(opts.ic_arl);

  std::vector<Replica> reps;
  reps.reserve(opts.reps);
  for (std::size_t r = 0; r < opts.reps; ++r) reps.emplace_back(cfg, derive_seed(opts.seed, r));

  const double target = opts.ic_arl;
  double hi = 0.5;
  for (int grow = 0;; ++grow) {
    parallel_for(reps.size(), opts.workers, [&](std::size_t i) { reps[i].advance(hi, cap); });
    if (mean_run_length(reps, hi, cap) >= target) break;
    if (grow > 200) throw Error(ErrorKind::CalibrationFailure, "could not bracket the target ARL");
    hi *= 1.05;
  }

  double lo = 0.0;
  double arl_lo = mean_run_length(reps, lo, cap);
  double arl_hi = mean_run_length(reps, hi, cap);
  std::size_t it = 0;
  for (; it < 60 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double arl = mean_run_length(reps, mid, cap);
    if (arl < target) {
      lo = mid;
      arl_lo = arl;
    } else {
      hi = mid;
      arl_hi = arl;
    }
  }
  CalibrationResult res;
  const bool pick_hi = std::abs(arl_hi - target) <= std::abs(arl_lo - target);
  res.h = pick_hi ? hi : lo;
  res.arl = pick_hi ? arl_hi : arl_lo;
  res.iterations = it;
  res.reps = opts.reps;
  res.seed = opts.seed;
  if (std::abs(res.arl / target - 1.0) > opts.tolerance) {
    throw Error(ErrorKind::CalibrationFailure,
                "bisection ended at ARL " + std::to_string(res.arl) + " for target " + std::to_string(target));
  }
  return res;
}

double simulate_arl(const RankChartConfig& config, std::size_t reps, std::uint64_t seed, std::size_t cap,
                    std::size_t workers) {
  config.validate();
  if (reps < 1) throw Error(ErrorKind::InvalidParameter, "need at least one replication");
  std::vector<double> lengths(reps, 0.0);
  parallel_for(reps, workers, [&](std::size_t r) {
    Replica rep(config, derive_seed(seed, r));
    rep.advance(config.control_limit, cap);
    lengths[r] = static_cast<double>(rep.run_length(config.control_limit, cap));
  });
  return std::accumulate(lengths.begin(), lengths.end(), 0.0) / static_cast<double>(reps);
}

}  // namespace warpchart
