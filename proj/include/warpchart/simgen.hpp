#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "warpchart/distsummary.hpp"
#include "warpchart/grid.hpp"
#include "warpchart/pipeline.hpp"
#include "warpchart/random.hpp"

namespace warpchart {

struct BetaSpec {
  double a = 1.0;
  double b = 1.0;

  void validate() const;
};

struct UniformRange {
  double lo = 0.0;
  double hi = 1.0;

  double draw(Rng& rng) const;
};

PdfOnGrid beta_pdf(const BetaSpec& spec, std::size_t grid_size = kDefaultGridSize);

/// Convex combination (1 - w) f + w g of two densities on the same grid.
PdfOnGrid mix_pdfs(const PdfOnGrid& f, const PdfOnGrid& g, double w);

double beta_draw(const BetaSpec& spec, Rng& rng);
std::vector<double> beta_sample(const BetaSpec& spec, std::size_t n, std::uint64_t seed);

/// Beta(5,7) half followed by a 0.7 Beta(5,7) + 0.3 Beta(25,9) half, each
/// standardized by its own sample mean and standard deviation (50,000 values).
DsfSeries appendix1_series(std::uint64_t seed);

struct ScenarioSpec {
  std::size_t T = 130;
  std::size_t tau = 100;
  double delta = 0.25;
  UniformRange a{10.0, 14.0};
  UniformRange b{14.0, 20.0};
  UniformRange c{14.0, 20.0};
  UniformRange d{20.0, 25.0};
  std::uint64_t seed = 1;
  std::size_t grid_size = kDefaultGridSize;

  void validate() const;
};

enum class Scenario { I, II };

/// T = 130 (I) or T = 200 (II), change at 100.
ScenarioSpec scenario_spec(Scenario scenario, double delta, std::uint64_t seed);

/// Single-beta densities up to tau, beta mixtures afterwards.
PdfSequence simulate_scenario1(const ScenarioSpec& spec);

inline constexpr std::size_t kOutlierT = 230;
inline constexpr std::size_t kOutlierTau = 200;
inline constexpr std::size_t kOutlierFirst = 160;
inline constexpr std::size_t kOutlierLast = 163;

/// Length-230 sequence, change at 200, outlying densities at 160..163.
PdfSequence simulate_scenario2_outliers(std::uint64_t seed, std::size_t grid_size = kDefaultGridSize);

struct PowerStudyConfig {
  Scenario scenario = Scenario::I;
  std::vector<double> deltas;
  std::size_t reps = 100;
  std::vector<Method> methods{Method::WarpRank};
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  MonitorConfig monitor;  // control limits must be set
};

struct MethodPower {
  std::vector<double> edp;             // per delta
  std::vector<std::size_t> detections;
  std::vector<std::size_t> pre_change_alarms;   // first alarm at or before tau
  std::vector<std::size_t> post_change_alarms;
};

struct PowerStudyReport {
  Scenario scenario = Scenario::I;
  std::vector<double> deltas;
  std::map<std::string, MethodPower> edp_per_method;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  MonitorConfig monitor;
};

/// Fraction of replications with any alarm (either chart) per delta and method.
PowerStudyReport power_study(const PowerStudyConfig& cfg);

}  // namespace warpchart
