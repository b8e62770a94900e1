#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/distributions/beta.hpp>

#include "warpchart/grid.hpp"
#include "warpchart/io.hpp"
#include "warpchart/pipeline.hpp"
#include "warpchart/random.hpp"

namespace testsupport {

using warpchart::grid_points;
using warpchart::PdfOnGrid;
using warpchart::Rng;

// Smooth warping gamma = (1 - w) e_a + w s_c with
// e_a(x) = (exp(a x) - 1) / (exp(a) - 1) and s_c(x) = x + c sin(2 pi x) / (2 pi).
struct SmoothWarp {
  double a = 1.0;
  double c = 0.0;
  double w = 0.5;

  double operator()(double x) const {
    const double ea = std::abs(a) < 1e-12 ? x : std::expm1(a * x) / std::expm1(a);
    const double sc = x + c * std::sin(2.0 * std::numbers::pi * x) / (2.0 * std::numbers::pi);
    return (1.0 - w) * ea + w * sc;
  }

  double derivative(double x) const {
    const double ea = std::abs(a) < 1e-12 ? 1.0 : a * std::exp(a * x) / std::expm1(a);
    const double sc = 1.0 + c * std::cos(2.0 * std::numbers::pi * x);
    return (1.0 - w) * ea + w * sc;
  }

  static SmoothWarp random(Rng& rng) {
    std::uniform_real_distribution<double> ua(-2.0, 2.0);
    std::uniform_real_distribution<double> uc(-0.8, 0.8);
    std::uniform_real_distribution<double> uw(0.0, 1.0);
    return {ua(rng), uc(rng), uw(rng)};
  }
};

inline double beta_density(double a, double b, double x) {
  if (x <= 0.0 || x >= 1.0) {
    const double lim = x <= 0.0 ? (a < 1.0 ? INFINITY : (a == 1.0 ? b : 0.0))
                                : (b < 1.0 ? INFINITY : (b == 1.0 ? a : 0.0));
    return lim;
  }
  return boost::math::pdf(boost::math::beta_distribution<double>(a, b), x);
}

inline double beta_cdf(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return boost::math::ibeta(a, b, x);
}

template <class F>
PdfOnGrid sample_on_grid(F&& f, std::size_t grid_size = warpchart::kDefaultGridSize) {
  PdfOnGrid out(grid_size);
  const auto xs = grid_points(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) out[i] = f(xs[i]);
  return out;
}

inline std::vector<double> uniform_draws(Rng& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& v : out) v = u(rng);
  return out;
}

// Mann-Whitney U of the split after j points, ties counted as one half,
// standardized with the tie-corrected null variance.
inline double pair_count_smw(const std::vector<double>& x, std::size_t j) {
  const std::size_t n = x.size();
  double u = 0.0;
  for (std::size_t i = 0; i < j; ++i) {
    for (std::size_t k = j; k < n; ++k) {
      if (x[i] > x[k]) u += 1.0;
      else if (x[i] == x[k]) u += 0.5;
    }
  }
  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  double ties = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t e = i;
    while (e < n && sorted[e] == sorted[i]) ++e;
    const double w = static_cast<double>(e - i);
    ties += w * (w * w - 1.0);
    i = e;
  }
  const double nd = static_cast<double>(n);
  const double jd = static_cast<double>(j);
  const double c_tie = 1.0 - ties / (nd * (nd * nd - 1.0));
  if (c_tie <= 0.0) return 0.0;
  const double mean = jd * (nd - jd) / 2.0;
  const double var = c_tie * jd * (nd - jd) * (nd + 1.0) / 12.0;
  return (u - mean) / std::sqrt(var);
}

// Limit from the shipped calibration table (m = 30, m0 = 4).
inline double table_limit(double lambda, double ic_arl) {
  const auto table = warpchart::io::read_calibration_table(WARPCHART_DATA_DIR "/calibration_table.csv");
  const auto h = warpchart::io::lookup_limit(table, 30, 4, lambda, ic_arl);
  if (!h) throw std::runtime_error("calibration table has no matching row");
  return *h;
}

inline warpchart::MonitorConfig default_monitor(double lambda = 0.05) {
  warpchart::MonitorConfig cfg;
  cfg.set_chart(4, lambda, table_limit(lambda, 500.0));
  return cfg;
}

}  // namespace testsupport
