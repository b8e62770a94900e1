#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "warpchart/grid.hpp"

namespace warpchart {

inline constexpr double kEigenvalueFloor = 1e-12;  // relative to the leading eigenvalue
inline constexpr double kMinTotalVariance = 1e-12;

// Functional PCA of a training set. Eigenfunctions are orthonormal under the
// trapezoidal inner product. All numerically non-null components are kept;
// `retained` of them enter the monitoring statistics.
struct FpcModel {
  GridFunction mean_fn;
  std::vector<GridFunction> eigenfunctions;
  std::vector<double> eigenvalues;  // nonincreasing
  std::size_t retained = 0;
  double var_frac = 0.99;
  CdfOnGrid reference_cdf;  // empty when the model was fit on raw densities
  std::size_t n_training = 0;

  std::size_t grid_size() const noexcept { return mean_fn.size(); }
  double explained_fraction() const;
};

struct FeaturePair {
  double t2 = 0.0;
  double spe = 0.0;
  std::size_t index = 0;  // k, 1-based over the post-training stream
};

FpcModel fit_fpca(std::span<const std::span<const double>> training, double var_frac = 0.99);
FpcModel fit_fpca(std::span<const TangentVec> training, double var_frac = 0.99);
FpcModel fit_fpca(std::span<const PdfOnGrid> training, double var_frac = 0.99);

std::vector<double> scores(const FpcModel& model, std::span<const double> v);
double t2_statistic(const FpcModel& model, std::span<const double> v);
double spe_statistic(const FpcModel& model, std::span<const double> v);
/// SPE after projecting on the first `components` eigenfunctions instead of `retained`.
double spe_statistic(const FpcModel& model, std::span<const double> v, std::size_t components);

FeaturePair features(const FpcModel& model, std::span<const double> v, std::size_t index);
std::vector<FeaturePair> feature_stream(const FpcModel& model, std::span<const TangentVec> tangents);

}  // namespace warpchart
