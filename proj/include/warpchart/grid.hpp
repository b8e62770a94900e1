#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace warpchart {

inline constexpr std::size_t kDefaultGridSize = 512;

// A real function sampled on the uniform grid {0, 1/(G-1), ..., 1}. The tag
// keeps densities, CDFs, warpings and tangent vectors from being mixed up.
template <class Tag>
struct GridFn {
  std::vector<double> values;

  GridFn() = default;
  explicit GridFn(std::vector<double> v) : values(std::move(v)) {}
  explicit GridFn(std::size_t grid_size, double fill = 0.0) : values(grid_size, fill) {}

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  std::span<const double> view() const noexcept { return values; }

  friend bool operator==(const GridFn&, const GridFn&) = default;
};

struct GenericTag;
struct PdfTag;
struct CdfTag;
struct QuantileTag;
struct WarpTag;
struct SrsfTag;
struct TangentTag;

using GridFunction = GridFn<GenericTag>;
using PdfOnGrid = GridFn<PdfTag>;
using CdfOnGrid = GridFn<CdfTag>;
using QuantileOnGrid = GridFn<QuantileTag>;
using WarpOnGrid = GridFn<WarpTag>;
using SrsfOnGrid = GridFn<SrsfTag>;
using TangentVec = GridFn<TangentTag>;

using PdfSequence = std::vector<PdfOnGrid>;

double grid_step(std::size_t grid_size);
double grid_point(std::size_t i, std::size_t grid_size);
std::vector<double> grid_points(std::size_t grid_size);

/// Trapezoidal quadrature weights for the uniform grid on [0,1].
std::vector<double> trapezoid_weights(std::size_t grid_size);

/// Trapezoidal integral over [0,1].
double integrate(std::span<const double> y);
/// Trapezoidal L2 inner product over [0,1].
double inner(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> y);

/// Piecewise-linear evaluation of grid samples at x in [0,1] (clamped).
double interpolate(std::span<const double> y, double x);

/// Throws GridMismatch unless both sizes agree.
void require_same_grid(std::size_t a, std::size_t b, const char* where);

}  // namespace warpchart
