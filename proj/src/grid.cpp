#include "warpchart/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "warpchart/error.hpp"

namespace warpchart {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::DegenerateSupport: return "degenerate-support";
    case ErrorKind::InvalidCdf: return "invalid-cdf";
    case ErrorKind::DegenerateTraining: return "degenerate-training";
    case ErrorKind::GridMismatch: return "grid-mismatch";
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::NoAlarm: return "no-alarm";
    case ErrorKind::CalibrationFailure: return "calibration-failure";
    case ErrorKind::InsufficientTuning: return "insufficient-tuning";
    case ErrorKind::UnknownMethod: return "unknown-method";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

double grid_step(std::size_t grid_size) {
  if (grid_size < 2) throw Error(ErrorKind::InvalidParameter, "grid size must be at least 2");
  return 1.0 / static_cast<double>(grid_size - 1);
}

double grid_point(std::size_t i, std::size_t grid_size) {
  return static_cast<double>(i) / static_cast<double>(grid_size - 1);
}

std::vector<double> grid_points(std::size_t grid_size) {
  std::vector<double> x(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) x[i] = grid_point(i, grid_size);
  return x;
}

std::vector<double> trapezoid_weights(std::size_t grid_size) {
  const double dx = grid_step(grid_size);
  std::vector<double> w(grid_size, dx);
  w.front() = 0.5 * dx;
  w.back() = 0.5 * dx;
  return w;
}

double integrate(std::span<const double> y) {
  const std::size_t g = y.size();
  const double dx = grid_step(g);
  double interior = 0.0;
  for (std::size_t i = 1; i + 1 < g; ++i) interior += y[i];
  return dx * (interior + 0.5 * (y.front() + y.back()));
}

double inner(std::span<const double> a, std::span<const double> b) {
  require_same_grid(a.size(), b.size(), "inner");
  const std::size_t g = a.size();
  const double dx = grid_step(g);
  double interior = 0.0;
  for (std::size_t i = 1; i + 1 < g; ++i) interior += a[i] * b[i];
  return dx * (interior + 0.5 * (a.front() * b.front() + a.back() * b.back()));
}

double l2_norm(std::span<const double> y) { return std::sqrt(inner(y, y)); }

double interpolate(std::span<const double> y, double x) {
  const std::size_t g = y.size();
  const double pos = std::clamp(x, 0.0, 1.0) * static_cast<double>(g - 1);
  const auto i = std::min(static_cast<std::size_t>(pos), g - 2);
  const double t = pos - static_cast<double>(i);
  return (1.0 - t) * y[i] + t * y[i + 1];
}

void require_same_grid(std::size_t a, std::size_t b, const char* where) {
  if (a != b) {
    throw Error(ErrorKind::GridMismatch,
                std::string(where) + ": grid sizes " + std::to_string(a) + " and " + std::to_string(b));
  }
}

}  // namespace warpchart
