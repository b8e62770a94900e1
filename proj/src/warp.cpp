#include "warpchart/warp.hpp"

#include <algorithm>
#include <cmath>

#include "warpchart/distsummary.hpp"
#include "warpchart/error.hpp"

namespace warpchart {

namespace {

constexpr double kEndpointTol = 1e-9;

// inf{x : y(x) >= p} for a nondecreasing piecewise-linear y running 0 -> 1.
double generalized_inverse(std::span<const double> y, double p) {
  const std::size_t g = y.size();
  if (p <= y.front()) return 0.0;
  if (p >= y.back()) return 1.0;
  const auto it = std::lower_bound(y.begin(), y.end(), p);
  const auto i = static_cast<std::size_t>(it - y.begin());
  const double t = (p - y[i - 1]) / (y[i] - y[i - 1]);
  return (static_cast<double>(i - 1) + t) / static_cast<double>(g - 1);
}

}  // namespace

CdfOnGrid cdf_of(const PdfOnGrid& f) {
  const std::size_t g = f.size();
  const double dx = grid_step(g);
  CdfOnGrid cdf(g);
  for (std::size_t i = 1; i < g; ++i) cdf[i] = cdf[i - 1] + 0.5 * dx * (f[i - 1] + f[i]);
  const double total = cdf[g - 1];
  if (!(total > 0.0) || !std::isfinite(total)) throw Error(ErrorKind::InvalidCdf, "density has no mass");
  for (auto& v : cdf.values) v /= total;
  cdf[g - 1] = 1.0;
  return cdf;
}

void validate_cdf(const CdfOnGrid& cdf) {
  if (cdf.size() < 3) throw Error(ErrorKind::InvalidCdf, "CDF needs at least 3 grid points");
  for (double v : cdf.values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidCdf, "non-finite CDF value");
  }
  if (std::abs(cdf.values.front()) > kEndpointTol || std::abs(cdf.values.back() - 1.0) > kEndpointTol) {
    throw Error(ErrorKind::InvalidCdf, "CDF must run from 0 to 1");
  }
  for (std::size_t i = 1; i < cdf.size(); ++i) {
    if (cdf[i] < cdf[i - 1]) throw Error(ErrorKind::InvalidCdf, "CDF is not monotone");
  }
}

double invert_cdf(const CdfOnGrid& cdf, double p) { return generalized_inverse(cdf.view(), p); }

QuantileOnGrid quantile_of(const CdfOnGrid& cdf) {
  validate_cdf(cdf);
  const std::size_t g = cdf.size();
  QuantileOnGrid q(g);
  for (std::size_t k = 0; k < g; ++k) q[k] = generalized_inverse(cdf.view(), grid_point(k, g));
  q[0] = 0.0;
  q[g - 1] = 1.0;
  return q;
}

CdfOnGrid reference_cdf(std::span<const PdfOnGrid> training) {
  if (training.size() < 2) throw Error(ErrorKind::InsufficientData, "reference needs at least 2 densities");
  const std::size_t g = training.front().size();
  std::vector<double> mean_q(g, 0.0);
  for (const auto& f : training) {
    require_same_grid(f.size(), g, "reference_cdf");
    const auto q = quantile_of(cdf_of(f));
    for (std::size_t k = 0; k < g; ++k) mean_q[k] += q[k];
  }
  for (auto& v : mean_q) v /= static_cast<double>(training.size());
  mean_q.front() = 0.0;
  mean_q.back() = 1.0;

  CdfOnGrid ref(g);
  for (std::size_t i = 0; i < g; ++i) ref[i] = generalized_inverse(mean_q, grid_point(i, g));
  ref[0] = 0.0;
  ref[g - 1] = 1.0;
  return ref;
}

WarpOnGrid extract_warping(const CdfOnGrid& cdf_i, const CdfOnGrid& cdf_star) {
  require_same_grid(cdf_i.size(), cdf_star.size(), "extract_warping");
  validate_cdf(cdf_i);
  validate_cdf(cdf_star);
  const std::size_t g = cdf_i.size();
  WarpOnGrid gamma(g);
  for (std::size_t k = 0; k < g; ++k) gamma[k] = generalized_inverse(cdf_i.view(), cdf_star[k]);
  gamma[0] = 0.0;
  gamma[g - 1] = 1.0;
  return gamma;
}

SrsfOnGrid srsf_of(const WarpOnGrid& gamma) {
  const std::size_t g = gamma.size();
  if (g < 3) throw Error(ErrorKind::InvalidParameter, "warping needs at least 3 grid points");
  const double dx = grid_step(g);
  SrsfOnGrid q(g);
  // Second-order differences everywhere: central inside, one-sided at the ends.
  q[0] = (-3.0 * gamma[0] + 4.0 * gamma[1] - gamma[2]) / (2.0 * dx);
  q[g - 1] = (3.0 * gamma[g - 1] - 4.0 * gamma[g - 2] + gamma[g - 3]) / (2.0 * dx);
  for (std::size_t i = 1; i + 1 < g; ++i) q[i] = (gamma[i + 1] - gamma[i - 1]) / (2.0 * dx);
  for (auto& v : q.values) v = std::sqrt(std::max(v, kSlopeFloor));
  const double norm = l2_norm(q.view());
  for (auto& v : q.values) v /= norm;
  return q;
}

double srsf_angle(const SrsfOnGrid& q) { return std::acos(std::clamp(integrate(q.view()), -1.0, 1.0)); }

TangentVec tangent_map(const SrsfOnGrid& q) {
  const double theta = srsf_angle(q);
  TangentVec v(q.size());
  if (theta < kAngleFloor) return v;
  const double scale = theta / std::sin(theta);
  const double c = std::cos(theta);
  for (std::size_t i = 0; i < q.size(); ++i) v[i] = scale * (q[i] - c);
  return v;
}

TangentVec pdf_to_tangent(const PdfOnGrid& f, const CdfOnGrid& cdf_star, double alpha_mix) {
  require_same_grid(f.size(), cdf_star.size(), "pdf_to_tangent");
  const auto cdf = cdf_of(mix_with_uniform(f, alpha_mix));
  return tangent_map(srsf_of(extract_warping(cdf, cdf_star)));
}

}  // namespace warpchart
