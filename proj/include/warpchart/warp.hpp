#pragma once

#include <span>

#include "warpchart/grid.hpp"

namespace warpchart {

/// Cumulative trapezoid of f, rescaled so the last value is exactly 1.
CdfOnGrid cdf_of(const PdfOnGrid& f);

/// Throws InvalidCdf unless F is nondecreasing, finite, and runs from 0 to 1.
void validate_cdf(const CdfOnGrid& cdf);

/// Generalized inverse inf{x : F(x) >= p} of the piecewise-linear CDF.
double invert_cdf(const CdfOnGrid& cdf, double p);

/// Quantile function sampled at the uniform probabilities {0, ..., 1}.
QuantileOnGrid quantile_of(const CdfOnGrid& cdf);

/// CDF whose quantile function is the pointwise mean of the training quantiles.
/// The inputs are expected to be mixed already.
CdfOnGrid reference_cdf(std::span<const PdfOnGrid> training);

/// gamma(x) = F_i^{-1}(F_star(x)), so that F_i(gamma(x)) = F_star(x).
WarpOnGrid extract_warping(const CdfOnGrid& cdf_i, const CdfOnGrid& cdf_star);

inline constexpr double kSlopeFloor = 1e-8;
inline constexpr double kAngleFloor = 1e-8;

/// sqrt of the finite-difference slope, renormalized to unit L2 norm.
SrsfOnGrid srsf_of(const WarpOnGrid& gamma);

/// Angle between q and the identity SRSF q_e = 1.
double srsf_angle(const SrsfOnGrid& q);

/// Inverse-exponential map at q_e = 1: v = theta / sin(theta) (q - cos(theta)).
TangentVec tangent_map(const SrsfOnGrid& q);

/// mix -> CDF -> warping against the reference -> SRSF -> tangent vector.
TangentVec pdf_to_tangent(const PdfOnGrid& f, const CdfOnGrid& cdf_star, double alpha_mix = 0.1);

}  // namespace warpchart
