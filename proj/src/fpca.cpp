#include "warpchart/fpca.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "warpchart/error.hpp"

namespace warpchart {

double FpcModel::explained_fraction() const {
  const double total = std::accumulate(eigenvalues.begin(), eigenvalues.end(), 0.0);
  const double kept = std::accumulate(eigenvalues.begin(),
                                      eigenvalues.begin() + static_cast<std::ptrdiff_t>(retained), 0.0);
  return total > 0.0 ? kept / total : 0.0;
}

FpcModel fit_fpca(std::span<const std::span<const double>> training, double var_frac) {
  if (!(var_frac > 0.0 && var_frac <= 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "variance fraction must lie in (0, 1]");
  }
  const std::size_t n = training.size();
  if (n < 5) throw Error(ErrorKind::InsufficientData, "FPCA needs at least 5 training functions");
  const std::size_t g = training.front().size();
  for (const auto& v : training) require_same_grid(v.size(), g, "fit_fpca");

  FpcModel model;
  model.var_frac = var_frac;
  model.n_training = n;
  model.mean_fn = GridFunction(g);
  for (const auto& v : training) {
    for (std::size_t i = 0; i < g; ++i) model.mean_fn[i] += v[i];
  }
  for (auto& x : model.mean_fn.values) x /= static_cast<double>(n);

  // The weighted covariance W^1/2 C W^1/2 = D^T D / n has the same nonzero
  // spectrum as the n x n Gram matrix D D^T / n, with D the centered samples
  // scaled by sqrt(w).
  const auto w = trapezoid_weights(g);
  Eigen::MatrixXd d(n, g);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < g; ++i) d(r, i) = (training[r][i] - model.mean_fn[i]) * std::sqrt(w[i]);
  }
  const Eigen::MatrixXd gram = d * d.transpose() / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::DegenerateTraining, "eigen solver failed");

  const Eigen::VectorXd& evals = solver.eigenvalues();  // ascending
  const double total_raw = std::max(0.0, evals.sum());
  if (total_raw < kMinTotalVariance) {
    throw Error(ErrorKind::DegenerateTraining, "training functions have no variability");
  }
  const double leading = evals(static_cast<Eigen::Index>(n) - 1);
  for (Eigen::Index c = static_cast<Eigen::Index>(n) - 1; c >= 0; --c) {
    const double rho = evals(c);
    if (!(rho > kEigenvalueFloor * leading)) break;
    Eigen::VectorXd u = d.transpose() * solver.eigenvectors().col(c);
    u /= u.norm();
    GridFunction phi(g);
    for (std::size_t i = 0; i < g; ++i) phi[i] = u(static_cast<Eigen::Index>(i)) / std::sqrt(w[i]);

    // Sign convention: nonnegative integral, else positive first clear value.
    double orient = integrate(phi.view());
    if (std::abs(orient) <= 1e-9) {
      orient = 0.0;
      for (double x : phi.values) {
        if (std::abs(x) > 1e-12) {
          orient = x;
          break;
        }
      }
    }
    if (orient < 0.0) {
      for (auto& x : phi.values) x = -x;
    }
    model.eigenvalues.push_back(rho);
    model.eigenfunctions.push_back(std::move(phi));
  }

  const double total = std::accumulate(model.eigenvalues.begin(), model.eigenvalues.end(), 0.0);
  double cumulative = 0.0;
  model.retained = model.eigenvalues.size();
  for (std::size_t l = 0; l < model.eigenvalues.size(); ++l) {
    cumulative += model.eigenvalues[l];
    if (cumulative >= var_frac * total) {
      model.retained = l + 1;
      break;
    }
  }
  return model;
}

namespace {

template <class Tag>
FpcModel fit_tagged(std::span<const GridFn<Tag>> training, double var_frac) {
  std::vector<std::span<const double>> views;
  views.reserve(training.size());
  for (const auto& f : training) views.push_back(f.view());
  return fit_fpca(std::span<const std::span<const double>>(views), var_frac);
}

}  // namespace

FpcModel fit_fpca(std::span<const TangentVec> training, double var_frac) {
  return fit_tagged(training, var_frac);
}

FpcModel fit_fpca(std::span<const PdfOnGrid> training, double var_frac) {
  return fit_tagged(training, var_frac);
}

std::vector<double> scores(const FpcModel& model, std::span<const double> v) {
  const std::size_t g = model.grid_size();
  require_same_grid(v.size(), g, "scores");
  std::vector<double> centered(g);
  for (std::size_t i = 0; i < g; ++i) centered[i] = v[i] - model.mean_fn[i];
  std::vector<double> beta(model.retained);
  for (std::size_t l = 0; l < model.retained; ++l) beta[l] = inner(centered, model.eigenfunctions[l].view());
  return beta;
}

double t2_statistic(const FpcModel& model, std::span<const double> v) {
  const auto beta = scores(model, v);
  double t2 = 0.0;
  for (std::size_t l = 0; l < beta.size(); ++l) t2 += beta[l] * beta[l] / model.eigenvalues[l];
  return t2;
}

double spe_statistic(const FpcModel& model, std::span<const double> v, std::size_t components) {
  const std::size_t g = model.grid_size();
  require_same_grid(v.size(), g, "spe_statistic");
  if (components > model.eigenfunctions.size()) {
    throw Error(ErrorKind::OutOfRange, "more components requested than the model holds");
  }
  std::vector<double> residual(g);
  for (std::size_t i = 0; i < g; ++i) residual[i] = v[i] - model.mean_fn[i];
  for (std::size_t l = 0; l < components; ++l) {
    const auto& phi = model.eigenfunctions[l];
    const double beta = inner(residual, phi.view());
    for (std::size_t i = 0; i < g; ++i) residual[i] -= beta * phi[i];
  }
  return inner(residual, residual);
}

double spe_statistic(const FpcModel& model, std::span<const double> v) {
  return spe_statistic(model, v, model.retained);
}

FeaturePair features(const FpcModel& model, std::span<const double> v, std::size_t index) {
  return {t2_statistic(model, v), spe_statistic(model, v), index};
}

std::vector<FeaturePair> feature_stream(const FpcModel& model, std::span<const TangentVec> tangents) {
  std::vector<FeaturePair> out;
  out.reserve(tangents.size());
  for (std::size_t k = 0; k < tangents.size(); ++k) out.push_back(features(model, tangents[k].view(), k + 1));
  return out;
}

}  // namespace warpchart
