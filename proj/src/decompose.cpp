#include "tbsd/decompose.hpp"

#include "tbsd/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace tbsd {

double soft_threshold(double x, double t) {
  require(t >= 0.0, "soft threshold must be >= 0");
  return kernels::serial::soft_threshold(x, t);
}

Matrix soft_threshold(const Matrix& x, double t) {
  require(t >= 0.0, "soft threshold must be >= 0");
  return kernels::parallel::soft_threshold(x, t);
}

double model1_objective(const Matrix& y, const SmoothBasis& basis, const Matrix& theta,
                        const Matrix& texture, double lambda, double gamma) {
  const Matrix e = y - reconstruct_background(basis, theta) - texture;
  return e.squaredNorm() + lambda * smooth_penalty(basis, theta, lambda) +
         gamma * texture.cwiseAbs().sum();
}

DecomposeResult low_rank_decompose(const Matrix& y, const SmoothBasis& basis,
                                   const DecomposeParams& params) {
  require(y.rows() == basis.rows() && y.cols() == basis.cols(),
          "decompose: image does not match smooth basis");
  require(params.iter_times >= 1, "iterTimes must be >= 1");
  require(params.lambda > 0.0 && params.gamma > 0.0, "lambda and gamma must be > 0");
  require(y.allFinite(), "decompose: image has non-finite values");

  DecomposeResult out;
  Matrix texture = Matrix::Zero(y.rows(), y.cols());
  Matrix theta;
  Matrix background;
  const double half_gamma = params.gamma / 2.0;

  for (int it = 0; it < params.iter_times; ++it) {
    theta = estimate_theta(y - texture, basis, params.lambda);
    background = reconstruct_background(basis, theta);
    if (params.record_objective)
      out.objective_trace.push_back(
          model1_objective(y, basis, theta, texture, params.lambda, params.gamma));

    Matrix next = soft_threshold(y - background, half_gamma);
    const double change = (next - texture).norm();
    const double scale = std::max(texture.norm(), 1.0);
    texture = std::move(next);
    out.iterations = it + 1;
    if (params.record_objective)
      out.objective_trace.push_back(
          model1_objective(y, basis, theta, texture, params.lambda, params.gamma));
    if (params.rel_change_tol > 0.0 && it > 0 && change <= params.rel_change_tol * scale) break;
  }

  out.parts.background = std::move(background);
  out.parts.texture = std::move(texture);
  out.parts.anomaly = Matrix::Zero(y.rows(), y.cols());
  out.parts.residual = y - out.parts.background - out.parts.texture;
  out.theta = std::move(theta);
  return out;
}

}  // namespace tbsd
