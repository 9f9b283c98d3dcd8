#pragma once

// Smooth background / sparse texture split of defect-free images.

#include "tbsd/common.hpp"
#include "tbsd/smooth_basis.hpp"

#include <vector>

namespace tbsd {

// Y = background + texture + anomaly + residual.
struct Decomposition {
  Matrix background;
  Matrix texture;
  Matrix anomaly;
  Matrix residual;
};

// sgn(x) (|x| - t)_+ elementwise; throws on t < 0.
double soft_threshold(double x, double t);
Matrix soft_threshold(const Matrix& x, double t);

struct DecomposeParams {
  double lambda = 0.1;
  double gamma = 0.2;
  int iter_times = 1;
  // Stop early when ||C_tex^new - C_tex|| <= tol * max(||C_tex||, 1). 0 disables.
  double rel_change_tol = 0.0;
  bool record_objective = false;
};

struct DecomposeResult {
  Decomposition parts;  // anomaly is all-zero
  Matrix theta;         // background coefficients
  int iterations = 0;
  // When record_objective is set: objective after every half-step
  // (background update, texture update, ...).
  std::vector<double> objective_trace;
};

// ||Y - B_y theta B_x^T - C_tex||^2 + lambda P(theta) + gamma ||C_tex||_1
double model1_objective(const Matrix& y, const SmoothBasis& basis, const Matrix& theta,
                        const Matrix& texture, double lambda, double gamma);

DecomposeResult low_rank_decompose(const Matrix& y, const SmoothBasis& basis,
                                   const DecomposeParams& params = {});

}  // namespace tbsd
