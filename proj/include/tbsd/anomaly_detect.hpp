#pragma once

// Anomaly detection on defect images with a smooth background, a learned
// texture dictionary and a sparse anomaly component, plus the smooth-sparse
// baseline that has no texture term.

#include "tbsd/common.hpp"
#include "tbsd/decompose.hpp"
#include "tbsd/kernels.hpp"
#include "tbsd/smooth_basis.hpp"
#include "tbsd/texture_learning.hpp"

#include <vector>

namespace tbsd {

struct DetectionParams {
  double lambda = 0.1;
  double gamma = 0.2;
  double eta = 0.05;
  int iter_times = 1;
  double phi_bt = 0.5;   // texture weight in the anomaly update
  double phi_a = 0.02;   // alarm when the anomaly proportion exceeds this
  double binarize_eps = 1e-3;
  bool record_objective = false;

  void validate() const;
};

// S_{gamma/2}(atoms^T r) per tile; K_t x tile_count.
Matrix estimate_theta_t(const Matrix& residual, const TextureBasis& basis, double gamma);

struct DetectResult {
  Decomposition parts;
  Matrix theta;    // background coefficients
  Matrix theta_t;  // texture coefficients, K_t x tile_count (empty for the baseline)
  // When record_objective is set: objective after every block update.
  std::vector<double> objective_trace;
};

// ||Y - B_y theta B_x^T - tex - C_a||^2 + lambda P(theta) + gamma ||theta_t||_1 + eta ||C_a||_1
double model2_objective(const Matrix& y, const SmoothBasis& basis, const Matrix& theta,
                        const Matrix& texture, const Matrix& theta_t, const Matrix& anomaly,
                        double lambda, double gamma, double eta);

DetectResult tbsd_detect(const Matrix& y, const SmoothBasis& smooth, const TextureBasis& texture,
                         const DetectionParams& params = {});

// Same alternation with the texture term removed.
DetectResult ssd_baseline_detect(const Matrix& y, const SmoothBasis& smooth,
                                 const DetectionParams& params = {});

struct AnomalyMask {
  Mask mask;
  double proportion = 0.0;
  bool alarm = false;
};

// |C_a| > binarize_eps; alarm when the proportion exceeds phi_a.
AnomalyMask anomaly_mask(const Decomposition& parts, double binarize_eps, double phi_a);

}  // namespace tbsd
