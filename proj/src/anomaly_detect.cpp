#include "tbsd/anomaly_detect.hpp"

#include <cmath>
#include <limits>

namespace tbsd {

void DetectionParams::validate() const {
  require(lambda > 0.0 && gamma > 0.0 && eta > 0.0, "lambda, gamma and eta must be > 0");
  require(iter_times >= 1, "iterTimes must be >= 1");
  require(std::isfinite(phi_bt) && phi_bt >= 0.0, "phi_B/T must be >= 0");
  require(phi_a > 0.0 && phi_a < 1.0, "phi_A must lie in (0, 1)");
  require(binarize_eps >= 0.0, "binarize_eps must be >= 0");
}

Matrix estimate_theta_t(const Matrix& residual, const TextureBasis& basis, double gamma) {
  require(gamma >= 0.0, "gamma must be >= 0");
  require(basis.atoms.rows() == basis.patch_size(), "texture basis: atom length mismatch");
  const TileLayout layout(static_cast<int>(residual.rows()), static_cast<int>(residual.cols()),
                          basis.patch_rows, basis.patch_cols);
  return kernels::parallel::project_shrink_tiles(residual, basis.atoms, layout, gamma / 2.0);
}

double model2_objective(const Matrix& y, const SmoothBasis& basis, const Matrix& theta,
                        const Matrix& texture, const Matrix& theta_t, const Matrix& anomaly,
                        double lambda, double gamma, double eta) {
  const Matrix e = y - reconstruct_background(basis, theta) - texture - anomaly;
  const double tex_l1 = theta_t.size() > 0 ? theta_t.cwiseAbs().sum() : 0.0;
  return e.squaredNorm() + lambda * smooth_penalty(basis, theta, lambda) + gamma * tex_l1 +
         eta * anomaly.cwiseAbs().sum();
}

namespace {

void check_inputs(const Matrix& y, const SmoothBasis& smooth, const DetectionParams& params) {
  params.validate();
  require(y.rows() == smooth.rows() && y.cols() == smooth.cols(),
          "detect: image does not match smooth basis");
  require(y.allFinite(), "detect: image has non-finite values");
}

Decomposition close_parts(const Matrix& y, Matrix background, Matrix texture, Matrix anomaly) {
  Decomposition d;
  d.residual = y - background - texture - anomaly;
  d.background = std::move(background);
  d.texture = std::move(texture);
  d.anomaly = std::move(anomaly);
  return d;
}

}  // namespace

DetectResult tbsd_detect(const Matrix& y, const SmoothBasis& smooth, const TextureBasis& texture,
                         const DetectionParams& params) {
  check_inputs(y, smooth, params);
  require(texture.atom_count() >= 1, "detect: empty texture basis, use the baseline instead");
  require(texture.atoms.rows() == texture.patch_size(), "texture basis: atom length mismatch");

  const TileLayout layout(static_cast<int>(y.rows()), static_cast<int>(y.cols()),
                          texture.patch_rows, texture.patch_cols);
  DetectResult out;
  Matrix tex = Matrix::Zero(y.rows(), y.cols());
  Matrix anomaly = Matrix::Zero(y.rows(), y.cols());
  Matrix theta_t = Matrix::Zero(texture.atom_count(), layout.tile_count());
  Matrix background;
  auto record = [&] {
    if (params.record_objective)
      out.objective_trace.push_back(model2_objective(y, smooth, out.theta, tex, theta_t, anomaly,
                                                     params.lambda, params.gamma, params.eta));
  };

  for (int it = 0; it < params.iter_times; ++it) {
    out.theta = estimate_theta((y - tex) - anomaly, smooth, params.lambda);
    background = reconstruct_background(smooth, out.theta);
    record();

    theta_t = kernels::parallel::project_shrink_tiles(y - background - anomaly, texture.atoms,
                                                      layout, params.gamma / 2.0);
    tex = kernels::parallel::assemble_tiles(texture.atoms, theta_t, layout);
    record();

    anomaly = soft_threshold((y - background) - params.phi_bt * tex, params.eta / 2.0);
    record();
  }

  out.theta_t = theta_t;
  out.parts = close_parts(y, std::move(background), std::move(tex), std::move(anomaly));
  return out;
}

DetectResult ssd_baseline_detect(const Matrix& y, const SmoothBasis& smooth,
                                 const DetectionParams& params) {
  check_inputs(y, smooth, params);
  DetectResult out;
  Matrix anomaly = Matrix::Zero(y.rows(), y.cols());
  const Matrix none = Matrix::Zero(0, 0);
  Matrix background;
  auto record = [&] {
    if (params.record_objective)
      out.objective_trace.push_back(model2_objective(y, smooth, out.theta,
                                                     Matrix::Zero(y.rows(), y.cols()), none,
                                                     anomaly, params.lambda, 0.0, params.eta));
  };

  for (int it = 0; it < params.iter_times; ++it) {
    out.theta = estimate_theta(y - anomaly, smooth, params.lambda);
    background = reconstruct_background(smooth, out.theta);
    record();
    anomaly = soft_threshold(y - background, params.eta / 2.0);
    record();
  }

  out.parts = close_parts(y, std::move(background), Matrix::Zero(y.rows(), y.cols()),
                          std::move(anomaly));
  return out;
}

AnomalyMask anomaly_mask(const Decomposition& parts, double binarize_eps, double phi_a) {
  require(binarize_eps >= 0.0 && !std::isnan(binarize_eps), "binarize_eps must be >= 0");
  AnomalyMask out;
  out.mask = parts.anomaly.array().abs() > binarize_eps;
  const double total = static_cast<double>(parts.anomaly.size());
  out.proportion = total > 0 ? static_cast<double>(out.mask.count()) / total : 0.0;
  out.alarm = out.proportion > phi_a;
  return out;
}

}  // namespace tbsd
