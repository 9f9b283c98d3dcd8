#include "tbsd/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace tbsd {

TileLayout::TileLayout(int rows, int cols, int patch_rows, int patch_cols)
    : image_rows(rows), image_cols(cols), tile_rows(patch_rows), tile_cols(patch_cols) {
  require(rows > 0 && cols > 0, "tile layout: empty image");
  require(patch_rows > 0 && patch_cols > 0, "tile layout: empty patch");
}

namespace kernels {

namespace {

void check_tiles(const Matrix& image, const Matrix& atoms, const TileLayout& layout) {
  require(image.rows() == layout.image_rows && image.cols() == layout.image_cols,
          "tile kernel: image does not match layout");
  require(atoms.rows() == layout.patch_size(), "tile kernel: atom length does not match patch");
}

Vector shrink_tile(const Matrix& image, const Matrix& atoms, const TileLayout& layout, int tile,
                   double threshold) {
  Vector coeffs = atoms.transpose() * extract_tile(image, layout, tile);
  for (Eigen::Index j = 0; j < coeffs.size(); ++j) coeffs(j) = serial::soft_threshold(coeffs(j), threshold);
  return coeffs;
}

void place_tile(Matrix& out, const Matrix& atoms, const Matrix& coeffs, const TileLayout& layout,
                int tile) {
  const Vector patch = atoms * coeffs.col(tile);
  const int r0 = (tile / layout.tiles_across()) * layout.tile_rows;
  const int c0 = (tile % layout.tiles_across()) * layout.tile_cols;
  for (int i = 0; i < layout.tile_rows && r0 + i < layout.image_rows; ++i)
    for (int j = 0; j < layout.tile_cols && c0 + j < layout.image_cols; ++j)
      out(r0 + i, c0 + j) += patch(i * layout.tile_cols + j);
}

}  // namespace

Vector extract_tile(const Matrix& image, const TileLayout& layout, int tile) {
  Vector v = Vector::Zero(layout.patch_size());
  const int r0 = (tile / layout.tiles_across()) * layout.tile_rows;
  const int c0 = (tile % layout.tiles_across()) * layout.tile_cols;
  for (int i = 0; i < layout.tile_rows && r0 + i < layout.image_rows; ++i)
    for (int j = 0; j < layout.tile_cols && c0 + j < layout.image_cols; ++j)
      v(i * layout.tile_cols + j) = image(r0 + i, c0 + j);
  return v;
}

namespace serial {

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

Matrix soft_threshold(const Matrix& x, double t) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index k = 0; k < x.size(); ++k) out.data()[k] = soft_threshold(x.data()[k], t);
  return out;
}

Matrix apply_smoother(const Matrix& hy, const Matrix& c, const Matrix& hx) {
  require(hy.cols() == c.rows() && hx.cols() == c.cols(), "apply_smoother: dimension mismatch");
  // tmp = c * hx^T
  Matrix tmp = Matrix::Zero(c.rows(), hx.rows());
  for (Eigen::Index i = 0; i < c.rows(); ++i)
    for (Eigen::Index k = 0; k < c.cols(); ++k) {
      const double a = c(i, k);
      for (Eigen::Index j = 0; j < hx.rows(); ++j) tmp(i, j) += a * hx(j, k);
    }
  Matrix out = Matrix::Zero(hy.rows(), tmp.cols());
  for (Eigen::Index j = 0; j < tmp.cols(); ++j)
    for (Eigen::Index k = 0; k < hy.cols(); ++k) {
      const double b = tmp(k, j);
      for (Eigen::Index i = 0; i < hy.rows(); ++i) out(i, j) += hy(i, k) * b;
    }
  return out;
}

Matrix project_shrink_tiles(const Matrix& image, const Matrix& atoms, const TileLayout& layout,
                            double threshold) {
  check_tiles(image, atoms, layout);
  Matrix coeffs(atoms.cols(), layout.tile_count());
  for (int t = 0; t < layout.tile_count(); ++t)
    coeffs.col(t) = shrink_tile(image, atoms, layout, t, threshold);
  return coeffs;
}

Matrix assemble_tiles(const Matrix& atoms, const Matrix& coeffs, const TileLayout& layout) {
  require(atoms.rows() == layout.patch_size(), "assemble_tiles: atom length does not match patch");
  require(coeffs.rows() == atoms.cols() && coeffs.cols() == layout.tile_count(),
          "assemble_tiles: coefficient shape does not match layout");
  Matrix out = Matrix::Zero(layout.image_rows, layout.image_cols);
  for (int t = 0; t < layout.tile_count(); ++t) place_tile(out, atoms, coeffs, layout, t);
  return out;
}

}  // namespace serial

namespace parallel {

Matrix soft_threshold(const Matrix& x, double t) {
  Matrix out(x.rows(), x.cols());
  const Eigen::Index n = x.size();
  const double* src = x.data();
  double* dst = out.data();
#pragma omp parallel for schedule(static)
  for (Eigen::Index k = 0; k < n; ++k) dst[k] = serial::soft_threshold(src[k], t);
  return out;
}

Matrix apply_smoother(const Matrix& hy, const Matrix& c, const Matrix& hx) {
  require(hy.cols() == c.rows() && hx.cols() == c.cols(), "apply_smoother: dimension mismatch");
  constexpr Eigen::Index block = 32;
  Matrix tmp(c.rows(), hx.rows());
  const Eigen::Index row_blocks = (c.rows() + block - 1) / block;
#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < row_blocks; ++b) {
    const Eigen::Index r0 = b * block;
    const Eigen::Index len = std::min(block, c.rows() - r0);
    tmp.middleRows(r0, len).noalias() = c.middleRows(r0, len) * hx.transpose();
  }
  Matrix out(hy.rows(), tmp.cols());
  const Eigen::Index col_blocks = (tmp.cols() + block - 1) / block;
#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < col_blocks; ++b) {
    const Eigen::Index c0 = b * block;
    const Eigen::Index len = std::min(block, tmp.cols() - c0);
    out.middleCols(c0, len).noalias() = hy * tmp.middleCols(c0, len);
  }
  return out;
}

Matrix project_shrink_tiles(const Matrix& image, const Matrix& atoms, const TileLayout& layout,
                            double threshold) {
  check_tiles(image, atoms, layout);
  Matrix coeffs(atoms.cols(), layout.tile_count());
  const int tiles = layout.tile_count();
#pragma omp parallel for schedule(static)
  for (int t = 0; t < tiles; ++t) coeffs.col(t) = shrink_tile(image, atoms, layout, t, threshold);
  return coeffs;
}

Matrix assemble_tiles(const Matrix& atoms, const Matrix& coeffs, const TileLayout& layout) {
  require(atoms.rows() == layout.patch_size(), "assemble_tiles: atom length does not match patch");
  require(coeffs.rows() == atoms.cols() && coeffs.cols() == layout.tile_count(),
          "assemble_tiles: coefficient shape does not match layout");
  Matrix out = Matrix::Zero(layout.image_rows, layout.image_cols);
  const int tiles = layout.tile_count();
  // Tiles are disjoint, so writes never collide.
#pragma omp parallel for schedule(static)
  for (int t = 0; t < tiles; ++t) place_tile(out, atoms, coeffs, layout, t);
  return out;
}

}  // namespace parallel
}  // namespace kernels
}  // namespace tbsd
