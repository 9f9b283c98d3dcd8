#pragma once

// Data-parallel inner loops of the decomposition solvers.
//
// Every kernel exists twice: `serial` is the plain reference kept for tests
// and benchmarks, `parallel` is the OpenMP version the library calls. The two
// agree bitwise except apply_smoother, whose blocked product may round
// differently from the naive triple loop.

#include "tbsd/common.hpp"

namespace tbsd {

// Non-overlapping tiling of an image by h x w patch windows. Tiles on the
// bottom and right edges are zero-padded. Tile t covers
// rows [tile_row(t) * h, ...) and columns [tile_col(t) * w, ...).
struct TileLayout {
  int image_rows = 0;
  int image_cols = 0;
  int tile_rows = 0;
  int tile_cols = 0;

  TileLayout() = default;
  TileLayout(int rows, int cols, int patch_rows, int patch_cols);

  int tiles_down() const { return (image_rows + tile_rows - 1) / tile_rows; }
  int tiles_across() const { return (image_cols + tile_cols - 1) / tile_cols; }
  int tile_count() const { return tiles_down() * tiles_across(); }
  int patch_size() const { return tile_rows * tile_cols; }
};

namespace kernels {

namespace serial {

double soft_threshold(double x, double t);
Matrix soft_threshold(const Matrix& x, double t);

// hy * c * hx^T
Matrix apply_smoother(const Matrix& hy, const Matrix& c, const Matrix& hx);

// Per tile: S_t(atoms^T * vec(tile)). atoms is p x K (orthonormal columns),
// result is K x tile_count.
Matrix project_shrink_tiles(const Matrix& image, const Matrix& atoms, const TileLayout& layout,
                            double threshold);

// Inverse layout map: sum_j coeffs(j, t) * atom_j placed in tile t, cropped to the image.
Matrix assemble_tiles(const Matrix& atoms, const Matrix& coeffs, const TileLayout& layout);

}  // namespace serial

namespace parallel {

Matrix soft_threshold(const Matrix& x, double t);
Matrix apply_smoother(const Matrix& hy, const Matrix& c, const Matrix& hx);
Matrix project_shrink_tiles(const Matrix& image, const Matrix& atoms, const TileLayout& layout,
                            double threshold);
Matrix assemble_tiles(const Matrix& atoms, const Matrix& coeffs, const TileLayout& layout);

}  // namespace parallel

// Row-major extraction of tile t into a length h*w vector, zeros outside the image.
Vector extract_tile(const Matrix& image, const TileLayout& layout, int tile);

}  // namespace kernels
}  // namespace tbsd
