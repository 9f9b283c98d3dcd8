#include "tbsd/kernels.hpp"

#include <random>

#include "doctest.h"

using namespace tbsd;

namespace {

Matrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

Matrix orthonormal(int p, int k, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(p, k, rng));
  return qr.householderQ() * Matrix::Identity(p, k);
}

}  // namespace

TEST_CASE("tile layout counts edge tiles") {
  const TileLayout layout(10, 7, 4, 3);
  CHECK(layout.tiles_down() == 3);
  CHECK(layout.tiles_across() == 3);
  CHECK(layout.tile_count() == 9);
  CHECK(layout.patch_size() == 12);
}

TEST_CASE("extract_tile zero-pads outside the image") {
  Matrix img(5, 5);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) img(r, c) = 10 * r + c + 1;
  const TileLayout layout(5, 5, 3, 3);
  const Vector last = kernels::extract_tile(img, layout, layout.tile_count() - 1);
  // Tile (1,1) covers rows 3..5 and cols 3..5; only rows 3..4, cols 3..4 exist.
  CHECK(last(0) == doctest::Approx(34));
  CHECK(last(1) == doctest::Approx(35));
  CHECK(last(2) == 0.0);
  CHECK(last(3) == doctest::Approx(44));
  CHECK(last(8) == 0.0);
}

TEST_CASE("serial and parallel kernels agree") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const int rows = 23 + trial * 7, cols = 19 + trial * 5;
    const Matrix img = random_matrix(rows, cols, rng);
    const TileLayout layout(rows, cols, 6, 5);
    const Matrix atoms = orthonormal(layout.patch_size(), 7, rng);

    CHECK(kernels::serial::soft_threshold(img, 0.3) == kernels::parallel::soft_threshold(img, 0.3));

    const Matrix cs = kernels::serial::project_shrink_tiles(img, atoms, layout, 0.2);
    const Matrix cp = kernels::parallel::project_shrink_tiles(img, atoms, layout, 0.2);
    CHECK(cs == cp);
    CHECK(kernels::serial::assemble_tiles(atoms, cs, layout) ==
          kernels::parallel::assemble_tiles(atoms, cp, layout));

    const Matrix hy = random_matrix(rows, rows, rng), hx = random_matrix(cols, cols, rng);
    const Matrix a = kernels::serial::apply_smoother(hy, img, hx);
    const Matrix b = kernels::parallel::apply_smoother(hy, img, hx);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + a.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("apply_smoother matches the explicit product") {
  std::mt19937_64 rng(3);
  const Matrix hy = random_matrix(6, 6, rng), c = random_matrix(6, 4, rng),
               hx = random_matrix(4, 4, rng);
  const Matrix want = hy * c * hx.transpose();
  CHECK((kernels::serial::apply_smoother(hy, c, hx) - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("project then assemble reproduces a tile in the atom span") {
  std::mt19937_64 rng(5);
  const TileLayout layout(8, 8, 4, 4);
  const Matrix atoms = orthonormal(16, 3, rng);
  Matrix coeffs = Matrix::Zero(3, layout.tile_count());
  coeffs(0, 0) = 2.0;
  coeffs(2, 3) = -1.5;
  const Matrix img = kernels::serial::assemble_tiles(atoms, coeffs, layout);
  const Matrix back = kernels::serial::project_shrink_tiles(img, atoms, layout, 0.0);
  CHECK((back - coeffs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("soft threshold kernel") {
  CHECK(kernels::serial::soft_threshold(1.5, 0.5) == doctest::Approx(1.0));
  CHECK(kernels::serial::soft_threshold(-1.5, 0.5) == doctest::Approx(-1.0));
  CHECK(kernels::serial::soft_threshold(0.2, 0.5) == 0.0);
}
