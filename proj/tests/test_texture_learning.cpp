#include "tbsd/texture_learning.hpp"

#include "tbsd/simulate.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <set>

#include "doctest.h"

using namespace tbsd;

namespace {

TexturePatch patch_from(const Matrix& window, int row0, int col0) {
  TexturePatch p;
  for (int r = 0; r < window.rows(); ++r)
    for (int c = 0; c < window.cols(); ++c)
      if (window(r, c) != 0.0) {
        p.pixels.push_back({row0 + r, col0 + c});
        p.values.push_back(window(r, c));
      }
  p.row_min = row0;
  p.col_min = col0;
  p.row_max = row0 + static_cast<int>(window.rows()) - 1;
  p.col_max = col0 + static_cast<int>(window.cols()) - 1;
  return p;
}

double gram_error(const Matrix& atoms) {
  return (atoms.transpose() * atoms - Matrix::Identity(atoms.cols(), atoms.cols()))
      .cwiseAbs()
      .maxCoeff();
}

// Tile-wise projection error of `image` onto the atom span.
double projection_error(const TextureBasis& basis, const Matrix& image) {
  const TileLayout layout(static_cast<int>(image.rows()), static_cast<int>(image.cols()),
                          basis.patch_rows, basis.patch_cols);
  double err = 0.0;
  for (int t = 0; t < layout.tile_count(); ++t) {
    const Vector v = kernels::extract_tile(image, layout, t);
    err += (v - basis.atoms * (basis.atoms.transpose() * v)).squaredNorm();
  }
  return std::sqrt(err);
}

}  // namespace

TEST_CASE("KNBN on an empty texture emits nothing") {
  const KnbnResult r = knbn_cluster(Matrix::Zero(20, 20), prior_directions({45.0}, 36), 4, 1);
  CHECK(r.patches.empty());
  REQUIRE(r.leftover.size() == 1);
  CHECK(r.leftover[0].empty());
}

TEST_CASE("KNBN emits a K-pixel patch from a diagonal line of 2K pixels") {
  const int K = 6;
  Matrix tex = Matrix::Zero(30, 30);
  // Rising diagonal (45 degrees with y up): row decreases as column increases.
  for (int i = 0; i < 2 * K; ++i) tex(20 - i, 5 + i) = 1.0;
  const KnbnResult r = knbn_cluster(tex, prior_directions({45.0}, 36), K, 1);
  REQUIRE_FALSE(r.patches.empty());
  CHECK(r.patches.front().pixels.size() == static_cast<std::size_t>(K));
  for (const Pixel& p : r.patches.front().pixels) CHECK(tex(p.row, p.col) == 1.0);
}

TEST_CASE("KNBN never merges lines further apart than l") {
  Matrix tex = Matrix::Zero(40, 40);
  for (int c = 2; c < 38; ++c) {
    tex(10, c) = 1.0;
    tex(14, c) = -1.0;
  }
  for (int l : {1, 2, 3}) {
    const KnbnResult r = knbn_cluster(tex, prior_directions({0.0}, 36), 5, l);
    CHECK(r.patches.size() >= 2);
    for (const TexturePatch& p : r.patches) CHECK(p.row_min == p.row_max);
  }
}

TEST_CASE("property: patches and leftovers partition the nonzero pixels") {
  oracle::Gen gen(31);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix tex = Matrix::Zero(30, 34);
    for (Eigen::Index i = 0; i < tex.size(); ++i)
      if (gen.uniform(0, 1) < 0.3) tex.data()[i] = gen.normal();
    std::vector<double> dirs{gen.uniform(0, 180)};
    if (trial % 2) dirs.push_back(gen.uniform(0, 180));
    const DirectionSet ds = prior_directions(dirs, 36);
    const int K = gen.integer(2, 8), l = gen.integer(1, 3);
    const KnbnResult r = knbn_cluster(tex, ds, K, l);
    REQUIRE(r.leftover.size() == ds.expansion_index.size());

    const long nonzero = (tex.array() != 0.0).count();
    std::size_t patch_index = 0;
    for (std::size_t d = 0; d < ds.expansion_index.size(); ++d) {
      const double dir = ds.expansion_radians()[d];
      std::set<std::pair<int, int>> seen;
      long count = 0;
      for (; patch_index < r.patches.size() && r.patches[patch_index].direction == dir;
           ++patch_index) {
        CHECK(r.patches[patch_index].pixels.size() == static_cast<std::size_t>(K));
        for (const Pixel& p : r.patches[patch_index].pixels) {
          CHECK(seen.insert({p.row, p.col}).second);
          ++count;
        }
      }
      for (const Pixel& p : r.leftover[d]) {
        CHECK(seen.insert({p.row, p.col}).second);
        ++count;
      }
      CHECK(count == nonzero);
      for (const auto& [row, col] : seen) CHECK(tex(row, col) != 0.0);
    }
    CHECK(patch_index == r.patches.size());
  }
}

TEST_CASE("KNBN preconditions") {
  const Matrix tex = Matrix::Ones(5, 5);
  CHECK_THROWS_AS(knbn_cluster(tex, prior_directions({0.0}, 36), 1, 1), InvalidArgument);
  CHECK_THROWS_AS(knbn_cluster(tex, prior_directions({0.0}, 36), 3, 0), InvalidArgument);
}

TEST_CASE("a single patch becomes its own normalised atom") {
  oracle::Gen gen(2);
  const Matrix w = gen.matrix(5, 5);
  for (auto method : {Orthonormalization::principal, Orthonormalization::gram_schmidt}) {
    BasisOptions opt;
    opt.method = method;
    const TextureBasis b = build_texture_basis({patch_from(w, 10, 10)}, 5, 5, opt);
    REQUIRE(b.atom_count() == 1);
    Matrix wt = w.transpose();  // row-major vectorisation
    const Vector want = Eigen::Map<const Vector>(wt.data(), 25) / w.norm();
    CHECK((b.atoms.col(0) - want).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("identical patches collapse to one atom") {
  oracle::Gen gen(3);
  const Matrix w = gen.matrix(4, 6);
  const TextureBasis b =
      build_texture_basis({patch_from(w, 0, 0), patch_from(w, 7, 3), patch_from(2.0 * w, 1, 1)}, 4, 6);
  CHECK(b.atom_count() == 1);
}

TEST_CASE("independent patches give orthonormal atoms") {
  oracle::Gen gen(4);
  for (auto method : {Orthonormalization::principal, Orthonormalization::gram_schmidt}) {
    BasisOptions opt;
    opt.method = method;
    std::vector<TexturePatch> patches;
    for (int i = 0; i < 8; ++i) patches.push_back(patch_from(gen.matrix(6, 6), 3 * i, 2 * i));
    const TextureBasis b = build_texture_basis(patches, 6, 6, opt);
    CHECK(b.atom_count() == 8);
    CHECK(gram_error(b.atoms) <= 1e-8);
    // Same span either way: every patch is reproduced.
    for (const TexturePatch& p : patches) {
      Matrix w(6, 6);
      for (std::size_t i = 0; i < p.pixels.size(); ++i)
        w(p.pixels[i].row - p.row_min, p.pixels[i].col - p.col_min) = p.values[i];
      Matrix wt = w.transpose();
      const Vector v = Eigen::Map<const Vector>(wt.data(), 36);
      CHECK((v - b.atoms * (b.atoms.transpose() * v)).norm() < 1e-10 * v.norm());
    }
  }
}

TEST_CASE("principal atoms respect the energy and atom caps") {
  oracle::Gen gen(5);
  std::vector<TexturePatch> patches;
  for (int i = 0; i < 10; ++i) patches.push_back(patch_from(gen.matrix(5, 5), 0, 0));
  BasisOptions opt;
  opt.max_atoms = 3;
  CHECK(build_texture_basis(patches, 5, 5, opt).atom_count() == 3);
  opt = {};
  opt.energy = 0.5;
  const int partial = build_texture_basis(patches, 5, 5, opt).atom_count();
  CHECK(partial >= 1);
  CHECK(partial < 10);
}

TEST_CASE("an all-zero patch set is rejected") {
  TexturePatch p;
  p.pixels = {{40, 40}};
  p.values = {1.0};
  p.row_min = p.row_max = p.col_min = p.col_max = 40;
  // Centred window keeps the pixel; an explicit zero-valued patch does not.
  p.values = {0.0};
  CHECK_THROWS_AS(build_texture_basis({p}, 5, 5), NumericalError);
  CHECK_THROWS_AS(build_texture_basis({}, 5, 5), InvalidArgument);
}

TEST_CASE("orthonormalization names round-trip") {
  for (auto m : {Orthonormalization::principal, Orthonormalization::gram_schmidt})
    CHECK(parse_orthonormalization(to_string(m)) == m);
  CHECK_THROWS_AS(parse_orthonormalization("qr"), InvalidArgument);
}

TEST_CASE("reconstruct_texture places atoms by tile") {
  oracle::Gen gen(6);
  TextureBasis b;
  b.patch_rows = 3;
  b.patch_cols = 4;
  b.atoms = gen.orthonormal(12, 2);
  const TileLayout layout(7, 9, 3, 4);
  Matrix coeffs = Matrix::Zero(2, layout.tile_count());
  CHECK(reconstruct_texture(b, coeffs, layout).cwiseAbs().maxCoeff() == 0.0);
  coeffs(1, 0) = 1.0;
  const Matrix img = reconstruct_texture(b, coeffs, layout);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) CHECK(img(r, c) == b.atoms(r * 4 + c, 1));
  CHECK(img.block(3, 0, 4, 9).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(reconstruct_texture(b, coeffs, TileLayout(7, 9, 4, 3)), InvalidArgument);
}

TEST_CASE("property: orthonormal projection is the least-squares fit") {
  oracle::Gen gen(8);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix atoms = gen.orthonormal(20, gen.integer(1, 6));
    const Vector v = gen.matrix(20, 1).col(0);
    const double best = (v - atoms * (atoms.transpose() * v)).norm();
    for (int k = 0; k < 10; ++k) {
      const Vector c = gen.matrix(static_cast<int>(atoms.cols()), 1).col(0);
      CHECK(best <= (v - atoms * c).norm() + 1e-12);
    }
    // Analyze-then-reconstruct leaves exactly the orthogonal residual.
    const TileLayout layout(4, 5, 4, 5);
    Matrix tile = Eigen::Map<const Matrix>(v.data(), 5, 4).transpose();
    TextureBasis b;
    b.patch_rows = 4;
    b.patch_cols = 5;
    b.atoms = atoms;
    const Matrix coeffs = kernels::serial::project_shrink_tiles(tile, atoms, layout, 0.0);
    CHECK(((tile - reconstruct_texture(b, coeffs, layout)).norm()) == doctest::Approx(best));
  }
}

TEST_CASE("learning from a sub-patch is as good as from the full image") {
  SimSpec spec;
  spec.rows = 160;
  spec.cols = 160;
  spec.pattern = TexturePattern::one_direction;
  spec.angles_deg = {45.0};
  spec.texture_amplitude = 0.3;
  spec.seed = 11;
  const SimResult sim = generate(spec);
  const DirectionSet prior = prior_directions({135.0}, 36);

  LearnParams params;
  const LearnResult full = learn_texture_basis(sim.image, params, &prior);
  // 60 x 60 spans several texture periods (spacing 10).
  const LearnResult part = learn_texture_basis(sim.image.block(40, 40, 60, 60), params, &prior);
  REQUIRE(full.basis.atom_count() > 0);
  REQUIRE(part.basis.atom_count() > 0);
  CHECK(gram_error(full.basis.atoms) <= 1e-8);
  CHECK(gram_error(part.basis.atoms) <= 1e-8);

  const Matrix& truth = sim.components.texture;
  const double e_full = projection_error(full.basis, truth);
  const double e_part = projection_error(part.basis, truth);
  MESSAGE("projection error full ", e_full, " sub-patch ", e_part, " of ", truth.norm());
  CHECK(e_full < truth.norm());
  CHECK(e_part <= 2.0 * e_full);
}

TEST_CASE("learning without directions returns an empty basis") {
  const LearnResult r = learn_texture_basis(Matrix::Constant(40, 40, 0.5), {});
  CHECK(r.directions.empty());
  CHECK(r.basis.atom_count() == 0);
  CHECK(r.basis.patch_size() == 17 * 17);
}
