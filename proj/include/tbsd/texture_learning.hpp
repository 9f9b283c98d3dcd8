#pragma once

// Texture basis learning: KNBN seed-growth clustering of the estimated
// texture, then an orthonormal patch dictionary built from the clusters.

#include "tbsd/common.hpp"
#include "tbsd/decompose.hpp"
#include "tbsd/kernels.hpp"
#include "tbsd/quasi_detect.hpp"

#include <string>
#include <vector>

namespace tbsd {

struct TexturePatch {
  std::vector<Pixel> pixels;
  std::vector<double> values;
  int row_min = 0, row_max = 0, col_min = 0, col_max = 0;
  double direction = 0.0;  // expansion direction (radians) the patch grew along
};

struct KnbnResult {
  std::vector<TexturePatch> patches;
  // Per expansion direction: pixels that ended in no emitted patch.
  std::vector<std::vector<Pixel>> leftover;
};

inline constexpr double kNeighborCone = 22.5;  // degrees

// For every expansion direction, seeds are taken in row-major order from a
// fresh copy of the nonzero pixels. Neighbours of a seed are working-set
// pixels within Chebyshev distance l whose connecting vector lies within
// kNeighborCone degrees of the direction. Components are emitted on reaching
// K pixels; components that stall below K go to the leftover set.
KnbnResult knbn_cluster(const Matrix& texture, const DirectionSet& directions, int K, int l);

struct TextureBasis {
  Matrix atoms;  // p x K_t, orthonormal columns
  int patch_rows = 0;
  int patch_cols = 0;
  std::vector<double> directions_deg;
  std::string source;

  int atom_count() const { return static_cast<int>(atoms.cols()); }
  int patch_size() const { return patch_rows * patch_cols; }
};

enum class Orthonormalization {
  principal,     // singular vectors of the patch matrix, strongest first
  gram_schmidt,  // modified Gram-Schmidt in patch order
};

struct BasisOptions {
  double dedup_cosine = 0.995;
  double drop_tol = 1e-10;
  Orthonormalization method = Orthonormalization::principal;
  // principal: keep the leading atoms holding this fraction of the patch energy.
  double energy = 1.0;
  // gram_schmidt: candidates keeping less than this fraction of their norm
  // after removing the span of earlier atoms are not added.
  double novelty_tol = 0.0;
  int max_atoms = 0;  // 0 = no cap
};

const char* to_string(Orthonormalization method);
Orthonormalization parse_orthonormalization(const std::string& name);

// Rasterises each patch into a window centred on its bounding box, then
// deduplicates and orthonormalises. Each atom is signed to agree with the
// first patch it overlaps.
TextureBasis build_texture_basis(const std::vector<TexturePatch>& patches, int patch_rows,
                                 int patch_cols, const BasisOptions& options = {});

// Sum of atoms weighted by coeffs (K_t x tile_count) over the tiling.
Matrix reconstruct_texture(const TextureBasis& basis, const Matrix& coeffs,
                           const TileLayout& layout);

struct LearnParams {
  DecomposeParams decompose;
  int knots_y = 0;
  int knots_x = 0;
  int degree = kDefaultSplineDegree;
  SamplingConfig sampling;
  DetectConfig detect;
  int knbn_k = 32;
  int knbn_l = 12;
  int patch_rows = 17;
  int patch_cols = 17;
  BasisOptions basis;
};

struct LearnResult {
  DecomposeResult decomposition;
  DirectionSet directions;
  std::vector<TexturePatch> patches;
  TextureBasis basis;
};

// decompose -> detect directions on the texture estimate -> KNBN -> basis.
// With `prior` set, direction detection is skipped. When no direction is
// found or no patch survives, the returned basis has zero atoms.
LearnResult learn_texture_basis(const Matrix& image, const LearnParams& params,
                                const DirectionSet* prior = nullptr);

}  // namespace tbsd
