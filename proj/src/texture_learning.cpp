#include "tbsd/texture_learning.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

namespace tbsd {

namespace {

struct Offset {
  int dr;
  int dc;
};

std::vector<Offset> cone_offsets(double direction, int l) {
  const double cone = kNeighborCone * std::numbers::pi / 180.0;
  std::vector<Offset> out;
  for (int dr = -l; dr <= l; ++dr)
    for (int dc = -l; dc <= l; ++dc) {
      if (dr == 0 && dc == 0) continue;
      // y points up, so a step down the rows is negative y.
      double a = std::atan2(-static_cast<double>(dr), static_cast<double>(dc)) - direction;
      a = std::fmod(a, std::numbers::pi);
      if (a < 0) a += std::numbers::pi;
      if (std::min(a, std::numbers::pi - a) <= cone + 1e-12) out.push_back({dr, dc});
    }
  return out;
}

TexturePatch make_patch(const Matrix& texture, const std::vector<Pixel>& pixels, double direction) {
  TexturePatch p;
  p.pixels = pixels;
  p.direction = direction;
  p.row_min = p.row_max = pixels.front().row;
  p.col_min = p.col_max = pixels.front().col;
  for (const Pixel& px : pixels) {
    p.values.push_back(texture(px.row, px.col));
    p.row_min = std::min(p.row_min, px.row);
    p.row_max = std::max(p.row_max, px.row);
    p.col_min = std::min(p.col_min, px.col);
    p.col_max = std::max(p.col_max, px.col);
  }
  return p;
}

Vector rasterize(const TexturePatch& patch, int h, int w) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(h) * w);
  const int top = static_cast<int>(std::floor((patch.row_min + patch.row_max - (h - 1)) / 2.0));
  const int left = static_cast<int>(std::floor((patch.col_min + patch.col_max - (w - 1)) / 2.0));
  for (std::size_t i = 0; i < patch.pixels.size(); ++i) {
    const int r = patch.pixels[i].row - top;
    const int c = patch.pixels[i].col - left;
    if (r >= 0 && r < h && c >= 0 && c < w) v(r * w + c) = patch.values[i];
  }
  return v;
}

}  // namespace

const char* to_string(Orthonormalization method) {
  return method == Orthonormalization::principal ? "principal" : "gram_schmidt";
}

Orthonormalization parse_orthonormalization(const std::string& name) {
  if (name == "principal") return Orthonormalization::principal;
  if (name == "gram_schmidt") return Orthonormalization::gram_schmidt;
  throw InvalidArgument("unknown orthonormalization: " + name);
}

KnbnResult knbn_cluster(const Matrix& texture, const DirectionSet& directions, int K, int l) {
  require(K >= 2, "KNBN: K must be >= 2");
  require(l >= 1, "KNBN: l must be >= 1");
  const int rows = static_cast<int>(texture.rows());
  const int cols = static_cast<int>(texture.cols());

  std::vector<Pixel> nonzero;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      if (texture(r, c) != 0.0) nonzero.push_back({r, c});

  KnbnResult out;
  for (double direction : directions.expansion_radians()) {
    const auto offsets = cone_offsets(direction, l);
    // 0: not in the working set, 1: available. Visit stamps track the current component.
    std::vector<char> alive(static_cast<std::size_t>(rows) * cols, 0);
    std::vector<int> stamp(alive.size(), -1);
    for (const Pixel& p : nonzero) alive[static_cast<std::size_t>(p.row) * cols + p.col] = 1;
    auto at = [cols](int r, int c) { return static_cast<std::size_t>(r) * cols + c; };

    std::vector<Pixel> leftover;
    std::size_t cursor = 0;
    int component = 0;
    std::vector<Pixel> tex;
    std::deque<Pixel> queue;
    std::vector<Pixel> found;

    while (true) {
      while (cursor < nonzero.size() && !alive[at(nonzero[cursor].row, nonzero[cursor].col)])
        ++cursor;
      if (cursor == nonzero.size()) break;

      tex.clear();
      queue.clear();
      const Pixel seed = nonzero[cursor];
      queue.push_back(seed);
      stamp[at(seed.row, seed.col)] = component;
      bool emitted = false;

      while (!queue.empty()) {
        const Pixel s = queue.front();
        queue.pop_front();
        found.clear();
        for (const Offset& o : offsets) {
          const int r = s.row + o.dr, c = s.col + o.dc;
          if (r < 0 || r >= rows || c < 0 || c >= cols || !alive[at(r, c)]) continue;
          found.push_back({r, c});
        }
        if (found.empty()) continue;
        tex.push_back(s);
        if (static_cast<int>(tex.size()) == K) {
          emitted = true;
          break;
        }
        for (const Pixel& q : found) {
          if (stamp[at(q.row, q.col)] == component) continue;
          stamp[at(q.row, q.col)] = component;
          queue.push_back(q);
        }
      }

      if (emitted) {
        out.patches.push_back(make_patch(texture, tex, direction));
        for (const Pixel& p : tex) alive[at(p.row, p.col)] = 0;
      } else {
        // Stalled component, or a seed without neighbours.
        if (tex.empty()) tex.push_back(seed);
        for (const Pixel& p : tex) {
          alive[at(p.row, p.col)] = 0;
          leftover.push_back(p);
        }
      }
      ++component;
    }
    out.leftover.push_back(std::move(leftover));
  }
  return out;
}

TextureBasis build_texture_basis(const std::vector<TexturePatch>& patches, int patch_rows,
                                 int patch_cols, const BasisOptions& options) {
  require(!patches.empty(), "texture basis: no patches");
  require(patch_rows > 0 && patch_cols > 0, "texture basis: empty patch shape");

  std::vector<Vector> unit;
  for (const TexturePatch& patch : patches) {
    Vector v = rasterize(patch, patch_rows, patch_cols);
    const double norm = v.norm();
    if (norm <= options.drop_tol) continue;
    v /= norm;
    bool duplicate = false;
    for (const Vector& u : unit)
      if (u.dot(v) > options.dedup_cosine) {
        duplicate = true;
        break;
      }
    if (!duplicate) unit.push_back(std::move(v));
  }
  if (unit.empty()) throw NumericalError("texture basis: every patch is zero inside the window");

  std::vector<Vector> atoms;
  if (options.method == Orthonormalization::gram_schmidt) {
    for (Vector v : unit) {
      if (options.max_atoms > 0 && static_cast<int>(atoms.size()) >= options.max_atoms) break;
      // Two passes of modified Gram-Schmidt keep the columns orthonormal to ~1e-15.
      for (int pass = 0; pass < 2; ++pass)
        for (const Vector& a : atoms) v -= a.dot(v) * a;
      const double rest = v.norm();  // candidates are unit length
      if (rest <= options.drop_tol || rest < options.novelty_tol) continue;
      atoms.push_back(v / rest);
    }
  } else {
    Matrix stacked(unit.front().size(), static_cast<Eigen::Index>(unit.size()));
    for (std::size_t j = 0; j < unit.size(); ++j) stacked.col(j) = unit[j];
    Eigen::BDCSVD<Matrix> svd(stacked, Eigen::ComputeThinU);
    const Vector& sv = svd.singularValues();
    const double total = sv.squaredNorm();
    double kept = 0.0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
      if (sv(k) <= options.drop_tol * std::max(1.0, sv(0))) break;
      if (options.max_atoms > 0 && static_cast<int>(atoms.size()) >= options.max_atoms) break;
      if (!atoms.empty() && kept >= options.energy * total * (1.0 - 1e-12)) break;
      Vector a = svd.matrixU().col(k);
      for (const Vector& u : unit) {
        const double d = a.dot(u);
        if (std::abs(d) > 1e-8) {
          if (d < 0) a = -a;
          break;
        }
      }
      atoms.push_back(std::move(a));
      kept += sv(k) * sv(k);
    }
  }

  TextureBasis basis;
  basis.patch_rows = patch_rows;
  basis.patch_cols = patch_cols;
  basis.atoms.resize(static_cast<Eigen::Index>(patch_rows) * patch_cols,
                     static_cast<Eigen::Index>(atoms.size()));
  for (std::size_t j = 0; j < atoms.size(); ++j) basis.atoms.col(j) = atoms[j];
  return basis;
}

Matrix reconstruct_texture(const TextureBasis& basis, const Matrix& coeffs,
                           const TileLayout& layout) {
  require(layout.tile_rows == basis.patch_rows && layout.tile_cols == basis.patch_cols,
          "reconstruct_texture: layout does not match patch shape");
  return kernels::parallel::assemble_tiles(basis.atoms, coeffs, layout);
}

LearnResult learn_texture_basis(const Matrix& image, const LearnParams& params,
                                const DirectionSet* prior) {
  const SmoothBasis smooth = make_smooth_basis(static_cast<int>(image.rows()),
                                               static_cast<int>(image.cols()), params.knots_y,
                                               params.knots_x, params.degree);
  LearnResult out;
  out.decomposition = low_rank_decompose(image, smooth, params.decompose);
  if (prior) {
    out.directions = *prior;
  } else {
    out.directions =
        detect_directions(lsera_sample(out.decomposition.parts.texture, params.sampling),
                          params.detect);
  }
  out.basis.patch_rows = params.patch_rows;
  out.basis.patch_cols = params.patch_cols;
  out.basis.atoms.resize(static_cast<Eigen::Index>(params.patch_rows) * params.patch_cols, 0);
  out.basis.directions_deg = out.directions.expansion_degrees();
  if (out.directions.empty()) return out;

  out.patches = knbn_cluster(out.decomposition.parts.texture, out.directions, params.knbn_k,
                             params.knbn_l)
                    .patches;
  if (out.patches.empty()) return out;
  try {
    TextureBasis basis =
        build_texture_basis(out.patches, params.patch_rows, params.patch_cols, params.basis);
    basis.directions_deg = out.basis.directions_deg;
    out.basis = std::move(basis);
  } catch (const NumericalError&) {
    // Leave the zero-atom basis in place.
  }
  return out;
}

}  // namespace tbsd
