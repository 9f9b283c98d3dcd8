// Serial reference vs OpenMP kernels on a full simulation-sized image.

#include "tbsd/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace tbsd;

namespace {

constexpr int kRows = 344, kCols = 351, kPatch = 17, kAtoms = 40;

Matrix random_matrix(int rows, int cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

Matrix orthonormal_atoms() {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(kPatch * kPatch, kAtoms, 2));
  return qr.householderQ() * Matrix::Identity(kPatch * kPatch, kAtoms);
}

struct Fixture {
  Matrix image = random_matrix(kRows, kCols, 1);
  Matrix atoms = orthonormal_atoms();
  TileLayout layout{kRows, kCols, kPatch, kPatch};
  Matrix coeffs = random_matrix(kAtoms, layout.tile_count(), 3);
  Matrix hy = random_matrix(kRows, kRows, 4);
  Matrix hx = random_matrix(kCols, kCols, 5);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

template <Matrix (*F)(const Matrix&, double)>
void soft_threshold(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(F(f.image, 0.5));
}

template <Matrix (*F)(const Matrix&, const Matrix&, const TileLayout&, double)>
void project_shrink(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(F(f.image, f.atoms, f.layout, 0.1));
}

template <Matrix (*F)(const Matrix&, const Matrix&, const TileLayout&)>
void assemble(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(F(f.atoms, f.coeffs, f.layout));
}

template <Matrix (*F)(const Matrix&, const Matrix&, const Matrix&)>
void smoother(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(F(f.hy, f.image, f.hx));
}

}  // namespace

BENCHMARK(soft_threshold<kernels::serial::soft_threshold>)->Name("soft_threshold/serial");
BENCHMARK(soft_threshold<kernels::parallel::soft_threshold>)->Name("soft_threshold/parallel");
BENCHMARK(project_shrink<kernels::serial::project_shrink_tiles>)->Name("project_shrink_tiles/serial");
BENCHMARK(project_shrink<kernels::parallel::project_shrink_tiles>)
    ->Name("project_shrink_tiles/parallel");
BENCHMARK(assemble<kernels::serial::assemble_tiles>)->Name("assemble_tiles/serial");
BENCHMARK(assemble<kernels::parallel::assemble_tiles>)->Name("assemble_tiles/parallel");
BENCHMARK(smoother<kernels::serial::apply_smoother>)->Name("apply_smoother/serial");
BENCHMARK(smoother<kernels::parallel::apply_smoother>)->Name("apply_smoother/parallel");

BENCHMARK_MAIN();
