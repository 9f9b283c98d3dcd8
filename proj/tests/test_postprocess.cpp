#include "tbsd/postprocess.hpp"

#include "oracles.hpp"

#include <algorithm>

#include "doctest.h"

using namespace tbsd;

namespace {

bool contains(const std::vector<Pixel>& area, int r, int c) {
  return std::find(area.begin(), area.end(), Pixel{r, c}) != area.end();
}

Mask random_mask(oracle::Gen& gen, int rows, int cols, double p) {
  Mask m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = gen.uniform(0, 1) < p;
  return m;
}

}  // namespace

TEST_CASE("empty mask gives no regions") {
  CHECK(close_regions(Mask::Constant(20, 20, false), 36, 5).empty());
}

TEST_CASE("a filled 9x9 square closes onto itself") {
  Mask m = Mask::Constant(40, 40, false);
  m.block(15, 12, 9, 9) = true;
  const auto regions = close_regions(m, 36, 5);
  REQUIRE(regions.size() == 1);
  const auto& area = regions[0].area;
  CHECK(contains(area, 19, 16));
  int inside = 0;
  for (int r = 15; r < 24; ++r)
    for (int c = 12; c < 21; ++c) inside += contains(area, r, c);
  CHECK(inside >= 0.8 * 81);
  CHECK(regions[0].knots.size() >= 3);
  CHECK(regions[0].cluster.size() == 81);

  const MetricReport e = evaluate(regions_to_mask(regions, 40, 40), m);
  CHECK(e.tpr >= 0.8);
  CHECK(e.fpr <= 0.02);
}

TEST_CASE("squares further apart than 2 D_max stay separate") {
  Mask m = Mask::Constant(30, 60, false);
  m.block(10, 5, 6, 6) = true;
  m.block(10, 22, 6, 6) = true;  // 11 empty columns between them
  CHECK(close_regions(m, 36, 5).size() == 2);
  CHECK(close_regions(m, 36, 6).size() == 1);
  const auto regions = close_regions(m, 36, 5);
  for (const Pixel& p : regions[0].area) CHECK_FALSE(contains(regions[1].area, p.row, p.col));
}

TEST_CASE("a ring is filled to a disk") {
  Mask m = Mask::Constant(50, 50, false);
  for (int r = 0; r < 50; ++r)
    for (int c = 0; c < 50; ++c) {
      const double d = std::hypot(r - 25.0, c - 25.0);
      m(r, c) = d >= 10.0 && d <= 12.0;
    }
  const auto regions = close_regions(m, 36, 2);
  REQUIRE(regions.size() == 1);
  CHECK(contains(regions[0].area, 25, 25));
  CHECK(contains(regions[0].area, 20, 28));
}

TEST_CASE("property: closed areas contain every clustered pixel") {
  oracle::Gen gen(14);
  for (int trial = 0; trial < 15; ++trial) {
    const Mask m = random_mask(gen, 30, 30, 0.05);
    const int d = gen.integer(1, 4);
    const auto regions = close_regions(m, 36, d);
    std::size_t clustered = 0;
    for (const auto& region : regions) {
      clustered += region.cluster.size();
      for (const Pixel& p : region.cluster) CHECK(contains(region.area, p.row, p.col));
    }
    CHECK(clustered == static_cast<std::size_t>(m.count()));
    const Mask closed = regions_to_mask(regions, 30, 30);
    CHECK((closed || !m).all());
  }
}

TEST_CASE("property: region count is non-increasing in D_max") {
  oracle::Gen gen(15);
  for (int trial = 0; trial < 10; ++trial) {
    const Mask m = random_mask(gen, 40, 40, 0.02);
    std::size_t previous = static_cast<std::size_t>(-1);
    for (int d : {1, 2, 3, 5, 8, 13}) {
      const std::size_t n = close_regions(m, 36, d).size();
      CHECK(n <= previous);
      previous = n;
    }
  }
}

TEST_CASE("evaluate: identity and complement") {
  Mask truth = Mask::Constant(10, 12, false);
  truth.block(2, 3, 4, 5) = true;
  MetricReport e = evaluate(truth, truth);
  CHECK(e.tpr == 1.0);
  CHECK(e.fpr == 0.0);
  e = evaluate(!truth, truth);
  CHECK(e.tpr == 0.0);
  CHECK(e.fpr == 1.0);
  CHECK_THROWS_AS(evaluate(truth, Mask::Constant(10, 11, false)), InvalidArgument);
}

TEST_CASE("evaluate: counts by hand") {
  Mask truth = Mask::Constant(4, 5, false), pred = Mask::Constant(4, 5, false);
  truth(0, 0) = truth(0, 1) = truth(1, 1) = true;
  pred(0, 1) = pred(1, 1) = pred(3, 4) = true;
  const MetricReport e = evaluate(pred, truth);
  CHECK(e.tp == 2);
  CHECK(e.fn == 1);
  CHECK(e.fp == 1);
  CHECK(e.tn == 16);
  CHECK(e.tpr == doctest::Approx(2.0 / 3));
  CHECK(e.fpr == doctest::Approx(1.0 / 17));
}

TEST_CASE("evaluate: no positives or no negatives report zero rates") {
  const Mask none = Mask::Constant(3, 3, false), all = Mask::Constant(3, 3, true);
  CHECK(evaluate(all, none).tpr == 0.0);
  CHECK(evaluate(all, none).fpr == 1.0);
  CHECK(evaluate(none, all).fpr == 0.0);
}

TEST_CASE("property: evaluate symmetry and partition") {
  oracle::Gen gen(16);
  for (int trial = 0; trial < 30; ++trial) {
    const Mask a = random_mask(gen, 13, 17, 0.3), b = random_mask(gen, 13, 17, 0.2);
    const MetricReport ab = evaluate(a, b), ba = evaluate(b, a);
    CHECK(ab.tp + ab.fp + ab.tn + ab.fn == 13 * 17);
    CHECK(ab.fn == ba.fp);
    CHECK(ab.fp == ba.fn);
    CHECK(ab.tp == ba.tp);
  }
}

TEST_CASE("closing preconditions") {
  const Mask m = Mask::Constant(5, 5, true);
  CHECK_THROWS_AS(close_regions(m, 4, 3), InvalidArgument);
  CHECK_THROWS_AS(close_regions(m, 36, 0), InvalidArgument);
}
