#pragma once

// Rotational line sampling and detection of texture directions.
//
// Angles are measured counter-clockwise from the +x (column) axis with y
// pointing up the image, so 90 degrees runs from the bottom row towards the
// top row. Directions are taken modulo pi.

#include "tbsd/common.hpp"

#include <optional>
#include <vector>

namespace tbsd {

struct SamplingConfig {
  int line_count = 0;     // parallel lines per angle; 0 covers the whole image
  int line_width = 10;    // samples averaged along the line per output value
  double center_gap = 7;  // perpendicular offset between adjacent lines
  int max_rotate = 36;    // angles k * pi / max_rotate, k = 0..max_rotate-1
  std::optional<Point2> datum;  // defaults to the image center

  void validate(int rows, int cols) const;
};

// Samples along one angle: concatenation over lines, each line ordered
// monotonically along its direction. Lines shorter than line_width are skipped.
std::vector<double> lsera_sample_angle(const Matrix& image, const SamplingConfig& config,
                                       double angle);

// One sample set per rotation index. Throws if any angle yields no samples.
std::vector<std::vector<double>> lsera_sample(const Matrix& image, const SamplingConfig& config);

struct DirectionSet {
  double unit_angle = 0.0;           // pi / max_rotate
  std::vector<int> extension_index;  // k with F(k) > threshold
  std::vector<int> expansion_index;  // matching k +- max_rotate/2
  std::vector<double> scores;        // F(k)
  double threshold = 0.0;

  bool empty() const { return expansion_index.empty(); }
  std::vector<double> expansion_radians() const;
  std::vector<double> expansion_degrees() const;
  std::vector<double> extension_degrees() const;
};

struct DetectConfig {
  double q = 0.5;
  // Flags the perpendicular angle instead, i.e. assumes sampling across the
  // texture gives the larger spread.
  bool invert_criterion = false;
};

// F(k) = std(S_k) - std(S_{k'}) with k' the perpendicular index; every k with
// F(k) > q (max|F| - min|F|) + min|F| contributes extension k and expansion k'.
DirectionSet detect_directions(const std::vector<std::vector<double>>& samples,
                               const DetectConfig& config = {});

// Direction set for known expansion angles (degrees), snapped to the grid.
DirectionSet prior_directions(const std::vector<double>& expansion_degrees, int max_rotate);

}  // namespace tbsd
