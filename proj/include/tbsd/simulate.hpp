#pragma once

// Synthetic textured images with planted anomalies and exact ground truth.

#include "tbsd/common.hpp"
#include "tbsd/decompose.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tbsd {

enum class TexturePattern { one_direction, cross };
enum class AnomalyShape { disk, square, blob };

const char* to_string(TexturePattern pattern);
const char* to_string(AnomalyShape shape);
TexturePattern parse_pattern(const std::string& name);
AnomalyShape parse_shape(const std::string& name);

struct AnomalySpec {
  AnomalyShape shape = AnomalyShape::disk;
  double center_row = 0.0;
  double center_col = 0.0;
  double size = 12.0;  // diameter / side length in pixels
  double amplitude = 0.35;
};

struct SimSpec {
  int rows = 344;
  int cols = 351;
  TexturePattern pattern = TexturePattern::cross;
  // Orientation of the texture lines (extension direction), degrees. The
  // expansion direction is the perpendicular. Lines are one pixel wide and
  // anti-aliased across the two pixels nearest to them along the minor axis.
  std::vector<double> angles_deg{45.0, 135.0};
  double spacing = 10.0;
  double texture_amplitude = 0.13;
  // Each line's amplitude is texture_amplitude * (1 + u), |u| <= amplitude_jitter.
  double amplitude_jitter = 0.05;
  // Successive lines alternate between bright and dark.
  bool alternate_sign = true;
  // b0 + b1 x + b2 y + b3 x^2 + b4 x y + b5 y^2 on x, y in [-1, 1].
  std::vector<double> background{0.5, 0.08, -0.06, 0.04, 0.03, -0.05};
  std::vector<AnomalySpec> anomalies;
  double noise_sigma = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
  // Bound on the l2 deviation between spacing-long windows of the clean
  // texture profile sampled across axis-aligned lines.
  double quasi_control_limit() const;
};

struct SimResult {
  Matrix image;     // clamped to [0, 1]
  Matrix preclamp;  // background + texture + anomaly + noise
  Mask truth;
  Decomposition components;  // residual holds the noise
};

SimResult generate(const SimSpec& spec);

// Appends 1 to 3 disks, squares or blobs of size 12-24 px and amplitude
// +-(0.3-0.4), kept 20 px away from the border.
void plant_random_anomalies(SimSpec& spec, std::uint64_t seed);

struct FixtureFamily {
  std::string name;
  SimSpec training;  // defect-free
  std::vector<SimSpec> tests;
  // Expansion directions handed to learning as prior knowledge; empty means
  // they are detected from the training image.
  std::vector<double> prior_expansion_deg;
};

struct FixtureOptions {
  int count = 5;
  std::uint64_t seed = 7;
};

// "Prior One-direction", "Non-prior One-direction", "Non-prior Crossing".
std::vector<FixtureFamily> fixture_suite(const FixtureOptions& options = {});

}  // namespace tbsd
