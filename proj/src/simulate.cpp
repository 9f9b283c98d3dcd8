#include "tbsd/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace tbsd {

const char* to_string(TexturePattern pattern) {
  return pattern == TexturePattern::cross ? "cross" : "one_direction";
}

const char* to_string(AnomalyShape shape) {
  switch (shape) {
    case AnomalyShape::disk: return "disk";
    case AnomalyShape::square: return "square";
    case AnomalyShape::blob: return "blob";
  }
  return "disk";
}

TexturePattern parse_pattern(const std::string& name) {
  if (name == "cross") return TexturePattern::cross;
  if (name == "one_direction") return TexturePattern::one_direction;
  throw InvalidArgument("unknown texture pattern: " + name);
}

AnomalyShape parse_shape(const std::string& name) {
  if (name == "disk") return AnomalyShape::disk;
  if (name == "square") return AnomalyShape::square;
  if (name == "blob") return AnomalyShape::blob;
  throw InvalidArgument("unknown anomaly shape: " + name);
}

namespace {

bool in_footprint(const AnomalySpec& a, double row, double col) {
  const double dr = row - a.center_row, dc = col - a.center_col;
  const double half = a.size / 2.0;
  switch (a.shape) {
    case AnomalyShape::disk: return dr * dr + dc * dc <= half * half;
    case AnomalyShape::square: return std::abs(dr) <= half && std::abs(dc) <= half;
    case AnomalyShape::blob: {
      // Ellipse with axes size/2 and size/3, rotated by 30 degrees.
      const double c = std::cos(std::numbers::pi / 6), s = std::sin(std::numbers::pi / 6);
      const double u = (c * dc + s * dr) / half, v = (-s * dc + c * dr) / (a.size / 3.0);
      return u * u + v * v <= 1.0;
    }
  }
  return false;
}

Mask footprint(const SimSpec& spec) {
  Mask m = Mask::Constant(spec.rows, spec.cols, false);
  for (const AnomalySpec& a : spec.anomalies) {
    if (a.amplitude == 0.0) continue;
    for (int r = 0; r < spec.rows; ++r)
      for (int c = 0; c < spec.cols; ++c)
        if (in_footprint(a, r, c)) m(r, c) = true;
  }
  return m;
}

std::vector<double> line_angles(const SimSpec& spec) {
  if (spec.pattern == TexturePattern::one_direction) return {spec.angles_deg.front()};
  return spec.angles_deg;
}

}  // namespace

void SimSpec::validate() const {
  require(rows > 0 && cols > 0, "simulate: empty image");
  require(spacing >= 2.0, "simulate: spacing must be >= 2");
  require(!angles_deg.empty(), "simulate: no texture angle");
  require(pattern != TexturePattern::cross || angles_deg.size() >= 2,
          "simulate: cross pattern needs two angles");
  require(std::isfinite(texture_amplitude), "simulate: texture amplitude must be finite");
  require(amplitude_jitter >= 0.0 && amplitude_jitter < 1.0, "simulate: jitter must lie in [0, 1)");
  require(background.size() == 6, "simulate: background needs 6 polynomial coefficients");
  require(noise_sigma >= 0.0, "simulate: noise sigma must be >= 0");
  for (const AnomalySpec& a : anomalies) {
    require(a.size > 0.0, "simulate: anomaly size must be > 0");
    const double half = a.size / 2.0;
    require(a.center_row - half >= 0.0 && a.center_row + half <= rows - 1 &&
                a.center_col - half >= 0.0 && a.center_col + half <= cols - 1,
            "simulate: anomaly outside image bounds");
  }
  const Mask m = footprint(*this);
  require(static_cast<double>(m.count()) <= 0.1 * rows * cols,
          "simulate: anomaly footprint exceeds 10% of the image");
}

double SimSpec::quasi_control_limit() const {
  // Window energy of a unit tent line sampled at unit steps is at most 1.
  return 2.0 * amplitude_jitter * std::abs(texture_amplitude);
}

SimResult generate(const SimSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const int rows = spec.rows, cols = spec.cols;
  const double cx = (cols - 1) / 2.0, cy = (rows - 1) / 2.0;
  const double reach = std::hypot(rows, cols);

  Matrix background(rows, cols);
  const auto& b = spec.background;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const double x = cols > 1 ? 2.0 * c / (cols - 1) - 1.0 : 0.0;
      const double y = rows > 1 ? 1.0 - 2.0 * r / (rows - 1) : 0.0;
      background(r, c) = b[0] + b[1] * x + b[2] * y + b[3] * x * x + b[4] * x * y + b[5] * y * y;
    }

  Matrix texture = Matrix::Zero(rows, cols);
  for (double deg : line_angles(spec)) {
    const double theta = deg * std::numbers::pi / 180.0;
    // Unit normal of the lines in (column, row) coordinates with y up.
    const double nx = std::sin(theta), ny = std::cos(theta);
    // Wu-style anti-aliasing: the line's intensity is split between the two
    // pixels straddling it along the minor axis.
    const double minor = std::max(std::abs(nx), std::abs(ny));
    const double phase = spec.spacing * unit(rng);
    const int lines = static_cast<int>(std::ceil(reach / spec.spacing)) + 2;
    std::vector<double> amp(2 * lines + 1);
    for (std::size_t i = 0; i < amp.size(); ++i) {
      amp[i] = spec.texture_amplitude * (1.0 + spec.amplitude_jitter * (2.0 * unit(rng) - 1.0));
      if (spec.alternate_sign && i % 2 == 1) amp[i] = -amp[i];
    }
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const double s = nx * (c - cx) + ny * (r - cy) - phase;
        const double j = std::round(s / spec.spacing);
        const double d = std::abs(s - j * spec.spacing) / minor;
        const int idx = std::clamp(static_cast<int>(j) + lines, 0, 2 * lines);
        texture(r, c) += amp[idx] * std::max(0.0, 1.0 - d);
      }
  }

  Matrix anomaly = Matrix::Zero(rows, cols);
  for (const AnomalySpec& a : spec.anomalies)
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        if (in_footprint(a, r, c)) anomaly(r, c) += a.amplitude;

  Matrix noise(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) noise(r, c) = spec.noise_sigma * gauss(rng);

  SimResult out;
  out.preclamp = background + texture + anomaly + noise;
  out.image = out.preclamp.cwiseMax(0.0).cwiseMin(1.0);
  out.truth = footprint(spec);
  out.components.background = std::move(background);
  out.components.texture = std::move(texture);
  out.components.anomaly = std::move(anomaly);
  out.components.residual = std::move(noise);
  return out;
}

namespace {

SimSpec base_spec(std::uint64_t seed, TexturePattern pattern, std::vector<double> angles) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SimSpec s;
  s.seed = seed;
  s.pattern = pattern;
  s.angles_deg = std::move(angles);
  s.background = {0.5 + 0.05 * u(rng), 0.08 * u(rng), 0.08 * u(rng),
                  0.04 * u(rng),       0.04 * u(rng), 0.04 * u(rng)};
  return s;
}

}  // namespace

void plant_random_anomalies(SimSpec& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<int> count(1, 3);
  std::uniform_int_distribution<int> shape(0, 2);
  std::uniform_real_distribution<double> size(12.0, 24.0);
  std::uniform_real_distribution<double> amp(0.3, 0.4);
  std::bernoulli_distribution dark(0.5);
  const int n = count(rng);
  const double margin = 20.0;
  std::uniform_real_distribution<double> row(margin, s.rows - 1 - margin);
  std::uniform_real_distribution<double> col(margin, s.cols - 1 - margin);
  for (int i = 0; i < n; ++i) {
    AnomalySpec a;
    a.shape = static_cast<AnomalyShape>(shape(rng));
    a.size = size(rng);
    a.center_row = row(rng);
    a.center_col = col(rng);
    a.amplitude = dark(rng) ? -amp(rng) : amp(rng);
    s.anomalies.push_back(a);
  }
}

std::vector<FixtureFamily> fixture_suite(const FixtureOptions& options) {
  require(options.count >= 1, "fixture suite: count must be >= 1");
  // Prior: the training texture runs in the same direction as the test
  // texture, and that direction is handed to learning. Non-prior: learning
  // detects directions on a training texture that differs from the tests.
  struct Layout {
    const char* name;
    double train_angle;
    TexturePattern test_pattern;
    std::vector<double> test_angles;
    bool prior;
  };
  const std::vector<Layout> layouts{
      {"Prior One-direction", 45.0, TexturePattern::one_direction, {45.0}, true},
      {"Non-prior One-direction", 45.0, TexturePattern::one_direction, {135.0}, false},
      {"Non-prior Crossing", 45.0, TexturePattern::cross, {45.0, 135.0}, false},
  };

  std::vector<FixtureFamily> out;
  std::uint64_t seed = options.seed * 1000003ULL;
  for (const Layout& layout : layouts) {
    FixtureFamily family;
    family.name = layout.name;
    family.training = base_spec(++seed, TexturePattern::one_direction, {layout.train_angle});
    for (int i = 0; i < options.count; ++i) {
      SimSpec s = base_spec(++seed, layout.test_pattern, layout.test_angles);
      plant_random_anomalies(s, s.seed);
      family.tests.push_back(std::move(s));
    }
    if (layout.prior) family.prior_expansion_deg.push_back(std::fmod(layout.train_angle + 90.0, 180.0));
    out.push_back(std::move(family));
  }
  return out;
}

}  // namespace tbsd
