#include "tbsd/quasi_detect.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tbsd {

namespace {

constexpr double kBoundsTol = 1e-9;

double bilinear(const Matrix& image, double x, double y) {
  const Eigen::Index rows = image.rows(), cols = image.cols();
  const Eigen::Index x0 = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(x)), 0,
                                                   std::max<Eigen::Index>(cols - 2, 0));
  const Eigen::Index y0 = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(y)), 0,
                                                   std::max<Eigen::Index>(rows - 2, 0));
  const Eigen::Index x1 = std::min(x0 + 1, cols - 1);
  const Eigen::Index y1 = std::min(y0 + 1, rows - 1);
  const double fx = std::clamp(x - static_cast<double>(x0), 0.0, 1.0);
  const double fy = std::clamp(y - static_cast<double>(y0), 0.0, 1.0);
  const double top = (1.0 - fx) * image(y0, x0) + fx * image(y0, x1);
  const double bottom = (1.0 - fx) * image(y1, x0) + fx * image(y1, x1);
  return (1.0 - fy) * top + fy * bottom;
}

double population_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(v.size()));
}

std::vector<double> to_degrees(const std::vector<int>& index, double unit) {
  std::vector<double> out;
  out.reserve(index.size());
  // k * 180 / K is exact for the usual grids, unlike k * (pi / K) in degrees.
  const double steps = std::numbers::pi / unit;
  for (int k : index) out.push_back(k * 180.0 / steps);
  return out;
}

}  // namespace

void SamplingConfig::validate(int rows, int cols) const {
  require(rows > 0 && cols > 0, "sampling: empty image");
  require(line_count >= 0, "sampling: line_count must be >= 0");
  require(line_width >= 1, "sampling: line_width must be >= 1");
  require(center_gap > 0.0, "sampling: center_gap must be > 0");
  require(max_rotate >= 2 && max_rotate % 2 == 0, "sampling: max_rotate must be even and >= 2");
  if (datum) {
    require(datum->x >= 0.0 && datum->x <= cols - 1 && datum->y >= 0.0 && datum->y <= rows - 1,
            "sampling: datum outside image");
  }
}

std::vector<double> lsera_sample_angle(const Matrix& image, const SamplingConfig& config,
                                       double angle) {
  const int rows = static_cast<int>(image.rows());
  const int cols = static_cast<int>(image.cols());
  config.validate(rows, cols);
  const Point2 datum = config.datum.value_or(Point2{(cols - 1) / 2.0, (rows - 1) / 2.0});

  // Unit step along the line and between lines, in (column, row) coordinates.
  const double ux = std::cos(angle), uy = -std::sin(angle);
  const double vx = std::sin(angle), vy = std::cos(angle);
  const double reach = std::hypot(rows, cols) + 1.0;
  const int steps = static_cast<int>(std::ceil(reach));

  int first_line, last_line;
  if (config.line_count > 0) {
    first_line = -(config.line_count - 1) / 2;
    last_line = first_line + config.line_count - 1;
  } else {
    last_line = static_cast<int>(std::ceil(reach / config.center_gap));
    first_line = -last_line;
  }

  std::vector<double> out;
  std::vector<double> line;
  for (int j = first_line; j <= last_line; ++j) {
    const double ox = datum.x + j * config.center_gap * vx;
    const double oy = datum.y + j * config.center_gap * vy;
    line.clear();
    for (int s = -steps; s <= steps; ++s) {
      const double x = ox + s * ux, y = oy + s * uy;
      if (x < -kBoundsTol || x > cols - 1 + kBoundsTol || y < -kBoundsTol ||
          y > rows - 1 + kBoundsTol)
        continue;
      line.push_back(bilinear(image, x, y));
    }
    const int w = config.line_width;
    if (static_cast<int>(line.size()) < w) continue;
    double sum = 0.0;
    for (int i = 0; i < w; ++i) sum += line[i];
    out.push_back(sum / w);
    for (std::size_t i = w; i < line.size(); ++i) {
      sum += line[i] - line[i - w];
      out.push_back(sum / w);
    }
  }
  return out;
}

std::vector<std::vector<double>> lsera_sample(const Matrix& image, const SamplingConfig& config) {
  config.validate(static_cast<int>(image.rows()), static_cast<int>(image.cols()));
  const int k_count = config.max_rotate;
  std::vector<std::vector<double>> samples(k_count);
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < k_count; ++k)
    samples[k] = lsera_sample_angle(image, config, k * std::numbers::pi / k_count);
  for (const auto& s : samples) require(!s.empty(), "sampling: no usable samples at some angle");
  return samples;
}

std::vector<double> DirectionSet::expansion_radians() const {
  std::vector<double> out;
  for (int k : expansion_index) out.push_back(k * unit_angle);
  return out;
}

std::vector<double> DirectionSet::expansion_degrees() const {
  return to_degrees(expansion_index, unit_angle);
}

std::vector<double> DirectionSet::extension_degrees() const {
  return to_degrees(extension_index, unit_angle);
}

DirectionSet detect_directions(const std::vector<std::vector<double>>& samples,
                               const DetectConfig& config) {
  const int k_count = static_cast<int>(samples.size());
  require(k_count >= 2 && k_count % 2 == 0, "detect_directions: need an even number of angles");
  require(config.q > 0.0 && config.q < 1.0, "detect_directions: q must lie in (0, 1)");
  for (const auto& s : samples) require(!s.empty(), "detect_directions: empty sample set");

  std::vector<double> spread(k_count);
  double scale = 1.0;
  for (int k = 0; k < k_count; ++k) {
    spread[k] = population_std(samples[k]);
    for (double v : samples[k]) scale = std::max(scale, std::abs(v));
  }
  // Interpolation round-off on flat images is not a direction.
  const double floor = 1e-12 * scale;

  DirectionSet out;
  out.unit_angle = std::numbers::pi / k_count;
  const int half = k_count / 2;
  out.scores.resize(k_count);
  for (int k = 0; k < k_count; ++k) {
    double f = spread[k] - spread[(k + half) % k_count];
    if (std::abs(f) <= floor) f = 0.0;
    out.scores[k] = config.invert_criterion ? -f : f;
  }

  double lo = std::abs(out.scores[0]), hi = lo;
  for (double f : out.scores) {
    lo = std::min(lo, std::abs(f));
    hi = std::max(hi, std::abs(f));
  }
  out.threshold = config.q * (hi - lo) + lo;
  for (int k = 0; k < k_count; ++k) {
    if (out.scores[k] > out.threshold) {
      out.extension_index.push_back(k);
      out.expansion_index.push_back((k + half) % k_count);
    }
  }
  return out;
}

DirectionSet prior_directions(const std::vector<double>& expansion_degrees, int max_rotate) {
  require(max_rotate >= 2 && max_rotate % 2 == 0, "prior directions: max_rotate must be even");
  require(!expansion_degrees.empty(), "prior directions: no angles given");
  DirectionSet out;
  out.unit_angle = std::numbers::pi / max_rotate;
  const double unit_deg = 180.0 / max_rotate;
  for (double deg : expansion_degrees) {
    require(std::isfinite(deg), "prior directions: non-finite angle");
    const long snapped = std::lround(deg / unit_deg);
    const int k = static_cast<int>(((snapped % max_rotate) + max_rotate) % max_rotate);
    if (std::find(out.expansion_index.begin(), out.expansion_index.end(), k) !=
        out.expansion_index.end())
      continue;
    out.expansion_index.push_back(k);
    out.extension_index.push_back((k + max_rotate / 2) % max_rotate);
  }
  return out;
}

}  // namespace tbsd
