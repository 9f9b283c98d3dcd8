#include "tbsd/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace tbsd::signals {

Signal1D::Signal1D(std::vector<double> values) : values_(std::move(values)) {
  require(!values_.empty(), "signal must contain at least one value");
  for (double v : values_) require(std::isfinite(v), "signal values must be finite");
}

void QuasiSpec::validate() const {
  const std::size_t period = mode.size();
  require(period >= 2, "quasi mode must have length > 1");
  require(segmentation.size() >= 2, "quasi segmentation needs at least two segments");
  require(sigma >= 0.0 && std::isfinite(sigma), "quasi control limit must be >= 0");
  const std::size_t total = std::accumulate(segmentation.begin(), segmentation.end(), std::size_t{0});
  require(total == domain, "quasi segmentation must sum to the domain length");
  const std::size_t shortest = *std::min_element(segmentation.begin(), segmentation.end());
  require(period <= shortest, "quasi mode is longer than the shortest segment");
}

Signal1D make_periodic(const PeriodicSpec& spec) {
  const std::size_t period = spec.mode.size();
  require(period > 1 && period < spec.domain, "periodic length must satisfy 1 < T < n");
  std::vector<double> out(spec.domain);
  for (std::size_t i = 0; i < spec.domain; ++i) out[i] = spec.mode[i % period];
  return Signal1D(std::move(out));
}

Signal1D compose(std::span<const Signal1D> signals, std::span<const double> weights) {
  require(!signals.empty(), "compose needs at least one signal");
  require(signals.size() == weights.size(), "compose: one weight per signal");
  std::size_t domain = 0;
  for (const auto& s : signals) domain = std::max(domain, s.size());

  std::vector<double> out(domain, 0.0);
  for (std::size_t k = 0; k < signals.size(); ++k) {
    const Signal1D& s = signals[k];
    std::size_t period = s.size();
    if (s.size() < domain) {
      if (auto t = detect_period(s)) period = *t;
    }
    for (std::size_t i = 0; i < domain; ++i) out[i] += weights[k] * s[i % period];
  }
  return Signal1D(std::move(out));
}

std::optional<std::size_t> detect_period(const Signal1D& signal, double tol) {
  const std::size_t n = signal.size();
  if (n < 3) return std::nullopt;
  for (std::size_t period = 2; period < n; ++period) {
    bool match = true;
    for (std::size_t i = 0; i + period < n && match; ++i)
      match = std::abs(signal[i + period] - signal[i]) <= tol;
    if (match) return period;
  }
  return std::nullopt;
}

Signal1D make_quasi(const QuasiSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t period = spec.mode.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  // Strictly inside the ball so rounding never pushes a segment past sigma.
  std::uniform_real_distribution<double> radius(0.0, 0.999);

  std::vector<double> out;
  out.reserve(spec.domain);
  std::vector<double> direction(period);
  for (std::size_t length : spec.segmentation) {
    double norm = 0.0;
    for (double& d : direction) {
      d = gauss(rng);
      norm += d * d;
    }
    norm = std::sqrt(norm);
    const double scale = norm > 0.0 ? spec.sigma * radius(rng) / norm : 0.0;
    for (std::size_t j = 0; j < length; ++j) {
      const double jitter = scale * direction[j % period];
      out.push_back(spec.mode[j % period] + jitter);
    }
  }
  return Signal1D(std::move(out));
}

QuasiCheck verify_quasi(const Signal1D& signal, const QuasiSpec& spec) {
  spec.validate();
  require(signal.size() == spec.domain, "verify_quasi: segmentation does not cover the signal");
  const std::size_t period = spec.mode.size();
  const double limit = spec.sigma * spec.sigma;

  QuasiCheck check;
  check.quasi = true;
  std::size_t start = 0;
  for (std::size_t length : spec.segmentation) {
    double dev = 0.0;
    for (std::size_t j = 0; j < period; ++j) {
      const double d = signal[start + j] - spec.mode[j];
      dev += d * d;
    }
    check.deviations.push_back(dev);
    if (dev > limit) check.quasi = false;
    start += length;
  }
  return check;
}

QuasiBound composite_quasi_bound(std::span<const std::pair<Signal1D, QuasiSpec>> components,
                                 std::span<const double> weights, SegmentRange segment) {
  require(!components.empty(), "composite bound needs at least one component");
  require(components.size() == weights.size(), "composite bound: one weight per component");
  require(segment.end > segment.begin, "composite bound: empty segment");

  std::size_t window = segment.end - segment.begin;
  for (const auto& [signal, spec] : components) {
    require(segment.end <= signal.size(), "composite bound: segment out of range");
    window = std::min(window, spec.mode.size());
  }

  std::vector<double> deviation(window, 0.0);
  double weight_energy = 0.0;
  double spread = 0.0;
  for (std::size_t k = 0; k < components.size(); ++k) {
    const auto& [signal, spec] = components[k];
    const double beta = weights[k];
    weight_energy += beta * beta;
    for (std::size_t j = 0; j < window; ++j)
      deviation[j] += beta * (signal[segment.begin + j] - spec.mode[j]);
    double seg_norm = 0.0;
    for (std::size_t i = segment.begin; i < segment.end; ++i) seg_norm += signal[i] * signal[i];
    const double term = std::sqrt(seg_norm) + spec.sigma;
    spread += term * term;
  }

  QuasiBound out;
  for (double d : deviation) out.lhs += d * d;
  out.bound = weight_energy * spread;
  return out;
}

Matrix outer_2d(const Signal1D& row_signal, const Signal1D& col_signal) {
  Matrix m(row_signal.size(), col_signal.size());
  for (std::size_t i = 0; i < row_signal.size(); ++i)
    for (std::size_t j = 0; j < col_signal.size(); ++j) m(i, j) = row_signal[i] * col_signal[j];
  return m;
}

}  // namespace tbsd::signals
