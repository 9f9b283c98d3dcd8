#pragma once

// Discrete periodic and quasi-periodic signal sets.
//
// These are the 1D building blocks behind texture modelling: a periodic
// signal repeats a mode exactly, a quasi-periodic one repeats it over a
// segmentation of varying lengths with every segment staying within an
// l2-ball of radius sigma around the mode.

#include "tbsd/common.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace tbsd::signals {

class Signal1D {
 public:
  Signal1D() = default;
  explicit Signal1D(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::span<const double> view() const { return values_; }

  friend bool operator==(const Signal1D&, const Signal1D&) = default;

 private:
  std::vector<double> values_;
};

struct PeriodicSpec {
  Signal1D mode;       // period T = mode.size()
  std::size_t domain;  // n
};

struct QuasiSpec {
  Signal1D mode;                          // length T
  std::vector<std::size_t> segmentation;  // t_1..t_M, sum = domain
  double sigma = 0.0;                     // control limit
  std::size_t domain = 0;                 // n

  void validate() const;
};

// Raises InvalidArgument unless 1 < T < n.
Signal1D make_periodic(const PeriodicSpec& spec);

// Weighted pointwise sum on the common domain N = max n_k. Shorter signals are
// continued by their own periodic extension (minimal detected period, or the
// whole signal when aperiodic).
Signal1D compose(std::span<const Signal1D> signals, std::span<const double> weights);

inline constexpr double kDefaultPeriodTolerance = 1e-9;

// Smallest T in (1, n) with max_i |s[i+T] - s[i]| <= tol.
std::optional<std::size_t> detect_period(const Signal1D& signal,
                                         double tol = kDefaultPeriodTolerance);

// Each segment is the mode continued periodically to the segment length plus a
// seeded perturbation whose l2-norm on the compared window stays below sigma.
Signal1D make_quasi(const QuasiSpec& spec, std::uint64_t seed);

struct QuasiCheck {
  bool quasi = false;
  std::vector<double> deviations;  // ||segment[:T] - mode||^2 per segment
};

// Compares the mode against the first T entries of each segment.
QuasiCheck verify_quasi(const Signal1D& signal, const QuasiSpec& spec);

struct SegmentRange {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
};

struct QuasiBound {
  double lhs = 0.0;
  double bound = 0.0;
};

// Squared deviation of the weighted composite on a shared quasi segment, and
// the Cauchy-Schwarz bound (sum beta^2) * sum_k (||S_k on segment|| + sigma_k)^2.
// The composite is compared over the first min_k T_k entries of the segment.
QuasiBound composite_quasi_bound(std::span<const std::pair<Signal1D, QuasiSpec>> components,
                                 std::span<const double> weights, SegmentRange shared_segment);

// M(i, j) = row_signal[i] * col_signal[j]
Matrix outer_2d(const Signal1D& row_signal, const Signal1D& col_signal);

}  // namespace tbsd::signals
