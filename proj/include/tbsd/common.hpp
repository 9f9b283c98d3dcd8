#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace tbsd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Binary pixel masks (defects, ground truth). Row = image row, col = image column.
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct Pixel {
  int row = 0;
  int col = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

struct Point2 {
  double x = 0.0;  // column axis
  double y = 0.0;  // row axis
};

// Bad arguments or violated preconditions of a pipeline stage.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical stage could not proceed (singular system, empty basis, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable or unwritable files, malformed file contents.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace tbsd
