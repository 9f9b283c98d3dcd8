#include "tbsd/smooth_basis.hpp"

#include "tbsd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace tbsd {

namespace {

std::vector<double> clamped_knots(double span, int k, int degree) {
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(k + 2 * degree));
  for (int i = 0; i < degree; ++i) knots.push_back(0.0);
  for (int i = 0; i < k; ++i) knots.push_back(span * i / (k - 1));
  for (int i = 0; i < degree; ++i) knots.push_back(span);
  return knots;
}

// Index s with knots[s] <= x < knots[s+1]; the right end maps to the last non-empty span.
int find_span(const std::vector<double>& knots, int basis_count, int degree, double x) {
  if (x >= knots[basis_count]) return basis_count - 1;
  auto it = std::upper_bound(knots.begin() + degree, knots.begin() + basis_count + 1, x);
  return static_cast<int>(it - knots.begin()) - 1;
}

// Non-zero basis functions N_{s-L..s}(x), Piegl & Tiller A2.2.
std::vector<double> basis_functions(const std::vector<double>& knots, int span, int degree, double x) {
  std::vector<double> n(degree + 1, 0.0), left(degree + 1), right(degree + 1);
  n[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[j] = x - knots[span + 1 - j];
    right[j] = knots[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = n[r] / (right[r + 1] + left[j - r]);
      n[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    n[j] = saved;
  }
  return n;
}

struct NormalSolver {
  Eigen::LLT<Matrix> llt;
  Matrix pinv;  // used only when the Cholesky route is unavailable
  bool use_pinv = false;

  NormalSolver(const Matrix& basis, const Matrix& roughness, double lambda) {
    require(lambda >= 0.0 && std::isfinite(lambda), "smoothing penalty must be >= 0");
    require(roughness.rows() == basis.cols() && roughness.cols() == basis.cols(),
            "roughness matrix does not match basis");
    const Matrix normal = basis.transpose() * basis + lambda * roughness;
    llt.compute(normal);
    if (llt.info() == Eigen::Success && llt.rcond() > 1e-13) return;
    if (lambda > 0.0) throw NumericalError("singular normal matrix B^T B + lambda R");
    pinv = Eigen::CompleteOrthogonalDecomposition<Matrix>(normal).pseudoInverse();
    use_pinv = true;
  }

  Matrix solve(const Matrix& rhs) const { return use_pinv ? Matrix(pinv * rhs) : Matrix(llt.solve(rhs)); }
};

}  // namespace

Matrix build_bspline_basis(int axis_length, int k, int degree) {
  require(degree >= 0, "spline degree must be >= 0");
  require(k >= 2, "knot count must be >= 2");
  const int p = k + degree - 1;
  require(axis_length >= degree + 1 && axis_length >= p,
          "too few pixels for the requested knot count");

  const auto knots = clamped_knots(static_cast<double>(axis_length - 1), k, degree);
  Matrix basis = Matrix::Zero(axis_length, p);
  for (int i = 0; i < axis_length; ++i) {
    const double x = static_cast<double>(i);
    const int span = find_span(knots, p, degree, x);
    const auto values = basis_functions(knots, span, degree, x);
    for (int j = 0; j <= degree; ++j) basis(i, span - degree + j) = values[j];
  }
  return basis;
}

Matrix build_roughness(int p) {
  require(p >= 2, "roughness matrix needs p >= 2");
  Matrix d = Matrix::Zero(p - 1, p);
  for (int i = 0; i + 1 < p; ++i) {
    d(i, i) = 1.0;
    d(i, i + 1) = -1.0;
  }
  return d.transpose() * d;
}

int default_knot_count(int axis_length, int degree) {
  const double spacing = std::max(8.0, axis_length / 12.0);
  const int p = std::max(degree + 1, static_cast<int>(std::lround(axis_length / spacing)));
  return std::max(2, p - degree + 1);
}

SmoothBasis make_smooth_basis(int rows, int cols, int knots_y, int knots_x, int degree) {
  SmoothBasis b;
  b.degree = degree;
  b.knots_y = knots_y > 0 ? knots_y : default_knot_count(rows, degree);
  b.knots_x = knots_x > 0 ? knots_x : default_knot_count(cols, degree);
  b.by = build_bspline_basis(rows, b.knots_y, degree);
  b.bx = build_bspline_basis(cols, b.knots_x, degree);
  b.ry = build_roughness(static_cast<int>(b.by.cols()));
  b.rx = build_roughness(static_cast<int>(b.bx.cols()));
  return b;
}

Matrix HatOperator::apply(const Matrix& c) const {
  require(c.rows() == hy.rows() && c.cols() == hx.rows(), "hat operator: dimension mismatch");
  return kernels::parallel::apply_smoother(hy, c, hx);
}

Matrix axis_hat(const Matrix& basis, const Matrix& roughness, double lambda) {
  const NormalSolver solver(basis, roughness, lambda);
  Matrix h = basis * solver.solve(basis.transpose());
  return 0.5 * (h + h.transpose());
}

HatOperator hat_operator(const SmoothBasis& basis, double lambda) {
  return HatOperator{axis_hat(basis.bx, basis.rx, lambda), axis_hat(basis.by, basis.ry, lambda), lambda};
}

Matrix estimate_theta(const Matrix& y_minus_tex, const SmoothBasis& basis, double lambda) {
  require(y_minus_tex.rows() == basis.rows() && y_minus_tex.cols() == basis.cols(),
          "estimate_theta: image does not match basis");
  const NormalSolver sy(basis.by, basis.ry, lambda);
  const NormalSolver sx(basis.bx, basis.rx, lambda);
  const Matrix left = sy.solve(basis.by.transpose() * y_minus_tex);  // p_y x n
  return sx.solve((left * basis.bx).transpose()).transpose();
}

Matrix reconstruct_background(const SmoothBasis& basis, const Matrix& theta) {
  require(theta.rows() == basis.by.cols() && theta.cols() == basis.bx.cols(),
          "theta does not match basis");
  return basis.by * theta * basis.bx.transpose();
}

double smooth_penalty(const SmoothBasis& basis, const Matrix& theta, double lambda) {
  const Matrix gx = basis.bx.transpose() * basis.bx;
  const Matrix gy = basis.by.transpose() * basis.by;
  const double row_term = (gy * theta * basis.rx * theta.transpose()).trace();
  const double col_term = (basis.ry * theta * gx * theta.transpose()).trace();
  const double cross = (basis.ry * theta * basis.rx * theta.transpose()).trace();
  return row_term + col_term + lambda * cross;
}

}  // namespace tbsd
