#pragma once

// Separable B-spline bases and difference penalties for the smooth background.
//
// The background is modelled as C_bg = B_y * theta * B_x^T. Estimation is
// done per axis with the ridge smoothers H = B (B^T B + lambda R)^-1 B^T, so
// the (mn x mn) operator is never formed. The per-axis solve is the exact
// minimiser of
//
//   ||Z - B_y theta B_x^T||^2 + lambda * P(theta)
//   P(theta) = tr(G_y theta R_x theta^T) + tr(R_y theta G_x theta^T)
//              + lambda * tr(R_y theta R_x theta^T),      G = B^T B
//
// which is the Kronecker-sum penalty lambda(R_x (x) G_y + G_x (x) R_y) plus
// the lambda^2 cross term that makes the normal matrix factor per axis.

#include "tbsd/common.hpp"

namespace tbsd {

inline constexpr int kDefaultSplineDegree = 3;

// axis_length x (k + L - 1) collocation matrix of degree-L B-splines on a
// clamped uniform knot vector with k distinct knots spanning [0, axis_length-1].
Matrix build_bspline_basis(int axis_length, int k, int degree = kDefaultSplineDegree);

// R = D^T D with D the (p-1) x p first-difference matrix.
Matrix build_roughness(int p);

// Knot count giving one basis function per ~max(8, axis_length/12) pixels.
int default_knot_count(int axis_length, int degree = kDefaultSplineDegree);

struct SmoothBasis {
  Matrix bx;  // n x p_x (columns of the image)
  Matrix by;  // m x p_y (rows of the image)
  Matrix rx;
  Matrix ry;
  int degree = kDefaultSplineDegree;
  int knots_x = 0;
  int knots_y = 0;

  int rows() const { return static_cast<int>(by.rows()); }
  int cols() const { return static_cast<int>(bx.rows()); }
};

// knots <= 0 selects default_knot_count for that axis.
SmoothBasis make_smooth_basis(int rows, int cols, int knots_y = 0, int knots_x = 0,
                              int degree = kDefaultSplineDegree);

struct HatOperator {
  Matrix hx;  // n x n
  Matrix hy;  // m x m
  double lambda = 0.0;

  // H_y * c * H_x^T
  Matrix apply(const Matrix& c) const;
};

// Ridge projector for one axis. Uses Cholesky; with lambda == 0 and a
// rank-deficient basis the minimum-norm (pseudo-inverse) solution is used.
// Throws NumericalError if the normal matrix is singular for lambda > 0.
Matrix axis_hat(const Matrix& basis, const Matrix& roughness, double lambda);

HatOperator hat_operator(const SmoothBasis& basis, double lambda);

// theta = (B_y^T B_y + lambda R_y)^-1 B_y^T Z B_x (B_x^T B_x + lambda R_x)^-1
Matrix estimate_theta(const Matrix& y_minus_tex, const SmoothBasis& basis, double lambda);

Matrix reconstruct_background(const SmoothBasis& basis, const Matrix& theta);

// P(theta) above; the objective term is lambda * smooth_penalty(...).
double smooth_penalty(const SmoothBasis& basis, const Matrix& theta, double lambda);

}  // namespace tbsd
