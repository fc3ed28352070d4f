#pragma once

#include "jhol/expr.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

namespace jhol {

using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;

// Axis-aligned coordinate box in R^4.
struct Box {
  Point4 lo{-1.0, -1.0, -1.0, -1.0};
  Point4 hi{1.0, 1.0, 1.0, 1.0};

  bool contains(const Point4& x, double slack = 1e-12) const;
  double max_side() const;
};

// Sampling used by every pointwise validation: a uniform grid with
// `per_axis` nodes along each axis plus `random_points` uniform samples.
struct GridSpec {
  int per_axis = 17;
  int random_points = 1000;
  std::uint64_t seed = 0;
};

std::vector<Point4> validation_points(const Box& box, const GridSpec& grid);

// Largest residual found by a grid validation and where it occurred.
struct GridCheck {
  double max_residual = 0.0;
  Point4 worst{};
};

// The standard structure J0 on R^4 = C^2 (w0 = x1 + i x2, w1 = x3 + i x4):
// multiplication by i, so J0 d/dx1 = d/dx2 and J0 d/dx3 = d/dx4.
Mat4 standard_j();

// Field of 4x4 matrices J(x) acting on tangent vectors, with J^2 = -I.
class AlmostComplexStructure {
public:
  AlmostComplexStructure(std::array<FieldExpr, 16> entries, Box box);

  static AlmostComplexStructure standard(const Box& box = {});
  // Constant structure P J0 P^{-1}.
  static AlmostComplexStructure conjugated(const Mat4& P, const Box& box = {});

  Mat4 at(const Point4& x) const;
  // d J / d x_{var+1} at x (exact).
  Mat4 derivative(const Point4& x, int var) const;
  const FieldExpr& entry(int i, int j) const { return entries_[static_cast<std::size_t>(4 * i + j)]; }
  const Box& box() const { return box_; }

  // max over sampled points of |J^2 + I|_inf.
  GridCheck square_residual(const GridSpec& grid) const;
  // Throws ValidationError when square_residual exceeds tol.
  void validate(const GridSpec& grid, double tol = 1e-9) const;

private:
  struct Tapes;
  std::array<FieldExpr, 16> entries_;
  Box box_;
  std::shared_ptr<Tapes> tapes_;
};

// Real 2-form with structurally antisymmetric storage: coefficients of
// dx^i ^ dx^j for i < j in the order 12, 13, 14, 23, 24, 34.
class TwoForm {
public:
  TwoForm() = default;
  TwoForm(std::array<FieldExpr, 6> coefficients, Box box = {});

  // Constant form from the upper triangle of a (skew) matrix.
  static TwoForm constant(const Mat4& m, const Box& box = {});
  // c dx_i ^ dx_j with 1-based i != j.
  static TwoForm basis(int i, int j, double c = 1.0, const Box& box = {});

  // Coefficient alpha(d_i, d_j) with 0-based indices, sign-adjusted.
  FieldExpr coefficient(int i, int j) const;
  const std::array<FieldExpr, 6>& coefficients() const { return c_; }
  const Box& box() const { return box_; }

  // Skew matrix of the form at x.
  Mat4 at(const Point4& x) const;
  // d alpha / d x_{var+1} at x, as a skew matrix.
  Mat4 derivative(const Point4& x, int var) const;

  TwoForm operator+(const TwoForm& o) const;
  TwoForm operator-(const TwoForm& o) const;
  TwoForm operator*(const FieldExpr& s) const;

  static int slot(int i, int j);  // 0-based i < j -> storage slot

private:
  struct Tapes;
  const Tapes& tapes() const;
  std::array<FieldExpr, 6> c_{};
  Box box_{};
  std::shared_ptr<Tapes> tapes_;
};

// Symmetric metric g(x) with 10 stored entries.
class Metric {
public:
  Metric(std::array<FieldExpr, 10> entries, Box box = {});
  static Metric euclidean(const Box& box = {});

  Mat4 at(const Point4& x) const;
  const Box& box() const { return box_; }
  // Smallest eigenvalue over the sampled points.
  GridCheck min_eigenvalue(const GridSpec& grid) const;

private:
  std::array<FieldExpr, 10> e_;
  Box box_;
};

// Pointwise algebra on skew matrices.
Mat4 pullback_matrix(const Mat4& alpha, const Mat4& J);           // J^T alpha J
Mat4 j_anti_matrix(const Mat4& beta, const Mat4& J);              // J^T beta
Mat4 hodge_star(const Mat4& alpha, const Mat4& g);
double form_norm(const Mat4& alpha);                             // sqrt(1/2 sum_{i<j} a_ij^2)
double pfaffian(const Mat4& alpha);                              // alpha ^ alpha = 2 Pf vol

// Matrix of (u, v) -> alpha(Ju, Jv) at x. Throws ValidationError outside
// the domain box.
Mat4 pullback_by_J(const TwoForm& alpha, const AlmostComplexStructure& J, const Point4& x);

// Field-level alpha(J., J.).
TwoForm pullback_form(const TwoForm& alpha, const AlmostComplexStructure& J);

struct FormSplit {
  TwoForm invariant;       // alpha^+
  TwoForm anti_invariant;  // alpha^-
};

// alpha^{+/-} = (alpha +/- alpha(J., J.)) / 2.
FormSplit split_form(const TwoForm& alpha, const AlmostComplexStructure& J);

// Max over sampled points of |beta(J., J.) + beta|_inf.
GridCheck anti_invariance_residual(const TwoForm& beta, const AlmostComplexStructure& J,
                                   const GridSpec& grid);

// The complex structure of Lambda_J^-: (J beta)(X, Y) = beta(JX, Y), i.e.
// the matrix J^T beta. Throws ValidationError if beta is not
// anti-invariant to tol on the grid.
TwoForm apply_J_anti(const TwoForm& beta, const AlmostComplexStructure& J,
                     const GridSpec& grid = {}, double tol = 1e-9);

// g(u, v) = Omega(u, J v). Throws ValidationError when the result is not
// symmetric or not positive definite on the grid.
Metric compatible_metric(const AlmostComplexStructure& J, const TwoForm& omega,
                         const GridSpec& grid = {}, double tol = 1e-9);

Mat4 hodge_star(const TwoForm& alpha, const Metric& g, const Point4& x);

// Coefficients of d alpha on dx^{123}, dx^{124}, dx^{134}, dx^{234}.
using ThreeForm = std::array<FieldExpr, 4>;
ThreeForm exterior_derivative(const TwoForm& alpha);
// Max |d alpha| over sampled points.
GridCheck closedness_residual(const TwoForm& alpha, const GridSpec& grid);

// True iff alpha ^ alpha vanishes at x, i.e. sqrt|Pf| <= tol.
bool degeneracy_check(const TwoForm& alpha, const Point4& x, double tol = 1e-9);
// True iff |alpha(x)| <= tol.
bool vanishes_at(const TwoForm& alpha, const Point4& x, double tol = 1e-9);

// alpha = Re[h dw0 ^ dw1] for a complex expression h(w0, w1).
TwoForm re_holomorphic_form(const ComplexExpr& h, const Box& box = {});

} // namespace jhol
