#pragma once

#include <array>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace jhol {

// A point of the coordinate domain (x1, x2, x3, x4).
using Point4 = std::array<double, 4>;

namespace detail {
struct Node;
}

// Immutable scalar expression over the coordinates x1..x4.
//
// Trees are shared and never mutated, so copies are cheap and evaluation is
// safe from any number of threads. Derivatives are exact symbolic trees.
// Construction folds constants (0*e -> 0, 1*e -> e, c1+c2 -> c) but does no
// further simplification.
class FieldExpr {
public:
  FieldExpr();  // the constant 0
  FieldExpr(double constant);  // NOLINT(implicit)

  static FieldExpr constant(double c);
  // Coordinate x_{index+1}; index in [0, 4).
  static FieldExpr variable(int index);

  double eval(std::span<const double> x) const;
  double operator()(const Point4& x) const { return eval(x); }

  // Exact partial derivative with respect to x_{index+1}.
  FieldExpr diff(int index) const;

  // Pretty-printed text that re-parses to an evaluation-equivalent tree.
  std::string str() const;

  bool is_constant() const;
  // Value of a constant tree; only meaningful when is_constant().
  double constant_value() const;
  std::size_t node_count() const;

  friend FieldExpr operator+(const FieldExpr& a, const FieldExpr& b);
  friend FieldExpr operator-(const FieldExpr& a, const FieldExpr& b);
  friend FieldExpr operator*(const FieldExpr& a, const FieldExpr& b);
  friend FieldExpr operator/(const FieldExpr& a, const FieldExpr& b);
  friend FieldExpr operator-(const FieldExpr& a);

  friend FieldExpr sin(const FieldExpr& a);
  friend FieldExpr cos(const FieldExpr& a);
  friend FieldExpr exp(const FieldExpr& a);
  friend FieldExpr pow(const FieldExpr& a, int n);

  FieldExpr& operator+=(const FieldExpr& o) { return *this = *this + o; }
  FieldExpr& operator-=(const FieldExpr& o) { return *this = *this - o; }
  FieldExpr& operator*=(const FieldExpr& o) { return *this = *this * o; }

  const detail::Node* node() const { return node_.get(); }

private:
  explicit FieldExpr(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}
  friend struct detail::Node;
  std::shared_ptr<const detail::Node> node_;
};

// Flat evaluation program for several trees at once; shared subtrees are
// evaluated once per call.
class ExprTape {
public:
  ExprTape() = default;
  explicit ExprTape(std::span<const FieldExpr> exprs);

  void eval(std::span<const double> x, double* out) const;
  std::size_t outputs() const { return out_.size(); }
  std::size_t instructions() const { return code_.size(); }

private:
  struct Ins {
    int op = 0;
    int a = -1;
    int b = -1;
    int k = 0;
    double v = 0.0;
  };
  std::vector<Ins> code_;
  std::vector<int> out_;
};

// Maps identifier text to a variable slot. The default table is x1..x4.
using SymbolTable = std::map<std::string, int, std::less<>>;

const SymbolTable& default_symbols();

// Parses `text` with standard precedence, parentheses, unary minus and the
// functions sin, cos, exp, pow(e, integer). `pi` is a named constant.
// Throws ParseError with the byte offset of the first offending token.
FieldExpr parse(std::string_view text, const SymbolTable& symbols = default_symbols());

// d/dx_{var} with var in 1..4.
FieldExpr differentiate(const FieldExpr& e, int var);

// A complex-valued expression as a (re, im) pair of real trees.
struct ComplexExpr {
  FieldExpr re;
  FieldExpr im;
};

// Parses a complex expression in w0 = x1 + i x2, w1 = x3 + i x4 and the
// imaginary unit `i`, returning real and imaginary parts over x1..x4.
ComplexExpr parse_complex(std::string_view text);

} // namespace jhol
