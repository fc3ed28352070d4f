#include "expr_node.hpp"
#include "jhol/errors.hpp"
#include "jhol/expr.hpp"

namespace jhol {

using detail::Node;
using detail::Op;

namespace {

constexpr int kW0 = 0;
constexpr int kW1 = 1;
constexpr int kImagUnit = 2;

ComplexExpr cmul(const ComplexExpr& a, const ComplexExpr& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

ComplexExpr cpow(const ComplexExpr& a, int k) {
  if (k < 0) {
    const ComplexExpr p = cpow(a, -k);
    const FieldExpr den = p.re * p.re + p.im * p.im;
    return {p.re / den, -p.im / den};
  }
  ComplexExpr r{FieldExpr(1.0), FieldExpr(0.0)};
  ComplexExpr base = a;
  while (k) {
    if (k & 1) r = cmul(r, base);
    k >>= 1;
    if (k) base = cmul(base, base);
  }
  return r;
}

ComplexExpr lift(const Node* n) {
  auto A = [&] { return lift(n->a.get()); };
  auto B = [&] { return lift(n->b.get()); };
  switch (n->op) {
  case Op::Const: return {FieldExpr(n->value), FieldExpr(0.0)};
  case Op::Var:
    switch (n->index) {
    case kW0: return {FieldExpr::variable(0), FieldExpr::variable(1)};
    case kW1: return {FieldExpr::variable(2), FieldExpr::variable(3)};
    default: return {FieldExpr(0.0), FieldExpr(1.0)};
    }
  case Op::Neg: {
    const ComplexExpr a = A();
    return {-a.re, -a.im};
  }
  case Op::Add: {
    const ComplexExpr a = A(), b = B();
    return {a.re + b.re, a.im + b.im};
  }
  case Op::Sub: {
    const ComplexExpr a = A(), b = B();
    return {a.re - b.re, a.im - b.im};
  }
  case Op::Mul: return cmul(A(), B());
  case Op::Div: {
    const ComplexExpr a = A(), b = B();
    const FieldExpr den = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
  }
  case Op::Exp: {
    const ComplexExpr a = A();
    const FieldExpr m = exp(a.re);
    return {m * cos(a.im), m * sin(a.im)};
  }
  case Op::Sin: {
    // sin(a + ib) = sin a cosh b + i cos a sinh b
    const ComplexExpr a = A();
    const FieldExpr ep = exp(a.im), em = exp(-a.im);
    return {sin(a.re) * (ep + em) / 2.0, cos(a.re) * (ep - em) / 2.0};
  }
  case Op::Cos: {
    // cos(a + ib) = cos a cosh b - i sin a sinh b
    const ComplexExpr a = A();
    const FieldExpr ep = exp(a.im), em = exp(-a.im);
    return {cos(a.re) * (ep + em) / 2.0, -(sin(a.re) * (ep - em) / 2.0)};
  }
  case Op::PowInt: return cpow(A(), n->index);
  }
  return {};
}

} // namespace

ComplexExpr parse_complex(std::string_view text) {
  static const SymbolTable symbols{{"w0", kW0}, {"w1", kW1}, {"i", kImagUnit}};
  const FieldExpr tree = parse(text, symbols);
  return lift(tree.node());
}

} // namespace jhol
