#pragma once

#include "jhol/expr.hpp"

#include <memory>

namespace jhol::detail {

enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Sin, Cos, Exp, PowInt };

struct Node {
  Op op = Op::Const;
  double value = 0.0;  // Const
  int index = 0;       // Var slot, or PowInt exponent
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;

  static FieldExpr wrap(std::shared_ptr<const Node> n) { return FieldExpr(std::move(n)); }
  static const std::shared_ptr<const Node>& ptr(const FieldExpr& e) { return e.node_; }
};

} // namespace jhol::detail
