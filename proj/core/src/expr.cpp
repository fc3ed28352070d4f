#include "jhol/expr.hpp"

#include "expr_node.hpp"
#include "jhol/errors.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace jhol {

using detail::Node;
using detail::Op;
using NodePtr = std::shared_ptr<const Node>;

namespace {

NodePtr make_const(double c) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = c;
  return n;
}

NodePtr make_node(Op op, NodePtr a, NodePtr b = nullptr, int index = 0) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  n->index = index;
  return n;
}

bool is_const(const NodePtr& n, double v) { return n->op == Op::Const && n->value == v; }

double eval_node(const Node* n, std::span<const double> x) {
  switch (n->op) {
  case Op::Const: return n->value;
  case Op::Var: return x[static_cast<std::size_t>(n->index)];
  case Op::Neg: return -eval_node(n->a.get(), x);
  case Op::Add: return eval_node(n->a.get(), x) + eval_node(n->b.get(), x);
  case Op::Sub: return eval_node(n->a.get(), x) - eval_node(n->b.get(), x);
  case Op::Mul: return eval_node(n->a.get(), x) * eval_node(n->b.get(), x);
  case Op::Div: return eval_node(n->a.get(), x) / eval_node(n->b.get(), x);
  case Op::Sin: return std::sin(eval_node(n->a.get(), x));
  case Op::Cos: return std::cos(eval_node(n->a.get(), x));
  case Op::Exp: return std::exp(eval_node(n->a.get(), x));
  case Op::PowInt: {
    const double base = eval_node(n->a.get(), x);
    int k = n->index;
    if (k == 0) return 1.0;
    const bool inv = k < 0;
    if (inv) k = -k;
    double r = 1.0, p = base;
    while (k) {
      if (k & 1) r *= p;
      p *= p;
      k >>= 1;
    }
    return inv ? 1.0 / r : r;
  }
  }
  return 0.0;
}

std::size_t count_nodes(const Node* n) {
  if (!n) return 0;
  return 1 + count_nodes(n->a.get()) + count_nodes(n->b.get());
}

int precedence(const Node* n) {
  switch (n->op) {
  case Op::Add:
  case Op::Sub: return 1;
  case Op::Mul:
  case Op::Div: return 2;
  case Op::Neg: return 3;
  case Op::Const: return n->value < 0 ? 3 : 5;
  default: return 5;
  }
}

void print(std::ostream& os, const Node* n);

void print_child(std::ostream& os, const Node* c, int min_prec) {
  if (precedence(c) < min_prec) {
    os << '(';
    print(os, c);
    os << ')';
  } else {
    print(os, c);
  }
}

void print(std::ostream& os, const Node* n) {
  switch (n->op) {
  case Op::Const: os << n->value; return;
  case Op::Var: os << 'x' << (n->index + 1); return;
  case Op::Neg: os << '-'; print_child(os, n->a.get(), 4); return;
  case Op::Add: print_child(os, n->a.get(), 1); os << " + "; print_child(os, n->b.get(), 2); return;
  case Op::Sub: print_child(os, n->a.get(), 1); os << " - "; print_child(os, n->b.get(), 2); return;
  case Op::Mul: print_child(os, n->a.get(), 2); os << '*'; print_child(os, n->b.get(), 3); return;
  case Op::Div: print_child(os, n->a.get(), 2); os << '/'; print_child(os, n->b.get(), 3); return;
  case Op::Sin: os << "sin("; print(os, n->a.get()); os << ')'; return;
  case Op::Cos: os << "cos("; print(os, n->a.get()); os << ')'; return;
  case Op::Exp: os << "exp("; print(os, n->a.get()); os << ')'; return;
  case Op::PowInt: os << "pow("; print(os, n->a.get()); os << ", " << n->index << ')'; return;
  }
}

} // namespace

ExprTape::ExprTape(std::span<const FieldExpr> exprs) {
  std::unordered_map<const Node*, int> seen;
  std::vector<std::pair<const Node*, bool>> stack;
  for (const FieldExpr& e : exprs) {
    stack.emplace_back(e.node(), false);
    while (!stack.empty()) {
      auto [n, expanded] = stack.back();
      stack.pop_back();
      if (seen.count(n)) continue;
      if (!expanded) {
        stack.emplace_back(n, true);
        if (n->b && !seen.count(n->b.get())) stack.emplace_back(n->b.get(), false);
        if (n->a && !seen.count(n->a.get())) stack.emplace_back(n->a.get(), false);
        continue;
      }
      Ins ins;
      ins.op = static_cast<int>(n->op);
      ins.a = n->a ? seen.at(n->a.get()) : -1;
      ins.b = n->b ? seen.at(n->b.get()) : -1;
      ins.k = n->index;
      ins.v = n->value;
      seen.emplace(n, static_cast<int>(code_.size()));
      code_.push_back(ins);
    }
    out_.push_back(seen.at(e.node()));
  }
}

void ExprTape::eval(std::span<const double> x, double* out) const {
  thread_local std::vector<double> reg;
  reg.resize(code_.size());
  for (std::size_t i = 0; i < code_.size(); ++i) {
    const Ins& c = code_[i];
    const double a = c.a >= 0 ? reg[static_cast<std::size_t>(c.a)] : 0.0;
    const double b = c.b >= 0 ? reg[static_cast<std::size_t>(c.b)] : 0.0;
    double r = 0.0;
    switch (static_cast<Op>(c.op)) {
    case Op::Const: r = c.v; break;
    case Op::Var: r = x[static_cast<std::size_t>(c.k)]; break;
    case Op::Neg: r = -a; break;
    case Op::Add: r = a + b; break;
    case Op::Sub: r = a - b; break;
    case Op::Mul: r = a * b; break;
    case Op::Div: r = a / b; break;
    case Op::Sin: r = std::sin(a); break;
    case Op::Cos: r = std::cos(a); break;
    case Op::Exp: r = std::exp(a); break;
    case Op::PowInt: {
      int k = c.k;
      const bool inv = k < 0;
      if (inv) k = -k;
      double acc = 1.0, p = a;
      while (k) {
        if (k & 1) acc *= p;
        p *= p;
        k >>= 1;
      }
      r = inv ? 1.0 / acc : acc;
      break;
    }
    }
    reg[i] = r;
  }
  for (std::size_t i = 0; i < out_.size(); ++i) out[i] = reg[static_cast<std::size_t>(out_[i])];
}

FieldExpr::FieldExpr() : node_(make_const(0.0)) {}
FieldExpr::FieldExpr(double constant) : node_(make_const(constant)) {}

FieldExpr FieldExpr::constant(double c) { return FieldExpr(c); }

FieldExpr FieldExpr::variable(int index) {
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->index = index;
  return FieldExpr(NodePtr(n));
}

double FieldExpr::eval(std::span<const double> x) const { return eval_node(node_.get(), x); }

bool FieldExpr::is_constant() const { return node_->op == Op::Const; }
double FieldExpr::constant_value() const { return node_->value; }
std::size_t FieldExpr::node_count() const { return count_nodes(node_.get()); }

std::string FieldExpr::str() const {
  std::ostringstream os;
  os.precision(17);
  print(os, node_.get());
  return os.str();
}

FieldExpr operator+(const FieldExpr& a, const FieldExpr& b) {
  const auto& x = a.node_;
  const auto& y = b.node_;
  if (x->op == Op::Const && y->op == Op::Const) return FieldExpr(x->value + y->value);
  if (is_const(x, 0.0)) return b;
  if (is_const(y, 0.0)) return a;
  return FieldExpr(make_node(Op::Add, x, y));
}

FieldExpr operator-(const FieldExpr& a, const FieldExpr& b) {
  const auto& x = a.node_;
  const auto& y = b.node_;
  if (x->op == Op::Const && y->op == Op::Const) return FieldExpr(x->value - y->value);
  if (is_const(y, 0.0)) return a;
  if (is_const(x, 0.0)) return -b;
  return FieldExpr(make_node(Op::Sub, x, y));
}

FieldExpr operator*(const FieldExpr& a, const FieldExpr& b) {
  const auto& x = a.node_;
  const auto& y = b.node_;
  if (x->op == Op::Const && y->op == Op::Const) return FieldExpr(x->value * y->value);
  if (is_const(x, 0.0) || is_const(y, 0.0)) return FieldExpr(0.0);
  if (is_const(x, 1.0)) return b;
  if (is_const(y, 1.0)) return a;
  if (is_const(x, -1.0)) return -b;
  if (is_const(y, -1.0)) return -a;
  return FieldExpr(make_node(Op::Mul, x, y));
}

FieldExpr operator/(const FieldExpr& a, const FieldExpr& b) {
  const auto& x = a.node_;
  const auto& y = b.node_;
  if (x->op == Op::Const && y->op == Op::Const && y->value != 0.0)
    return FieldExpr(x->value / y->value);
  if (is_const(x, 0.0)) return FieldExpr(0.0);
  if (is_const(y, 1.0)) return a;
  return FieldExpr(make_node(Op::Div, x, y));
}

FieldExpr operator-(const FieldExpr& a) {
  const auto& x = a.node_;
  if (x->op == Op::Const) return FieldExpr(-x->value);
  if (x->op == Op::Neg) return FieldExpr(x->a);
  return FieldExpr(make_node(Op::Neg, x));
}

FieldExpr sin(const FieldExpr& a) {
  if (a.is_constant()) return FieldExpr(std::sin(a.constant_value()));
  return FieldExpr(make_node(Op::Sin, a.node_));
}

FieldExpr cos(const FieldExpr& a) {
  if (a.is_constant()) return FieldExpr(std::cos(a.constant_value()));
  return FieldExpr(make_node(Op::Cos, a.node_));
}

FieldExpr exp(const FieldExpr& a) {
  if (a.is_constant()) return FieldExpr(std::exp(a.constant_value()));
  return FieldExpr(make_node(Op::Exp, a.node_));
}

FieldExpr pow(const FieldExpr& a, int n) {
  if (n == 0) return FieldExpr(1.0);
  if (n == 1) return a;
  if (a.is_constant()) {
    const double v = a.constant_value();
    return FieldExpr(std::pow(v, n));
  }
  return FieldExpr(make_node(Op::PowInt, a.node_, nullptr, n));
}

FieldExpr FieldExpr::diff(int index) const {
  const Node* n = node_.get();
  auto A = [&] { return FieldExpr(n->a); };
  auto B = [&] { return FieldExpr(n->b); };
  switch (n->op) {
  case Op::Const: return FieldExpr(0.0);
  case Op::Var: return FieldExpr(n->index == index ? 1.0 : 0.0);
  case Op::Neg: return -A().diff(index);
  case Op::Add: return A().diff(index) + B().diff(index);
  case Op::Sub: return A().diff(index) - B().diff(index);
  case Op::Mul: return A().diff(index) * B() + A() * B().diff(index);
  case Op::Div: {
    const FieldExpr u = A(), v = B();
    return (u.diff(index) * v - u * v.diff(index)) / pow(v, 2);
  }
  case Op::Sin: return cos(A()) * A().diff(index);
  case Op::Cos: return -(sin(A()) * A().diff(index));
  case Op::Exp: return *this * A().diff(index);
  case Op::PowInt: {
    const int k = n->index;
    return FieldExpr(static_cast<double>(k)) * pow(A(), k - 1) * A().diff(index);
  }
  }
  return FieldExpr(0.0);
}

FieldExpr differentiate(const FieldExpr& e, int var) { return e.diff(var - 1); }

const SymbolTable& default_symbols() {
  static const SymbolTable table{{"x1", 0}, {"x2", 1}, {"x3", 2}, {"x4", 3}};
  return table;
}

namespace {

class Parser {
public:
  Parser(std::string_view text, const SymbolTable& symbols) : s_(text), symbols_(symbols) {}

  FieldExpr run() {
    FieldExpr e = expression();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected character");
    return e;
  }

private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError("syntax error: " + msg, pos_); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  FieldExpr expression() {
    FieldExpr lhs = term();
    for (;;) {
      if (accept('+')) lhs = lhs + term();
      else if (accept('-')) lhs = lhs - term();
      else return lhs;
    }
  }

  FieldExpr term() {
    FieldExpr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = lhs * unary();
      else if (accept('/')) lhs = lhs / unary();
      else return lhs;
    }
  }

  FieldExpr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  FieldExpr power() {
    FieldExpr base = primary();
    if (accept('^')) return pow(base, integer_literal());
    return base;
  }

  int integer_literal() {
    skip_ws();
    const std::size_t start = pos_;
    bool neg = false;
    if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
      neg = s_[pos_] == '-';
      ++pos_;
    }
    int value = 0;
    auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), value);
    if (ec != std::errc() || ptr == s_.data() + pos_) {
      pos_ = start;
      fail("expected integer exponent");
    }
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    if (pos_ < s_.size() && (s_[pos_] == '.' || s_[pos_] == 'e' || s_[pos_] == 'E'))
      fail("exponent must be an integer");
    return neg ? -value : value;
  }

  FieldExpr primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      FieldExpr e = expression();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected character");
  }

  FieldExpr number() {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc()) fail("malformed number");
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return FieldExpr(v);
  }

  FieldExpr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    const std::string_view name = s_.substr(start, pos_ - start);
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      ++pos_;
      if (name == "sin" || name == "cos" || name == "exp") {
        FieldExpr arg = expression();
        expect(')');
        if (name == "sin") return sin(arg);
        if (name == "cos") return cos(arg);
        return exp(arg);
      }
      if (name == "pow") {
        FieldExpr base = expression();
        expect(',');
        const int k = integer_literal();
        expect(')');
        return pow(base, k);
      }
      pos_ = start;
      throw ParseError("unknown function '" + std::string(name) + "'", start);
    }
    if (name == "pi") return FieldExpr(std::numbers::pi);
    if (auto it = symbols_.find(name); it != symbols_.end()) return FieldExpr::variable(it->second);
    throw ParseError("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view s_;
  const SymbolTable& symbols_;
  std::size_t pos_ = 0;
};

} // namespace

FieldExpr parse(std::string_view text, const SymbolTable& symbols) {
  return Parser(text, symbols).run();
}

} // namespace jhol
