#pragma once

// Coefficient expressions for file-defined fields.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?
//   primary := number | variable | 'pi' | 'E'k | ('sin' | 'cos' | 'exp') '(' expr ')' | '(' expr ')'
//
// An expression is either real-valued or algebra-valued. Algebra-valued
// expressions are linear combinations of the basis names E1..Ek with real
// coefficient expressions, e.g. `sin(2*pi*x1)*E1 + 0.5*E2`. Types are checked
// when parsing: E1*E2, sin(E1), 1 + E1 and E1^2 are rejected.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "two_transport/lie_core.hpp"

namespace two_transport::expr {

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t column)
      : Error(what + " (column " + std::to_string(column + 1) + ")"), column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

namespace detail {

enum class Op { Number, Variable, Basis, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp };

struct Node {
  Op op;
  bool algebra = false;
  double value = 0;  // Number
  int index = 0;     // Variable or Basis slot
  std::unique_ptr<Node> a, b;
};

using NodePtr = std::unique_ptr<Node>;

inline NodePtr leaf(Op op, double value, int index, bool algebra) {
  auto n = std::make_unique<Node>();
  n->op = op;
  n->value = value;
  n->index = index;
  n->algebra = algebra;
  return n;
}

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& variables, int basis_size)
      : s_(text), vars_(variables), basis_(basis_size) {}

  NodePtr parse() {
    NodePtr n = expression();
    skip();
    if (pos_ < s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }
  [[noreturn]] void fail_at(const std::string& what, std::size_t at) const { throw ParseError(what, at); }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  static NodePtr binary(Op op, NodePtr a, NodePtr b, bool algebra) {
    auto n = std::make_unique<Node>();
    n->op = op;
    n->algebra = algebra;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  NodePtr expression() {
    NodePtr n = term();
    for (;;) {
      skip();
      const std::size_t at = pos_;
      Op op;
      if (accept('+')) op = Op::Add;
      else if (accept('-')) op = Op::Sub;
      else return n;
      NodePtr r = term();
      if (n->algebra != r->algebra) fail_at("cannot add a scalar and an algebra element", at);
      const bool alg = n->algebra;
      n = binary(op, std::move(n), std::move(r), alg);
    }
  }

  NodePtr term() {
    NodePtr n = unary();
    for (;;) {
      skip();
      const std::size_t at = pos_;
      if (accept('*')) {
        NodePtr r = unary();
        if (n->algebra && r->algebra) fail_at("product of two algebra elements", at);
        const bool alg = n->algebra || r->algebra;
        n = binary(Op::Mul, std::move(n), std::move(r), alg);
      } else if (accept('/')) {
        NodePtr r = unary();
        if (r->algebra) fail_at("division by an algebra element", at);
        const bool alg = n->algebra;
        n = binary(Op::Div, std::move(n), std::move(r), alg);
      } else {
        return n;
      }
    }
  }

  NodePtr unary() {
    if (accept('+')) return unary();
    if (accept('-')) {
      NodePtr a = unary();
      auto n = std::make_unique<Node>();
      n->op = Op::Neg;
      n->algebra = a->algebra;
      n->a = std::move(a);
      return n;
    }
    return power();
  }

  NodePtr power() {
    NodePtr n = primary();
    skip();
    const std::size_t at = pos_;
    if (accept('^')) {
      NodePtr r = unary();
      if (n->algebra || r->algebra) fail_at("powers of algebra elements are not defined", at);
      n = binary(Op::Pow, std::move(n), std::move(r), false);
    }
    return n;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
    if (accept('(')) {
      NodePtr n = expression();
      expect(')');
      return n;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::string rest(s_.substr(pos_));
    char* end = nullptr;
    const double v = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str()) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - rest.c_str());
    return leaf(Op::Number, v, 0, false);
  }

  NodePtr name() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string id(s_.substr(start, pos_ - start));
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i] == id) return leaf(Op::Variable, 0, static_cast<int>(i), false);
    if (id == "pi") return leaf(Op::Number, std::numbers::pi, 0, false);
    if (id == "sin" || id == "cos" || id == "exp") {
      expect('(');
      NodePtr arg = expression();
      expect(')');
      if (arg->algebra) fail_at(id + " of an algebra element", start);
      auto n = std::make_unique<Node>();
      n->op = id == "sin" ? Op::Sin : id == "cos" ? Op::Cos : Op::Exp;
      n->a = std::move(arg);
      return n;
    }
    if (id.size() > 1 && id[0] == 'E' &&
        id.find_first_not_of("0123456789", 1) == std::string::npos) {
      const int k = std::atoi(id.c_str() + 1);
      if (k < 1 || k > basis_)
        fail_at("basis element " + id + " out of range (algebra has " + std::to_string(basis_) + " basis elements)",
                start);
      return leaf(Op::Basis, 0, k - 1, true);
    }
    fail_at("unknown name '" + id + "'", start);
  }

  std::string_view s_;
  const std::vector<std::string>& vars_;
  int basis_;
  std::size_t pos_ = 0;
};

inline double scalar(const Node& n, const double* x) {
  switch (n.op) {
    case Op::Number: return n.value;
    case Op::Variable: return x[n.index];
    case Op::Neg: return -scalar(*n.a, x);
    case Op::Add: return scalar(*n.a, x) + scalar(*n.b, x);
    case Op::Sub: return scalar(*n.a, x) - scalar(*n.b, x);
    case Op::Mul: return scalar(*n.a, x) * scalar(*n.b, x);
    case Op::Div: return scalar(*n.a, x) / scalar(*n.b, x);
    case Op::Pow: return std::pow(scalar(*n.a, x), scalar(*n.b, x));
    case Op::Sin: return std::sin(scalar(*n.a, x));
    case Op::Cos: return std::cos(scalar(*n.a, x));
    case Op::Exp: return std::exp(scalar(*n.a, x));
    case Op::Basis: break;
  }
  throw Error("expression: scalar evaluation of an algebra term");
}

// Adds scale·n(x) to the coefficient vector; n is linear in the basis names.
inline void accumulate(const Node& n, const double* x, double scale, double* out) {
  switch (n.op) {
    case Op::Basis: out[n.index] += scale; return;
    case Op::Neg: accumulate(*n.a, x, -scale, out); return;
    case Op::Add:
      accumulate(*n.a, x, scale, out);
      accumulate(*n.b, x, scale, out);
      return;
    case Op::Sub:
      accumulate(*n.a, x, scale, out);
      accumulate(*n.b, x, -scale, out);
      return;
    case Op::Mul:
      if (n.a->algebra) accumulate(*n.a, x, scale * scalar(*n.b, x), out);
      else accumulate(*n.b, x, scale * scalar(*n.a, x), out);
      return;
    case Op::Div: accumulate(*n.a, x, scale / scalar(*n.b, x), out); return;
    default: break;
  }
  throw Error("expression: algebra evaluation of a scalar term");
}

}  // namespace detail

/// Parsed expression; cheap to copy, safe to evaluate concurrently.
class Expression {
 public:
  static Expression parse(std::string_view text, std::vector<std::string> variables, int basis_size = 0) {
    Expression e;
    e.text_ = std::string(text);
    e.arity_ = static_cast<int>(variables.size());
    e.basis_ = basis_size;
    e.root_ = detail::Parser(e.text_, variables, basis_size).parse();
    return e;
  }

  bool algebra_valued() const { return root_->algebra; }
  int arity() const { return arity_; }
  int basis_size() const { return basis_; }
  const std::string& text() const { return text_; }

  double scalar(const double* x) const {
    if (algebra_valued()) throw Error("expression '" + text_ + "' is algebra-valued");
    return detail::scalar(*root_, x);
  }

  /// Coordinates on the basis E1..Ek; a scalar expression has none.
  std::vector<double> coefficients(const double* x) const {
    if (!algebra_valued()) throw Error("expression '" + text_ + "' is scalar-valued");
    std::vector<double> out(basis_, 0.0);
    detail::accumulate(*root_, x, 1.0, out.data());
    return out;
  }

 private:
  Expression() = default;

  std::string text_;
  int arity_ = 0;
  int basis_ = 0;
  std::shared_ptr<const detail::Node> root_;
};

}  // namespace two_transport::expr
