#include "satctl/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <type_traits>

namespace satctl {

struct Expr::Node {
  enum class Op { kConst, kTime, kState, kAdd, kSub, kMul, kDiv, kPow, kNeg, kSin, kCos };

  Op op;
  double value = 0.0;  // kConst
  int index = 0;       // kState: 1-based state index; kPow: exponent
  std::shared_ptr<const Node> a, b;

  template <class T>
  T eval(std::span<const T> x, const T& t) const {
    switch (op) {
      case Op::kConst:
        if constexpr (std::is_same_v<T, double>)
          return value;
        else
          return Jet::constant(value, t.order());
      case Op::kTime:
        return t;
      case Op::kState:
        return x[static_cast<size_t>(index) - 1];
      case Op::kAdd:
        return a->eval(x, t) + b->eval(x, t);
      case Op::kSub:
        return a->eval(x, t) - b->eval(x, t);
      case Op::kMul:
        return a->eval(x, t) * b->eval(x, t);
      case Op::kDiv:
        return a->eval(x, t) / b->eval(x, t);
      case Op::kPow:
        return pow_int(a->eval(x, t), index);
      case Op::kNeg:
        return -a->eval(x, t);
      case Op::kSin:
        if constexpr (std::is_same_v<T, double>)
          return std::sin(a->eval(x, t));
        else
          return sin(a->eval(x, t));
      case Op::kCos:
        if constexpr (std::is_same_v<T, double>)
          return std::cos(a->eval(x, t));
        else
          return cos(a->eval(x, t));
    }
    throw ConfigError("expression: corrupt node");
  }

  void scan(int& max_state, bool& uses_time) const {
    if (op == Op::kState && index > max_state) max_state = index;
    if (op == Op::kTime) uses_time = true;
    if (a) a->scan(max_state, uses_time);
    if (b) b->scan(max_state, uses_time);
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;
using Op = Expr::Node::Op;

std::shared_ptr<Expr::Node> make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

// Recursive-descent parser for
//   expr    := term (('+'|'-') term)*
//   term    := factor (('*'|'/') factor)*
//   factor  := '-' factor | primary ('^' integer)*
//   primary := number | 't' | 'x' digits | ('sin'|'cos') '(' expr ')' | '(' expr ')'
struct Parser {
  const std::string& s;
  size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("expression parse error at position " + std::to_string(pos) +
                      " in \"" + s + "\": " + msg);
  }

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (eat('+'))
        lhs = make(Op::kAdd, lhs, parse_term());
      else if (eat('-'))
        lhs = make(Op::kSub, lhs, parse_term());
      else
        return lhs;
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_factor();
    for (;;) {
      if (eat('*'))
        lhs = make(Op::kMul, lhs, parse_factor());
      else if (eat('/'))
        lhs = make(Op::kDiv, lhs, parse_factor());
      else
        return lhs;
    }
  }

  NodePtr parse_factor() {
    if (eat('-')) return make(Op::kNeg, parse_factor());
    NodePtr base = parse_primary();
    while (eat('^')) {
      skip_ws();
      size_t start = pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      if (pos == start) fail("expected a nonnegative integer exponent after '^'");
      int expo = std::atoi(s.substr(start, pos - start).c_str());
      if (expo > 16) fail("exponent too large (max 16)");
      auto n = make(Op::kPow, base);
      n->index = expo;
      base = n;
    }
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos >= s.size()) fail("unexpected end of expression");
    char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    if (eat('(')) {
      NodePtr inner = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr parse_number() {
    const char* begin = s.c_str() + pos;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos += static_cast<size_t>(end - begin);
    auto n = make(Op::kConst);
    n->value = v;
    return n;
  }

  NodePtr parse_ident() {
    size_t start = pos;
    while (pos < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
      ++pos;
    std::string name = s.substr(start, pos - start);
    if (name == "t") return make(Op::kTime);
    if (name == "sin" || name == "cos") {
      if (!eat('(')) fail("expected '(' after " + name);
      NodePtr arg = parse_expr();
      if (!eat(')')) fail("expected ')' closing " + name);
      return make(name == "sin" ? Op::kSin : Op::kCos, arg);
    }
    if (name.size() >= 2 && name[0] == 'x') {
      bool digits = true;
      for (size_t i = 1; i < name.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
      if (digits) {
        int idx = std::atoi(name.c_str() + 1);
        if (idx < 1) fail("state index must be >= 1");
        auto n = make(Op::kState);
        n->index = idx;
        return n;
      }
    }
    pos = start;
    fail("unknown identifier \"" + name + "\"");
  }
};

}  // namespace

Expr Expr::parse(const std::string& text) {
  Parser p{text};
  NodePtr root = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  Expr e;
  e.root_ = std::move(root);
  e.text_ = text;
  e.root_->scan(e.max_state_, e.uses_time_);
  return e;
}

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->op = Node::Op::kConst;
  n->value = value;
  Expr e;
  e.root_ = std::move(n);
  e.text_ = "<const>";
  return e;
}

double Expr::eval(std::span<const double> x, double t) const {
  if (!root_) throw ConfigError("evaluating an empty expression");
  if (max_state_ > static_cast<int>(x.size()))
    throw ConfigError("expression \"" + text_ + "\" references x" +
                      std::to_string(max_state_) + " but only " +
                      std::to_string(x.size()) + " states were supplied");
  return root_->eval<double>(x, t);
}

Jet Expr::eval(std::span<const Jet> x, const Jet& t) const {
  if (!root_) throw ConfigError("evaluating an empty expression");
  if (max_state_ > static_cast<int>(x.size()))
    throw ConfigError("expression \"" + text_ + "\" references x" +
                      std::to_string(max_state_) + " but only " +
                      std::to_string(x.size()) + " states were supplied");
  return root_->eval<Jet>(x, t);
}

}  // namespace satctl
