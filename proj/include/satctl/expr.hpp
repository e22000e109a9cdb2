#pragma once

#include <memory>
#include <span>
#include <string>

#include "satctl/jet.hpp"

namespace satctl {

// Closed-form scalar expression over state variables x1..xn and time t:
// literals, + - * /, integer powers (^), sin, cos. Parsed once into an
// immutable tree, then evaluable on doubles or on jets; the jet path uses the
// exact same operation sequence, so an order-0 jet evaluation reproduces the
// double evaluation bit for bit.
class Expr {
 public:
  struct Node;

  Expr() = default;

  // Throws ConfigError with the offending position on malformed input.
  static Expr parse(const std::string& text);
  static Expr constant(double value);

  bool valid() const { return root_ != nullptr; }
  const std::string& text() const { return text_; }

  // Highest state index referenced (0 when none).
  int max_state() const { return max_state_; }
  bool uses_time() const { return uses_time_; }

  double eval(std::span<const double> x, double t) const;
  Jet eval(std::span<const Jet> x, const Jet& t) const;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
  int max_state_ = 0;
  bool uses_time_ = false;
};

}  // namespace satctl
