#pragma once

#include <vector>

#include "satctl/errors.hpp"

namespace satctl {

// Truncated Taylor jet of a scalar signal along the trajectory clock:
// slot k holds the k-th *time derivative* (not the Taylor coefficient), so
// slot 0 is the value and slot 1 the first derivative. Arithmetic propagates
// derivatives through composition (linearity, Leibniz, quotient recursion).
//
// Jets never change order silently; combining jets of unequal order throws.
class Jet {
 public:
  Jet() : d_(1, 0.0) {}
  explicit Jet(int order, double value = 0.0);

  // Signal that is constant in time: [v, 0, ..., 0].
  static Jet constant(double value, int order);
  // The clock itself at time t: [t, 1, 0, ..., 0].
  static Jet time(double t, int order);

  int order() const { return static_cast<int>(d_.size()) - 1; }
  double value() const { return d_[0]; }
  double operator[](int k) const { return d_[static_cast<size_t>(k)]; }
  double& operator[](int k) { return d_[static_cast<size_t>(k)]; }

  // Copy truncated to a lower (or equal) order.
  Jet truncated(int order) const;
  // Jet of the signal's derivative: one order lower, slots shifted down.
  Jet derivative() const;

  bool all_finite() const;

  Jet operator-() const;
  Jet& operator+=(const Jet& b);
  Jet& operator-=(const Jet& b);

 private:
  std::vector<double> d_;
};

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);

Jet operator+(const Jet& a, double s);
Jet operator+(double s, const Jet& a);
Jet operator-(const Jet& a, double s);
Jet operator-(double s, const Jet& a);
Jet operator*(const Jet& a, double s);
Jet operator*(double s, const Jet& a);
Jet operator/(const Jet& a, double s);
Jet operator/(double s, const Jet& a);

// Integer power by repeated multiplication, m >= 0. The double overload uses
// the exact same multiplication sequence so order-0 jet evaluation is
// bit-identical to plain double evaluation.
Jet pow_int(const Jet& a, int m);
double pow_int(double a, int m);

Jet sin(const Jet& a);
Jet cos(const Jet& a);
// Joint recursion; cheaper when both are needed.
void sincos(const Jet& a, Jet& s, Jet& c);
Jet sqrt(const Jet& a);

}  // namespace satctl
