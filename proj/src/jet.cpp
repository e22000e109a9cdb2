#include "satctl/jet.hpp"

#include <array>
#include <cmath>
#include <string>

namespace satctl {

namespace {

constexpr int kMaxOrder = 16;

// Pascal's triangle of binomial coefficients, C[n][k] for n,k <= kMaxOrder.
const std::array<std::array<double, kMaxOrder + 1>, kMaxOrder + 1>& binom() {
  static const auto table = [] {
    std::array<std::array<double, kMaxOrder + 1>, kMaxOrder + 1> c{};
    for (int n = 0; n <= kMaxOrder; ++n) {
      c[n][0] = 1.0;
      for (int k = 1; k <= n; ++k)
        c[n][k] = c[n - 1][k - 1] + (k <= n - 1 ? c[n - 1][k] : 0.0);
    }
    return c;
  }();
  return table;
}

void check_order(int order) {
  if (order < 0 || order > kMaxOrder)
    throw ConfigError("jet order " + std::to_string(order) + " outside [0, " +
                      std::to_string(kMaxOrder) + "]");
}

void check_same(const Jet& a, const Jet& b) {
  if (a.order() != b.order())
    throw ConfigError("jet order mismatch: " + std::to_string(a.order()) +
                      " vs " + std::to_string(b.order()));
}

}  // namespace

Jet::Jet(int order, double value) {
  check_order(order);
  d_.assign(static_cast<size_t>(order) + 1, 0.0);
  d_[0] = value;
}

Jet Jet::constant(double value, int order) { return Jet(order, value); }

Jet Jet::time(double t, int order) {
  Jet j(order, t);
  if (order >= 1) j[1] = 1.0;
  return j;
}

Jet Jet::truncated(int order) const {
  if (order < 0 || order > this->order())
    throw ConfigError("jet truncation to order " + std::to_string(order) +
                      " from order " + std::to_string(this->order()));
  Jet j(order);
  for (int k = 0; k <= order; ++k) j[k] = d_[static_cast<size_t>(k)];
  return j;
}

Jet Jet::derivative() const {
  if (order() < 1) throw ConfigError("derivative of an order-0 jet");
  Jet j(order() - 1);
  for (int k = 0; k < order(); ++k) j[k] = d_[static_cast<size_t>(k) + 1];
  return j;
}

bool Jet::all_finite() const {
  for (double v : d_)
    if (!std::isfinite(v)) return false;
  return true;
}

Jet Jet::operator-() const {
  Jet j(order());
  for (int k = 0; k <= order(); ++k) j[k] = -d_[static_cast<size_t>(k)];
  return j;
}

Jet& Jet::operator+=(const Jet& b) {
  check_same(*this, b);
  for (int k = 0; k <= order(); ++k) d_[static_cast<size_t>(k)] += b[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& b) {
  check_same(*this, b);
  for (int k = 0; k <= order(); ++k) d_[static_cast<size_t>(k)] -= b[k];
  return *this;
}

Jet operator+(const Jet& a, const Jet& b) {
  Jet c = a;
  c += b;
  return c;
}

Jet operator-(const Jet& a, const Jet& b) {
  Jet c = a;
  c -= b;
  return c;
}

// Leibniz: (ab)^(k) = sum_j C(k,j) a^(j) b^(k-j).
Jet operator*(const Jet& a, const Jet& b) {
  check_same(a, b);
  const int K = a.order();
  const auto& C = binom();
  Jet c(K);
  for (int k = 0; k <= K; ++k) {
    double acc = 0.0;
    for (int j = 0; j <= k; ++j) acc += C[k][j] * a[j] * b[k - j];
    c[k] = acc;
  }
  return c;
}

// Quotient recursion from a = c*b: c^(k) = (a^(k) - sum_{j<k} C(k,j) c^(j) b^(k-j)) / b0.
Jet operator/(const Jet& a, const Jet& b) {
  check_same(a, b);
  if (std::abs(b[0]) < kEpsDiv)
    throw NumericalError("jet division singularity: |denominator| < 1e-9");
  const int K = a.order();
  const auto& C = binom();
  Jet c(K);
  for (int k = 0; k <= K; ++k) {
    double acc = a[k];
    for (int j = 0; j < k; ++j) acc -= C[k][j] * c[j] * b[k - j];
    c[k] = acc / b[0];
  }
  return c;
}

Jet operator+(const Jet& a, double s) {
  Jet c = a;
  c[0] += s;
  return c;
}
Jet operator+(double s, const Jet& a) { return a + s; }

Jet operator-(const Jet& a, double s) {
  Jet c = a;
  c[0] -= s;
  return c;
}
Jet operator-(double s, const Jet& a) { return (-a) + s; }

Jet operator*(const Jet& a, double s) {
  Jet c(a.order());
  for (int k = 0; k <= a.order(); ++k) c[k] = a[k] * s;
  return c;
}
Jet operator*(double s, const Jet& a) { return a * s; }

Jet operator/(const Jet& a, double s) {
  Jet c(a.order());
  for (int k = 0; k <= a.order(); ++k) c[k] = a[k] / s;
  return c;
}
Jet operator/(double s, const Jet& a) { return Jet::constant(s, a.order()) / a; }

Jet pow_int(const Jet& a, int m) {
  if (m < 0) throw ConfigError("pow_int: negative exponent");
  if (m == 0) return Jet::constant(1.0, a.order());
  Jet r = a;
  for (int i = 1; i < m; ++i) r = r * a;
  return r;
}

double pow_int(double a, int m) {
  if (m < 0) throw ConfigError("pow_int: negative exponent");
  if (m == 0) return 1.0;
  double r = a;
  for (int i = 1; i < m; ++i) r = r * a;
  return r;
}

// s = sin(a), c = cos(a) via s' = cos(a) a', c' = -sin(a) a':
//   s^(k) = sum_{j<=k-1} C(k-1,j) c^(j) a^(k-j)
//   c^(k) = -sum_{j<=k-1} C(k-1,j) s^(j) a^(k-j)
void sincos(const Jet& a, Jet& s, Jet& c) {
  const int K = a.order();
  const auto& C = binom();
  s = Jet(K);
  c = Jet(K);
  s[0] = std::sin(a[0]);
  c[0] = std::cos(a[0]);
  for (int k = 1; k <= K; ++k) {
    double ss = 0.0, cc = 0.0;
    for (int j = 0; j <= k - 1; ++j) {
      ss += C[k - 1][j] * c[j] * a[k - j];
      cc += C[k - 1][j] * s[j] * a[k - j];
    }
    s[k] = ss;
    c[k] = -cc;
  }
}

Jet sin(const Jet& a) {
  Jet s, c;
  sincos(a, s, c);
  return s;
}

Jet cos(const Jet& a) {
  Jet s, c;
  sincos(a, s, c);
  return c;
}

// From s*s = a: s^(k) = (a^(k) - sum_{0<j<k} C(k,j) s^(j) s^(k-j)) / (2 s0).
Jet sqrt(const Jet& a) {
  if (!(a[0] > 0.0))
    throw NumericalError("jet sqrt of non-positive value");
  const int K = a.order();
  const auto& C = binom();
  Jet s(K);
  s[0] = std::sqrt(a[0]);
  for (int k = 1; k <= K; ++k) {
    double acc = a[k];
    for (int j = 1; j < k; ++j) acc -= C[k][j] * s[j] * s[k - j];
    s[k] = acc / (2.0 * s[0]);
  }
  return s;
}

}  // namespace satctl
