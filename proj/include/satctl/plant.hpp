#pragma once

#include <span>
#include <string>
#include <vector>

#include "satctl/expr.hpp"
#include "satctl/jet.hpp"
#include "satctl/saturation.hpp"

namespace satctl {

// Strict-feedback plant
//   xdot_i = f_i(x1..x_i) + g_i(x1..x_i) * x_{i+1},   i = 1..n-1
//   xdot_n = f_n(x1..x_n) + g_n(x1..x_n) * u
// described by closed-form jet-evaluable expressions, so exact higher time
// derivatives of the flow are available to the controller recursions.
//
// g_lower/g_upper declare per-stage bounds 0 < g_lower[i] <= |g_i| <= g_upper[i]
// that are monitored along simulated trajectories (the control law needs each
// g_i bounded away from zero with a fixed sign).
struct PlantModel {
  std::vector<Expr> f;
  std::vector<Expr> g;
  std::vector<double> g_lower;
  std::vector<double> g_upper;

  int order() const { return static_cast<int>(f.size()); }
  void validate() const;
};

// Named built-in models. "benchmark2" is the second-order system
//   xdot1 = 0.1 x1^2 + x2,  xdot2 = 0.1 x1 x2 - 0.2 x1 + (1 + x1^2) u
// used by the shipped scenarios. Unknown names throw ConfigError.
PlantModel builtin_plant(const std::string& name);

// [f1 + g1 x2, ..., f_{n-1} + g_{n-1} x_n, f_n + g_n u].
// Throws NumericalError if any entry is non-finite.
std::vector<double> plant_rhs(const PlantModel& model, std::span<const double> x,
                              double u);

// Jets of x1..xn and u (last entry) along the closed-loop flow where the
// actuator state obeys udot = G(u) u_c - p1 p2 u and the command u_c is the
// given jet. All n+1 jets have uniform order K (K <= n+1, u_c.order() >= K-1):
// slot k+1 of each signal is the k-th derivative of its right-hand side,
// filled round-robin so slot k+1 only ever reads already-final slots <= k.
std::vector<Jet> state_jets(const PlantModel& model, const SaturationParams& params,
                            std::span<const double> x, double u, const Jet& u_c,
                            int K);

// Triangular jets of x1..xn along the plant flow with the input frozen at its
// current value: x_i carries order n+1-i, exactly what the stabilizing-function
// recursion consumes (it differentiates x_i at most n+1-i times and never needs
// udot). Strict feedback guarantees slot k+1 of x_i reads x_{i+1} only up to
// order k, so the frozen input never contaminates a slot that is used.
std::vector<Jet> flow_jets(const PlantModel& model, std::span<const double> x,
                           double u);

// Desired output trajectory y_d(t) as a closed form in t, plus declared bounds
// mu[i-1] on |y_d^(i)(t)| for i = 1..mu.size() (monitored strictly: the
// controller analysis assumes |y_d^(i)| < mu_i).
struct ReferenceSignal {
  Expr y_d;
  std::vector<double> mu;

  void validate() const;
};

// Jet of y_d at time t up to the requested order.
Jet reference_eval(const ReferenceSignal& ref, double t, int order);

// Time-varying output corridor lower(t) < y(t) < upper(t), closed forms in t.
// Declared bounds (monitored when non-empty):
//   upper(t) <= psi_upper[0],  |upper^(i)(t)| <= psi_upper[i]  (i >= 1)
//   lower(t) >= psi_lower[0],  |lower^(i)(t)| <= psi_lower[i]  (i >= 1)
struct OutputConstraints {
  Expr upper;
  Expr lower;
  std::vector<double> psi_upper;
  std::vector<double> psi_lower;

  void validate() const;
};

// Corridor geometry around the reference at one instant, as jets:
// alpha = y_d - lower (gap below the reference), beta = upper - y_d (gap
// above). Both must stay strictly positive for the constrained controller to
// be well posed.
struct CorridorJets {
  Jet upper;
  Jet lower;
  Jet alpha;
  Jet beta;
};

// Evaluates the corridor at time t to the order of ref_jet (the jet of y_d at
// the same t). Throws ConfigError if the corridor is empty (upper <= lower) or
// the reference leaves it (alpha <= 0 or beta <= 0): such a scenario violates
// the feasibility hypothesis and no controller can track it.
CorridorJets constraint_eval(const OutputConstraints& c, const Jet& ref_jet,
                             double t);

}  // namespace satctl
