#pragma once

#include "satctl/jet.hpp"

namespace satctl {

// Smooth asymmetric actuator saturation: the plant input u is the state of
//   udot = G(u) u_c - p1 p2 u,  u(0) = 0
// with gain G(u) = p1 [1 - (u/u_max)^gamma] for u > 0 and
//                  p1 [1 - (u/u_min)^gamma] for u <= 0.
// G vanishes exactly at the rails, so u can never be driven past them; the
// leak -p1 p2 u pulls u back toward zero.
struct SaturationParams {
  double p1 = 100.0;
  double p2 = 0.1;
  int gamma = 2;
  double u_min = -0.5;
  double u_max = 0.75;

  void validate() const;
};

// For a command bound |u_c| <= xi, u provably stays inside
// [u_tilde_min, u_tilde_max], a strict subset of (u_min, u_max).
struct ConfinementCertificate {
  double xi = 0.0;
  double u_tilde_max = 0.0;
  double u_tilde_min = 0.0;
};

// The actuator gain bracket p1*(1 - (u/rail)^gamma), evaluated as an analytic
// function of u: positive strictly inside (u_min, u_max), zero on the rails,
// negative beyond them.  Feedback laws and closed-loop integrators use this
// total form because aggressive transients can carry u past a rail.
double gain_bracket(double u, const SaturationParams& p);

// Actuator-model views restricted to the physical domain [u_min, u_max];
// outside it they raise a domain error.
double effective_gain(double u, const SaturationParams& p);
Jet effective_gain(const Jet& u, const SaturationParams& p);

double saturation_rhs(double u, double u_c, const SaturationParams& p);
Jet saturation_rhs(const Jet& u, const Jet& u_c, const SaturationParams& p);

// Closed-loop input rate u' = gain_bracket(u)*u_c - p1*p2*u, total in u.
double input_rate(double u, double u_c, const SaturationParams& p);

ConfinementCertificate invariant_bounds(const SaturationParams& p, double xi);

}  // namespace satctl
