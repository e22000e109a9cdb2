#pragma once

#include <span>
#include <vector>

#include "satctl/jet.hpp"
#include "satctl/plant.hpp"
#include "satctl/saturation.hpp"

namespace satctl {

// Backstepping gains k[0..n] (k_1..k_{n+1}); delta is the floor inside the
// time-varying gain of the constrained controller and is kept here so both
// controllers share one gain block.
struct ControllerGains {
  std::vector<double> k;
  double delta = 0.01;

  void validate(int n) const;
};

// Error coordinates of the backstepping transform at one instant:
//   phi_1 = y - y_d,   phi_i = x_i - eta_{i-1},   varrho = u - eta_n.
// eta[i] is carried as a jet so eta_dot is available to the next stage;
// cross_n is the cross term the input stage must cancel (g_n phi_n for the
// plain controller; the barrier variant substitutes its own when n = 1).
struct ErrorState {
  std::vector<double> phi;
  double varrho = 0.0;
  std::vector<Jet> eta;
  double cross_n = 0.0;
};

// The stabilizing-function recursion
//   eta_1 = (1/g_1)[y_d_dot - f_1 - k_1 phi_1]
//   eta_i = (1/g_i)[eta_{i-1}_dot - f_i - g_{i-1} phi_{i-1} - k_i phi_i]
// evaluated in jet arithmetic of decreasing order (eta_i at order n+1-i), so
// slot 1 of eta_n — its exact time derivative along the flow — is always
// available. ref_jet must carry order >= n+1. The g_{i-1} phi_{i-1} term is
// what makes the Lyapunov cross terms telescope; see lyapunov_v.
std::vector<Jet> stabilizing_functions(const PlantModel& model,
                                       std::span<const double> x, double u,
                                       const Jet& ref_jet,
                                       const ControllerGains& gains);

// Full error state against the recursion above.
ErrorState error_coords(const PlantModel& model, std::span<const double> x,
                        double u, const Jet& ref_jet,
                        const ControllerGains& gains);

// Commanded input
//   u_c = [p1 p2 u + eta_n_dot - cross_n - k_{n+1} varrho] / G(u),
// the unique choice that turns the actuator state u into one more
// backstepping stage: along the closed loop, varrho_dot = -k_{n+1} varrho -
// cross_n. Requires u strictly inside (u_min, u_max); G(u) > 0 there.
double commanded_input(const ErrorState& err, double u,
                       const ControllerGains& gains,
                       const SaturationParams& params);

// V = 0.5 sum phi_j^2 + 0.5 varrho^2, and the closed-form derivative along
// the closed loop, -sum k_j phi_j^2 - k_{n+1} varrho^2 (every cross term
// cancels; simulations verify the identity against finite differences).
struct LyapunovValue {
  double value = 0.0;
  double dot = 0.0;
};
LyapunovValue lyapunov_v(const ErrorState& err, const ControllerGains& gains);

}  // namespace satctl
