#pragma once

#include <span>
#include <vector>

#include "satctl/ctrl_global.hpp"
#include "satctl/jet.hpp"
#include "satctl/plant.hpp"

namespace satctl {

// Barrier coordinates of the output error at one instant. The tracking error
// phi_1 must stay inside (-alpha, beta), the gap between the reference and
// the output corridor; zeta rescales it onto (-1, 1) by the active side:
//   zeta_over = phi_1 / beta, zeta_under = phi_1 / alpha,
//   zeta = s zeta_over + (1-s) zeta_under,  s = 1 iff phi_1 > 0.
// w1 = (1/2r) ln(1/(1 - zeta^{2r})) is the barrier energy; it blows up as the
// error approaches either corridor edge. digamma = 1/(gap^{2r} - phi_1^{2r})
// (gap = beta when s=1, alpha otherwise) weights the barrier cross term.
// k1_bar and corridor_rate are filled once the corridor rates are known; the
// exact energy decay rate depends on both (see blf_lyapunov_w).
struct BlfState {
  int r = 1;
  int s = 0;
  double zeta = 0.0;
  double zeta_over = 0.0;
  double zeta_under = 0.0;
  double digamma = 0.0;
  double k1_bar = 0.0;
  double corridor_rate = 0.0;
  double w1 = 0.0;
};

// Builds the barrier coordinates; throws ViolationError("barrier", ...) when
// |zeta| >= 1, i.e. the output has reached the corridor edge. 2r >= n is the
// smoothness condition the recursion needs (checked by the scenario layer).
BlfState zeta_coords(double phi1, double alpha, double beta, int r);

// Time-varying first-stage gain k1_bar(t) = sqrt((alpha_dot/alpha)^2 +
// (beta_dot/beta)^2 + delta): always at least sqrt(delta), and large enough
// to dominate the corridor's own motion so the barrier never outruns the
// controller. The jet overload propagates derivatives (one order below its
// inputs) for use inside the stabilizing-function recursion.
double timevarying_gain(const Jet& alpha, const Jet& beta, double delta);
Jet kbar_jet(const Jet& alpha, const Jet& beta, double delta);

// Constrained stabilizing-function recursion:
//   eta_1 = (1/g_1)[y_d_dot - f_1 - (k_1 + k1_bar(t)) phi_1]
//   eta_2 = (1/g_2)[eta_1_dot - f_2 - digamma g_1 phi_1^{2r-1} - k_2 phi_2]
//   eta_i = (1/g_i)[eta_{i-1}_dot - f_i - g_{i-1} phi_{i-1} - k_i phi_i], i>=3
// — the same telescoping shape as the plain controller, except the first
// cross term lives in barrier coordinates. ref_jet and the corridor jets must
// carry order >= n+1.
std::vector<Jet> blf_stabilizing_functions(const PlantModel& model,
                                           std::span<const double> x, double u,
                                           const Jet& ref_jet,
                                           const CorridorJets& corridor,
                                           const ControllerGains& gains, int r);

// Error state + barrier coordinates in one pass. err.cross_n is g_n phi_n for
// n >= 2 and digamma g_1 phi_1^{2r-1} for n = 1 (the barrier cross term then
// falls to the input stage), so commanded_input() is shared verbatim with the
// plain controller.
struct BlfEval {
  ErrorState err;
  BlfState blf;
};
BlfEval blf_error_coords(const PlantModel& model, std::span<const double> x,
                         double u, const Jet& ref_jet,
                         const CorridorJets& corridor,
                         const ControllerGains& gains, int r);

// W = w1 + 0.5 sum_{j>=2} phi_j^2 + 0.5 varrho^2, and its exact closed-form
// derivative along the closed loop:
//   W_dot = -(k_1 + k1_bar + corridor_rate) zeta^{2r}/(1 - zeta^{2r})
//           - sum_{j>=2} k_j phi_j^2 - k_{n+1} varrho^2.
// The barrier coefficient k_1 + k1_bar + corridor_rate is >= k_1 by the
// construction of k1_bar, so W decays at least at the plain -k_1 barrier
// rate; with a static corridor (k1_bar, corridor_rate -> 0) the expression
// reduces to the familiar -k_1 zeta^{2r}/(1-zeta^{2r}) - ... form.
LyapunovValue blf_lyapunov_w(const BlfState& blf, std::span<const double> phi,
                             double varrho, const ControllerGains& gains);

// Certified tracking envelope implied by the initial energy W(0):
//   E(t) = (1 - exp(-2r W0 exp(-theta2 t)))^{1/2r},
//   theta2 = min{2r k_1, 2 k_2, ..., 2 k_{n+1}},
// and phi_1(t) is certified to stay inside (-alpha(t) E(t), beta(t) E(t)).
struct EnvelopeBand {
  double lower = 0.0;
  double upper = 0.0;
};
EnvelopeBand tracking_envelope(double t, double w0, const Jet& alpha,
                               const Jet& beta, const ControllerGains& gains,
                               int r);

}  // namespace satctl
