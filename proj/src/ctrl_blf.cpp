#include "satctl/ctrl_blf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "satctl/errors.hpp"

namespace satctl {

namespace {

std::vector<Jet> stage_span(const std::vector<Jet>& xj, int stage, int m) {
  std::vector<Jet> out;
  out.reserve(xj.size());
  for (size_t i = 0; i < xj.size(); ++i)
    out.push_back(static_cast<int>(i) < stage && xj[i].order() >= m
                      ? xj[i].truncated(m)
                      : Jet(m));
  return out;
}

Jet checked_gain(const Expr& g, const std::vector<Jet>& xs, const Jet& t,
                 int stage) {
  Jet gj = g.eval(xs, t);
  if (std::abs(gj.value()) < kEpsDiv)
    throw NumericalError("plant gain g_" + std::to_string(stage) +
                         " vanished; the control law is singular here");
  return gj;
}

// Jet of digamma = 1/(gap^{2r} - phi1^{2r}) at the order of its inputs.
Jet digamma_jet(const Jet& gap, const Jet& phi1, int r) {
  return 1.0 / (pow_int(gap, 2 * r) - pow_int(phi1, 2 * r));
}

}  // namespace

BlfState zeta_coords(double phi1, double alpha, double beta, int r) {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw ConfigError("barrier coordinates need positive corridor gaps");
  if (r < 1) throw ConfigError("barrier exponent r must be a positive integer");

  BlfState b;
  b.r = r;
  b.s = phi1 > 0.0 ? 1 : 0;
  b.zeta_over = phi1 / beta;
  b.zeta_under = phi1 / alpha;
  b.zeta = b.s == 1 ? b.zeta_over : b.zeta_under;
  if (!(std::abs(b.zeta) < 1.0))
    throw ViolationError("barrier", NAN,
                         "output error reached the constraint corridor edge");

  const double z2r = pow_int(b.zeta, 2 * r);
  b.w1 = -std::log1p(-z2r) / (2.0 * r);
  const double gap = b.s == 1 ? beta : alpha;
  b.digamma = 1.0 / (pow_int(gap, 2 * r) - pow_int(phi1, 2 * r));
  return b;
}

double timevarying_gain(const Jet& alpha, const Jet& beta, double delta) {
  const double ra = alpha[1] / alpha[0];
  const double rb = beta[1] / beta[0];
  return std::sqrt(ra * ra + rb * rb + delta);
}

Jet kbar_jet(const Jet& alpha, const Jet& beta, double delta) {
  const int m = alpha.order() - 1;
  const Jet ra = alpha.derivative() / alpha.truncated(m);
  const Jet rb = beta.derivative() / beta.truncated(m);
  return sqrt(ra * ra + rb * rb + Jet::constant(delta, m));
}

std::vector<Jet> blf_stabilizing_functions(const PlantModel& model,
                                           std::span<const double> x, double u,
                                           const Jet& ref_jet,
                                           const CorridorJets& corridor,
                                           const ControllerGains& gains, int r) {
  const int n = model.order();
  if (ref_jet.order() < n + 1 || corridor.alpha.order() < n + 1)
    throw ConfigError("reference/corridor jets must carry order n+1");

  const std::vector<Jet> xj = flow_jets(model, x, u);
  std::vector<Jet> eta;
  eta.reserve(static_cast<size_t>(n));

  // Stage 1 at order n, with the time-varying gain as a jet so its motion
  // propagates into eta_1_dot.
  {
    const int m = n;
    const std::vector<Jet> xs = stage_span(xj, 1, m);
    const Jet t = Jet::time(0.0, m);
    const Jet phi1 = xj[0].truncated(m) - ref_jet.truncated(m);
    const Jet kbar = kbar_jet(corridor.alpha.truncated(m + 1),
                              corridor.beta.truncated(m + 1), gains.delta);
    const Jet num = ref_jet.derivative().truncated(m) -
                    model.f[0].eval(xs, t) -
                    (gains.k[0] + kbar) * phi1;
    eta.push_back(num / checked_gain(model.g[0], xs, t, 1));
  }

  for (int i = 2; i <= n; ++i) {
    const int m = n + 1 - i;
    const std::vector<Jet> xs = stage_span(xj, i, m);
    const Jet t = Jet::time(0.0, m);
    const Jet phi_i =
        xj[static_cast<size_t>(i) - 1].truncated(m) - eta[static_cast<size_t>(i) - 2].truncated(m);
    Jet cross(m);
    if (i == 2) {
      // Barrier cross term: digamma g_1 phi_1^{2r-1}, the exact image of the
      // plain g_1 phi_1 term under the zeta change of coordinates.
      const Jet phi1 = xj[0].truncated(m) - ref_jet.truncated(m);
      const double phi1_val = phi1.value();
      const Jet gap = phi1_val > 0.0 ? corridor.beta.truncated(m)
                                     : corridor.alpha.truncated(m);
      cross = digamma_jet(gap, phi1, r) * model.g[0].eval(xs, t) *
              pow_int(phi1, 2 * r - 1);
    } else {
      const Jet phi_prev =
          xj[static_cast<size_t>(i) - 2].truncated(m) - eta[static_cast<size_t>(i) - 3].truncated(m);
      cross = model.g[static_cast<size_t>(i) - 2].eval(xs, t) * phi_prev;
    }
    const Jet num = eta[static_cast<size_t>(i) - 2].derivative().truncated(m) -
                    model.f[static_cast<size_t>(i) - 1].eval(xs, t) - cross -
                    gains.k[static_cast<size_t>(i) - 1] * phi_i;
    eta.push_back(num / checked_gain(model.g[static_cast<size_t>(i) - 1], xs, t, i));
  }

  return eta;
}

BlfEval blf_error_coords(const PlantModel& model, std::span<const double> x,
                         double u, const Jet& ref_jet,
                         const CorridorJets& corridor,
                         const ControllerGains& gains, int r) {
  const int n = model.order();
  BlfEval out;
  out.err.eta = blf_stabilizing_functions(model, x, u, ref_jet, corridor, gains, r);
  out.err.phi.resize(static_cast<size_t>(n));
  out.err.phi[0] = x[0] - ref_jet.value();
  for (int i = 1; i < n; ++i)
    out.err.phi[static_cast<size_t>(i)] =
        x[static_cast<size_t>(i)] - out.err.eta[static_cast<size_t>(i) - 1].value();
  out.err.varrho = u - out.err.eta.back().value();

  out.blf = zeta_coords(out.err.phi[0], corridor.alpha.value(),
                        corridor.beta.value(), r);
  out.blf.k1_bar =
      timevarying_gain(corridor.alpha, corridor.beta, gains.delta);
  out.blf.corridor_rate =
      out.blf.s == 1 ? corridor.beta[1] / corridor.beta.value()
                     : corridor.alpha[1] / corridor.alpha.value();

  if (n >= 2) {
    out.err.cross_n = out.err.phi.back() * model.g.back().eval(x, 0.0);
  } else {
    out.err.cross_n = out.blf.digamma * model.g[0].eval(x, 0.0) *
                      pow_int(out.err.phi[0], 2 * r - 1);
  }
  return out;
}

LyapunovValue blf_lyapunov_w(const BlfState& blf, std::span<const double> phi,
                             double varrho, const ControllerGains& gains) {
  const double z2r = pow_int(blf.zeta, 2 * blf.r);
  const double barrier_ratio = z2r / (1.0 - z2r);

  // ln(1/(1-x)) < x/(1-x) for x in (0,1): the barrier energy is always
  // dominated by the barrier decay term, which is what makes the exponential
  // envelope work. Equality only at zero; a failure here is a logic bug.
  if (2.0 * blf.r * blf.w1 > barrier_ratio + 1e-12)
    throw NumericalError("barrier energy bound violated (internal error)");

  LyapunovValue out;
  out.value = blf.w1;
  out.dot = -(gains.k[0] + blf.k1_bar + blf.corridor_rate) * barrier_ratio;
  for (size_t j = 1; j < phi.size(); ++j) {
    out.value += 0.5 * phi[j] * phi[j];
    out.dot -= gains.k[j] * phi[j] * phi[j];
  }
  out.value += 0.5 * varrho * varrho;
  out.dot -= gains.k.back() * varrho * varrho;
  return out;
}

EnvelopeBand tracking_envelope(double t, double w0, const Jet& alpha,
                               const Jet& beta, const ControllerGains& gains,
                               int r) {
  double theta2 = 2.0 * r * gains.k[0];
  for (size_t j = 1; j < gains.k.size(); ++j)
    theta2 = std::min(theta2, 2.0 * gains.k[j]);

  const double shrink = -std::expm1(-2.0 * r * w0 * std::exp(-theta2 * t));
  const double factor = std::pow(shrink, 1.0 / (2.0 * r));
  return EnvelopeBand{-alpha.value() * factor, beta.value() * factor};
}

}  // namespace satctl
