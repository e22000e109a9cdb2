#include "satctl/ctrl_global.hpp"

#include <cmath>
#include <string>

#include "satctl/errors.hpp"

namespace satctl {

namespace {

// States x1..x_{stage} truncated to the working order, with unreferenced
// trailing entries as placeholders (strict feedback keeps them unused).
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

}  // namespace

void ControllerGains::validate(int n) const {
  if (static_cast<int>(k.size()) != n + 1)
    throw ConfigError("expected " + std::to_string(n + 1) +
                      " gains for an order-" + std::to_string(n) + " plant, got " +
                      std::to_string(k.size()));
  for (double ki : k)
    if (!(std::isfinite(ki) && ki > 0.0))
      throw ConfigError("controller gains must be positive");
  if (!(std::isfinite(delta) && delta > 0.0))
    throw ConfigError("gain floor delta must be positive");
}

std::vector<Jet> stabilizing_functions(const PlantModel& model,
                                       std::span<const double> x, double u,
                                       const Jet& ref_jet,
                                       const ControllerGains& gains) {
  const int n = model.order();
  if (ref_jet.order() < n + 1)
    throw ConfigError("reference jet must carry order n+1 for the recursion");

  const std::vector<Jet> xj = flow_jets(model, x, u);
  std::vector<Jet> eta;
  eta.reserve(static_cast<size_t>(n));

  // Stage 1 at order n.
  {
    const int m = n;
    const std::vector<Jet> xs = stage_span(xj, 1, m);
    const Jet t = Jet::time(0.0, m);
    const Jet phi1 = xj[0].truncated(m) - ref_jet.truncated(m);
    const Jet num = ref_jet.derivative().truncated(m) -
                    model.f[0].eval(xs, t) - gains.k[0] * phi1;
    eta.push_back(num / checked_gain(model.g[0], xs, t, 1));
  }

  // Stage i at order n+1-i.
  for (int i = 2; i <= n; ++i) {
    const int m = n + 1 - i;
    const std::vector<Jet> xs = stage_span(xj, i, m);
    const Jet t = Jet::time(0.0, m);
    const Jet phi_prev =
        i == 2 ? xj[0].truncated(m) - ref_jet.truncated(m)
               : xj[static_cast<size_t>(i) - 2].truncated(m) -
                     eta[static_cast<size_t>(i) - 3].truncated(m);
    const Jet phi_i =
        xj[static_cast<size_t>(i) - 1].truncated(m) - eta[static_cast<size_t>(i) - 2].truncated(m);
    const Jet num = eta[static_cast<size_t>(i) - 2].derivative().truncated(m) -
                    model.f[static_cast<size_t>(i) - 1].eval(xs, t) -
                    model.g[static_cast<size_t>(i) - 2].eval(xs, t) * phi_prev -
                    gains.k[static_cast<size_t>(i) - 1] * phi_i;
    eta.push_back(num / checked_gain(model.g[static_cast<size_t>(i) - 1], xs, t, i));
  }

  return eta;
}

ErrorState error_coords(const PlantModel& model, std::span<const double> x,
                        double u, const Jet& ref_jet,
                        const ControllerGains& gains) {
  const int n = model.order();
  ErrorState err;
  err.eta = stabilizing_functions(model, x, u, ref_jet, gains);
  err.phi.resize(static_cast<size_t>(n));
  err.phi[0] = x[0] - ref_jet.value();
  for (int i = 1; i < n; ++i)
    err.phi[static_cast<size_t>(i)] =
        x[static_cast<size_t>(i)] - err.eta[static_cast<size_t>(i) - 1].value();
  err.varrho = u - err.eta.back().value();
  err.cross_n =
      err.phi.back() * model.g.back().eval(x, 0.0);
  return err;
}

double commanded_input(const ErrorState& err, double u,
                       const ControllerGains& gains,
                       const SaturationParams& params) {
  const double gain = gain_bracket(u, params);
  // G(u) vanishes exactly on the rails; dividing there is the only genuine
  // hazard.  Beyond a rail G is negative but the division stays
  // well-conditioned (the closed loop multiplies it straight back), so an
  // input excursion is reported by the trajectory monitors, not here.
  if (!(std::abs(gain) >= kEpsDiv))
    throw ViolationError("saturation-gain", NAN,
                         "effective gain G(u) collapsed at a saturation rail");
  const double num = params.p1 * params.p2 * u + err.eta.back()[1] -
                     err.cross_n - gains.k.back() * err.varrho;
  return num / gain;
}

LyapunovValue lyapunov_v(const ErrorState& err, const ControllerGains& gains) {
  LyapunovValue out;
  for (size_t j = 0; j < err.phi.size(); ++j) {
    out.value += 0.5 * err.phi[j] * err.phi[j];
    out.dot -= gains.k[j] * err.phi[j] * err.phi[j];
  }
  out.value += 0.5 * err.varrho * err.varrho;
  out.dot -= gains.k.back() * err.varrho * err.varrho;
  return out;
}

}  // namespace satctl
