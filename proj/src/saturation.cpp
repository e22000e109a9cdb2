#include "satctl/saturation.hpp"

#include <cmath>
#include <string>

namespace satctl {

void SaturationParams::validate() const {
  if (!(p1 > 0.0)) throw ConfigError("saturation.p1 must be positive");
  if (!(p2 > 0.0)) throw ConfigError("saturation.p2 must be positive");
  if (gamma < 2 || gamma % 2 != 0)
    throw ConfigError("saturation.gamma must be a positive even integer >= 2");
  if (!(u_min < 0.0 && u_max > 0.0))
    throw ConfigError("saturation bounds must satisfy u_min < 0 < u_max");
}

double gain_bracket(double u, const SaturationParams& p) {
  const double ratio = u > 0.0 ? u / p.u_max : u / p.u_min;
  return p.p1 * (1.0 - pow_int(ratio, p.gamma));
}

double effective_gain(double u, const SaturationParams& p) {
  if (u < p.u_min || u > p.u_max)
    throw NumericalError("effective_gain: u=" + std::to_string(u) +
                         " outside [" + std::to_string(p.u_min) + ", " +
                         std::to_string(p.u_max) + "]");
  return gain_bracket(u, p);
}

Jet effective_gain(const Jet& u, const SaturationParams& p) {
  if (u.value() < p.u_min || u.value() > p.u_max)
    throw NumericalError("effective_gain: u outside [u_min, u_max]");
  const double rail = u.value() > 0.0 ? p.u_max : p.u_min;
  return (1.0 - pow_int(u / rail, p.gamma)) * p.p1;
}

double saturation_rhs(double u, double u_c, const SaturationParams& p) {
  return effective_gain(u, p) * u_c - p.p1 * p.p2 * u;
}

Jet saturation_rhs(const Jet& u, const Jet& u_c, const SaturationParams& p) {
  return effective_gain(u, p) * u_c - u * (p.p1 * p.p2);
}

double input_rate(double u, double u_c, const SaturationParams& p) {
  return gain_bracket(u, p) * u_c - p.p1 * p.p2 * u;
}

ConfinementCertificate invariant_bounds(const SaturationParams& p, double xi) {
  if (!(xi > 0.0)) throw ConfigError("certificate bound xi must be positive");
  const double inv_gamma = 1.0 / static_cast<double>(p.gamma);
  ConfinementCertificate c;
  c.xi = xi;
  c.u_tilde_max = p.u_max * std::pow(xi / (xi + p.p2 * p.u_max), inv_gamma);
  c.u_tilde_min = p.u_min * std::pow(xi / (xi + p.p2 * std::abs(p.u_min)), inv_gamma);
  return c;
}

}  // namespace satctl
