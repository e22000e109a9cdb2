#include "satctl/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <utility>

#include "satctl/errors.hpp"
#include "satctl/strfmt.hpp"

namespace satctl {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Exponential-decay slack: 5% multiplicative headroom for finite-step effects
// plus an absolute floor once the energy reaches rounding noise.
constexpr double kDecayFactor = 1.05;
constexpr double kDecayFloor = 1e-12;

// Energy-rate identity: finite differences of the recorded energy must match
// the recorded closed-form rate to this relative tolerance; the absolute
// floor keeps rounding noise in nearly-flat tails from registering.
constexpr double kIdentityTol = 1e-3;
constexpr double kIdentityFloor = 1e-5;

// Envelope slack: certified band scaled by 5% plus an absolute floor at the
// integration accuracy of the constrained error's non-smooth switching point.
constexpr double kEnvelopeFactor = 1.05;
constexpr double kEnvelopeFloor = 1e-6;

constexpr double kSignalBound = 1e6;

// Central-difference residual of the recorded energy against its recorded
// closed-form rate at interior row i; negative when the stencil is skipped.
// The constrained energy has a corner where phi_1 changes sign (the active
// corridor side switches), so a stencil straddling a sign change would
// difference across a kink and is excluded.
double identity_residual(const Trajectory& traj, std::size_t i) {
  const auto& r = traj.rows;
  if (i == 0 || i + 1 >= r.size()) return -1.0;
  if (traj.constrained) {
    const bool a = r[i - 1].phi[0] > 0.0;
    const bool b = r[i].phi[0] > 0.0;
    const bool c = r[i + 1].phi[0] > 0.0;
    if (a != b || b != c) return -1.0;
  }
  const double fd = (r[i + 1].lyap - r[i - 1].lyap) / (r[i + 1].t - r[i - 1].t);
  const double closed = r[i].lyap_dot;
  return std::abs(fd - closed) / std::max(std::abs(closed), kIdentityFloor);
}

// Severity of the decay-bound excess at row i (negative when satisfied).
double decay_excess(const Trajectory& traj, std::size_t i, double theta) {
  const TrajectoryRow& row = traj.rows[i];
  const double bound =
      kDecayFactor * traj.rows[0].lyap * std::exp(-theta * row.t) + kDecayFloor;
  return row.lyap - bound;
}

// Groups consecutive rows with badness >= 0 into one finding apiece. The
// describe callback receives the first/last row of the episode plus the row
// index and severity of the worst offence.
using Describe = std::function<std::string(std::size_t first, std::size_t last,
                                           std::size_t worst, double badness)>;
void scan_episodes(const Trajectory& traj, const std::vector<double>& badness,
                   const char* monitor, const Describe& describe,
                   std::vector<MonitorFinding>& out) {
  std::size_t i = 0;
  const std::size_t m = badness.size();
  while (i < m) {
    if (badness[i] < 0.0) {
      ++i;
      continue;
    }
    const std::size_t first = i;
    std::size_t worst = i;
    while (i + 1 < m && badness[i + 1] >= 0.0) {
      ++i;
      if (badness[i] > badness[worst]) worst = i;
    }
    out.push_back(MonitorFinding{monitor, traj.rows[first].t,
                                 describe(first, i, worst, badness[worst])});
    ++i;
  }
}

void check_row_finite(const TrajectoryRow& row, bool constrained) {
  bool ok = std::isfinite(row.t) && std::isfinite(row.u) &&
            std::isfinite(row.u_c) && std::isfinite(row.y_d) &&
            std::isfinite(row.varrho) && std::isfinite(row.lyap) &&
            std::isfinite(row.lyap_dot);
  for (double v : row.x) ok = ok && std::isfinite(v);
  for (double v : row.phi) ok = ok && std::isfinite(v);
  if (constrained)
    ok = ok && std::isfinite(row.margin_lower) &&
         std::isfinite(row.margin_upper) && std::isfinite(row.env_lower) &&
         std::isfinite(row.env_upper);
  if (!ok)
    throw NumericalError(
        strfmt("non-finite value recorded at t=%.9g", row.t));
}

}  // namespace

void IntegratorSettings::validate() const {
  if (!(std::isfinite(h) && h > 0.0))
    throw ConfigError("integrator step h must be a positive real");
  if (!(std::isfinite(T) && T > 0.0))
    throw ConfigError("integrator horizon T must be a positive real");
  if (h > T) throw ConfigError("integrator step h must not exceed the horizon T");
  if (h > 0.01)
    throw ConfigError(
        "integrator step h must be at most 0.01: the actuator dynamics carry "
        "gains of magnitude ~100 and larger steps leave the RK4 stability "
        "region");
  if (method != "rk4") throw ConfigError("integrator method must be \"rk4\"");
}

long IntegratorSettings::steps() const {
  // Tolerant floor so horizons that are integer multiples of h in decimal do
  // not lose the final node to binary rounding of T/h.
  return static_cast<long>(std::floor(T / h + 1e-9));
}

void ScenarioConfig::validate() const {
  plant.validate();
  const int n = plant.order();
  gains.validate(n);
  saturation.validate();
  reference.validate();
  integrator.validate();
  if (r < 1) throw ConfigError("barrier exponent r must be a positive integer");
  if (initial_conditions.empty())
    throw ConfigError("at least one initial condition is required");
  if (controller == ControllerKind::kBlf) {
    if (!constraints)
      throw ConfigError(
          "the constrained controller requires an output corridor");
    constraints->validate();
    if (2 * r < n)
      throw ConfigError(
          strfmt("barrier exponent too small: 2r = %d must be at least the "
                 "plant order %d",
                 2 * r, n));
  }
  for (std::size_t i = 0; i < initial_conditions.size(); ++i) {
    const InitialCondition& ic = initial_conditions[i];
    if (static_cast<int>(ic.x.size()) != n)
      throw ConfigError(
          strfmt("initial condition %zu has %zu states but the plant order "
                 "is %d",
                 i, ic.x.size(), n));
    for (double v : ic.x)
      if (!std::isfinite(v))
        throw ConfigError(strfmt("initial condition %zu is not finite", i));
    if (!(std::isfinite(ic.u0) && ic.u0 > saturation.u_min &&
          ic.u0 < saturation.u_max))
      throw ConfigError(
          strfmt("initial input u(0)=%g of condition %zu must lie strictly "
                 "inside (%g, %g)",
                 ic.u0, i, saturation.u_min, saturation.u_max));
    if (controller == ControllerKind::kBlf) {
      const Jet ref = reference_eval(reference, 0.0, n + 1);
      const CorridorJets c = constraint_eval(*constraints, ref, 0.0);
      if (!(ic.x[0] > c.lower.value() && ic.x[0] < c.upper.value()))
        throw ConfigError(
            strfmt("initial output %g of condition %zu lies outside the "
                   "corridor (%g, %g) at t=0",
                   ic.x[0], i, c.lower.value(), c.upper.value()));
    }
  }
}

ClosedLoop::ClosedLoop(const ScenarioConfig& scenario) : scenario_(&scenario) {}

ClosedLoop::PointEval ClosedLoop::eval(std::span<const double> x, double u,
                                       double t) const {
  const ScenarioConfig& sc = *scenario_;
  const int n = sc.plant.order();
  PointEval out;
  const Jet ref = reference_eval(sc.reference, t, n + 1);
  out.y_d = ref.value();
  if (sc.controller == ControllerKind::kGlobal) {
    out.err = error_coords(sc.plant, x, u, ref, sc.gains);
    const LyapunovValue lv = lyapunov_v(out.err, sc.gains);
    out.lyap = lv.value;
    out.lyap_dot = lv.dot;
    out.margin_lower = kNan;
    out.margin_upper = kNan;
  } else {
    const CorridorJets corridor = constraint_eval(*sc.constraints, ref, t);
    BlfEval be = blf_error_coords(sc.plant, x, u, ref, corridor, sc.gains, sc.r);
    out.err = std::move(be.err);
    const LyapunovValue lv =
        blf_lyapunov_w(be.blf, out.err.phi, out.err.varrho, sc.gains);
    out.lyap = lv.value;
    out.lyap_dot = lv.dot;
    out.constrained = true;
    out.margin_lower = x[0] - corridor.lower.value();
    out.margin_upper = corridor.upper.value() - x[0];
    out.alpha = corridor.alpha;
    out.beta = corridor.beta;
  }
  out.u_c = commanded_input(out.err, u, sc.gains, sc.saturation);
  out.xdot = plant_rhs(sc.plant, x, u);
  out.udot = input_rate(u, out.u_c, sc.saturation);
  return out;
}

std::vector<double> ClosedLoop::rhs(std::span<const double> state,
                                    double t) const {
  const int n = order();
  if (static_cast<int>(state.size()) != n + 1)
    throw ConfigError("augmented state must carry the plant states plus u");
  PointEval ev = eval(state.first(static_cast<std::size_t>(n)),
                      state[static_cast<std::size_t>(n)], t);
  std::vector<double> d = std::move(ev.xdot);
  d.push_back(ev.udot);
  return d;
}

namespace {
std::vector<double> rk4_stage(const RhsFn& rhs, std::span<const double> s,
                              double t, std::size_t dim, int stage) {
  std::vector<double> d;
  try {
    d = rhs(s, t);
  } catch (const NumericalError& e) {
    throw NumericalError(
        strfmt("integration stage %d at t=%.9g: %s", stage, t, e.what()));
  }
  if (d.size() != dim)
    throw ConfigError("closed-loop derivative dimension mismatch");
  for (double v : d)
    if (!std::isfinite(v))
      throw NumericalError(strfmt(
          "integration stage %d produced a non-finite derivative at t=%.9g",
          stage, t));
  return d;
}
}  // namespace

std::vector<double> rk4_step(std::span<const double> state, double t, double h,
                             const RhsFn& rhs) {
  const std::size_t m = state.size();
  const std::vector<double> k1 = rk4_stage(rhs, state, t, m, 1);
  std::vector<double> tmp(m);
  for (std::size_t j = 0; j < m; ++j) tmp[j] = state[j] + 0.5 * h * k1[j];
  const std::vector<double> k2 = rk4_stage(rhs, tmp, t + 0.5 * h, m, 2);
  for (std::size_t j = 0; j < m; ++j) tmp[j] = state[j] + 0.5 * h * k2[j];
  const std::vector<double> k3 = rk4_stage(rhs, tmp, t + 0.5 * h, m, 3);
  for (std::size_t j = 0; j < m; ++j) tmp[j] = state[j] + h * k3[j];
  const std::vector<double> k4 = rk4_stage(rhs, tmp, t + h, m, 4);
  std::vector<double> next(m);
  for (std::size_t j = 0; j < m; ++j) {
    next[j] =
        state[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    if (!std::isfinite(next[j]))
      throw NumericalError(
          strfmt("integration step produced a non-finite state at t=%.9g", t));
  }
  return next;
}

RunResult simulate(const ScenarioConfig& scenario, std::size_t ic_index) {
  scenario.validate();
  if (ic_index >= scenario.initial_conditions.size())
    throw ConfigError(strfmt("initial-condition index %zu out of range (%zu "
                             "conditions)",
                             ic_index, scenario.initial_conditions.size()));
  const InitialCondition& ic = scenario.initial_conditions[ic_index];
  const int n = scenario.plant.order();
  const long steps = scenario.integrator.steps();
  const double h = scenario.integrator.h;
  const ClosedLoop loop(scenario);

  RunResult out;
  out.trajectory.n = n;
  out.trajectory.constrained = scenario.controller == ControllerKind::kBlf;
  out.trajectory.rows.reserve(static_cast<std::size_t>(steps) + 1);

  std::vector<double> state(ic.x.begin(), ic.x.end());
  state.push_back(ic.u0);

  // Input extrema are tracked at every derivative evaluation, so excursions
  // inside a step (between recorded nodes) are seen too.
  double max_u = ic.u0;
  double min_u = ic.u0;
  const RhsFn tracked = [&](std::span<const double> s, double tt) {
    max_u = std::max(max_u, s[static_cast<std::size_t>(n)]);
    min_u = std::min(min_u, s[static_cast<std::size_t>(n)]);
    try {
      return loop.rhs(s, tt);
    } catch (ViolationError& e) {
      if (!e.has_time()) e.set_time(tt);
      throw;
    }
  };

  double w0 = 0.0;
  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * h;
    const std::span<const double> x(state.data(), static_cast<std::size_t>(n));
    const double u = state[static_cast<std::size_t>(n)];

    ClosedLoop::PointEval ev;
    try {
      ev = loop.eval(x, u, t);
    } catch (ViolationError& e) {
      if (!e.has_time()) e.set_time(t);
      throw;
    } catch (const NumericalError& e) {
      throw NumericalError(strfmt("t=%.9g: %s", t, e.what()));
    }
    if (k == 0) w0 = ev.lyap;

    TrajectoryRow row;
    row.t = t;
    row.x.assign(x.begin(), x.end());
    row.u = u;
    row.u_c = ev.u_c;
    row.y_d = ev.y_d;
    row.phi = ev.err.phi;
    row.varrho = ev.err.varrho;
    row.lyap = ev.lyap;
    row.lyap_dot = ev.lyap_dot;
    if (ev.constrained) {
      row.margin_lower = ev.margin_lower;
      row.margin_upper = ev.margin_upper;
      const EnvelopeBand env = tracking_envelope(t, w0, ev.alpha, ev.beta,
                                                 scenario.gains, scenario.r);
      row.env_lower = env.lower;
      row.env_upper = env.upper;
    } else {
      row.margin_lower = kNan;
      row.margin_upper = kNan;
      row.env_lower = kNan;
      row.env_upper = kNan;
    }
    check_row_finite(row, ev.constrained);
    out.trajectory.rows.push_back(std::move(row));

    max_u = std::max(max_u, u);
    min_u = std::min(min_u, u);
    if (k < steps) state = rk4_step(state, t, h, tracked);
  }

  SummaryStats& st = out.stats;
  st.max_u = max_u;
  st.min_u = min_u;
  st.final_phi1 = std::abs(out.trajectory.rows.back().phi[0]);
  st.max_u_c = 0.0;
  st.min_margin_lower = out.trajectory.constrained
                            ? std::numeric_limits<double>::infinity()
                            : kNan;
  st.min_margin_upper = st.min_margin_lower;
  const double theta =
      decay_rate(scenario.gains, scenario.controller, scenario.r);
  for (std::size_t i = 0; i < out.trajectory.rows.size(); ++i) {
    const TrajectoryRow& row = out.trajectory.rows[i];
    st.max_u_c = std::max(st.max_u_c, std::abs(row.u_c));
    if (out.trajectory.constrained) {
      st.min_margin_lower = std::min(st.min_margin_lower, row.margin_lower);
      st.min_margin_upper = std::min(st.min_margin_upper, row.margin_upper);
    }
    if (decay_excess(out.trajectory, i, theta) > 0.0) ++st.decay_violations;
    st.max_identity_residual = std::max(
        st.max_identity_residual, identity_residual(out.trajectory, i));
  }
  return out;
}

double decay_rate(const ControllerGains& gains, ControllerKind kind, int r) {
  double theta =
      (kind == ControllerKind::kBlf ? 2.0 * r : 2.0) * gains.k.front();
  for (std::size_t j = 1; j < gains.k.size(); ++j)
    theta = std::min(theta, 2.0 * gains.k[j]);
  return theta;
}

std::vector<MonitorFinding> monitor_check(const Trajectory& traj,
                                          const ScenarioConfig& scenario) {
  std::vector<MonitorFinding> out;
  const std::size_t m = traj.rows.size();
  if (m == 0) return out;
  std::vector<double> bad(m);
  const auto& rows = traj.rows;

  // Input confinement: u must stay strictly inside the actuator rails.
  const double lo = scenario.saturation.u_min;
  const double hi = scenario.saturation.u_max;
  for (std::size_t i = 0; i < m; ++i) {
    const double u = rows[i].u;
    bad[i] = (u >= hi || u <= lo) ? std::max(u - hi, lo - u) : -1.0;
  }
  scan_episodes(traj, bad, "input-confinement",
                [&](std::size_t first, std::size_t last, std::size_t worst,
                    double) {
                  return strfmt(
                      "input reached %.9g, outside (%g, %g), between t=%.6g "
                      "and t=%.6g",
                      rows[worst].u, lo, hi, rows[first].t, rows[last].t);
                },
                out);

  // Output corridor: both margins strictly positive (constrained runs).
  if (traj.constrained) {
    for (std::size_t i = 0; i < m; ++i) {
      const double worst_margin =
          std::min(rows[i].margin_lower, rows[i].margin_upper);
      bad[i] = worst_margin <= 0.0 ? -worst_margin : -1.0;
    }
    scan_episodes(traj, bad, "corridor",
                  [&](std::size_t first, std::size_t last, std::size_t worst,
                      double badness) {
                    return strfmt(
                        "output left the corridor by %.6g (worst at t=%.6g) "
                        "between t=%.6g and t=%.6g",
                        badness, rows[worst].t, rows[first].t, rows[last].t);
                  },
                  out);
  }

  // Exponential energy decay with the certified rate.
  const double theta =
      decay_rate(scenario.gains, scenario.controller, scenario.r);
  for (std::size_t i = 0; i < m; ++i) {
    const double excess = decay_excess(traj, i, theta);
    bad[i] = excess > 0.0 ? excess : -1.0;
  }
  scan_episodes(traj, bad, "decay",
                [&](std::size_t first, std::size_t last, std::size_t worst,
                    double badness) {
                  return strfmt(
                      "energy exceeded %.6g * E(0) * exp(-%.6g t) + %.0e by "
                      "%.6g (worst at t=%.6g) between t=%.6g and t=%.6g",
                      kDecayFactor, theta, kDecayFloor, badness,
                      rows[worst].t, rows[first].t, rows[last].t);
                },
                out);

  // Energy-rate identity: finite differences of the recorded energy against
  // the recorded closed-form rate.
  for (std::size_t i = 0; i < m; ++i) {
    const double res = identity_residual(traj, i);
    bad[i] = res > kIdentityTol ? res : -1.0;
  }
  scan_episodes(traj, bad, "identity",
                [&](std::size_t first, std::size_t last, std::size_t worst,
                    double badness) {
                  return strfmt(
                      "recorded energy rate off by relative %.6g (worst at "
                      "t=%.6g) between t=%.6g and t=%.6g",
                      badness, rows[worst].t, rows[first].t, rows[last].t);
                },
                out);

  // Tracking-error envelope with slack (constrained runs).
  if (traj.constrained) {
    for (std::size_t i = 0; i < m; ++i) {
      const double up = rows[i].phi[0] -
                        (kEnvelopeFactor * rows[i].env_upper + kEnvelopeFloor);
      const double dn = (kEnvelopeFactor * rows[i].env_lower - kEnvelopeFloor) -
                        rows[i].phi[0];
      const double excess = std::max(up, dn);
      bad[i] = excess > 0.0 ? excess : -1.0;
    }
    scan_episodes(traj, bad, "envelope",
                  [&](std::size_t first, std::size_t last, std::size_t worst,
                      double badness) {
                    return strfmt(
                        "tracking error exceeded the certified envelope by "
                        "%.6g (worst at t=%.6g) between t=%.6g and t=%.6g",
                        badness, rows[worst].t, rows[first].t, rows[last].t);
                  },
                  out);
  }

  // Uniform signal bound: every recorded entry finite and below 1e6.
  for (std::size_t i = 0; i < m; ++i) {
    double peak = 0.0;
    bool finite = true;
    const auto feed = [&](double v) {
      if (!std::isfinite(v)) finite = false;
      peak = std::max(peak, std::abs(v));
    };
    const TrajectoryRow& row = rows[i];
    feed(row.u);
    feed(row.u_c);
    feed(row.y_d);
    feed(row.varrho);
    feed(row.lyap);
    feed(row.lyap_dot);
    for (double v : row.x) feed(v);
    for (double v : row.phi) feed(v);
    if (traj.constrained) {
      feed(row.margin_lower);
      feed(row.margin_upper);
      feed(row.env_lower);
      feed(row.env_upper);
    }
    bad[i] = !finite ? std::numeric_limits<double>::max()
                     : (peak > kSignalBound ? peak : -1.0);
  }
  scan_episodes(traj, bad, "signal-bound",
                [&](std::size_t first, std::size_t last, std::size_t worst,
                    double badness) {
                  if (badness == std::numeric_limits<double>::max())
                    return strfmt(
                        "a recorded signal went non-finite between t=%.6g and "
                        "t=%.6g",
                        rows[first].t, rows[last].t);
                  return strfmt(
                      "a recorded signal reached %.6g (bound %.0e, worst at "
                      "t=%.6g) between t=%.6g and t=%.6g",
                      badness, kSignalBound, rows[worst].t, rows[first].t,
                      rows[last].t);
                },
                out);

  // Declared plant-gain bounds along the trajectory.
  const int n = scenario.plant.order();
  for (int g = 0; g < n; ++g) {
    const Expr& expr = scenario.plant.g[static_cast<std::size_t>(g)];
    const double glo = scenario.plant.g_lower[static_cast<std::size_t>(g)];
    const double ghi = scenario.plant.g_upper[static_cast<std::size_t>(g)];
    for (std::size_t i = 0; i < m; ++i) {
      const double mag = std::abs(expr.eval(rows[i].x, rows[i].t));
      const double dev = std::max(glo - mag, mag - ghi);
      bad[i] = dev > 0.0 ? dev : -1.0;
    }
    scan_episodes(traj, bad, "plant-gain-bound",
                  [&](std::size_t first, std::size_t last, std::size_t worst,
                      double badness) {
                    return strfmt(
                        "|g_%d| left its declared range [%g, %g] by %.6g "
                        "(worst at t=%.6g) between t=%.6g and t=%.6g",
                        g + 1, glo, ghi, badness, rows[worst].t,
                        rows[first].t, rows[last].t);
                  },
                  out);
  }

  // Declared reference-derivative bounds (strict).
  const std::size_t n_mu = scenario.reference.mu.size();
  for (std::size_t d = 1; d <= n_mu; ++d) {
    const double mu = scenario.reference.mu[d - 1];
    for (std::size_t i = 0; i < m; ++i) {
      const Jet ref =
          reference_eval(scenario.reference, rows[i].t, static_cast<int>(d));
      const double excess = std::abs(ref[static_cast<int>(d)]) - mu;
      bad[i] = excess >= 0.0 ? excess : -1.0;
    }
    scan_episodes(traj, bad, "reference-bound",
                  [&](std::size_t first, std::size_t last, std::size_t worst,
                      double badness) {
                    return strfmt(
                        "|d^%zu y_d/dt^%zu| met or exceeded its declared "
                        "bound %g by %.6g (worst at t=%.6g) between t=%.6g "
                        "and t=%.6g",
                        d, d, mu, badness, rows[worst].t, rows[first].t,
                        rows[last].t);
                  },
                  out);
  }

  // Declared corridor bounds (constrained runs with declared magnitudes):
  // the ceiling stays below psi_upper[0] and its derivatives below
  // psi_upper[i]; the floor stays above psi_lower[0] and its derivatives
  // below psi_lower[i] in magnitude.
  if (traj.constrained && scenario.constraints) {
    const OutputConstraints& c = *scenario.constraints;
    const auto corridor_scan = [&](const Expr& side,
                                   const std::vector<double>& psi,
                                   bool is_upper, const char* name) {
      if (psi.empty()) return;
      const int ord = static_cast<int>(psi.size()) - 1;
      for (std::size_t i = 0; i < m; ++i) {
        const Jet tj = Jet::time(rows[i].t, ord);
        const Jet v = side.eval({}, tj);
        double dev = is_upper ? v.value() - psi[0] : psi[0] - v.value();
        for (int d = 1; d <= ord; ++d)
          dev = std::max(dev, std::abs(v[d]) - psi[static_cast<std::size_t>(d)]);
        bad[i] = dev > 0.0 ? dev : -1.0;
      }
      scan_episodes(traj, bad, "reference-bound",
                    [&](std::size_t first, std::size_t last, std::size_t worst,
                        double badness) {
                      return strfmt(
                          "the corridor %s violated its declared magnitude "
                          "bounds by %.6g (worst at t=%.6g) between t=%.6g "
                          "and t=%.6g",
                          name, badness, rows[worst].t, rows[first].t,
                          rows[last].t);
                    },
                    out);
    };
    corridor_scan(c.upper, c.psi_upper, true, "ceiling");
    corridor_scan(c.lower, c.psi_lower, false, "floor");
  }

  return out;
}

}  // namespace satctl
