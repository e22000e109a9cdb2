#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "satctl/ctrl_blf.hpp"
#include "satctl/ctrl_global.hpp"
#include "satctl/plant.hpp"
#include "satctl/saturation.hpp"

namespace satctl {

// Fixed-step integration setup. The step ceiling 0.01 is a stability guard:
// the actuator dynamics carry gains of magnitude p1 ~ 100, so classical RK4
// needs p1*h well inside its stability region.
struct IntegratorSettings {
  double h = 1e-3;
  double T = 15.0;
  std::string method = "rk4";

  void validate() const;
  // Number of steps N such that the trajectory has N+1 nodes at t = k*h.
  long steps() const;
};

enum class ControllerKind { kGlobal, kBlf };

// One plant start: state vector, actuator state, and a label used to suffix
// per-run output files.
struct InitialCondition {
  std::vector<double> x;
  double u0 = 0.0;
  std::string label;
};

// Which artifacts a run should emit.
struct OutputFlags {
  bool csv = true;
  bool json = true;
  bool svg = true;
};

// Everything a run needs, bundled: the plant, the controller selection and
// gains, the actuator model, the reference, the output corridor (required for
// the constrained controller), the starts, and the integrator setup.
struct ScenarioConfig {
  PlantModel plant;
  ControllerKind controller = ControllerKind::kGlobal;
  int r = 1;  // barrier exponent; needs 2r >= plant order
  ControllerGains gains;
  SaturationParams saturation;
  ReferenceSignal reference;
  std::optional<OutputConstraints> constraints;
  std::vector<InitialCondition> initial_conditions;
  IntegratorSettings integrator;
  OutputFlags outputs;

  void validate() const;
};

// One recorded instant of the closed loop. The margin/envelope entries are
// NaN for unconstrained runs (they serialize as empty cells); lyap is V for
// the plain controller and W for the constrained one, and lyap_dot is the
// closed-form derivative along the flow (kept so monitors can compare it
// against finite differences of lyap without re-running the controller).
struct TrajectoryRow {
  double t = 0.0;
  std::vector<double> x;
  double u = 0.0;
  double u_c = 0.0;
  double y_d = 0.0;
  std::vector<double> phi;
  double varrho = 0.0;
  double lyap = 0.0;
  double lyap_dot = 0.0;
  double margin_lower = 0.0;
  double margin_upper = 0.0;
  double env_lower = 0.0;
  double env_upper = 0.0;
};

struct Trajectory {
  int n = 0;                 // plant order: x and phi carry n entries per row
  bool constrained = false;  // margins/envelope populated
  std::vector<TrajectoryRow> rows;
};

// Run-level aggregates. Input extrema are taken over every integrator stage
// evaluation, not just the recorded nodes; margins are NaN when the run has
// no corridor.
struct SummaryStats {
  double max_u = 0.0;
  double min_u = 0.0;
  double max_u_c = 0.0;  // max |u_c| at recorded nodes
  double final_phi1 = 0.0;
  double min_margin_lower = 0.0;
  double min_margin_upper = 0.0;
  double max_identity_residual = 0.0;
  int decay_violations = 0;
};

struct RunResult {
  Trajectory trajectory;
  SummaryStats stats;
};

// The augmented closed loop: plant states plus the actuator state (last
// entry), with the command re-evaluated from the static feedback law at every
// point it is queried.
class ClosedLoop {
 public:
  explicit ClosedLoop(const ScenarioConfig& scenario);

  // Full evaluation at one point: derivatives, command, error coordinates,
  // Lyapunov value and closed-form rate, and (when constrained) the corridor
  // geometry needed for margins and the tracking envelope.
  struct PointEval {
    std::vector<double> xdot;
    double udot = 0.0;
    double u_c = 0.0;
    double y_d = 0.0;
    ErrorState err;
    double lyap = 0.0;
    double lyap_dot = 0.0;
    bool constrained = false;
    double margin_lower = 0.0;
    double margin_upper = 0.0;
    Jet alpha;  // corridor gaps as jets of t (constrained runs only)
    Jet beta;
  };

  PointEval eval(std::span<const double> x, double u, double t) const;

  // Derivative of the augmented state [x1..xn, u]; what the integrator steps.
  std::vector<double> rhs(std::span<const double> state, double t) const;

  const ScenarioConfig& scenario() const { return *scenario_; }
  int order() const { return scenario_->plant.order(); }

 private:
  const ScenarioConfig* scenario_;
};

// One classical 4-stage Runge-Kutta step of a generic ODE. Throws
// NumericalError naming the stage (1-4) and the time if any intermediate
// state or derivative goes non-finite.
using RhsFn =
    std::function<std::vector<double>(std::span<const double>, double)>;
std::vector<double> rk4_step(std::span<const double> state, double t, double h,
                             const RhsFn& rhs);

// Integrates one initial condition of the scenario over [0, T], recording
// every node. Aborts by rethrowing, with the violating time attached:
// ViolationError for a barrier exit or a collapsed actuator gain,
// NumericalError for non-finite values.
RunResult simulate(const ScenarioConfig& scenario, std::size_t ic_index = 0);

// A certified-property failure found by post-hoc trajectory inspection.
struct MonitorFinding {
  std::string monitor;  // "input-confinement", "corridor", "decay",
                        // "identity", "envelope", "signal-bound",
                        // "plant-gain-bound", "reference-bound"
  double time = 0.0;
  std::string detail;
};

// The decay rate the exponential-bound monitor certifies: min_j 2 k_j for the
// plain controller; min(2 r k_1, 2 k_2, ..., 2 k_{n+1}) for the constrained
// one (the barrier stage contributes 2 r k_1).
double decay_rate(const ControllerGains& gains, ControllerKind kind, int r);

// Post-hoc verification of every certified property along a recorded
// trajectory: input confinement inside (u_min, u_max) (one finding per
// contiguous excursion), strict output-corridor containment, the exponential
// Lyapunov decay bound lyap <= 1.05 lyap(0) e^(-theta t) + 1e-12, agreement
// of finite-differenced lyap with the recorded closed-form rate to 1e-3
// relative, envelope containment with 5% slack, plant-gain and
// reference-derivative bound checks, and a global 1e6 signal bound.
std::vector<MonitorFinding> monitor_check(const Trajectory& traj,
                                          const ScenarioConfig& scenario);

}  // namespace satctl
