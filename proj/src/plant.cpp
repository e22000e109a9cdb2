#include "satctl/plant.hpp"

#include <cmath>
#include <string>

#include "satctl/errors.hpp"

namespace satctl {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

// Dense state span at uniform order k: entries above `live` are unreferenced
// placeholders (strict feedback keeps them out of every live right-hand side).
std::vector<Jet> truncated_states(const std::vector<Jet>& js, int live, int k) {
  std::vector<Jet> out;
  out.reserve(js.size());
  for (size_t i = 0; i < js.size(); ++i)
    out.push_back(static_cast<int>(i) <= live && js[i].order() >= k
                      ? js[i].truncated(k)
                      : Jet(k));
  return out;
}

}  // namespace

void PlantModel::validate() const {
  const size_t n = f.size();
  require(n >= 1, "plant needs at least one state equation");
  require(g.size() == n, "plant f and g lists must have equal length");
  require(g_lower.size() == n && g_upper.size() == n,
          "plant gain bounds must list one (lower, upper) pair per stage");
  for (size_t i = 0; i < n; ++i) {
    require(f[i].valid() && g[i].valid(), "plant has an unset stage expression");
    require(!f[i].uses_time() && !g[i].uses_time(),
            "plant stage expressions must be autonomous (no t)");
    const int stage = static_cast<int>(i) + 1;
    require(f[i].max_state() <= stage && g[i].max_state() <= stage,
            "stage " + std::to_string(stage) +
                " may only reference x1..x" + std::to_string(stage) +
                " (strict feedback)");
    require(std::isfinite(g_lower[i]) && std::isfinite(g_upper[i]) &&
                g_lower[i] > 0.0 && g_upper[i] >= g_lower[i],
            "plant gain bounds must satisfy 0 < lower <= upper per stage");
  }
}

PlantModel builtin_plant(const std::string& name) {
  if (name == "benchmark2") {
    PlantModel m;
    m.f = {Expr::parse("0.1*x1^2"), Expr::parse("0.1*x1*x2 - 0.2*x1")};
    m.g = {Expr::parse("1"), Expr::parse("1 + x1^2")};
    m.g_lower = {1.0, 1.0};
    m.g_upper = {1.0, 26.0};
    return m;
  }
  throw ConfigError("unknown built-in plant '" + name +
                    "' (available: benchmark2)");
}

std::vector<double> plant_rhs(const PlantModel& model, std::span<const double> x,
                              double u) {
  const int n = model.order();
  require(static_cast<int>(x.size()) == n,
          "state vector length does not match the plant order");
  std::vector<double> dx(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double next = (i + 1 < n) ? x[static_cast<size_t>(i) + 1] : u;
    dx[static_cast<size_t>(i)] =
        model.f[static_cast<size_t>(i)].eval(x, 0.0) +
        model.g[static_cast<size_t>(i)].eval(x, 0.0) * next;
    if (!std::isfinite(dx[static_cast<size_t>(i)]))
      throw NumericalError("plant right-hand side is not finite at stage " +
                           std::to_string(i + 1));
  }
  return dx;
}

std::vector<Jet> state_jets(const PlantModel& model, const SaturationParams& params,
                            std::span<const double> x, double u, const Jet& u_c,
                            int K) {
  const int n = model.order();
  require(static_cast<int>(x.size()) == n,
          "state vector length does not match the plant order");
  require(K >= 0 && K <= n + 1, "state jet order must lie in [0, n+1]");
  require(K == 0 || u_c.order() >= K - 1,
          "commanded-input jet is too short for the requested order");

  std::vector<Jet> js;
  js.reserve(static_cast<size_t>(n) + 1);
  for (int i = 0; i < n; ++i) js.emplace_back(K, x[static_cast<size_t>(i)]);
  Jet uj(K, u);

  for (int k = 0; k < K; ++k) {
    const std::vector<Jet> xk = truncated_states(js, n - 1, k);
    const Jet uk = uj.truncated(k);
    const Jet tk = Jet::time(0.0, k);  // plants are autonomous
    for (int i = 0; i < n; ++i) {
      const Jet& next = (i + 1 < n) ? xk[static_cast<size_t>(i) + 1] : uk;
      const Jet rhs = model.f[static_cast<size_t>(i)].eval(xk, tk) +
                      model.g[static_cast<size_t>(i)].eval(xk, tk) * next;
      js[static_cast<size_t>(i)][k + 1] = rhs[k];
    }
    uj[k + 1] = saturation_rhs(uk, u_c.truncated(k), params)[k];
  }

  js.push_back(uj);
  for (const Jet& j : js)
    if (!j.all_finite())
      throw NumericalError("state jets are not finite");
  return js;
}

std::vector<Jet> flow_jets(const PlantModel& model, std::span<const double> x,
                           double u) {
  const int n = model.order();
  require(static_cast<int>(x.size()) == n,
          "state vector length does not match the plant order");

  std::vector<Jet> js;
  js.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) js.emplace_back(n - i, x[static_cast<size_t>(i)]);

  for (int k = 0; k < n; ++k) {
    // Slot k+1 exists for stages i with order n-i >= k+1, i.e. i <= n-k-1;
    // the highest jet read at this step is x_{n-k}, which has order exactly k.
    const std::vector<Jet> xk = truncated_states(js, n - k, k);
    const Jet uk = Jet::constant(u, k);
    const Jet tk = Jet::time(0.0, k);
    for (int i = 0; i + k < n; ++i) {
      const Jet& next = (i + 1 < n) ? xk[static_cast<size_t>(i) + 1] : uk;
      const Jet rhs = model.f[static_cast<size_t>(i)].eval(xk, tk) +
                      model.g[static_cast<size_t>(i)].eval(xk, tk) * next;
      js[static_cast<size_t>(i)][k + 1] = rhs[k];
    }
  }

  for (const Jet& j : js)
    if (!j.all_finite())
      throw NumericalError("flow jets are not finite");
  return js;
}

void ReferenceSignal::validate() const {
  require(y_d.valid(), "reference trajectory expression is unset");
  require(y_d.max_state() == 0, "reference must be a function of t only");
  for (double m : mu)
    require(std::isfinite(m) && m > 0.0,
            "reference derivative bounds must be positive");
}

Jet reference_eval(const ReferenceSignal& ref, double t, int order) {
  return ref.y_d.eval(std::span<const Jet>{}, Jet::time(t, order));
}

void OutputConstraints::validate() const {
  require(upper.valid() && lower.valid(), "output constraint expression is unset");
  require(upper.max_state() == 0 && lower.max_state() == 0,
          "output constraints must be functions of t only");
  for (size_t i = 0; i < psi_upper.size(); ++i)
    require(std::isfinite(psi_upper[i]) && (i == 0 || psi_upper[i] > 0.0),
            "constraint derivative bounds must be positive");
  for (size_t i = 0; i < psi_lower.size(); ++i)
    require(std::isfinite(psi_lower[i]) && (i == 0 || psi_lower[i] > 0.0),
            "constraint derivative bounds must be positive");
}

CorridorJets constraint_eval(const OutputConstraints& c, const Jet& ref_jet,
                             double t) {
  const Jet tj = Jet::time(t, ref_jet.order());
  CorridorJets out{c.upper.eval(std::span<const Jet>{}, tj),
                   c.lower.eval(std::span<const Jet>{}, tj), Jet{}, Jet{}};
  if (!(out.upper.value() > out.lower.value()))
    throw ConfigError("output corridor is empty at t=" + std::to_string(t));
  out.alpha = ref_jet - out.lower;
  out.beta = out.upper - ref_jet;
  if (!(out.alpha.value() > 0.0) || !(out.beta.value() > 0.0))
    throw ConfigError("reference leaves the output corridor at t=" +
                      std::to_string(t) +
                      " (the tracking problem is infeasible)");
  return out;
}

}  // namespace satctl
