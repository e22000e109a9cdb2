#include "satctl/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "satctl/errors.hpp"
#include "satctl/strfmt.hpp"

namespace satctl {

namespace {

using njson = nlohmann::json;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Schema helpers: every lookup names the offending field on failure.

void check_keys(const njson& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool known =
        std::any_of(allowed.begin(), allowed.end(),
                    [&](const char* k) { return it.key() == k; });
    if (!known)
      throw ConfigError("unknown field \"" + it.key() + "\" in " + where);
  }
}

const njson& require_field(const njson& obj, const std::string& where,
                           const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end())
    throw ConfigError(strfmt("missing required field \"%s\" in %s", key,
                             where.c_str()));
  return *it;
}

double as_number(const njson& v, const std::string& what) {
  if (!v.is_number())
    throw ConfigError("field \"" + what + "\" must be a number");
  return v.get<double>();
}

int as_integer(const njson& v, const std::string& what) {
  if (!v.is_number_integer())
    throw ConfigError("field \"" + what + "\" must be an integer");
  return v.get<int>();
}

bool as_boolean(const njson& v, const std::string& what) {
  if (!v.is_boolean())
    throw ConfigError("field \"" + what + "\" must be a boolean");
  return v.get<bool>();
}

std::string as_string(const njson& v, const std::string& what) {
  if (!v.is_string())
    throw ConfigError("field \"" + what + "\" must be a string");
  return v.get<std::string>();
}

std::vector<double> as_number_array(const njson& v, const std::string& what) {
  if (!v.is_array())
    throw ConfigError("field \"" + what + "\" must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const njson& e : v) out.push_back(as_number(e, what));
  return out;
}

Expr as_expr(const njson& v, const std::string& what) {
  const std::string text = as_string(v, what);
  try {
    return Expr::parse(text);
  } catch (const ConfigError& e) {
    throw ConfigError("field \"" + what + "\": " + e.what());
  }
}

PlantModel parse_plant(const njson& jp) {
  if (jp.is_string()) return builtin_plant(jp.get<std::string>());
  if (!jp.is_object())
    throw ConfigError(
        "field \"plant\" must be a built-in plant name or an object with f, "
        "g, g_lower, g_upper");
  check_keys(jp, "plant", {"f", "g", "g_lower", "g_upper"});
  PlantModel m;
  const njson& jf = require_field(jp, "plant", "f");
  const njson& jg = require_field(jp, "plant", "g");
  if (!jf.is_array() || !jg.is_array())
    throw ConfigError(
        "fields \"plant.f\" and \"plant.g\" must be arrays of expression "
        "strings");
  for (std::size_t i = 0; i < jf.size(); ++i)
    m.f.push_back(as_expr(jf[i], strfmt("plant.f[%zu]", i)));
  for (std::size_t i = 0; i < jg.size(); ++i)
    m.g.push_back(as_expr(jg[i], strfmt("plant.g[%zu]", i)));
  m.g_lower = as_number_array(require_field(jp, "plant", "g_lower"),
                              "plant.g_lower");
  m.g_upper = as_number_array(require_field(jp, "plant", "g_upper"),
                              "plant.g_upper");
  return m;
}

std::string default_label(std::size_t index) {
  return strfmt("ic%zu", index + 1);
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
  njson doc;
  try {
    doc = njson::parse(text);
  } catch (const njson::parse_error& e) {
    throw ConfigError(std::string("malformed scenario document: ") + e.what());
  }
  if (!doc.is_object())
    throw ConfigError("the scenario document must be a JSON object");
  check_keys(doc, "the scenario",
             {"plant", "controller", "r", "gains", "saturation", "reference",
              "constraints", "initial_conditions", "integrator", "outputs"});

  ScenarioConfig sc;
  sc.plant = parse_plant(require_field(doc, "the scenario", "plant"));

  const std::string kind =
      as_string(require_field(doc, "the scenario", "controller"), "controller");
  if (kind == "global") {
    sc.controller = ControllerKind::kGlobal;
  } else if (kind == "blf") {
    sc.controller = ControllerKind::kBlf;
  } else {
    throw ConfigError(
        "field \"controller\" must be \"global\" or \"blf\", got \"" + kind +
        "\"");
  }

  if (doc.contains("r")) sc.r = as_integer(doc["r"], "r");

  const njson& jg = require_field(doc, "the scenario", "gains");
  if (!jg.is_object()) throw ConfigError("field \"gains\" must be an object");
  check_keys(jg, "gains", {"k", "delta"});
  sc.gains.k = as_number_array(require_field(jg, "gains", "k"), "gains.k");
  if (jg.contains("delta"))
    sc.gains.delta = as_number(jg["delta"], "gains.delta");

  const njson& js = require_field(doc, "the scenario", "saturation");
  if (!js.is_object())
    throw ConfigError("field \"saturation\" must be an object");
  check_keys(js, "saturation", {"p1", "p2", "gamma", "u_min", "u_max"});
  sc.saturation.p1 = as_number(require_field(js, "saturation", "p1"),
                               "saturation.p1");
  sc.saturation.p2 = as_number(require_field(js, "saturation", "p2"),
                               "saturation.p2");
  sc.saturation.gamma = as_integer(require_field(js, "saturation", "gamma"),
                                   "saturation.gamma");
  sc.saturation.u_min = as_number(require_field(js, "saturation", "u_min"),
                                  "saturation.u_min");
  sc.saturation.u_max = as_number(require_field(js, "saturation", "u_max"),
                                  "saturation.u_max");

  const njson& jr = require_field(doc, "the scenario", "reference");
  if (!jr.is_object())
    throw ConfigError("field \"reference\" must be an object");
  check_keys(jr, "reference", {"y_d", "mu"});
  sc.reference.y_d =
      as_expr(require_field(jr, "reference", "y_d"), "reference.y_d");
  sc.reference.mu = jr.contains("mu")
                        ? as_number_array(jr["mu"], "reference.mu")
                        : std::vector<double>{0.31};

  if (doc.contains("constraints")) {
    const njson& jc = doc["constraints"];
    if (!jc.is_object())
      throw ConfigError("field \"constraints\" must be an object");
    check_keys(jc, "constraints", {"upper", "lower", "psi_upper", "psi_lower"});
    OutputConstraints oc;
    oc.upper = as_expr(require_field(jc, "constraints", "upper"),
                       "constraints.upper");
    oc.lower = as_expr(require_field(jc, "constraints", "lower"),
                       "constraints.lower");
    if (jc.contains("psi_upper"))
      oc.psi_upper = as_number_array(jc["psi_upper"], "constraints.psi_upper");
    if (jc.contains("psi_lower"))
      oc.psi_lower = as_number_array(jc["psi_lower"], "constraints.psi_lower");
    sc.constraints = std::move(oc);
  }

  const njson& jic =
      require_field(doc, "the scenario", "initial_conditions");
  if (!jic.is_array() || jic.empty())
    throw ConfigError(
        "field \"initial_conditions\" must be a non-empty array");
  for (std::size_t i = 0; i < jic.size(); ++i) {
    const njson& e = jic[i];
    const std::string where = strfmt("initial_conditions[%zu]", i);
    if (!e.is_object())
      throw ConfigError("field \"" + where + "\" must be an object");
    check_keys(e, where, {"x", "u0", "label"});
    InitialCondition ic;
    ic.x = as_number_array(require_field(e, where, "x"), where + ".x");
    if (e.contains("u0")) ic.u0 = as_number(e["u0"], where + ".u0");
    ic.label = e.contains("label") ? as_string(e["label"], where + ".label")
                                   : default_label(i);
    if (ic.label.empty())
      throw ConfigError("field \"" + where + ".label\" must be non-empty");
    for (char c : ic.label)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
            c == '-'))
        throw ConfigError("field \"" + where +
                          ".label\" may only use letters, digits, '_' and "
                          "'-' (it names output files)");
    sc.initial_conditions.push_back(std::move(ic));
  }

  const njson& ji = require_field(doc, "the scenario", "integrator");
  if (!ji.is_object())
    throw ConfigError("field \"integrator\" must be an object");
  check_keys(ji, "integrator", {"h", "T", "method"});
  sc.integrator.h = as_number(require_field(ji, "integrator", "h"),
                              "integrator.h");
  sc.integrator.T = as_number(require_field(ji, "integrator", "T"),
                              "integrator.T");
  if (ji.contains("method"))
    sc.integrator.method = as_string(ji["method"], "integrator.method");

  if (doc.contains("outputs")) {
    const njson& jo = doc["outputs"];
    if (!jo.is_object())
      throw ConfigError("field \"outputs\" must be an object");
    check_keys(jo, "outputs", {"csv", "json", "svg"});
    if (jo.contains("csv")) sc.outputs.csv = as_boolean(jo["csv"], "outputs.csv");
    if (jo.contains("json"))
      sc.outputs.json = as_boolean(jo["json"], "outputs.json");
    if (jo.contains("svg")) sc.outputs.svg = as_boolean(jo["svg"], "outputs.svg");
  }

  sc.validate();
  return sc;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  try {
    return parse_scenario(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// CSV

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");

  f << "t";
  for (int i = 1; i <= traj.n; ++i) f << ",x" << i;
  f << ",u,u_c,y_d";
  for (int i = 1; i <= traj.n; ++i) f << ",phi" << i;
  f << ",varrho,lyap,margin_lower,margin_upper,env_lower,env_upper\n";

  std::string line;
  char buf[32];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    line += buf;
  };
  const auto put_opt = [&](double v) {
    if (!std::isnan(v)) put(v);
  };
  for (const TrajectoryRow& r : traj.rows) {
    line.clear();
    put(r.t);
    for (double v : r.x) {
      line += ',';
      put(v);
    }
    line += ',';
    put(r.u);
    line += ',';
    put(r.u_c);
    line += ',';
    put(r.y_d);
    for (double v : r.phi) {
      line += ',';
      put(v);
    }
    line += ',';
    put(r.varrho);
    line += ',';
    put(r.lyap);
    line += ',';
    put_opt(r.margin_lower);
    line += ',';
    put_opt(r.margin_upper);
    line += ',';
    put_opt(r.env_lower);
    line += ',';
    put_opt(r.env_upper);
    line += '\n';
    f << line;
  }
  if (!f) throw ConfigError("failed while writing '" + path + "'");
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_cell(const std::string& cell, const std::string& path,
                  std::size_t line_no) {
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0')
    throw ConfigError(strfmt("%s:%zu: '%s' is not a number", path.c_str(),
                             line_no, cell.c_str()));
  return v;
}

}  // namespace

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(f, line))
    throw ConfigError("'" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_csv(line);
  int n = 0;
  while (1 + n < static_cast<int>(header.size()) &&
         header[static_cast<std::size_t>(1 + n)] ==
             strfmt("x%d", n + 1))
    ++n;
  const std::size_t expected = 2 * static_cast<std::size_t>(n) + 10;
  if (n == 0 || header.size() != expected || header[0] != "t" ||
      header[expected - 4] != "margin_lower")
    throw ConfigError("'" + path + "' is not a trajectory table");

  Trajectory traj;
  traj.n = n;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv(line);
    if (cells.size() != expected)
      throw ConfigError(strfmt("%s:%zu: expected %zu cells, found %zu",
                               path.c_str(), line_no, expected, cells.size()));
    TrajectoryRow r;
    std::size_t c = 0;
    const auto next = [&] { return parse_cell(cells[c++], path, line_no); };
    r.t = next();
    r.x.resize(static_cast<std::size_t>(n));
    for (double& v : r.x) v = next();
    r.u = next();
    r.u_c = next();
    r.y_d = next();
    r.phi.resize(static_cast<std::size_t>(n));
    for (double& v : r.phi) v = next();
    r.varrho = next();
    r.lyap = next();
    r.lyap_dot = std::numeric_limits<double>::quiet_NaN();  // not a column
    r.margin_lower = next();
    r.margin_upper = next();
    r.env_lower = next();
    r.env_upper = next();
    traj.rows.push_back(std::move(r));
  }
  traj.constrained =
      !traj.rows.empty() && !std::isnan(traj.rows.front().margin_lower);
  return traj;
}

// ---------------------------------------------------------------------------
// Summary JSON

namespace {

ojson finding_json(const MonitorFinding& f) {
  ojson j;
  j["monitor"] = f.monitor;
  j["time"] = f.time;
  j["detail"] = f.detail;
  return j;
}

// NaN has no JSON representation; emit null explicitly for clarity.
ojson number_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

}  // namespace

void write_summary_json(const std::vector<CompletedRun>& runs,
                        const ScenarioConfig& scenario,
                        const std::string& path) {
  ojson j;
  j["scenario"]["controller"] =
      scenario.controller == ControllerKind::kBlf ? "blf" : "global";
  j["scenario"]["plant_order"] = scenario.plant.order();
  j["scenario"]["h"] = scenario.integrator.h;
  j["scenario"]["T"] = scenario.integrator.T;
  j["scenario"]["u_min"] = scenario.saturation.u_min;
  j["scenario"]["u_max"] = scenario.saturation.u_max;

  double max_u = -std::numeric_limits<double>::infinity();
  double min_u = std::numeric_limits<double>::infinity();
  std::size_t violations = 0;
  for (const CompletedRun& r : runs) {
    max_u = std::max(max_u, r.result.stats.max_u);
    min_u = std::min(min_u, r.result.stats.min_u);
    violations += r.findings.size();
  }
  j["max_u"] = max_u;
  j["min_u"] = min_u;
  j["violation_count"] = violations;

  j["runs"] = ojson::array();
  for (const CompletedRun& r : runs) {
    const SummaryStats& st = r.result.stats;
    ojson e;
    e["label"] = r.label;
    e["max_u"] = st.max_u;
    e["min_u"] = st.min_u;
    e["max_u_c"] = st.max_u_c;
    e["final_phi1"] = st.final_phi1;
    e["min_margin_lower"] = number_or_null(st.min_margin_lower);
    e["min_margin_upper"] = number_or_null(st.min_margin_upper);
    e["max_identity_residual"] = st.max_identity_residual;
    e["decay_violations"] = st.decay_violations;
    e["violations"] = ojson::array();
    for (const MonitorFinding& f : r.findings)
      e["violations"].push_back(finding_json(f));
    j["runs"].push_back(std::move(e));
  }

  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f << j.dump(2) << "\n";
  if (!f) throw ConfigError("failed while writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// SVG plots

namespace {

struct Series {
  std::vector<double> xs;
  std::vector<double> ys;
  const char* color = "#1f77b4";
  bool dashed = false;
};

// Column extractor over the recorded rows with a fixed stride so huge
// trajectories stay at plotting resolution; the final node is always kept.
Series sample_series(const Trajectory& traj, double (*pick)(const TrajectoryRow&),
                     const char* color, bool dashed) {
  Series s;
  s.color = color;
  s.dashed = dashed;
  const std::size_t m = traj.rows.size();
  const std::size_t stride = std::max<std::size_t>(1, (m - 1) / 1200);
  for (std::size_t i = 0; i < m; i += stride) {
    s.xs.push_back(traj.rows[i].t);
    s.ys.push_back(pick(traj.rows[i]));
  }
  if (((m - 1) % stride) != 0) {
    s.xs.push_back(traj.rows.back().t);
    s.ys.push_back(pick(traj.rows.back()));
  }
  return s;
}

void draw_panel(std::string& svg, double px, double py, double pw, double ph,
                const std::string& title, const std::vector<Series>& series) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = x0, y1 = -x0;
  for (const Series& s : series)
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      x0 = std::min(x0, s.xs[i]);
      x1 = std::max(x1, s.xs[i]);
      y0 = std::min(y0, s.ys[i]);
      y1 = std::max(y1, s.ys[i]);
    }
  if (!(x1 > x0)) {
    x0 -= 1.0;
    x1 += 1.0;
  }
  const double pad = (y1 - y0) < 1e-12 ? 1.0 : 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  const auto X = [&](double x) { return px + (x - x0) / (x1 - x0) * pw; };
  const auto Y = [&](double y) { return py + ph - (y - y0) / (y1 - y0) * ph; };

  svg += strfmt(
      "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
      "fill=\"white\" stroke=\"#444\"/>\n",
      px, py, pw, ph);
  svg += strfmt(
      "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" "
      "font-size=\"14\" fill=\"#111\">%s</text>\n",
      px, py - 8.0, title.c_str());

  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0;
    const double yv = y0 + (y1 - y0) * k / 4.0;
    svg += strfmt(
        "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
        "stroke=\"#ddd\"/>\n",
        X(xv), py, X(xv), py + ph);
    svg += strfmt(
        "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
        "stroke=\"#ddd\"/>\n",
        px, Y(yv), px + pw, Y(yv));
    svg += strfmt(
        "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" "
        "font-size=\"10\" fill=\"#333\" text-anchor=\"middle\">%.3g</text>\n",
        X(xv), py + ph + 14.0, xv);
    svg += strfmt(
        "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" "
        "font-size=\"10\" fill=\"#333\" text-anchor=\"end\">%.3g</text>\n",
        px - 4.0, Y(yv) + 3.0, yv);
  }

  for (const Series& s : series) {
    svg += strfmt("<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"1.3\"%s points=\"",
                  s.color, s.dashed ? " stroke-dasharray=\"6 4\"" : "");
    for (std::size_t i = 0; i < s.xs.size(); ++i)
      svg += strfmt("%.2f,%.2f ", X(s.xs[i]), Y(s.ys[i]));
    svg += "\"/>\n";
  }
}

Series flat_line(double t0, double t1, double level, const char* color) {
  Series s;
  s.xs = {t0, t1};
  s.ys = {level, level};
  s.color = color;
  s.dashed = true;
  return s;
}

}  // namespace

void write_plots_svg(const Trajectory& traj, const ScenarioConfig& scenario,
                     const std::string& path) {
  if (traj.rows.empty()) throw ConfigError("cannot plot an empty trajectory");
  const double t0 = traj.rows.front().t;
  const double t1 = traj.rows.back().t;

  std::string svg;
  svg +=
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1180\" "
      "height=\"820\" viewBox=\"0 0 1180 820\">\n"
      "<rect width=\"1180\" height=\"820\" fill=\"white\"/>\n";

  // Output panel: plant output, reference, corridor edges when present.
  {
    std::vector<Series> ss;
    ss.push_back(sample_series(
        traj, [](const TrajectoryRow& r) { return r.x[0]; }, "#1f77b4", false));
    ss.push_back(sample_series(
        traj, [](const TrajectoryRow& r) { return r.y_d; }, "#d62728", true));
    if (traj.constrained) {
      ss.push_back(sample_series(
          traj, [](const TrajectoryRow& r) { return r.x[0] - r.margin_lower; },
          "#777777", true));
      ss.push_back(sample_series(
          traj, [](const TrajectoryRow& r) { return r.x[0] + r.margin_upper; },
          "#777777", true));
    }
    draw_panel(svg, 60, 40, 480, 320,
               traj.constrained
                   ? "output y (blue), reference (red), corridor (gray)"
                   : "output y (blue), reference (red)",
               ss);
  }

  // Input panel with the saturation rails.
  {
    std::vector<Series> ss;
    ss.push_back(sample_series(
        traj, [](const TrajectoryRow& r) { return r.u; }, "#1f77b4", false));
    ss.push_back(flat_line(t0, t1, scenario.saturation.u_max, "#d62728"));
    ss.push_back(flat_line(t0, t1, scenario.saturation.u_min, "#d62728"));
    draw_panel(svg, 640, 40, 480, 320, "plant input u and saturation bounds",
               ss);
  }

  // Commanded-input panel.
  {
    std::vector<Series> ss;
    ss.push_back(sample_series(
        traj, [](const TrajectoryRow& r) { return r.u_c; }, "#1f77b4", false));
    draw_panel(svg, 60, 440, 480, 320, "commanded input u_c", ss);
  }

  // Tracking-error panel with the certified envelope when present.
  {
    std::vector<Series> ss;
    ss.push_back(sample_series(
        traj, [](const TrajectoryRow& r) { return r.phi[0]; }, "#1f77b4",
        false));
    if (traj.constrained) {
      ss.push_back(sample_series(
          traj, [](const TrajectoryRow& r) { return r.env_lower; }, "#2ca02c",
          true));
      ss.push_back(sample_series(
          traj, [](const TrajectoryRow& r) { return r.env_upper; }, "#2ca02c",
          true));
    }
    draw_panel(svg, 640, 440, 480, 320,
               traj.constrained
                   ? "tracking error (blue) and certified envelope (green)"
                   : "tracking error y - y_d",
               ss);
  }

  svg += "</svg>\n";

  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f << svg;
  if (!f) throw ConfigError("failed while writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Execution

namespace {

CompletedRun execute_one(const ScenarioConfig& scenario, std::size_t index) {
  CompletedRun run;
  run.label = scenario.initial_conditions[index].label.empty()
                  ? default_label(index)
                  : scenario.initial_conditions[index].label;
  run.result = simulate(scenario, index);
  run.findings = monitor_check(run.result.trajectory, scenario);
  return run;
}

}  // namespace

std::vector<CompletedRun> execute_scenario(const ScenarioConfig& scenario,
                                           const std::string& out_dir) {
  scenario.validate();
  const std::size_t m = scenario.initial_conditions.size();
  std::vector<CompletedRun> runs(m);

  if (m == 1) {
    runs[0] = execute_one(scenario, 0);
  } else {
    std::vector<std::future<CompletedRun>> futures;
    futures.reserve(m);
    for (std::size_t i = 0; i < m; ++i)
      futures.push_back(std::async(std::launch::async, [&scenario, i] {
        return execute_one(scenario, i);
      }));
    std::exception_ptr first_error;
    for (std::size_t i = 0; i < m; ++i) {
      try {
        runs[i] = futures[i].get();
      } catch (...) {
        if (!first_error) first_error = std::current_exception();
      }
    }
    if (first_error) std::rethrow_exception(first_error);
  }

  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
      throw ConfigError("cannot create output directory '" + out_dir +
                        "': " + ec.message());
    for (const CompletedRun& run : runs) {
      const std::string suffix = m > 1 ? "_" + run.label : "";
      if (scenario.outputs.csv)
        write_trajectory_csv(run.result.trajectory,
                             out_dir + "/trajectory" + suffix + ".csv");
      if (scenario.outputs.svg)
        write_plots_svg(run.result.trajectory, scenario,
                        out_dir + "/plots" + suffix + ".svg");
    }
    if (scenario.outputs.json)
      write_summary_json(runs, scenario, out_dir + "/summary.json");
  }
  return runs;
}

int run_command(int argc, const char* const* argv, std::ostream& out,
                std::ostream& err) {
  CLI::App app{
      "satctl: backstepping tracking control under smooth asymmetric "
      "actuator saturation"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  double xi = 1.0;

  CLI::App* cmd_run = app.add_subcommand(
      "run", "simulate a scenario and write trajectory/summary/plot files");
  cmd_run->add_option("--scenario", scenario_path, "scenario JSON file")
      ->required();
  cmd_run->add_option("--out", out_dir, "output directory")->required();

  CLI::App* cmd_verify = app.add_subcommand(
      "verify", "simulate a scenario and report monitor findings (no files)");
  cmd_verify->add_option("--scenario", scenario_path, "scenario JSON file")
      ->required();

  CLI::App* cmd_bounds = app.add_subcommand(
      "bounds",
      "print the input-confinement certificate for a command bound xi");
  cmd_bounds->add_option("--xi", xi, "bound on |u_c|")->required();
  cmd_bounds->add_option("--scenario", scenario_path, "scenario JSON file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 3;
  }

  try {
    const ScenarioConfig scenario = load_scenario(scenario_path);

    if (cmd_bounds->parsed()) {
      const ConfinementCertificate cert =
          invariant_bounds(scenario.saturation, xi);
      out << strfmt("xi = %g\nu_tilde_max = %.6f\nu_tilde_min = %.6f\n", xi,
                    cert.u_tilde_max, cert.u_tilde_min);
      return 0;
    }

    const std::vector<CompletedRun> runs =
        execute_scenario(scenario, cmd_run->parsed() ? out_dir : "");
    std::size_t findings = 0;
    for (const CompletedRun& run : runs) {
      if (run.findings.empty()) {
        out << strfmt("%s: ok  (max_u=%.6g, min_u=%.6g, final |y-y_d|=%.3g)\n",
                      run.label.c_str(), run.result.stats.max_u,
                      run.result.stats.min_u, run.result.stats.final_phi1);
        continue;
      }
      for (const MonitorFinding& f : run.findings)
        out << strfmt("%s: %s at t=%.6g: %s\n", run.label.c_str(),
                      f.monitor.c_str(), f.time, f.detail.c_str());
      findings += run.findings.size();
    }
    if (findings > 0) {
      out << strfmt("%zu finding(s)\n", findings);
      return 2;
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return 3;
  } catch (const ViolationError& e) {
    err << strfmt("violation (%s) at t=%.6g: %s\n", e.monitor().c_str(),
                  e.time(), e.what());
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace satctl
