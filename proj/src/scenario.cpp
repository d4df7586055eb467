#include "crflow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "crflow/diagnostics.hpp"
#include "crflow/elliptic.hpp"
#include "crflow/errors.hpp"
#include "json.hpp"

namespace crflow {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

//----------------------------------------------------------------------------
// Enum <-> string maps
//----------------------------------------------------------------------------

std::string to_string(GeometryKind k) {
  return k == GeometryKind::radial_af ? "radial_af" : "homogeneous";
}
std::string to_string(FlowKind k) {
  switch (k) {
    case FlowKind::crf: return "crf";
    case FlowKind::dtcrf: return "dtcrf";
    default: return "ricci";
  }
}
std::string to_string(ReferenceKind k) {
  return k == ReferenceKind::euclidean ? "euclidean" : "initial";
}
std::string to_string(InitialFamily f) {
  switch (f) {
    case InitialFamily::flat: return "flat";
    case InitialFamily::schwarzschild_conformal: return "schwarzschild_conformal";
    case InitialFamily::perturbed_af: return "perturbed_af";
    default: return "homogeneous";
  }
}
std::string to_string(Termination t) {
  switch (t) {
    case Termination::completed: return "completed";
    case Termination::pressure_failure: return "pressure_failure";
    default: return "numerical_breakdown";
  }
}

GeometryKind geometry_from(const std::string& v, const std::string& field) {
  if (v == "radial_af") return GeometryKind::radial_af;
  if (v == "homogeneous") return GeometryKind::homogeneous;
  throw ConfigError(field + ": expected 'radial_af' or 'homogeneous', got '" +
                    v + "'");
}
FlowKind flow_from(const std::string& v, const std::string& field) {
  if (v == "crf") return FlowKind::crf;
  if (v == "dtcrf") return FlowKind::dtcrf;
  if (v == "ricci") return FlowKind::ricci;
  throw ConfigError(field + ": expected 'crf', 'dtcrf' or 'ricci', got '" +
                    v + "'");
}
ReferenceKind reference_from(const std::string& v, const std::string& field) {
  if (v == "euclidean") return ReferenceKind::euclidean;
  if (v == "initial") return ReferenceKind::initial;
  throw ConfigError(field + ": expected 'euclidean' or 'initial', got '" + v +
                    "'");
}
InitialFamily family_from(const std::string& v, const std::string& field) {
  if (v == "flat") return InitialFamily::flat;
  if (v == "schwarzschild_conformal")
    return InitialFamily::schwarzschild_conformal;
  if (v == "perturbed_af") return InitialFamily::perturbed_af;
  if (v == "homogeneous") return InitialFamily::homogeneous;
  throw ConfigError(field +
                    ": expected one of 'flat', 'schwarzschild_conformal', "
                    "'perturbed_af', 'homogeneous', got '" +
                    v + "'");
}

//----------------------------------------------------------------------------
// Strict document access
//----------------------------------------------------------------------------

void check_keys(const json& obj, const std::string& block,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw ConfigError("unknown key '" + it.key() + "' in " + block);
  }
}

json get_block(const json& doc, const char* key) {
  if (!doc.contains(key)) return json::object();
  const json& b = doc.at(key);
  if (!b.is_object())
    throw ConfigError(std::string(key) + ": expected an object");
  return b;
}

double get_num(const json& obj, const std::string& block, const char* key,
               double dflt) {
  if (!obj.contains(key)) return dflt;
  const json& v = obj.at(key);
  if (!v.is_number())
    throw ConfigError(block + "." + key + ": expected a number");
  return v.get<double>();
}

std::size_t get_count(const json& obj, const std::string& block,
                      const char* key, std::size_t dflt) {
  if (!obj.contains(key)) return dflt;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(block + "." + key +
                      ": expected a nonnegative integer");
  return static_cast<std::size_t>(v.get<long long>());
}

bool get_bool(const json& obj, const std::string& block, const char* key,
              bool dflt) {
  if (!obj.contains(key)) return dflt;
  const json& v = obj.at(key);
  if (!v.is_boolean())
    throw ConfigError(block + "." + key + ": expected true or false");
  return v.get<bool>();
}

std::string get_str(const json& obj, const std::string& block,
                    const char* key, const std::string& dflt) {
  if (!obj.contains(key)) return dflt;
  const json& v = obj.at(key);
  if (!v.is_string())
    throw ConfigError(block + "." + key + ": expected a string");
  return v.get<std::string>();
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

//----------------------------------------------------------------------------
// parse_config / scenario_to_json
//----------------------------------------------------------------------------

Scenario parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  check_keys(doc, "config",
             {"name", "geometry", "initial_data", "flow", "output"});

  Scenario s;
  s.name = get_str(doc, "config", "name", "unnamed");
  if (s.name.empty() ||
      s.name.find_first_not_of("abcdefghijklmnopqrstuvwxyz"
                               "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
          std::string::npos)
    throw ConfigError("config.name: use letters, digits, '_' or '-' (the "
                      "name becomes a directory)");

  const json geo = get_block(doc, "geometry");
  check_keys(geo, "geometry",
             {"kind", "dimension", "n_nodes", "rho_min", "rho_max", "tau"});
  s.geometry_kind =
      geometry_from(get_str(geo, "geometry", "kind", "radial_af"),
                    "geometry.kind");
  s.dimension = static_cast<int>(get_count(geo, "geometry", "dimension", 3));
  s.n_nodes = get_count(geo, "geometry", "n_nodes", 256);
  s.rho_min = get_num(geo, "geometry", "rho_min", 0.5);
  s.rho_max = get_num(geo, "geometry", "rho_max", 1000.0);
  s.tau = get_num(geo, "geometry", "tau", 0.0);

  const json init = get_block(doc, "initial_data");
  check_keys(init, "initial_data",
             {"family", "A0", "amplitude", "width", "center", "coeff",
              "lambda", "flatten"});
  const std::string default_family =
      s.geometry_kind == GeometryKind::homogeneous ? "homogeneous" : "flat";
  s.family = family_from(
      get_str(init, "initial_data", "family", default_family),
      "initial_data.family");
  s.A0 = get_num(init, "initial_data", "A0", 0.1);
  s.amplitude = get_num(init, "initial_data", "amplitude", 0.05);
  s.width = get_num(init, "initial_data", "width", 0.5);
  s.center = get_num(init, "initial_data", "center", 5.0);
  if (init.contains("coeff")) {
    const json& c = init.at("coeff");
    if (!c.is_array() || c.size() != 3)
      throw ConfigError("initial_data.coeff: expected an array of 3 numbers");
    for (int i = 0; i < 3; ++i) {
      if (!c[i].is_number())
        throw ConfigError("initial_data.coeff: expected an array of 3 numbers");
      s.coeff[static_cast<std::size_t>(i)] = c[i].get<double>();
    }
  }
  s.lambda = get_num(init, "initial_data", "lambda", 2.0);
  s.flatten = get_bool(init, "initial_data", "flatten", false);

  const json flow = get_block(doc, "flow");
  check_keys(flow, "flow",
             {"kind", "s0", "dt_safety", "t_end", "output_stride",
              "reference_metric"});
  s.flow.flow_kind = flow_from(get_str(flow, "flow", "kind", "crf"), "flow.kind");
  s.flow.geometry_kind = s.geometry_kind;
  s.flow.s0 = get_num(flow, "flow", "s0", 0.0);
  s.flow.dt_safety = get_num(flow, "flow", "dt_safety", 0.2);
  s.flow.t_end = get_num(flow, "flow", "t_end", 1.0e-3);
  s.flow.output_stride = get_count(flow, "flow", "output_stride", 1);
  s.flow.reference_metric = reference_from(
      get_str(flow, "flow", "reference_metric", "euclidean"),
      "flow.reference_metric");

  const json out = get_block(doc, "output");
  check_keys(out, "output", {"write_frames", "mass_radii"});
  s.write_frames = get_bool(out, "output", "write_frames", false);
  if (out.contains("mass_radii")) {
    const json& r = out.at("mass_radii");
    if (!r.is_array())
      throw ConfigError("output.mass_radii: expected an array of numbers");
    for (const json& v : r) {
      if (!v.is_number())
        throw ConfigError("output.mass_radii: expected an array of numbers");
      s.mass_radii.push_back(v.get<double>());
    }
  }

  // Cross-field validation -------------------------------------------------
  const bool homog = s.geometry_kind == GeometryKind::homogeneous;
  if (homog != (s.family == InitialFamily::homogeneous))
    throw ConfigError("initial_data.family '" + to_string(s.family) +
                      "' does not belong to geometry.kind '" +
                      to_string(s.geometry_kind) + "'");

  if (!(s.flow.dt_safety > 0.0 && s.flow.dt_safety <= 1.0))
    throw ConfigError("flow.dt_safety: must lie in (0, 1]");
  if (!(s.flow.t_end > 0.0) || !std::isfinite(s.flow.t_end))
    throw ConfigError("flow.t_end: must be positive and finite");
  if (s.flow.output_stride == 0)
    throw ConfigError("flow.output_stride: must be at least 1");

  if (homog) {
    if (s.dimension != 3)
      throw ConfigError("geometry.dimension: the homogeneous class is "
                        "three-dimensional");
    for (double c : s.coeff)
      if (!(c > 0.0) || !std::isfinite(c))
        throw ConfigError("initial_data.coeff: entries must be positive");
    if (s.lambda == 0.0 || !std::isfinite(s.lambda))
      throw ConfigError("initial_data.lambda: must be nonzero");
    if (s.flatten)
      throw ConfigError("initial_data.flatten: the conformal projection is "
                        "defined on the radial class only");
    if (!s.mass_radii.empty())
      throw ConfigError("output.mass_radii: the ADM mass is undefined on "
                        "the homogeneous (compact) class");
  } else {
    if (s.dimension < 3)
      throw ConfigError("geometry.dimension: need m >= 3");
    if (s.n_nodes < 16)
      throw ConfigError("geometry.n_nodes: need at least 16 nodes");
    if (!(s.rho_min > 0.0) || !(s.rho_max > s.rho_min))
      throw ConfigError("geometry: need 0 < rho_min < rho_max");
    if (s.flow.s0 != 0.0)
      throw ConfigError(
          "flow.s0: the asymptotically flat class requires s0 = 0 "
          "(scalar-flat hypothesis of the mass monotonicity theory)");
    if (s.tau == 0.0) s.tau = s.dimension - 2;
    if (!(s.tau > 0.0) || !std::isfinite(s.tau))
      throw ConfigError("geometry.tau: decay order must be positive");
    if (s.family == InitialFamily::schwarzschild_conformal &&
        !(1.0 + s.A0 / (2.0 * s.rho_min) > 0.0))
      throw ConfigError("initial_data.A0: conformal factor loses positivity "
                        "at rho_min");
    if (s.family == InitialFamily::perturbed_af) {
      if (!(s.width > 0.0))
        throw ConfigError("initial_data.width: must be positive");
      if (!(s.center > 0.0))
        throw ConfigError("initial_data.center: must be positive");
      if (!(s.amplitude > -1.0))
        throw ConfigError("initial_data.amplitude: must exceed -1 (the "
                          "tangential profile must stay positive)");
    }
    if (!s.mass_radii.empty()) {
      if (s.mass_radii.size() < 3)
        throw ConfigError("output.mass_radii: need at least 3 radii (or "
                          "none)");
      double lo = s.mass_radii[0], hi = s.mass_radii[0];
      for (double r : s.mass_radii) {
        if (!(r >= s.rho_min) || !(r <= s.rho_max))
          throw ConfigError("output.mass_radii: radius " + fmt17(r) +
                            " outside [rho_min, rho_max]");
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
      if (hi < 10.0 * lo)
        throw ConfigError("output.mass_radii: ladder must span at least one "
                          "decade");
    }
  }
  return s;
}

std::string scenario_to_json(const Scenario& s) {
  json doc;
  doc["name"] = s.name;
  doc["geometry"] = {{"kind", to_string(s.geometry_kind)},
                     {"dimension", s.dimension},
                     {"n_nodes", s.n_nodes},
                     {"rho_min", s.rho_min},
                     {"rho_max", s.rho_max},
                     {"tau", s.tau}};
  doc["initial_data"] = {{"family", to_string(s.family)},
                         {"A0", s.A0},
                         {"amplitude", s.amplitude},
                         {"width", s.width},
                         {"center", s.center},
                         {"coeff", s.coeff},
                         {"lambda", s.lambda},
                         {"flatten", s.flatten}};
  doc["flow"] = {{"kind", to_string(s.flow.flow_kind)},
                 {"s0", s.flow.s0},
                 {"dt_safety", s.flow.dt_safety},
                 {"t_end", s.flow.t_end},
                 {"output_stride", s.flow.output_stride},
                 {"reference_metric", to_string(s.flow.reference_metric)}};
  doc["output"] = {{"write_frames", s.write_frames},
                   {"mass_radii", s.mass_radii}};
  return doc.dump(2) + "\n";
}

//----------------------------------------------------------------------------
// Initial data
//----------------------------------------------------------------------------

RadialMetric schwarzschild_conformal_metric(
    std::shared_ptr<const RadialGrid> grid, double A0) {
  if (!grid) throw InvalidGrid("schwarzschild_conformal_metric: null grid");
  const std::size_t N = grid->n_nodes;
  std::vector<double> A(N), B(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double w = 1.0 + A0 / (2.0 * grid->nodes[i]);
    if (!(w > 0.0))
      throw NumericalBreakdown(
          "schwarzschild_conformal_metric: conformal factor not positive");
    A[i] = B[i] = w * w;
  }
  const double tau = grid->dimension - 2;
  return make_radial_metric(std::move(grid), std::move(A), std::move(B), tau);
}

RadialMetric perturbed_af_metric(std::shared_ptr<const RadialGrid> grid,
                                 double A0, double amplitude, double width,
                                 double center) {
  if (!grid) throw InvalidGrid("perturbed_af_metric: null grid");
  if (!(width > 0.0) || !(center > 0.0))
    throw ConfigError("perturbed_af_metric: width and center must be positive");
  const std::size_t N = grid->n_nodes;
  const double xc = std::log(center);
  std::vector<double> A(N), B(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double w = 1.0 + A0 / (2.0 * grid->nodes[i]);
    if (!(w > 0.0))
      throw ConfigError(
          "perturbed_af_metric: conformal factor loses positivity on the "
          "grid");
    const double w4 = w * w * w * w;
    const double dx = grid->x[i] - xc;
    const double bump =
        1.0 + amplitude * std::exp(-dx * dx / (2.0 * width * width));
    if (!(bump > 0.0))
      throw NumericalBreakdown(
          "perturbed_af_metric: tangential profile not positive");
    A[i] = std::sqrt(w4);
    B[i] = std::sqrt(w4 * bump);
  }
  const double tau = grid->dimension - 2;
  return make_radial_metric(std::move(grid), std::move(A), std::move(B), tau);
}

RadialMetric build_initial_radial(const Scenario& s) {
  if (s.geometry_kind != GeometryKind::radial_af)
    throw ConfigError("build_initial_radial: scenario is not radial");
  auto grid = std::make_shared<const RadialGrid>(
      build_radial_grid(s.rho_min, s.rho_max, s.n_nodes, s.dimension));
  RadialMetric g;
  switch (s.family) {
    case InitialFamily::flat:
      g = make_radial_metric(grid, std::vector<double>(s.n_nodes, 1.0),
                             std::vector<double>(s.n_nodes, 1.0), s.tau);
      break;
    case InitialFamily::schwarzschild_conformal:
      g = schwarzschild_conformal_metric(grid, s.A0);
      g.tau = s.tau;
      break;
    case InitialFamily::perturbed_af:
      g = perturbed_af_metric(grid, s.A0, s.amplitude, s.width, s.center);
      g.tau = s.tau;
      break;
    default:
      throw ConfigError(
          "build_initial_radial: homogeneous family on a radial scenario");
  }
  if (s.flatten) {
    FlattenResult flat = conformal_flatten(g);
    g = std::move(flat.metric);
  }
  return g;
}

HomogeneousMetric build_initial_homogeneous(const Scenario& s) {
  if (s.geometry_kind != GeometryKind::homogeneous)
    throw ConfigError("build_initial_homogeneous: scenario is not homogeneous");
  return make_homogeneous_metric(s.coeff, s.lambda);
}

//----------------------------------------------------------------------------
// Artifacts
//----------------------------------------------------------------------------

namespace {

const char* kCsvHeader =
    "t,s_min,s_max,constraint_drift,vol,Q,mass,mass_err,ric_l2,dev_l2,"
    "theta_check_residual";

json column_metadata() {
  return json{
      {"t", "frame time"},
      {"s_min", "minimum of the scalar curvature over the grid"},
      {"s_max", "maximum of the scalar curvature over the grid"},
      {"constraint_drift", "max_i |s_i - s0|"},
      {"vol", "Riemannian volume (homogeneous class; empty on radial runs)"},
      {"Q", "Yamabe quotient s * vol^(2/m) (homogeneous class; empty on "
            "radial runs)"},
      {"mass", "ADM mass, Richardson-extrapolated over the configured radii "
               "ladder (radial class; empty without a ladder)"},
      {"mass_err", "spread of the Richardson extrapolants (mass error bar)"},
      {"ric_l2", "integral of |Ric|^2 dvol (truncated at rho_max on radial "
                 "grids)"},
      {"dev_l2", "integral of |E|^2 dvol, E = Ric - (s0/m) g"},
      {"theta_check_residual",
       "max-node residual of the volume-element identity d/dt log "
       "sqrt(det g) = -(s - s0) - m p (+ div W for dtcrf; -s for ricci), "
       "time-differenced across recorded frames"},
  };
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out)
    throw NumericalBreakdown("run_scenario: failed writing " + path.string());
}

std::string timeseries_csv(const std::vector<DiagnosticsRecord>& recs) {
  std::string csv = kCsvHeader;
  csv += "\n";
  auto opt = [](const std::optional<double>& v) {
    return v.has_value() ? fmt17(*v) : std::string();
  };
  for (const DiagnosticsRecord& r : recs) {
    csv += fmt17(r.t) + "," + fmt17(r.s_min) + "," + fmt17(r.s_max) + "," +
           fmt17(r.constraint_drift) + "," + opt(r.vol) + "," + opt(r.Q) +
           "," + opt(r.mass) + "," + opt(r.mass_err) + "," + fmt17(r.ric_l2) +
           "," + fmt17(r.dev_l2) + "," + fmt17(r.theta_check_residual) + "\n";
  }
  return csv;
}

json frames_json(const FlowTrajectory& traj) {
  json frames = json::array();
  const bool homog =
      traj.config.geometry_kind == GeometryKind::homogeneous;
  for (const FlowState& st : traj.states) {
    json f;
    f["t"] = st.t;
    if (homog) {
      f["coeff"] = st.homogeneous().coeff;
    } else {
      f["A"] = st.radial().A;
      f["B"] = st.radial().B;
    }
    f["pressure"] = st.pressure.values;
    if (!st.gauge_w.empty()) f["gauge_w"] = st.gauge_w;
    frames.push_back(std::move(f));
  }
  return json{{"frames", std::move(frames)}};
}

// Largest frame-to-frame metric displacement from the initial data, in the
// sup norm over the metric components.
double max_metric_drift(const FlowTrajectory& traj) {
  double drift = 0.0;
  if (traj.states.empty()) return drift;
  if (traj.config.geometry_kind == GeometryKind::homogeneous) {
    const auto& x0 = traj.states.front().homogeneous().coeff;
    for (const FlowState& st : traj.states)
      for (int i = 0; i < 3; ++i)
        drift = std::max(drift, std::abs(st.homogeneous().coeff[i] - x0[i]));
  } else {
    const std::vector<double> a0 = traj.states.front().radial().a_profile();
    const std::vector<double> b0 = traj.states.front().radial().b_profile();
    for (const FlowState& st : traj.states) {
      const std::vector<double> a = st.radial().a_profile();
      const std::vector<double> b = st.radial().b_profile();
      for (std::size_t i = 0; i < a.size(); ++i) {
        drift = std::max(drift, std::abs(a[i] - a0[i]));
        drift = std::max(drift, std::abs(b[i] - b0[i]));
      }
    }
  }
  return drift;
}

}  // namespace

RunArtifacts run_scenario(const Scenario& s, const std::string& out_root) {
  FlowConfig cfg = s.flow;
  cfg.geometry_kind = s.geometry_kind;

  FlowTrajectory traj;
  if (s.geometry_kind == GeometryKind::homogeneous)
    traj = run_flow(cfg, build_initial_homogeneous(s));
  else
    traj = run_flow(cfg, build_initial_radial(s));

  std::string diag_error;
  try {
    attach_diagnostics(traj, s.mass_radii);
  } catch (const std::exception& e) {
    diag_error = e.what();
    try {
      attach_diagnostics(traj, {});
    } catch (const std::exception&) {
      traj.diagnostics.clear();
    }
  }

  RunArtifacts art;
  art.termination = traj.termination;
  const fs::path dir = fs::path(out_root) / s.name;
  fs::create_directories(dir);
  art.out_dir = dir.string();

  // timeseries.csv ----------------------------------------------------------
  const fs::path csv_path = dir / "timeseries.csv";
  write_text_file(csv_path, timeseries_csv(traj.diagnostics));
  art.timeseries_path = csv_path.string();

  // summary.json ------------------------------------------------------------
  json verdicts;
  const double drift = max_metric_drift(traj);
  verdicts["completed"] = traj.termination == Termination::completed;
  verdicts["fixed_point"] = drift <= 1e-10;
  if (s.geometry_kind == GeometryKind::homogeneous) {
    // Non-decreasing with a roundoff allowance so that an exact fixed point
    // (constant Q) counts as monotone.
    bool q_up = traj.diagnostics.size() >= 2;
    for (std::size_t k = 0; k + 1 < traj.diagnostics.size(); ++k) {
      const double q0 = traj.diagnostics[k].Q.value_or(0.0);
      const double q1 = traj.diagnostics[k + 1].Q.value_or(0.0);
      if (!(q1 >= q0 - 1e-12 * std::max(1.0, std::abs(q0)))) q_up = false;
    }
    verdicts["q_monotone_increasing"] = q_up;
  } else if (!s.mass_radii.empty() && diag_error.empty() &&
             traj.states.size() >= 2) {
    try {
      const MassRateReport mr = mass_derivative_check(traj, s.mass_radii);
      verdicts["mass_monotone_decreasing"] = mr.mass_monotone_decreasing;
      verdicts["mass_constant_within_tol"] =
          mr.max_rate_vs_gradient_scale <= 0.05;
      verdicts["mass_rate_vs_gradient_scale"] = mr.max_rate_vs_gradient_scale;
    } catch (const std::exception& e) {
      diag_error = e.what();
    }
  }

  json maxima;
  {
    double cmax = 0.0, tmax = 0.0, lmax = 0.0, emax = 0.0;
    for (const DiagnosticsRecord& r : traj.diagnostics) {
      cmax = std::max(cmax, r.constraint_drift);
      tmax = std::max(tmax, r.theta_check_residual);
      lmax = std::max(lmax, r.integral_tail_bound);
      if (r.mass_err) emax = std::max(emax, *r.mass_err);
    }
    double pmax = 0.0;
    for (const FlowState& st : traj.states)
      pmax = std::max(pmax, st.pressure.residual_norm);
    maxima["max_constraint_drift"] = cmax;
    maxima["max_theta_check_residual"] = tmax;
    maxima["max_integral_tail_bound"] = lmax;
    maxima["max_pressure_residual"] = pmax;
    maxima["max_metric_drift"] = drift;
    if (emax > 0.0) maxima["max_mass_error_bar"] = emax;
  }

  json summary;
  summary["config"] = json::parse(scenario_to_json(s));
  summary["termination"] = to_string(traj.termination);
  summary["termination_detail"] = traj.termination_detail;
  summary["dt"] = traj.dt;
  summary["steps_taken"] = traj.steps_taken;
  summary["frames"] = traj.states.size();
  summary["verdicts"] = std::move(verdicts);
  summary["residual_maxima"] = std::move(maxima);
  summary["columns"] = column_metadata();
  if (!diag_error.empty()) summary["diagnostics_error"] = diag_error;

  const fs::path summary_path = dir / "summary.json";
  write_text_file(summary_path, summary.dump(2) + "\n");
  art.summary_path = summary_path.string();

  // frames.json -------------------------------------------------------------
  if (s.write_frames) {
    const fs::path frames_path = dir / "frames.json";
    write_text_file(frames_path, frames_json(traj).dump(2) + "\n");
    art.frames_path = frames_path.string();
  }

  switch (traj.termination) {
    case Termination::completed:
      art.exit_code = diag_error.empty() ? 0 : 4;
      break;
    case Termination::pressure_failure:
      art.exit_code = 3;
      break;
    default:
      art.exit_code = 4;
      break;
  }
  return art;
}

//----------------------------------------------------------------------------
// Registry and schema
//----------------------------------------------------------------------------

namespace {

struct RegistryEntry {
  const char* name;
  const char* text;
};

// The flat entry is deliberately minimal: it exercises every default.
const RegistryEntry kRegistry[] = {
    {"flat", R"({
  "name": "flat"
})"},
    {"schwarzschild_conformal", R"({
  "name": "schwarzschild_conformal",
  "geometry": {"kind": "radial_af", "dimension": 3, "n_nodes": 400,
               "rho_min": 0.5, "rho_max": 1000.0},
  "initial_data": {"family": "schwarzschild_conformal", "A0": 0.1,
                   "flatten": true},
  "flow": {"kind": "crf", "s0": 0.0, "dt_safety": 0.2, "t_end": 2.3e-3},
  "output": {"mass_radii": [30.0, 100.0, 300.0, 900.0]}
})"},
    {"perturbed_af", R"({
  "name": "perturbed_af",
  "geometry": {"kind": "radial_af", "dimension": 3, "n_nodes": 400,
               "rho_min": 0.5, "rho_max": 1000.0},
  "initial_data": {"family": "perturbed_af", "A0": 0.1, "amplitude": 0.05,
                   "width": 0.5, "center": 5.0, "flatten": true},
  "flow": {"kind": "crf", "s0": 0.0, "dt_safety": 0.2, "t_end": 1.0e-3},
  "output": {"mass_radii": [30.0, 100.0, 300.0, 900.0]}
})"},
    {"squashed_homogeneous", R"({
  "name": "squashed_homogeneous",
  "geometry": {"kind": "homogeneous"},
  "initial_data": {"family": "homogeneous", "coeff": [1.0, 1.0, 2.0],
                   "lambda": 2.0},
  "flow": {"kind": "crf", "s0": 4.0, "dt_safety": 0.01, "t_end": 0.1}
})"},
    {"round_homogeneous", R"({
  "name": "round_homogeneous",
  "geometry": {"kind": "homogeneous"},
  "initial_data": {"family": "homogeneous", "coeff": [1.0, 1.0, 1.0],
                   "lambda": 2.0},
  "flow": {"kind": "crf", "s0": 6.0, "dt_safety": 0.2, "t_end": 2.0}
})"},
    {"ricci_comparison", R"({
  "name": "ricci_comparison",
  "geometry": {"kind": "radial_af", "dimension": 3, "n_nodes": 400,
               "rho_min": 0.5, "rho_max": 1000.0},
  "initial_data": {"family": "schwarzschild_conformal", "A0": 0.1,
                   "flatten": true},
  "flow": {"kind": "ricci", "s0": 0.0, "dt_safety": 0.2, "t_end": 2.3e-3},
  "output": {"mass_radii": [30.0, 100.0, 300.0, 900.0]}
})"},
};

}  // namespace

std::vector<std::string> list_scenarios() {
  std::vector<std::string> names;
  for (const RegistryEntry& e : kRegistry) names.push_back(e.name);
  return names;
}

std::string builtin_scenario(const std::string& name) {
  for (const RegistryEntry& e : kRegistry)
    if (name == e.name) return e.text;
  std::string known;
  for (const RegistryEntry& e : kRegistry)
    known += std::string(known.empty() ? "" : ", ") + e.name;
  throw ConfigError("unknown scenario '" + name + "' (built in: " + known +
                    ")");
}

std::string emit_schema() {
  auto field = [](const char* type, json dflt, const char* desc) {
    return json{{"type", type}, {"default", std::move(dflt)},
                {"description", desc}};
  };
  auto enum_field = [](std::vector<std::string> values, const char* dflt,
                       const char* desc) {
    return json{{"type", "string"}, {"enum", std::move(values)},
                {"default", dflt}, {"description", desc}};
  };
  json schema;
  schema["description"] =
      "Scenario document for the conformal Ricci flow runner. Unknown keys "
      "are rejected at every level; omitted keys take the defaults below.";
  schema["name"] = field("string", "unnamed",
                         "run name; becomes the output directory name");
  schema["geometry"] = {
      {"kind", enum_field({"radial_af", "homogeneous"}, "radial_af",
                          "geometry class")},
      {"dimension", field("integer", 3, "manifold dimension m >= 3 "
                                        "(radial class; homogeneous is 3)")},
      {"n_nodes", field("integer", 256, "radial grid nodes (>= 16)")},
      {"rho_min", field("number", 0.5, "inner grid radius (> 0)")},
      {"rho_max", field("number", 1000.0, "outer grid radius")},
      {"tau", field("number", 0.0,
                    "asymptotic decay order; 0 means dimension - 2")},
  };
  schema["initial_data"] = {
      {"family",
       enum_field({"flat", "schwarzschild_conformal", "perturbed_af",
                   "homogeneous"},
                  "flat (radial) / homogeneous (homogeneous)",
                  "initial-data family; must match the geometry class")},
      {"A0", field("number", 0.1,
                   "conformal-factor coefficient (schwarzschild_conformal and "
                   "perturbed_af): base metric (1 + A0/(2 rho))^4 g_e")},
      {"amplitude", field("number", 0.05, "bump amplitude (perturbed_af)")},
      {"width", field("number", 0.5, "bump width in x = ln rho")},
      {"center", field("number", 5.0, "bump center radius")},
      {"coeff", field("array[3] of number", json::array({1.0, 1.0, 1.0}),
                      "homogeneous diagonal metric coefficients (> 0)")},
      {"lambda", field("number", 2.0, "structure-constant scale (!= 0)")},
      {"flatten", field("boolean", false,
                        "conformally project radial data to zero scalar "
                        "curvature before flowing")},
  };
  schema["flow"] = {
      {"kind", enum_field({"crf", "dtcrf", "ricci"}, "crf", "flow kind")},
      {"s0", field("number", 0.0,
                   "constraint scalar curvature; must be 0 on radial_af")},
      {"dt_safety", field("number", 0.2, "CFL safety factor in (0, 1]")},
      {"t_end", field("number", 1.0e-3, "final time (> 0)")},
      {"output_stride", field("integer", 1, "record every k-th step")},
      {"reference_metric", enum_field({"euclidean", "initial"}, "euclidean",
                                      "DeTurck reference metric")},
  };
  schema["output"] = {
      {"write_frames", field("boolean", false,
                             "emit frames.json with full metric profiles")},
      {"mass_radii",
       field("array of number", json::array(),
             "radii ladder for the ADM mass column (>= 3 radii spanning a "
             "decade inside the grid; empty disables the mass columns)")},
  };
  return schema.dump(2) + "\n";
}

}  // namespace crflow
