#ifndef CRFLOW_SCENARIO_HPP
#define CRFLOW_SCENARIO_HPP

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "crflow/flow.hpp"
#include "crflow/metrics.hpp"

namespace crflow {

//----------------------------------------------------------------------------
// Scenario-driven runs: a single JSON document describes the geometry class,
// the initial data family, the grid, the flow configuration and the output
// toggles.  parse_config validates strictly (unknown keys are rejected at
// every nesting level) and fills documented defaults, so that
// parse_config(scenario_to_json(s)) round-trips.
//----------------------------------------------------------------------------

enum class InitialFamily { flat, schwarzschild_conformal, perturbed_af, homogeneous };

struct Scenario {
  std::string name = "unnamed";

  // geometry block
  GeometryKind geometry_kind = GeometryKind::radial_af;
  int dimension = 3;            // radial class only (homogeneous is 3)
  std::size_t n_nodes = 256;
  double rho_min = 0.5;
  double rho_max = 1000.0;
  double tau = 0.0;             // decay order; 0 = default to dimension-2

  // initial-data block
  InitialFamily family = InitialFamily::flat;
  double A0 = 0.1;              // 1/rho coefficient of the conformal factor
  double amplitude = 0.05;      // bump amplitude (perturbed_af)
  double width = 0.5;           // bump width in x = ln rho
  double center = 5.0;          // bump center radius
  std::array<double, 3> coeff{{1.0, 1.0, 1.0}};  // homogeneous diagonal
  double lambda = 2.0;          // homogeneous structure-constant scale
  bool flatten = false;         // conformally project radial data to s = 0

  // flow block
  FlowConfig flow;

  // output block
  bool write_frames = false;            // emit frames.json
  std::vector<double> mass_radii;       // ladder for the mass column; empty = skip
};

/// Parse and validate a scenario document (JSON text). Unknown keys anywhere
/// in the document are rejected; defaults are filled. Throws ConfigError
/// with field context.
Scenario parse_config(const std::string& json_text);

/// Normalized echo of a scenario with every default filled in;
/// parse_config(scenario_to_json(s)) == s.
std::string scenario_to_json(const Scenario& s);

//----------------------------------------------------------------------------
// Initial data builders
//----------------------------------------------------------------------------

/// g = w^4 g_e with w = 1 + A0 / (2 rho): the conformally flat, scalar-flat
/// model data (A = B = w^2, tau = dimension - 2).
RadialMetric schwarzschild_conformal_metric(
    std::shared_ptr<const RadialGrid> grid, double A0);

/// Conformal Schwarzschild base with a Gaussian bump in the tangential
/// profile:
///   a = w^4,  b = w^4 * (1 + amplitude * exp(-(x - ln center)^2/(2 width^2)))
/// with w = 1 + A0/(2 rho) and x = ln rho.  The bump makes the data leave
/// the (conformally flat) Schwarzschild family, so the flow has a genuine
/// non-conformal transient.  Not scalar-flat; combine with conformal_flatten
/// for admissible data.
RadialMetric perturbed_af_metric(std::shared_ptr<const RadialGrid> grid,
                                 double A0, double amplitude, double width,
                                 double center);

/// Initial data selected by the scenario (radial families only; throws
/// ConfigError for homogeneous scenarios). Applies the conformal projection
/// when s.flatten is set.
RadialMetric build_initial_radial(const Scenario& s);

/// Homogeneous initial data (coeff triple + lambda); ConfigError when the
/// scenario is radial.
HomogeneousMetric build_initial_homogeneous(const Scenario& s);

//----------------------------------------------------------------------------
// Artifacts
//----------------------------------------------------------------------------

struct RunArtifacts {
  int exit_code = 0;            // 0 ok, 3 pressure failure, 4 breakdown
  Termination termination = Termination::completed;
  std::string out_dir;          // directory holding the files below
  std::string timeseries_path;  // timeseries.csv
  std::string summary_path;     // summary.json
  std::string frames_path;      // frames.json ("" unless write_frames)
};

/// Run one scenario and write timeseries.csv / summary.json (and frames.json
/// when toggled) into out_dir/<scenario name>/. Partial outputs are flushed
/// even when the run terminates early; the exit code mirrors the termination
/// status. Throws ConfigError only for configuration-stage failures (before
/// any time stepping).
RunArtifacts run_scenario(const Scenario& s, const std::string& out_root);

//----------------------------------------------------------------------------
// Registry and schema
//----------------------------------------------------------------------------

/// Names of the built-in scenarios.
std::vector<std::string> list_scenarios();

/// The JSON document of a built-in scenario; ConfigError if unknown.
std::string builtin_scenario(const std::string& name);

/// Machine-readable description of the config document: every key with its
/// type, allowed values, and default.
std::string emit_schema();

}  // namespace crflow

#endif  // CRFLOW_SCENARIO_HPP
