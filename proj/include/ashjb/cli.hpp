/**
 * @file cli.hpp
 * @brief Run configuration, stage orchestration and CSV/JSON emission.
 */
#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "ashjb/grid.hpp"
#include "ashjb/hjb.hpp"
#include "ashjb/model.hpp"
#include "ashjb/principal.hpp"
#include "ashjb/screening.hpp"
#include "ashjb/simulate.hpp"

namespace ashjb {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitCheck = 4;

struct RunConfig {
    ModelSpec model = ModelSpec::dominated();
    double a_upper = 1.0;   ///< preset input ā
    double a_lower = 0.0;   ///< preset input a̲ (0 for the dominated family)
    GridSpec grid;
    SimConfig sim;
    bool sim_at_argmax = true;  ///< start rollouts at the conditional argmax for sim.p0
    int n_export = 5;
    int band_samples = 201;
    std::vector<double> sweep = default_prior_sweep();
    std::string output_dir = "ashjb_out";
    std::set<std::string> emit{"band", "boundary", "field", "values", "screening", "compare", "trajectories",
                               "summary"};
    double ordering_tol = 1e-2;
};

/// Valid stage and emit names.
const std::set<std::string>& known_emits();

/// Parses a JSON document; `overrides` are "dotted.path=value" leaves applied first.
/// Throws ConfigError whose path() names the offending field.
RunConfig parse_config(const std::string& json_text, const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Bundled presets by name ("dominated", "nondominated").
std::string preset_config(const std::string& name);

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunResult {
    int exit_code = kExitOk;
    std::vector<CheckResult> checks;
    std::vector<std::string> outputs;
    std::string message;
};

/// Executes band → boundary → solve → values → screen → simulate → compare, restricted to
/// what `emit` needs. Never throws; errors map to exit codes 2, 3 and 4.
RunResult run(const RunConfig& config, std::ostream& log);

/// Re-runs the invariant suite on output_dir/field.csv without solving.
RunResult check_only(const RunConfig& config, std::ostream& log);

// CSV emission, 12 significant digits, header row first.
void write_band_csv(const std::string& path, const ModelSpec& spec, const CredibleBand& band, int n_samples);
/// Boundary values on a uniform time grid; wbar and wunder are read at belief p.
void write_boundary_csv(const std::string& path, const BoundaryValues& bvals, int n_samples, double p);
void write_field_csv(const std::string& path, const InteriorSolution& sol);
void write_values_csv(const std::string& path, const std::vector<PrincipalReport>& rows);
void write_screening_csv(const std::string& path, const std::vector<ScreeningReport>& rows);
void write_compare_csv(const std::string& path, const std::vector<PrincipalReport>& values,
                       const std::vector<ScreeningReport>& screening, double tol);
void write_trajectories_csv(const std::string& path, const std::vector<TrajectoryRow>& rows);

/// Reads a field CSV back into a value field for the given model and grid.
ValueField read_field_csv(const std::string& path, const ModelSpec& spec, const GridSpec& grid);

/// "%.12g".
std::string format_number(double v);

}  // namespace ashjb
