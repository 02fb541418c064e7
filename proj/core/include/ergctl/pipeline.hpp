#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergctl/dynkin.hpp"
#include "ergctl/free_boundary.hpp"
#include "ergctl/model.hpp"
#include "ergctl/simulate.hpp"
#include "ergctl/stationary.hpp"
#include "ergctl/value_profile.hpp"

namespace ergctl {

struct GridConfig {
    double x_lo, x_hi;
    int n_x;
    double y_lo, y_hi;
    int n_y;
};

struct PipelineConfig {
    nlohmann::json model_json;
    GridConfig grid;
    SolverConfig solver;
    std::optional<double> alpha; // nullopt = "auto" (gap midpoint)
    std::optional<SimConfig> sim;
    std::string output_dir = ".";
    std::vector<std::string> checks; // empty = defaults for the model kind
};

PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

struct CheckResult {
    std::string name;
    bool pass;
    double value;
    double tolerance;
    std::string detail;
};

struct RunManifest {
    std::string config_hash;
    std::vector<std::pair<std::string, long>> artifacts; // (name, bytes)
    std::vector<CheckResult> checks;
    nlohmann::json timings_ms;
    bool all_checks_pass = true;
    double alpha = 0.0;
    double lambda_star = 0.0;
};

// Full run: validate, assemble, solve U, extract boundaries, build (V, lambda),
// lambda*, simulate (unless disabled), run checks, write artifacts.
RunManifest run_pipeline(const PipelineConfig& config);

// Writes the plotting scripts next to the artifacts; returns their file names.
std::vector<std::string> emit_plots(const RunManifest& manifest,
                                    const std::string& output_dir);

// Higher-level solve used by the pipeline and tests: dispatches the filtered
// model to the (x,z) scheme and maps back.
struct DynkinSolution {
    ValueField U;                    // on the (x,y) grid
    std::optional<ValueField> U_hat; // (x,z) solution when that path was used
    ResidualReport residual;
    int mapped_clamped = 0;
};

DynkinSolution solve_model(const ModelSpec& spec, const Grid2D& grid,
                           const SolverConfig& cfg);

} // namespace ergctl
