#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "duet/model_core.hpp"
#include "duet/solver.hpp"
#include "duet/spatial_weights.hpp"

namespace duet::cli {

struct RunPaths {
    std::string counts, coords, reference;
    std::string sc_counts, sc_labels, markers;
    std::string edges, out, fit, truth, trace;
};

struct RunConfig {
    RunPaths paths;
    WeightConfig weights;
    SolverConfig solver;
    QcOptions qc;

    std::optional<double> lambda;
    std::optional<double> lambda_max;
    int n_lambda = 20;
    double decades = 4.0;
    bool append_zero = false;
    std::string method = "bic";  // bic | thinning | fixed
    double epsilon = 0.5;
    std::uint64_t seed = 1;
    bool approx = false;

    int grid_side = 20;
    int n_clusters = 5;
    int smoothness = 1;
    int size_factor_max = 50;
};

/// Overlays the keys of a JSON object on `cfg`. Unknown keys are rejected.
void apply_config(RunConfig& cfg, const nlohmann::json& j);

int cli_main(int argc, char** argv);

}  // namespace duet::cli
