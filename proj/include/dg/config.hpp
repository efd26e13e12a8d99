#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dg/ensemble.hpp"
#include "dg/lattice.hpp"
#include "dg/model.hpp"
#include "dg/sse.hpp"

namespace dg {

/// Full run configuration: everything a `run` needs, loadable from JSON.
/// Validation is consolidated — all violations across all sections are
/// collected into one ConfigError.
struct RunConfig {
    ModelParams model;
    LatticeGeometry lattice;
    StepConfig step;
    double t_final = 10.0;
    double sample_interval = 0.1;
    long n_traj = 100;
    std::uint64_t master_seed = 1;
    int workers = 0;  ///< 0 = available parallelism at run time
    cplx init_alpha{0.0, 0.0};
    double corr_window_frac = 0.25;
    std::optional<double> noise_floor;  ///< analysis override
    int record_trajectories = 0;
    std::string out_dir = "out";

    // optional sweep block (CLI flags override)
    std::vector<double> sweep_values;
    std::string sweep_axis;
    bool slave_delta = true;  ///< keep delta = j_hop while sweeping j_hop

    EnsembleSpec ensemble_spec() const;
};

/// Parse + validate a config file. Throws ConfigError with one line per
/// violation (including the JSON path of each offending field).
RunConfig load_config(const std::string& path);

/// Same, from an already-parsed JSON object.
RunConfig config_from_json(const nlohmann::json& j);

/// Canonical JSON form with every default made explicit. Loading the
/// normalized form again yields the same normalized form (round-trip
/// idempotence).
nlohmann::json normalized_json(const RunConfig& cfg);

/// FNV-1a hash (hex) of the normalized config serialization; stamped into
/// every output file so results are traceable to their exact inputs.
std::string config_hash(const RunConfig& cfg);

/// Applies one axis value to a copy of the config (sweep point), slaving
/// delta to j_hop when configured.
RunConfig apply_axis(const RunConfig& base, const std::string& axis, double value);

}  // namespace dg
