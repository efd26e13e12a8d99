#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dg/analysis.hpp"
#include "dg/config.hpp"
#include "dg/ensemble.hpp"

namespace dg {

/// Shared header block written at the top of every output file:
/// '#'-prefixed lines carrying the config hash and master seed, so any
/// figure can be traced back to and replayed from its inputs. CSV bodies
/// use '.' decimals, one header row, LF endings, and shortest-roundtrip
/// floating point formatting; reruns of the same config are byte-identical.
struct FileStamp {
    std::string config_hash;
    std::uint64_t master_seed = 0;
};

std::string format_double(double v);  // shortest form that round-trips

void write_timeseries_csv(const std::string& path, const EnsembleAccumulator& acc,
                          const FileStamp& stamp);
void write_corrmap_csv(const std::string& path, const CorrelationMap& map,
                       const FileStamp& stamp);
void write_trajectories_csv(const std::string& path, const EnsembleAccumulator& acc,
                            const FileStamp& stamp);

struct SweepRow {
    double axis_value = 0.0;
    double n_ss = 0.0, n_ss_stderr = 0.0;
    double absalpha_ss = 0.0, absalpha_ss_stderr = 0.0;
    double xi = 0.0;             // nan when unresolved
    double xi_residual = 0.0;
    double powerlaw_residual = 0.0;
    double gamma_eff_n = 0.0;    // nan when unresolved
    double gamma_eff_alpha = 0.0;
    std::string status = "ok";
};

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows,
                     const std::string& axis, const FileStamp& stamp);

void write_json(const std::string& path, const nlohmann::json& j);

/// Readers for `analyze` (re-fitting from persisted CSVs).
struct TimeseriesData {
    std::vector<double> times;
    std::vector<double> n_mean, n_stderr;
    std::vector<double> absalpha_mean, absalpha_stderr;
};
TimeseriesData read_timeseries_csv(const std::string& path);
CorrelationMap read_corrmap_csv(const std::string& path);

}  // namespace dg
