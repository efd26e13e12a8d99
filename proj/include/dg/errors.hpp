#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dg {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Operator/vector dimension mismatch or invalid dimension.
struct DimensionError : Error {
    using Error::Error;
};

/// Invalid run configuration. Carries the full list of violations so a
/// config file can be fixed in one pass.
struct ConfigError : Error {
    std::vector<std::string> details;

    explicit ConfigError(const std::string& msg) : Error(msg) {}
    ConfigError(const std::string& msg, std::vector<std::string> d)
        : Error(msg + "\n  - " + join(d)), details(std::move(d)) {}

  private:
    static std::string join(const std::vector<std::string>& d) {
        std::string out;
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (i) out += "\n  - ";
            out += d[i];
        }
        return out;
    }
};

/// Numerical failure inside an integrator (divergence, norm collapse).
/// Carries enough context to replay the failing trajectory.
struct NumericalError : Error {
    std::uint64_t seed = 0;     ///< per-trajectory stream seed, 0 if n/a
    long trajectory = -1;       ///< trajectory index within the ensemble
    int site = -1;
    double time = 0.0;

    using Error::Error;
};

/// A fit was requested on data that cannot support it (too few usable
/// points above the noise floor).
struct InsufficientDataError : Error {
    using Error::Error;
};

/// A relaxation rate could not be resolved from the series (no decay
/// window above the tail noise).
struct RateUnresolvableError : Error {
    using Error::Error;
};

}  // namespace dg
