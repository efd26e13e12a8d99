#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dg/ensemble.hpp"
#include "dg/lattice.hpp"

namespace dg {

/// |trajectory mean of conj(⟨a⟩_center)·⟨a⟩_site| over the whole lattice,
/// stored on the lattice grid (row-major, same indexing as sites) together
/// with the matching standard errors. Entries are magnitudes, hence >= 0.
struct CorrelationMap {
    std::size_t extent = 0;      // L (1D: values has L entries; 2D: L×L)
    bool two_d = false;
    std::size_t center = 0;
    std::vector<double> values;
    std::vector<double> stderrs;
    long count = 0;

    double at(std::size_t i, std::size_t j) const { return values[i * extent + j]; }
};

/// Map from the window-averaged pair products (variance-reduced late-time
/// average). Throws ConfigError if the accumulator tracked no center.
CorrelationMap correlation_map(const EnsembleAccumulator& acc,
                               const LatticeGeometry& geom);

/// Snapshot variant: map at a single sample index.
CorrelationMap correlation_map_at(const EnsembleAccumulator& acc,
                                  const LatticeGeometry& geom,
                                  std::size_t sample);

/// Axis-projected correlation g(i) = (G_{0,i} + G_{i,0})/2 for displacement
/// i = 0..(L-1)/2 along the positive axes ((L-1)/2+1 entries; in 1D the two
/// arms are +i and -i). Projection is symmetric in the two arms, so
/// applying it twice is idempotent.
std::vector<double> project_1d(const CorrelationMap& map);
std::vector<double> project_1d_stderr(const CorrelationMap& map);

enum class FitKind { Exponential, PowerLaw, RelaxationExponential };

struct FitResult {
    FitKind kind;
    double amplitude = 0.0;       // c
    double rate_or_length = 0.0;  // ξ (sites) or γ_eff (inverse time)
    double residual_rms = 0.0;    // in log space
    std::size_t win_lo = 0, win_hi = 0;  // inclusive index range used
    double offset = 0.0;          // fitted O(∞) for relaxation fits
};

/// Least squares of log g on |i| over displacements i >= 1 with
/// g > noise_floor: g ≈ c·exp(-i/ξ). Throws InsufficientDataError with
/// fewer than 3 usable points (negligible correlation — ξ below
/// resolution).
FitResult fit_exponential(const std::vector<double>& g, double noise_floor);

/// Least squares of log g on log i: g ≈ c·i^{-ξ}. Same window rules.
FitResult fit_power_law(const std::vector<double>& g, double noise_floor);

/// Relaxation rate of O(t): the plateau O(∞) is the mean over the final
/// 10% of samples, the fit window runs from the peak of |O(∞) - O(t)|
/// for as long as the difference stays above 3× the tail noise, and
/// log|O(∞) - O(t)| is fitted linearly in t. Throws RateUnresolvableError
/// when no such window exists (rate below resolution).
FitResult fit_relaxation(const std::vector<double>& times,
                         const std::vector<double>& series);

/// 3× the median stderr over the outermost displacement ring: a data-driven
/// proxy for the Monte Carlo noise floor of the map.
double default_noise_floor(const CorrelationMap& map);

}  // namespace dg
