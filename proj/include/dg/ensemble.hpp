#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dg/lattice.hpp"
#include "dg/model.hpp"
#include "dg/sse.hpp"

namespace dg {

/// Everything needed to run one trajectory ensemble.
struct EnsembleSpec {
    ModelParams model;
    LatticeGeometry geom;
    StepConfig step;
    double t_final = 10.0;
    double sample_interval = 0.1;
    long n_traj = 100;
    std::uint64_t master_seed = 1;
    int workers = 1;
    cplx init_alpha{0.0, 0.0};  ///< 0 = vacuum start
    /// Late-time window (fraction of [0, t_final], counted from the end)
    /// over which center-pair products are additionally time-averaged.
    double corr_window_frac = 0.25;
    /// Record the full per-sample α series of the first k trajectories
    /// (trajectory-resolved curves for phase-portrait plots).
    int record_trajectories = 0;
    /// Track center-pair products (requires odd extent); default on when
    /// the geometry has a center.
    bool track_correlations = true;
};

/// Streaming (Welford) mean/variance pairs over trajectories, one slot per
/// (sample, site) or per sample. Merging is exact associative bookkeeping;
/// chunked fixed-order reduction makes ensemble results bit-identical for
/// any worker count.
struct Welford {
    double mean = 0.0, m2 = 0.0;
    void add(double x, long k) {  // k = count after adding
        const double d = x - mean;
        mean += d / static_cast<double>(k);
        m2 += d * (x - mean);
    }
    void merge(const Welford& o, long n_self, long n_other);
    double variance(long n) const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double stderr_of_mean(long n) const;
};

/// Same bookkeeping for a complex mean; m2 accumulates |z - mean|².
struct WelfordC {
    cplx mean{0.0, 0.0};
    double m2 = 0.0;
    void add(cplx z, long k);
    void merge(const WelfordC& o, long n_self, long n_other);
    double stderr_of_mean(long n) const;
};

struct EnsembleAccumulator {
    std::size_t n_sites = 0, n_samples = 0;
    long count = 0;
    std::vector<double> times;

    // per (sample, site), sample-major
    std::vector<Welford> n_stat;
    std::vector<WelfordC> a_stat;
    std::vector<WelfordC> pair_stat;  // conj(⟨a⟩_center)·⟨a⟩_s per sample

    // per sample (statistics of per-trajectory spatial means)
    std::vector<Welford> nbar_stat;      // (1/S) Σ_s ⟨n⟩_s
    std::vector<Welford> absalpha_stat;  // |spatial mean of ⟨a⟩_s|
    std::vector<WelfordC> alpha_stat;    // complex spatial mean

    // per site: pair product time-averaged over the late window first,
    // then averaged over trajectories (variance-reduced correlation map)
    std::vector<WelfordC> wpair_stat;
    std::size_t window_begin = 0;  // first sample index inside the window

    // trajectory-resolved α series for the first record_cap trajectories
    // (row r = trajectory r, disjoint slots so merging is a copy)
    std::vector<cplx> recorded_alpha;  // record_cap × n_samples
    std::vector<char> recorded_mask;   // record_cap
    int record_cap = 0;

    double max_tail_population = 0.0;
    std::size_t center = 0;
    bool has_center = false;

    void init(std::size_t n_sites, const std::vector<double>& times,
              std::size_t window_begin, bool has_center, std::size_t center,
              int record_cap);
    void absorb(const SampleRecord& rec, long traj_index);
    void merge(const EnsembleAccumulator& other);
};

/// Runs n_traj trajectories with per-trajectory seeds derived from the
/// master seed, accumulating in fixed-size chunks merged in chunk order;
/// results are bit-identical for any worker count. A trajectory failure
/// aborts the ensemble and rethrows with the failing seed and index.
EnsembleAccumulator run_ensemble(const EnsembleSpec& spec);

/// Spatially averaged observables per sample time.
struct MacroscopicSeries {
    std::vector<double> times;
    std::vector<double> n_mean, n_stderr;        // N(t)
    std::vector<double> absalpha_mean, absalpha_stderr;
    std::vector<cplx> alpha_mean;                // ensemble mean of α
    std::vector<double> alpha_stderr;
};

MacroscopicSeries macroscopic_series(const EnsembleAccumulator& acc);

}  // namespace dg
