#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dg/lattice.hpp"
#include "dg/model.hpp"
#include "dg/rng.hpp"

namespace dg {

/// One stochastic trajectory: all site amplitude vectors (site-major,
/// contiguous), the current time, and the trajectory's private random
/// stream. Owned by exactly one worker at a time.
struct TrajectoryState {
    std::size_t n_sites = 0;
    std::size_t dim = 0;
    std::vector<cplx> amps;  // n_sites * dim
    double time = 0.0;
    Xoshiro256pp stream;

    cplx* site(std::size_t s) { return amps.data() + s * dim; }
    const cplx* site(std::size_t s) const { return amps.data() + s * dim; }

    /// All sites in |0⟩.
    static TrajectoryState vacuum(std::size_t n_sites, std::size_t dim,
                                  std::uint64_t seed);

    /// All sites in the normalized truncated coherent state with amplitude
    /// alpha (used to seed relaxation experiments).
    static TrajectoryState coherent(std::size_t n_sites, std::size_t dim,
                                    cplx alpha, std::uint64_t seed);
};

enum class Scheme {
    ExpEuler,  ///< Euler–Maruyama with the diagonal drift applied exactly
               ///< via exp(lambda*dt); unconditionally stable (default)
    Euler,     ///< plain explicit Euler–Maruyama
};

struct StepConfig {
    double dt = 1e-3;
    Scheme scheme = Scheme::ExpEuler;
    bool milstein = false;
};

/// Transform applied to the freshly drawn Wiener increments of one step
/// before they are used: dw[2s] is channel 1 of site s, dw[2s+1] channel 2.
/// Test hook (e.g. global sign flips for symmetry checks); null = identity.
using NoiseTransform = std::function<void(double* dw, std::size_t n_sites)>;

/// Advances trajectories of a fixed (model, geometry, step config) triple.
/// Holds the precomputed coefficient tables and scratch buffers, so one
/// instance per worker, reused across trajectories.
class Stepper {
  public:
    Stepper(const LocalModel& model, const LatticeGeometry& geom, StepConfig cfg);

    /// One time step of size cfg.dt for every site: mean field and homodyne
    /// expectations from the pre-step states, site-major/channel-minor noise
    /// draws, per-site update, renormalization. Throws NumericalError on
    /// divergence or norm collapse.
    void step(TrajectoryState& state);

    void set_noise_transform(NoiseTransform t) { noise_transform_ = std::move(t); }

    const StepConfig& config() const { return cfg_; }
    std::size_t dim() const { return dim_; }
    std::size_t n_sites() const { return n_sites_; }

  private:
    void update_site(std::size_t s, TrajectoryState& state, cplx neighbor_sum,
                     double dw1, double dw2);

    StepConfig cfg_;
    std::size_t dim_, n_sites_;
    double j_hop_, sqrt_g1_, sqrt_g2_;
    double drive_g2_, gamma1_, gamma2_;
    NeighborTable nbr_;

    // coefficient tables, all length dim (unused tail entries zero)
    std::vector<double> sq1_;   // sqrt(n+1):       (a psi)[n]  = sq1[n] psi[n+1]
    std::vector<double> sq2_;   // sqrt((n+1)(n+2)): (a² psi)[n] = sq2[n] psi[n+2]
    std::vector<double> sq4_;   // (a⁴ psi)[n] = sq4[n] psi[n+4]
    std::vector<cplx> lam_dt_;  // dt * [-i(delta n + u/2 n(n-1)) - damping_n]
    std::vector<cplx> exp_lam_; // exp(lam_dt)

    // scratch
    std::vector<cplx> u1_all_, u2_all_;       // a psi, a² psi for every site
    std::vector<cplx> alpha_, a2exp_;         // per-site ⟨a⟩, ⟨a²⟩
    std::vector<cplx> v1_, v2_, u4_, ldp_, out_;
    std::vector<double> dw_;

    NoiseTransform noise_transform_;
};

/// Sampled output of one trajectory. Per-sample layouts are site-major:
/// n_site[k*n_sites + s] is ⟨N_s⟩ at sample k.
struct SampleRecord {
    std::vector<double> times;
    std::vector<double> n_site;   // samples × sites
    std::vector<cplx> a_site;     // samples × sites
    double max_tail_population = 0.0;  // max over samples/sites of the
                                       // top-two Fock level weight
    std::size_t n_sites = 0;

    std::size_t n_samples() const { return times.size(); }
};

using Observer = std::function<void(double t, const TrajectoryState&)>;

/// Integrates to t_final, sampling every sample_interval (first sample at
/// t = 0, last at t_final). sample_interval must be an integer multiple of
/// dt (validated). The optional observer runs at each sample point after
/// the record row is taken.
SampleRecord run_trajectory(TrajectoryState& state, Stepper& stepper,
                            double t_final, double sample_interval,
                            const Observer& observer = {});

}  // namespace dg
