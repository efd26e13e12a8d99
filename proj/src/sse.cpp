#include "dg/sse.hpp"

#include <cmath>
#include <cstring>

#include "dg/errors.hpp"
#include "dg/kernels.hpp"

namespace dg {

using kernels::Ops;

TrajectoryState TrajectoryState::vacuum(std::size_t n_sites, std::size_t dim,
                                        std::uint64_t seed) {
    TrajectoryState st;
    st.n_sites = n_sites;
    st.dim = dim;
    st.amps.assign(n_sites * dim, cplx{0.0, 0.0});
    for (std::size_t s = 0; s < n_sites; ++s) st.amps[s * dim] = 1.0;
    st.stream.reseed(seed);
    return st;
}

TrajectoryState TrajectoryState::coherent(std::size_t n_sites, std::size_t dim,
                                          cplx alpha, std::uint64_t seed) {
    std::vector<cplx> one(dim);
    cplx amp{1.0, 0.0};
    double norm2 = 0.0;
    for (std::size_t n = 0; n < dim; ++n) {
        one[n] = amp;
        norm2 += std::norm(amp);
        amp *= alpha / std::sqrt(static_cast<double>(n + 1));
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& c : one) c *= inv;

    TrajectoryState st;
    st.n_sites = n_sites;
    st.dim = dim;
    st.amps.resize(n_sites * dim);
    for (std::size_t s = 0; s < n_sites; ++s)
        std::memcpy(st.site(s), one.data(), dim * sizeof(cplx));
    st.stream.reseed(seed);
    return st;
}

Stepper::Stepper(const LocalModel& model, const LatticeGeometry& geom,
                 StepConfig cfg)
    : cfg_(cfg),
      dim_(model.params.cutoff),
      n_sites_(geom.n_sites()),
      j_hop_(model.hop_coefficient),
      sqrt_g1_(std::sqrt(model.params.gamma1)),
      sqrt_g2_(std::sqrt(model.params.gamma2)),
      drive_g2_(model.params.g2),
      gamma1_(model.params.gamma1),
      gamma2_(model.params.gamma2),
      nbr_(geom) {
    if (cfg_.dt <= 0.0) throw ConfigError("step dt must be > 0");
    const std::size_t d = dim_;
    const ModelParams& p = model.params;

    sq1_.assign(d, 0.0);
    sq2_.assign(d, 0.0);
    sq4_.assign(d, 0.0);
    for (std::size_t n = 0; n + 1 < d; ++n)
        sq1_[n] = std::sqrt(static_cast<double>(n + 1));
    for (std::size_t n = 0; n + 2 < d; ++n)
        sq2_[n] = std::sqrt(static_cast<double>((n + 1) * (n + 2)));
    for (std::size_t n = 0; n + 4 < d; ++n)
        sq4_[n] = std::sqrt(static_cast<double>((n + 1) * (n + 2)) *
                            static_cast<double>((n + 3) * (n + 4)));

    // Diagonal part of the generator: the number-conserving Hamiltonian
    // terms and the full damping, lam_n = -i(delta n + u/2 n(n-1))
    // - (gamma1 n + gamma2 n(n-1))/2.
    lam_dt_.resize(d);
    exp_lam_.resize(d);
    for (std::size_t n = 0; n < d; ++n) {
        const double nn = static_cast<double>(n);
        const double pairs = nn * (nn - 1.0);
        const cplx lam{-0.5 * (p.gamma1 * nn + p.gamma2 * pairs),
                       -(p.delta * nn + 0.5 * p.u * pairs)};
        lam_dt_[n] = lam * cfg_.dt;
        exp_lam_[n] = std::exp(lam_dt_[n]);
    }

    u1_all_.resize(n_sites_ * d);
    u2_all_.resize(n_sites_ * d);
    alpha_.resize(n_sites_);
    a2exp_.resize(n_sites_);
    v1_.resize(d);
    v2_.resize(d);
    u4_.resize(d);
    ldp_.resize(d);
    out_.resize(d);
    dw_.resize(2 * n_sites_);
}

void Stepper::update_site(std::size_t s, TrajectoryState& state,
                          cplx neighbor_sum, double dw1, double dw2) {
    const Ops& ops = kernels::active();
    const std::size_t d = dim_;
    const double dt = cfg_.dt;
    cplx* psi = state.site(s);
    const cplx* u1 = u1_all_.data() + s * d;
    const cplx* u2 = u2_all_.data() + s * d;

    // raising-ladder vectors: (a†psi)[n] = sqrt(n) psi[n-1], and twice up
    v1_[0] = 0.0;
    ops.diag_mul_real(d - 1, sq1_.data(), psi, v1_.data() + 1);
    v2_[0] = v2_[1] = 0.0;
    if (d > 2) ops.diag_mul_real(d - 2, sq2_.data(), psi, v2_.data() + 2);

    // homodyne currents from the pre-step expectations
    const double dq1 = sqrt_g1_ * 2.0 * alpha_[s].real() * dt + dw1;
    const double dq2 = sqrt_g2_ * 2.0 * a2exp_[s].real() * dt + dw2;

    const cplx i_j_dt{0.0, j_hop_ * dt};

    cplx c[6];
    const cplx* vecs[6];
    std::size_t np = 0;
    c[np] = i_j_dt * std::conj(neighbor_sum) + sqrt_g1_ * dq1;
    vecs[np++] = u1;
    c[np] = i_j_dt * neighbor_sum;
    vecs[np++] = v1_.data();

    const cplx drive{0.0, -0.5 * drive_g2_ * dt};
    c[np] = drive + sqrt_g2_ * dq2;
    if (cfg_.milstein)
        c[np] += 0.5 * gamma1_ * (dw1 * dw1 - dt);
    vecs[np++] = u2;
    c[np] = drive;
    vecs[np++] = v2_.data();

    if (cfg_.milstein) {
        if (d > 4)
            ops.diag_mul_real(d - 4, sq4_.data(), psi + 4, u4_.data());
        for (std::size_t n = (d > 4 ? d - 4 : 0); n < d; ++n) u4_[n] = 0.0;
        c[np] = 0.5 * gamma2_ * (dw2 * dw2 - dt);
        vecs[np++] = u4_.data();
    }
    if (cfg_.scheme == Scheme::Euler) {
        ops.diag_mul(d, lam_dt_.data(), psi, ldp_.data());
        c[np] = 1.0;
        vecs[np++] = ldp_.data();
    }

    const cplx* e = cfg_.scheme == Scheme::ExpEuler ? exp_lam_.data() : nullptr;
    ops.assemble(d, psi, c, vecs, np, e, out_.data());

    const double nrm2 = ops.norm2(d, out_.data());
    if (!std::isfinite(nrm2)) {
        NumericalError err("state diverged (non-finite amplitudes); dt too large?");
        err.site = static_cast<int>(s);
        err.time = state.time;
        throw err;
    }
    // With per-step renormalization a linearly unstable step shows up as a
    // huge one-step amplification, not as an overflow — no sane scheme/dt
    // combination amplifies the norm by 1000x in one step.
    if (nrm2 > 1e6) {
        NumericalError err(
            "one step amplified the state norm by more than 1000x; the "
            "explicit scheme is unstable at this dt (reduce dt or use "
            "exponential_euler)");
        err.site = static_cast<int>(s);
        err.time = state.time;
        throw err;
    }
    if (nrm2 < 1e-24) {
        NumericalError err("state norm collapsed below 1e-12; dt too large?");
        err.site = static_cast<int>(s);
        err.time = state.time;
        throw err;
    }
    const double inv = 1.0 / std::sqrt(nrm2);
    for (std::size_t n = 0; n < d; ++n) psi[n] = out_[n] * inv;
}

void Stepper::step(TrajectoryState& state) {
    if (state.n_sites != n_sites_ || state.dim != dim_)
        throw DimensionError("trajectory state does not match stepper geometry");
    const Ops& ops = kernels::active();
    const std::size_t d = dim_;

    // 1) lowering-ladder vectors and expectations from the pre-step state;
    //    every site's update below sees only this snapshot, so the step is
    //    independent of site order.
    for (std::size_t s = 0; s < n_sites_; ++s) {
        const cplx* psi = state.site(s);
        cplx* u1 = u1_all_.data() + s * d;
        cplx* u2 = u2_all_.data() + s * d;
        ops.diag_mul_real(d - 1, sq1_.data(), psi + 1, u1);
        u1[d - 1] = 0.0;
        if (d > 2) ops.diag_mul_real(d - 2, sq2_.data(), psi + 2, u2);
        u2[d - 2] = u2[d - 1] = 0.0;
        alpha_[s] = ops.cdotc(d, psi, u1);
        a2exp_[s] = ops.cdotc(d, psi, u2);
    }

    // 2) Wiener increments, site-major / channel-minor, fixed consumption
    const double sdt = std::sqrt(cfg_.dt);
    for (std::size_t s = 0; s < 2 * n_sites_; ++s)
        dw_[s] = state.stream.normal() * sdt;
    if (noise_transform_) noise_transform_(dw_.data(), n_sites_);

    // 3) per-site updates + renormalization
    for (std::size_t s = 0; s < n_sites_; ++s) {
        cplx ns{0.0, 0.0};
        for (const auto* p = nbr_.begin_of(s); p != nbr_.end_of(s); ++p)
            ns += alpha_[*p];
        update_site(s, state, ns, dw_[2 * s], dw_[2 * s + 1]);
    }
    state.time += cfg_.dt;
}

SampleRecord run_trajectory(TrajectoryState& state, Stepper& stepper,
                            double t_final, double sample_interval,
                            const Observer& observer) {
    if (t_final < 0.0) throw ConfigError("t_final must be >= 0");
    if (sample_interval < stepper.config().dt)
        throw ConfigError("sample_interval must be >= dt");

    const double dt = stepper.config().dt;
    const long per = std::lround(sample_interval / dt);
    if (std::abs(per * dt - sample_interval) > 1e-9 * sample_interval)
        throw ConfigError("sample_interval must be an integer multiple of dt");
    const long n_intervals = std::lround(t_final / sample_interval);
    if (std::abs(n_intervals * sample_interval - t_final) > 1e-9 * std::max(t_final, 1.0))
        throw ConfigError("t_final must be an integer multiple of sample_interval");

    const std::size_t d = state.dim;
    const std::size_t ns = state.n_sites;
    SampleRecord rec;
    rec.n_sites = ns;
    rec.times.reserve(n_intervals + 1);
    rec.n_site.reserve((n_intervals + 1) * ns);
    rec.a_site.reserve((n_intervals + 1) * ns);

    std::vector<cplx> low(d);  // a·psi scratch for sampling
    std::vector<double> sq1(d, 0.0);
    for (std::size_t n = 0; n + 1 < d; ++n)
        sq1[n] = std::sqrt(static_cast<double>(n + 1));
    const auto& ops = kernels::active();

    auto take_sample = [&](double t) {
        rec.times.push_back(t);
        for (std::size_t s = 0; s < ns; ++s) {
            const cplx* psi = state.site(s);
            double nexp = 0.0;
            for (std::size_t n = 1; n < d; ++n)
                nexp += static_cast<double>(n) * std::norm(psi[n]);
            rec.n_site.push_back(nexp);
            ops.diag_mul_real(d - 1, sq1.data(), psi + 1, low.data());
            low[d - 1] = 0.0;
            rec.a_site.push_back(ops.cdotc(d, psi, low.data()));
            const double tail = std::norm(psi[d - 1]) + std::norm(psi[d - 2]);
            if (tail > rec.max_tail_population) rec.max_tail_population = tail;
        }
        if (observer) observer(t, state);
    };

    take_sample(0.0);
    for (long k = 1; k <= n_intervals; ++k) {
        for (long i = 0; i < per; ++i) stepper.step(state);
        // snap accumulated time to the exact sample point (fp drift only)
        state.time = k * sample_interval;
        take_sample(state.time);
    }
    return rec;
}

}  // namespace dg
