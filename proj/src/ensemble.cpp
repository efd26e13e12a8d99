#include "dg/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <map>
#include <mutex>
#include <thread>

#include "dg/errors.hpp"

namespace dg {

void Welford::merge(const Welford& o, long n_self, long n_other) {
    if (n_other == 0) return;
    if (n_self == 0) {
        *this = o;
        return;
    }
    const double na = static_cast<double>(n_self);
    const double nb = static_cast<double>(n_other);
    const double d = o.mean - mean;
    mean += d * (nb / (na + nb));
    m2 += o.m2 + d * d * (na * nb / (na + nb));
}

double Welford::stderr_of_mean(long n) const {
    return n > 1 ? std::sqrt(variance(n) / static_cast<double>(n)) : 0.0;
}

void WelfordC::add(cplx z, long k) {
    const cplx d = z - mean;
    mean += d / static_cast<double>(k);
    m2 += (d * std::conj(z - mean)).real();
}

void WelfordC::merge(const WelfordC& o, long n_self, long n_other) {
    if (n_other == 0) return;
    if (n_self == 0) {
        *this = o;
        return;
    }
    const double na = static_cast<double>(n_self);
    const double nb = static_cast<double>(n_other);
    const cplx d = o.mean - mean;
    mean += d * (nb / (na + nb));
    m2 += o.m2 + std::norm(d) * (na * nb / (na + nb));
}

double WelfordC::stderr_of_mean(long n) const {
    return n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n))
                 : 0.0;
}

void EnsembleAccumulator::init(std::size_t ns, const std::vector<double>& ts,
                               std::size_t wb, bool center_tracked,
                               std::size_t center_site, int cap) {
    n_sites = ns;
    n_samples = ts.size();
    times = ts;
    count = 0;
    window_begin = wb;
    has_center = center_tracked;
    center = center_site;
    record_cap = cap;
    n_stat.assign(n_samples * ns, {});
    a_stat.assign(n_samples * ns, {});
    pair_stat.assign(has_center ? n_samples * ns : 0, {});
    nbar_stat.assign(n_samples, {});
    absalpha_stat.assign(n_samples, {});
    alpha_stat.assign(n_samples, {});
    wpair_stat.assign(has_center ? ns : 0, {});
    recorded_alpha.assign(static_cast<std::size_t>(cap) * n_samples, cplx{0.0, 0.0});
    recorded_mask.assign(cap, 0);
    max_tail_population = 0.0;
}

void EnsembleAccumulator::absorb(const SampleRecord& rec, long traj_index) {
    if (rec.n_sites != n_sites || rec.n_samples() != n_samples)
        throw DimensionError("trajectory record does not match accumulator layout");
    const long k = ++count;
    const double inv_s = 1.0 / static_cast<double>(n_sites);
    const double wlen = static_cast<double>(n_samples - window_begin);

    for (std::size_t i = 0; i < n_samples; ++i) {
        const double* nrow = rec.n_site.data() + i * n_sites;
        const cplx* arow = rec.a_site.data() + i * n_sites;
        double nbar = 0.0;
        cplx abar{0.0, 0.0};
        for (std::size_t s = 0; s < n_sites; ++s) {
            n_stat[i * n_sites + s].add(nrow[s], k);
            a_stat[i * n_sites + s].add(arow[s], k);
            nbar += nrow[s];
            abar += arow[s];
        }
        if (has_center) {
            const cplx cc = std::conj(arow[center]);
            for (std::size_t s = 0; s < n_sites; ++s)
                pair_stat[i * n_sites + s].add(cc * arow[s], k);
        }
        nbar *= inv_s;
        abar *= inv_s;
        nbar_stat[i].add(nbar, k);
        absalpha_stat[i].add(std::abs(abar), k);
        alpha_stat[i].add(abar, k);
        if (traj_index >= 0 && traj_index < record_cap) {
            recorded_alpha[static_cast<std::size_t>(traj_index) * n_samples + i] = abar;
            recorded_mask[traj_index] = 1;
        }
    }
    if (has_center) {
        // late-window time average of the pair product, one value per site
        for (std::size_t s = 0; s < n_sites; ++s) {
            cplx acc{0.0, 0.0};
            for (std::size_t i = window_begin; i < n_samples; ++i)
                acc += std::conj(rec.a_site[i * n_sites + center]) *
                       rec.a_site[i * n_sites + s];
            wpair_stat[s].add(acc / wlen, k);
        }
    }
    if (rec.max_tail_population > max_tail_population)
        max_tail_population = rec.max_tail_population;
}

void EnsembleAccumulator::merge(const EnsembleAccumulator& o) {
    if (o.count == 0) return;
    if (o.n_sites != n_sites || o.n_samples != n_samples ||
        o.has_center != has_center || o.window_begin != window_begin)
        throw DimensionError("cannot merge accumulators with different layouts");
    for (std::size_t i = 0; i < n_stat.size(); ++i) n_stat[i].merge(o.n_stat[i], count, o.count);
    for (std::size_t i = 0; i < a_stat.size(); ++i) a_stat[i].merge(o.a_stat[i], count, o.count);
    for (std::size_t i = 0; i < pair_stat.size(); ++i)
        pair_stat[i].merge(o.pair_stat[i], count, o.count);
    for (std::size_t i = 0; i < n_samples; ++i) {
        nbar_stat[i].merge(o.nbar_stat[i], count, o.count);
        absalpha_stat[i].merge(o.absalpha_stat[i], count, o.count);
        alpha_stat[i].merge(o.alpha_stat[i], count, o.count);
    }
    for (std::size_t i = 0; i < wpair_stat.size(); ++i)
        wpair_stat[i].merge(o.wpair_stat[i], count, o.count);
    for (int r = 0; r < record_cap; ++r)
        if (o.recorded_mask[r]) {
            std::memcpy(recorded_alpha.data() + static_cast<std::size_t>(r) * n_samples,
                        o.recorded_alpha.data() + static_cast<std::size_t>(r) * n_samples,
                        n_samples * sizeof(cplx));
            recorded_mask[r] = 1;
        }
    if (o.max_tail_population > max_tail_population)
        max_tail_population = o.max_tail_population;
    count += o.count;
}

namespace {

struct EnsemblePlan {
    std::vector<double> times;
    std::size_t window_begin = 0;
    bool has_center = false;
    std::size_t center = 0;
};

EnsemblePlan make_plan(const EnsembleSpec& spec) {
    if (spec.n_traj < 1) throw ConfigError("ensemble.n_traj must be >= 1");
    if (spec.sample_interval < spec.step.dt)
        throw ConfigError("sample_interval must be >= dt");
    const long n_intervals = std::lround(spec.t_final / spec.sample_interval);
    if (std::abs(n_intervals * spec.sample_interval - spec.t_final) >
        1e-9 * std::max(spec.t_final, 1.0))
        throw ConfigError("t_final must be an integer multiple of sample_interval");

    EnsemblePlan plan;
    plan.times.resize(n_intervals + 1);
    for (long k = 0; k <= n_intervals; ++k)
        plan.times[k] = k * spec.sample_interval;

    plan.has_center = spec.track_correlations && spec.geom.extent % 2 == 1;
    plan.center = plan.has_center ? center_site(spec.geom) : 0;

    const double frac = std::min(std::max(spec.corr_window_frac, 0.0), 1.0);
    const double t_lo = spec.t_final * (1.0 - frac);
    std::size_t wb = plan.times.size() - 1;
    for (std::size_t i = 0; i < plan.times.size(); ++i)
        if (plan.times[i] >= t_lo - 1e-12) {
            wb = i;
            break;
        }
    plan.window_begin = wb;
    return plan;
}

// Trajectories are processed in fixed-size chunks; chunk accumulators are
// merged strictly in chunk order no matter which worker produced them, so
// the ensemble result is bit-identical for every worker count.
constexpr long kChunk = 16;

}  // namespace

EnsembleAccumulator run_ensemble(const EnsembleSpec& spec) {
    const EnsemblePlan plan = make_plan(spec);
    const LocalModel model = build_local_model(spec.model);
    const std::size_t d = spec.model.cutoff;
    const std::size_t ns = spec.geom.n_sites();

    int workers = spec.workers;
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    const long n_chunks = (spec.n_traj + kChunk - 1) / kChunk;
    workers = static_cast<int>(std::min<long>(workers, n_chunks));

    EnsembleAccumulator total;
    total.init(ns, plan.times, plan.window_begin, plan.has_center, plan.center,
               spec.record_trajectories);

    std::atomic<long> next_chunk{0};
    std::mutex mu;
    std::condition_variable cv;
    std::map<long, EnsembleAccumulator> pending;
    long next_merge = 0;
    bool failed = false;
    NumericalError first_error{""};
    const long max_pending = 4 * workers + 4;

    auto worker_fn = [&]() {
        Stepper stepper(model, spec.geom, spec.step);
        for (;;) {
            const long c = next_chunk.fetch_add(1);
            if (c >= n_chunks) return;
            {
                std::unique_lock lk(mu);
                if (failed) return;
            }
            EnsembleAccumulator acc;
            acc.init(ns, plan.times, plan.window_begin, plan.has_center,
                     plan.center, spec.record_trajectories);
            const long lo = c * kChunk;
            const long hi = std::min(lo + kChunk, spec.n_traj);
            for (long k = lo; k < hi; ++k) {
                const std::uint64_t seed = derive_stream_seed(spec.master_seed,
                                                              static_cast<std::uint64_t>(k));
                try {
                    TrajectoryState st =
                        spec.init_alpha == cplx{0.0, 0.0}
                            ? TrajectoryState::vacuum(ns, d, seed)
                            : TrajectoryState::coherent(ns, d, spec.init_alpha, seed);
                    SampleRecord rec = run_trajectory(st, stepper, spec.t_final,
                                                      spec.sample_interval);
                    acc.absorb(rec, k);
                } catch (NumericalError& e) {
                    std::lock_guard lk(mu);
                    if (!failed) {
                        failed = true;
                        e.seed = seed;
                        e.trajectory = k;
                        first_error = e;
                    }
                    cv.notify_all();
                    return;
                }
            }
            std::unique_lock lk(mu);
            cv.wait(lk, [&] { return failed || c < next_merge + max_pending; });
            if (failed) return;
            pending.emplace(c, std::move(acc));
            cv.notify_all();
        }
    };

    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker_fn);

    {
        std::unique_lock lk(mu);
        while (next_merge < n_chunks && !failed) {
            cv.wait(lk, [&] { return failed || pending.count(next_merge) > 0; });
            if (failed) break;
            auto node = pending.extract(next_merge);
            lk.unlock();
            total.merge(node.mapped());
            lk.lock();
            ++next_merge;
            cv.notify_all();
        }
    }
    for (auto& t : pool) t.join();

    if (failed) {
        NumericalError out("trajectory " + std::to_string(first_error.trajectory) +
                           " failed: " + first_error.what() +
                           " (replay seed " + std::to_string(first_error.seed) + ")");
        out.seed = first_error.seed;
        out.trajectory = first_error.trajectory;
        out.site = first_error.site;
        out.time = first_error.time;
        throw out;
    }
    return total;
}

MacroscopicSeries macroscopic_series(const EnsembleAccumulator& acc) {
    if (acc.count < 1) throw ConfigError("accumulator holds no trajectories");
    MacroscopicSeries out;
    out.times = acc.times;
    const std::size_t m = acc.n_samples;
    out.n_mean.resize(m);
    out.n_stderr.resize(m);
    out.absalpha_mean.resize(m);
    out.absalpha_stderr.resize(m);
    out.alpha_mean.resize(m);
    out.alpha_stderr.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        out.n_mean[i] = acc.nbar_stat[i].mean;
        out.n_stderr[i] = acc.nbar_stat[i].stderr_of_mean(acc.count);
        out.absalpha_mean[i] = acc.absalpha_stat[i].mean;
        out.absalpha_stderr[i] = acc.absalpha_stat[i].stderr_of_mean(acc.count);
        out.alpha_mean[i] = acc.alpha_stat[i].mean;
        out.alpha_stderr[i] = acc.alpha_stat[i].stderr_of_mean(acc.count);
    }
    return out;
}

}  // namespace dg
