#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "dg/ensemble.hpp"
#include "dg/errors.hpp"
#include "dg/rng.hpp"
#include "dg/sse.hpp"

using dg::cplx;

namespace {

dg::EnsembleSpec small_spec() {
    dg::EnsembleSpec spec;
    spec.model.delta = 0.0;
    spec.model.u = 10.0;
    spec.model.g2 = 4.0;
    spec.model.j_hop = 0.0;
    spec.model.cutoff = 12;
    spec.geom = {dg::LatticeKind::Chain1D, 1, dg::Boundary::Open};
    spec.t_final = 1.0;
    spec.sample_interval = 0.1;
    spec.n_traj = 8;
    spec.master_seed = 17;
    spec.workers = 1;
    return spec;
}

}  // namespace

TEST_SUITE("ensemble") {

TEST_CASE("streaming moments match a two-pass computation") {
    dg::Xoshiro256pp rng(55);
    std::vector<double> xs(137);
    for (auto& x : xs) x = 3.0 + 2.0 * rng.normal();

    dg::Welford w;
    long k = 0;
    for (double x : xs) w.add(x, ++k);

    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= (xs.size() - 1);

    CHECK(w.mean == doctest::Approx(mean).epsilon(1e-13));
    CHECK(w.variance(k) == doctest::Approx(var).epsilon(1e-12));
    CHECK(w.stderr_of_mean(k) ==
          doctest::Approx(std::sqrt(var / xs.size())).epsilon(1e-12));
}

TEST_CASE("moment merging is exact regardless of the split point") {
    dg::Xoshiro256pp rng(56);
    std::vector<double> xs(100);
    for (auto& x : xs) x = rng.normal();

    dg::Welford whole;
    long k = 0;
    for (double x : xs) whole.add(x, ++k);

    for (std::size_t split : {1u, 17u, 50u, 99u}) {
        dg::Welford lo, hi;
        long i = 0;
        for (std::size_t j = 0; j < split; ++j) lo.add(xs[j], ++i);
        long m = 0;
        for (std::size_t j = split; j < xs.size(); ++j) hi.add(xs[j], ++m);
        lo.merge(hi, static_cast<long>(split),
                 static_cast<long>(xs.size() - split));
        CHECK(lo.mean == doctest::Approx(whole.mean).epsilon(1e-13));
        CHECK(lo.m2 == doctest::Approx(whole.m2).epsilon(1e-12));
    }

    dg::WelfordC cw;
    long n = 0;
    std::vector<cplx> zs(40);
    for (auto& z : zs) z = {rng.normal(), rng.normal()};
    for (const auto& z : zs) cw.add(z, ++n);
    dg::WelfordC a, b;
    long na = 0, nb = 0;
    for (int j = 0; j < 15; ++j) a.add(zs[j], ++na);
    for (int j = 15; j < 40; ++j) b.add(zs[j], ++nb);
    a.merge(b, 15, 25);
    CHECK(std::abs(a.mean - cw.mean) < 1e-13);
    CHECK(a.m2 == doctest::Approx(cw.m2).epsilon(1e-12));
}

TEST_CASE("a single-trajectory ensemble reproduces that trajectory") {
    dg::EnsembleSpec spec = small_spec();
    spec.n_traj = 1;
    const auto acc = dg::run_ensemble(spec);

    dg::Stepper stepper(dg::build_local_model(spec.model), spec.geom, spec.step);
    auto state = dg::TrajectoryState::vacuum(
        1, spec.model.cutoff, dg::derive_stream_seed(spec.master_seed, 0));
    const auto rec =
        dg::run_trajectory(state, stepper, spec.t_final, spec.sample_interval);

    REQUIRE(acc.count == 1);
    REQUIRE(acc.n_samples == rec.n_samples());
    for (std::size_t k = 0; k < acc.n_samples; ++k) {
        CHECK(acc.n_stat[k].mean == rec.n_site[k]);
        CHECK(acc.a_stat[k].mean == rec.a_site[k]);
        CHECK(acc.a_stat[k].m2 == 0.0);
    }
}

TEST_CASE("results are bit-identical for any worker count") {
    dg::EnsembleSpec spec = small_spec();
    spec.n_traj = 40;  // spans multiple accumulation chunks
    spec.workers = 1;
    const auto one = dg::run_ensemble(spec);
    spec.workers = 3;
    const auto three = dg::run_ensemble(spec);

    REQUIRE(one.n_samples == three.n_samples);
    for (std::size_t i = 0; i < one.n_stat.size(); ++i) {
        CHECK(one.n_stat[i].mean == three.n_stat[i].mean);
        CHECK(one.n_stat[i].m2 == three.n_stat[i].m2);
    }
    for (std::size_t i = 0; i < one.a_stat.size(); ++i)
        CHECK(one.a_stat[i].mean == three.a_stat[i].mean);
    for (std::size_t i = 0; i < one.wpair_stat.size(); ++i)
        CHECK(one.wpair_stat[i].mean == three.wpair_stat[i].mean);
    CHECK(one.max_tail_population == three.max_tail_population);
}

TEST_CASE("a failing trajectory aborts with its replay seed") {
    dg::EnsembleSpec spec = small_spec();
    spec.step.scheme = dg::Scheme::Euler;
    spec.step.dt = 5.0;
    spec.t_final = 500.0;
    spec.sample_interval = 5.0;
    spec.n_traj = 3;
    try {
        (void)dg::run_ensemble(spec);
        FAIL("expected a NumericalError");
    } catch (const dg::NumericalError& e) {
        CHECK(e.trajectory >= 0);
        CHECK(e.seed == dg::derive_stream_seed(spec.master_seed,
                                               static_cast<std::uint64_t>(
                                                   e.trajectory)));
        CHECK(std::string(e.what()).find("replay seed") != std::string::npos);
    }
}

TEST_CASE("vacuum ensemble without drive stays identically dark") {
    dg::EnsembleSpec spec = small_spec();
    spec.model.g2 = 0.0;
    spec.n_traj = 4;
    const auto acc = dg::run_ensemble(spec);
    const auto macro = dg::macroscopic_series(acc);
    for (double v : macro.n_mean) CHECK(v == 0.0);
    for (double v : macro.absalpha_mean) CHECK(v == 0.0);
    for (cplx z : macro.alpha_mean) CHECK(std::abs(z) == 0.0);
}

TEST_CASE("recorded trajectories hold the per-trajectory order parameter") {
    dg::EnsembleSpec spec = small_spec();
    spec.n_traj = 5;
    spec.record_trajectories = 3;
    const auto acc = dg::run_ensemble(spec);
    REQUIRE(acc.record_cap == 3);
    for (int r = 0; r < 3; ++r) CHECK(acc.recorded_mask[r] == 1);

    // replay trajectory 1 and compare its alpha series
    dg::Stepper stepper(dg::build_local_model(spec.model), spec.geom, spec.step);
    auto state = dg::TrajectoryState::vacuum(
        1, spec.model.cutoff, dg::derive_stream_seed(spec.master_seed, 1));
    const auto rec =
        dg::run_trajectory(state, stepper, spec.t_final, spec.sample_interval);
    for (std::size_t k = 0; k < acc.n_samples; ++k)
        CHECK(acc.recorded_alpha[1 * acc.n_samples + k] == rec.a_site[k]);
}

TEST_CASE("sign symmetry: the mean field averages out, its magnitude does not") {
    dg::EnsembleSpec spec = small_spec();
    spec.t_final = 6.0;
    spec.n_traj = 200;
    const auto acc = dg::run_ensemble(spec);
    const auto macro = dg::macroscopic_series(acc);
    const std::size_t last = acc.n_samples - 1;
    CHECK(macro.absalpha_mean[last] > 0.1);
    CHECK(std::abs(macro.alpha_mean[last]) < 0.3 * macro.absalpha_mean[last]);
}

TEST_CASE("late-time window and center bookkeeping") {
    dg::EnsembleSpec spec = small_spec();
    spec.t_final = 10.0;
    spec.corr_window_frac = 0.25;
    spec.n_traj = 4;
    const auto acc = dg::run_ensemble(spec);
    CHECK(acc.has_center);
    CHECK(acc.center == 0);
    CHECK(acc.times[acc.window_begin] == doctest::Approx(7.5));
    // center pair product on a single site is |alpha|^2: real and positive
    CHECK(acc.wpair_stat[0].mean.real() > 0.0);
    CHECK(std::abs(acc.wpair_stat[0].mean.imag()) <
          0.01 * acc.wpair_stat[0].mean.real());
}

TEST_CASE("merging incompatible accumulators is rejected") {
    dg::EnsembleSpec spec = small_spec();
    spec.n_traj = 2;
    auto a = dg::run_ensemble(spec);
    dg::EnsembleSpec other = spec;
    other.t_final = 2.0;
    const auto b = dg::run_ensemble(other);
    CHECK_THROWS_AS(a.merge(b), dg::DimensionError);
}

}  // TEST_SUITE
