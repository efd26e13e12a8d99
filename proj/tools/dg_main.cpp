// dg — driven-dissipative Bose-Hubbard lattice simulator.
//
// Subcommands:
//   run      integrate a trajectory ensemble and persist all results
//   sweep    repeat a run across one parameter axis, one subdirectory each
//   oracle   exact density-matrix reference for 1-2 sites (or --jump compare)
//   check    fast self-verification battery
//   analyze  re-fit persisted CSV outputs in place
//
// Exit codes: 0 success, 1 check/sweep-point failure, 2 configuration
// error, 3 numerical failure (message carries the replay seed).

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dg/analysis.hpp"
#include "dg/config.hpp"
#include "dg/ensemble.hpp"
#include "dg/errors.hpp"
#include "dg/io.hpp"
#include "dg/kernels.hpp"
#include "dg/oracle.hpp"
#include "dg/rng.hpp"
#include "dg/sse.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int resolve_workers(int cli_workers, const dg::RunConfig& cfg) {
    if (const char* env = std::getenv("DG_WORKERS")) {
        try {
            return std::stoi(env);
        } catch (const std::exception&) {
            throw dg::ConfigError("DG_WORKERS must be an integer, got '" +
                                  std::string(env) + "'");
        }
    }
    if (cli_workers >= 0) return cli_workers;
    return cfg.workers;
}

json fit_to_json(const dg::FitResult& f, const char* value_name) {
    return {{"status", "ok"},
            {value_name, f.rate_or_length},
            {"amplitude", f.amplitude},
            {"residual_rms", f.residual_rms},
            {"win_lo", f.win_lo},
            {"win_hi", f.win_hi},
            {"offset", f.offset}};
}

json fit_failure(const char* status, const std::exception& e) {
    return {{"status", status}, {"message", e.what()}};
}

struct WindowStats {
    double n_ss = kNaN, n_ss_stderr = kNaN;
    double absalpha_ss = kNaN, absalpha_ss_stderr = kNaN;
};

// Time averages over the late window; stderrs are averaged rather than
// reduced by the window length (samples are autocorrelated in time).
WindowStats window_stats(const dg::EnsembleAccumulator& acc) {
    WindowStats w{0.0, 0.0, 0.0, 0.0};
    const std::size_t wb = acc.window_begin;
    const double len = static_cast<double>(acc.n_samples - wb);
    for (std::size_t k = wb; k < acc.n_samples; ++k) {
        w.n_ss += acc.nbar_stat[k].mean;
        w.n_ss_stderr += acc.nbar_stat[k].stderr_of_mean(acc.count);
        w.absalpha_ss += acc.absalpha_stat[k].mean;
        w.absalpha_ss_stderr += acc.absalpha_stat[k].stderr_of_mean(acc.count);
    }
    w.n_ss /= len;
    w.n_ss_stderr /= len;
    w.absalpha_ss /= len;
    w.absalpha_ss_stderr /= len;
    return w;
}

void write_projection_csv(const std::string& path, const std::vector<double>& g,
                          const std::vector<double>& se,
                          const dg::FitResult* fe, const dg::FitResult* fp,
                          const dg::FileStamp& stamp) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw dg::Error("cannot open output file: " + path);
    out << "# config=" << stamp.config_hash << "\n";
    out << "# master_seed=" << stamp.master_seed << "\n";
    out << "displacement,g,stderr,exp_fit,power_fit\n";
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = static_cast<double>(i);
        const double ye =
            fe ? fe->amplitude * std::exp(-x / fe->rate_or_length) : kNaN;
        const double yp = (fp && i >= 1)
                              ? fp->amplitude * std::pow(x, -fp->rate_or_length)
                              : kNaN;
        out << i << ',' << dg::format_double(g[i]) << ','
            << dg::format_double(se[i]) << ',' << dg::format_double(ye) << ','
            << dg::format_double(yp) << "\n";
    }
}

struct FitBundle {
    json fits = json::object();
    json projection;
    double xi = kNaN, xi_residual = kNaN, powerlaw_residual = kNaN;
    double gamma_n = kNaN, gamma_alpha = kNaN;
    std::vector<std::string> notes;
    // kept for the projection CSV
    std::vector<double> g, se;
    std::optional<dg::FitResult> exp_fit, pow_fit;
};

FitBundle compute_map_fits(const dg::CorrelationMap& map,
                           std::optional<double> floor_override) {
    FitBundle b;
    const double floor = floor_override ? *floor_override
                                        : dg::default_noise_floor(map);
    b.g = dg::project_1d(map);
    b.se = dg::project_1d_stderr(map);
    try {
        dg::FitResult f = dg::fit_exponential(b.g, floor);
        b.fits["xi"] = fit_to_json(f, "xi");
        b.xi = f.rate_or_length;
        b.xi_residual = f.residual_rms;
        b.exp_fit = f;
    } catch (const dg::InsufficientDataError& e) {
        b.fits["xi"] = fit_failure("insufficient_data", e);
        b.notes.push_back("xi_unresolved");
    }
    try {
        dg::FitResult f = dg::fit_power_law(b.g, floor);
        b.fits["power_law"] = fit_to_json(f, "exponent");
        b.powerlaw_residual = f.residual_rms;
        b.pow_fit = f;
    } catch (const dg::InsufficientDataError& e) {
        b.fits["power_law"] = fit_failure("insufficient_data", e);
    }
    b.projection = {{"displacement", json::array()},
                    {"g", b.g},
                    {"stderr", b.se},
                    {"noise_floor", floor}};
    for (std::size_t i = 0; i < b.g.size(); ++i) b.projection["displacement"].push_back(i);
    return b;
}

void compute_relaxation_fits(const std::vector<double>& times,
                             const std::vector<double>& n_series,
                             const std::vector<double>& a_series, FitBundle& b) {
    try {
        dg::FitResult f = dg::fit_relaxation(times, n_series);
        b.fits["gamma_eff_n"] = fit_to_json(f, "gamma_eff");
        b.gamma_n = f.rate_or_length;
    } catch (const dg::RateUnresolvableError& e) {
        b.fits["gamma_eff_n"] = fit_failure("rate_unresolvable", e);
        b.notes.push_back("gamma_n_unresolved");
    } catch (const dg::InsufficientDataError& e) {
        b.fits["gamma_eff_n"] = fit_failure("insufficient_data", e);
        b.notes.push_back("gamma_n_unresolved");
    }
    try {
        dg::FitResult f = dg::fit_relaxation(times, a_series);
        b.fits["gamma_eff_alpha"] = fit_to_json(f, "gamma_eff");
        b.gamma_alpha = f.rate_or_length;
    } catch (const dg::RateUnresolvableError& e) {
        b.fits["gamma_eff_alpha"] = fit_failure("rate_unresolvable", e);
        b.notes.push_back("gamma_alpha_unresolved");
    } catch (const dg::InsufficientDataError& e) {
        b.fits["gamma_eff_alpha"] = fit_failure("insufficient_data", e);
        b.notes.push_back("gamma_alpha_unresolved");
    }
}

// One full run: ensemble, persistence, fits. Returns the sweep-row view.
dg::SweepRow do_run(const dg::RunConfig& cfg, int cli_workers, double axis_value) {
    dg::EnsembleSpec spec = cfg.ensemble_spec();
    spec.workers = resolve_workers(cli_workers, cfg);

    const auto t0 = std::chrono::steady_clock::now();
    dg::EnsembleAccumulator acc = dg::run_ensemble(spec);
    const double runtime =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();

    const dg::FileStamp stamp{dg::config_hash(cfg), cfg.master_seed};
    fs::create_directories(cfg.out_dir);
    const fs::path dir(cfg.out_dir);

    dg::write_json((dir / "config.json").string(), dg::normalized_json(cfg));
    dg::write_timeseries_csv((dir / "timeseries.csv").string(), acc, stamp);
    if (cfg.record_trajectories > 0)
        dg::write_trajectories_csv((dir / "trajectories.csv").string(), acc, stamp);

    const dg::MacroscopicSeries macro = dg::macroscopic_series(acc);
    const WindowStats w = window_stats(acc);

    FitBundle fits;
    if (acc.has_center) {
        const dg::CorrelationMap map = dg::correlation_map(acc, cfg.lattice);
        dg::write_corrmap_csv((dir / "corrmap.csv").string(), map, stamp);
        fits = compute_map_fits(map, cfg.noise_floor);
        write_projection_csv((dir / "projection.csv").string(), fits.g, fits.se,
                             fits.exp_fit ? &*fits.exp_fit : nullptr,
                             fits.pow_fit ? &*fits.pow_fit : nullptr, stamp);
    } else {
        fits.fits["xi"] = {{"status", "no_center"},
                           {"message", "lattice has no center site"}};
        fits.notes.push_back("no_center");
    }
    compute_relaxation_fits(macro.times, macro.n_mean, macro.absalpha_mean, fits);

    json summary = {
        {"config_hash", stamp.config_hash},
        {"master_seed", cfg.master_seed},
        {"n_traj", acc.count},
        {"workers", spec.workers},
        {"backend", dg::kernels::active().name},
        {"runtime_seconds", runtime},
        {"max_tail_population", acc.max_tail_population},
        {"steady",
         {{"window_begin_time", acc.times[acc.window_begin]},
          {"n_ss", w.n_ss},
          {"n_ss_stderr", w.n_ss_stderr},
          {"absalpha_ss", w.absalpha_ss},
          {"absalpha_ss_stderr", w.absalpha_ss_stderr}}},
        {"fits", fits.fits},
    };
    if (!fits.projection.is_null()) summary["projection"] = fits.projection;
    dg::write_json((dir / "summary.json").string(), summary);

    dg::SweepRow row;
    row.axis_value = axis_value;
    row.n_ss = w.n_ss;
    row.n_ss_stderr = w.n_ss_stderr;
    row.absalpha_ss = w.absalpha_ss;
    row.absalpha_ss_stderr = w.absalpha_ss_stderr;
    row.xi = fits.xi;
    row.xi_residual = fits.xi_residual;
    row.powerlaw_residual = fits.powerlaw_residual;
    row.gamma_eff_n = fits.gamma_n;
    row.gamma_eff_alpha = fits.gamma_alpha;
    if (!fits.notes.empty()) {
        row.status.clear();
        for (std::size_t i = 0; i < fits.notes.size(); ++i)
            row.status += (i ? ";" : "") + fits.notes[i];
    }

    std::cout << "wrote " << cfg.out_dir << ": n_traj=" << acc.count
              << " n_ss=" << w.n_ss << " absalpha_ss=" << w.absalpha_ss;
    if (std::isfinite(fits.xi)) std::cout << " xi=" << fits.xi;
    std::cout << " backend=" << dg::kernels::active().name << " ("
              << runtime << " s)\n";
    return row;
}

int cmd_run(const std::string& config_path, int cli_workers) {
    const dg::RunConfig cfg = dg::load_config(config_path);
    do_run(cfg, cli_workers, 0.0);
    return 0;
}

int cmd_sweep(const std::string& config_path, std::string axis,
              std::vector<double> values, int cli_workers) {
    dg::RunConfig base = dg::load_config(config_path);
    if (axis.empty()) axis = base.sweep_axis;
    if (values.empty()) values = base.sweep_values;
    if (axis.empty() || values.empty())
        throw dg::ConfigError(
            "sweep needs an axis and values (either flags or a config sweep "
            "block)");
    if (axis == "j_hop" && !base.slave_delta)
        std::cout << "note: delta is not slaved to j_hop in this sweep\n";

    std::vector<dg::SweepRow> rows;
    bool any_failed = false;
    for (std::size_t p = 0; p < values.size(); ++p) {
        dg::RunConfig cfg = dg::apply_axis(base, axis, values[p]);
        cfg.master_seed = dg::derive_stream_seed(base.master_seed, p);
        cfg.out_dir = (fs::path(base.out_dir) /
                       (axis + "_" + dg::format_double(values[p])))
                          .string();
        cfg.sweep_values.clear();
        cfg.sweep_axis.clear();
        try {
            rows.push_back(do_run(cfg, cli_workers, values[p]));
        } catch (const dg::Error& e) {
            std::cerr << "sweep point " << axis << "=" << values[p]
                      << " failed: " << e.what() << "\n";
            dg::SweepRow row;
            row.axis_value = values[p];
            row.n_ss = row.n_ss_stderr = kNaN;
            row.absalpha_ss = row.absalpha_ss_stderr = kNaN;
            row.xi = row.xi_residual = row.powerlaw_residual = kNaN;
            row.gamma_eff_n = row.gamma_eff_alpha = kNaN;
            row.status = "failed";
            rows.push_back(row);
            any_failed = true;
        }
    }
    fs::create_directories(base.out_dir);
    const dg::FileStamp stamp{dg::config_hash(base), base.master_seed};
    dg::write_sweep_csv((fs::path(base.out_dir) / "sweep.csv").string(), rows,
                        axis, stamp);
    std::cout << "wrote " << (fs::path(base.out_dir) / "sweep.csv").string()
              << " (" << rows.size() << " points)\n";
    return any_failed ? 1 : 0;
}

int cmd_oracle(const std::string& config_path, double dt_rk, std::size_t dim_cap,
               bool jump, long jump_traj) {
    const dg::RunConfig cfg = dg::load_config(config_path);
    fs::create_directories(cfg.out_dir);
    const fs::path dir(cfg.out_dir);
    const dg::FileStamp stamp{dg::config_hash(cfg), cfg.master_seed};

    if (jump) {
        const dg::JumpCompareResult res = dg::jump_gutzwiller_compare(
            cfg.model, cfg.lattice, jump_traj, cfg.t_final, cfg.step.dt,
            cfg.sample_interval, cfg.master_seed);
        std::ofstream out(dir / "jump.csv", std::ios::binary);
        out << "# config=" << stamp.config_hash << "\n";
        out << "# master_seed=" << stamp.master_seed << "\n";
        out << "t,n_mean\n";
        for (std::size_t k = 0; k < res.times.size(); ++k)
            out << dg::format_double(res.times[k]) << ','
                << dg::format_double(res.n_mean[k]) << "\n";
        const json summary = {{"config_hash", stamp.config_hash},
                              {"n_traj", jump_traj},
                              {"max_abs_a", res.max_abs_a},
                              {"jumps_k1", res.jumps_k1},
                              {"jumps_k2", res.jumps_k2}};
        dg::write_json((dir / "jump_summary.json").string(), summary);
        std::cout << "jump comparison: max|<a>|=" << res.max_abs_a << ", "
                  << res.jumps_k1 << " single-photon and " << res.jumps_k2
                  << " pair jumps\n";
        return 0;
    }

    const int sites = static_cast<int>(cfg.lattice.n_sites());
    if (sites > 2)
        throw dg::ConfigError(
            "exact integration supports at most 2 sites; use a chain of "
            "extent 1 or 2");
    const dg::LindbladResult res =
        dg::evolve_exact(cfg.model, sites, cfg.t_final, dt_rk,
                         cfg.sample_interval, dim_cap);

    std::ofstream out(dir / "oracle.csv", std::ios::binary);
    out << "# config=" << stamp.config_hash << "\n";
    out << "# master_seed=" << stamp.master_seed << "\n";
    out << "t";
    for (int s = 0; s < sites; ++s)
        out << ",n_" << s << ",a_re_" << s << ",a_im_" << s;
    if (sites == 2) out << ",cross_re,cross_im";
    out << "\n";
    for (std::size_t k = 0; k < res.times.size(); ++k) {
        out << dg::format_double(res.times[k]);
        for (int s = 0; s < sites; ++s) {
            out << ',' << dg::format_double(res.n_exp[k * sites + s]) << ','
                << dg::format_double(res.a_exp[k * sites + s].real()) << ','
                << dg::format_double(res.a_exp[k * sites + s].imag());
        }
        if (sites == 2)
            out << ',' << dg::format_double(res.cross_corr[k].real()) << ','
                << dg::format_double(res.cross_corr[k].imag());
        out << "\n";
    }
    const json summary = {{"config_hash", stamp.config_hash},
                          {"sites", sites},
                          {"total_dim", res.total_dim},
                          {"dt_rk", dt_rk},
                          {"max_trace_error", res.max_trace_error},
                          {"max_hermiticity_error", res.max_hermiticity_error},
                          {"min_eigenvalue", res.min_eigenvalue},
                          {"steady_reached", res.steady_reached},
                          {"t_steady", res.t_steady}};
    dg::write_json((dir / "oracle_summary.json").string(), summary);
    std::cout << "oracle: n(T)=" << res.n_exp[res.n_exp.size() - sites]
              << " trace_err=" << res.max_trace_error
              << " min_eig=" << res.min_eigenvalue << "\n";
    return 0;
}

int cmd_analyze(const std::string& run_dir,
                std::optional<double> floor_override) {
    const fs::path dir(run_dir);
    if (!fs::exists(dir / "timeseries.csv"))
        throw dg::ConfigError("no timeseries.csv in " + run_dir);
    const dg::TimeseriesData ts =
        dg::read_timeseries_csv((dir / "timeseries.csv").string());

    FitBundle fits;
    if (fs::exists(dir / "corrmap.csv")) {
        const dg::CorrelationMap map =
            dg::read_corrmap_csv((dir / "corrmap.csv").string());
        fits = compute_map_fits(map, floor_override);
    } else {
        fits.fits["xi"] = {{"status", "no_center"},
                           {"message", "no corrmap.csv in this run directory"}};
    }
    compute_relaxation_fits(ts.times, ts.n_mean, ts.absalpha_mean, fits);

    json summary = json::object();
    if (fs::exists(dir / "summary.json")) {
        std::ifstream in(dir / "summary.json");
        try {
            in >> summary;
        } catch (const json::parse_error& e) {
            throw dg::ConfigError("summary.json is not valid JSON: " +
                                  std::string(e.what()));
        }
    }
    summary["fits"] = fits.fits;
    if (!fits.projection.is_null()) summary["projection"] = fits.projection;
    dg::write_json((dir / "summary.json").string(), summary);

    for (auto& [name, f] : fits.fits.items()) {
        std::cout << name << ": ";
        if (f["status"] == "ok") {
            for (const char* key : {"xi", "exponent", "gamma_eff"})
                if (f.contains(key))
                    std::cout << key << "=" << f[key].get<double>()
                              << " residual=" << f["residual_rms"].get<double>();
        } else {
            std::cout << f["status"].get<std::string>();
        }
        std::cout << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// check battery

struct CheckOutcome {
    bool pass = false;
    std::string metric;
};

dg::ModelParams paper_regime(double j) {
    dg::ModelParams p;
    p.gamma1 = p.gamma2 = 1.0;
    p.g2 = 4.0;
    p.u = 10.0;
    p.j_hop = j;
    p.delta = j;
    p.cutoff = 15;
    return p;
}

CheckOutcome check_vacuum_fixed_point() {
    dg::ModelParams p = paper_regime(0.7);
    p.g2 = 0.0;  // no pair drive: the vacuum is a strict fixed point
    p.cutoff = 10;
    const dg::LatticeGeometry geom{dg::LatticeKind::Chain1D, 3, dg::Boundary::Open};
    dg::Stepper stepper(dg::build_local_model(p), geom, {});
    auto state = dg::TrajectoryState::vacuum(geom.n_sites(), p.cutoff, 42);
    const dg::SampleRecord rec = dg::run_trajectory(state, stepper, 0.2, 0.05);
    double dev = 0.0;
    for (double n : rec.n_site) dev = std::max(dev, std::abs(n));
    for (dg::cplx a : rec.a_site) dev = std::max(dev, std::abs(a));
    return {dev <= 1e-14, "max_dev=" + dg::format_double(dev)};
}

CheckOutcome check_parity_equivariance() {
    const dg::ModelParams p = paper_regime(1.0);
    const dg::LatticeGeometry geom{dg::LatticeKind::Square2D, 3,
                                   dg::Boundary::Open};
    const dg::LocalModel model = dg::build_local_model(p);
    auto run = [&](bool flip) {
        dg::Stepper stepper(model, geom, {});
        if (flip)
            stepper.set_noise_transform([](double* dw, std::size_t ns) {
                for (std::size_t s = 0; s < ns; ++s) dw[2 * s] = -dw[2 * s];
            });
        auto state = dg::TrajectoryState::vacuum(geom.n_sites(), p.cutoff, 7);
        return dg::run_trajectory(state, stepper, 0.5, 0.1);
    };
    const dg::SampleRecord a = run(false), b = run(true);
    double n_dev = 0.0, a_sum = 0.0;
    for (std::size_t i = 0; i < a.n_site.size(); ++i)
        n_dev = std::max(n_dev, std::abs(a.n_site[i] - b.n_site[i]));
    for (std::size_t i = 0; i < a.a_site.size(); ++i)
        a_sum = std::max(a_sum, std::abs(a.a_site[i] + b.a_site[i]));
    const bool pass = n_dev <= 1e-13 && a_sum <= 1e-12;
    return {pass, "n_dev=" + dg::format_double(n_dev) +
                      " a_sum=" + dg::format_double(a_sum)};
}

CheckOutcome check_norm_preservation() {
    const dg::ModelParams p = paper_regime(0.8);
    const dg::LatticeGeometry geom{dg::LatticeKind::Chain1D, 3,
                                   dg::Boundary::Periodic};
    dg::Stepper stepper(dg::build_local_model(p), geom, {});
    auto state =
        dg::TrajectoryState::coherent(geom.n_sites(), p.cutoff, {0.4, 0.1}, 11);
    const auto& ops = dg::kernels::active();
    double dev = 0.0;
    for (int i = 0; i < 200; ++i) {
        stepper.step(state);
        for (std::size_t s = 0; s < geom.n_sites(); ++s)
            dev = std::max(
                dev, std::abs(ops.norm2(p.cutoff, state.site(s)) - 1.0));
    }
    return {dev <= 1e-12, "max_norm_dev=" + dg::format_double(dev)};
}

CheckOutcome check_zero_hopping_oracle(bool fast) {
    dg::ModelParams p = paper_regime(0.0);
    p.delta = 0.0;
    const double t_final = fast ? 3.0 : 4.0;
    dg::EnsembleSpec spec;
    spec.model = p;
    spec.geom = {dg::LatticeKind::Chain1D, 1, dg::Boundary::Open};
    spec.t_final = t_final;
    spec.sample_interval = 0.1;
    spec.n_traj = fast ? 200 : 400;
    spec.master_seed = 2024;
    spec.workers = 0;
    const dg::EnsembleAccumulator acc = dg::run_ensemble(spec);
    const dg::LindbladResult exact =
        dg::evolve_exact(p, 1, t_final, 1e-3, spec.sample_interval);
    std::size_t within = 0;
    for (std::size_t k = 0; k < acc.n_samples; ++k) {
        const double diff = std::abs(acc.nbar_stat[k].mean - exact.n_exp[k]);
        if (diff <= 3.0 * acc.nbar_stat[k].stderr_of_mean(acc.count)) ++within;
    }
    const double frac =
        static_cast<double>(within) / static_cast<double>(acc.n_samples);
    return {frac >= 0.9, "frac_within_3sigma=" + dg::format_double(frac)};
}

CheckOutcome check_jump_zero_coherence(bool fast) {
    const dg::ModelParams p = paper_regime(0.8);
    const dg::LatticeGeometry geom{dg::LatticeKind::Chain1D, 3,
                                   dg::Boundary::Open};
    const dg::JumpCompareResult res = dg::jump_gutzwiller_compare(
        p, geom, fast ? 5 : 10, 2.0, 1e-3, 0.5, 99);
    return {res.max_abs_a <= 1e-12,
            "max_abs_a=" + dg::format_double(res.max_abs_a)};
}

CheckOutcome check_dt_convergence(bool inject_error) {
    // Noise-free integration from a coherent state must converge at first
    // order: halving dt should roughly halve the error, so the Richardson
    // ratio (n_dt - n_dt/2)/(n_dt/2 - n_dt/4) must sit near 2. A silently
    // corrupted dt breaks the ratio and fails this check.
    dg::ModelParams p = paper_regime(0.0);
    p.delta = 0.0;
    const dg::LocalModel model = dg::build_local_model(p);
    const dg::LatticeGeometry geom{dg::LatticeKind::Chain1D, 1,
                                   dg::Boundary::Open};
    auto n_final = [&](double dt) {
        dg::StepConfig sc;
        sc.dt = dt;
        dg::Stepper stepper(model, geom, sc);
        stepper.set_noise_transform([](double* dw, std::size_t ns) {
            for (std::size_t s = 0; s < 2 * ns; ++s) dw[s] = 0.0;
        });
        auto state =
            dg::TrajectoryState::coherent(1, p.cutoff, {0.3, 0.0}, 1);
        const dg::SampleRecord rec = dg::run_trajectory(state, stepper, 1.0, 1.0);
        return rec.n_site.back();
    };
    const double n1 = n_final(4e-3);
    const double n2 = n_final(inject_error ? 4e-3 * 2.0 : 2e-3);
    const double n3 = n_final(1e-3);
    const double ratio = (n1 - n2) / (n2 - n3);
    const bool pass = std::isfinite(ratio) && ratio >= 1.5 && ratio <= 3.0;
    return {pass, "richardson_ratio=" + dg::format_double(ratio)};
}

CheckOutcome check_fitter_roundtrip() {
    double err = 0.0;
    {
        std::vector<double> g(8);
        for (std::size_t i = 0; i < g.size(); ++i)
            g[i] = 0.8 * std::exp(-static_cast<double>(i) / 3.2);
        const dg::FitResult f = dg::fit_exponential(g, 1e-12);
        err = std::max(err, std::abs(f.rate_or_length - 3.2));
        err = std::max(err, std::abs(f.amplitude - 0.8));
    }
    {
        std::vector<double> g(8, 0.0);
        for (std::size_t i = 1; i < g.size(); ++i)
            g[i] = 2.0 * std::pow(static_cast<double>(i), -1.7);
        const dg::FitResult f = dg::fit_power_law(g, 1e-12);
        err = std::max(err, std::abs(f.rate_or_length - 1.7));
    }
    {
        std::vector<double> t, o;
        for (int k = 0; k <= 300; ++k) {
            const double tk = 0.1 * k;
            t.push_back(tk);
            o.push_back(tk <= 24.0 ? 1.0 - std::exp(-0.5 * tk) : 1.0);
        }
        const dg::FitResult f = dg::fit_relaxation(t, o);
        err = std::max(err, std::abs(f.rate_or_length - 0.5));
        err = std::max(err, std::abs(f.offset - 1.0));
    }
    return {err <= 1e-9, "max_err=" + dg::format_double(err)};
}

int cmd_check(bool fast, bool inject_dt_error) {
    struct Entry {
        const char* name;
        std::function<CheckOutcome()> fn;
    };
    const std::vector<Entry> entries = {
        {"vacuum_fixed_point", [] { return check_vacuum_fixed_point(); }},
        {"parity_equivariance", [] { return check_parity_equivariance(); }},
        {"norm_preservation", [] { return check_norm_preservation(); }},
        {"zero_hopping_oracle", [=] { return check_zero_hopping_oracle(fast); }},
        {"jump_zero_coherence", [=] { return check_jump_zero_coherence(fast); }},
        {"dt_convergence", [=] { return check_dt_convergence(inject_dt_error); }},
        {"fitter_roundtrip", [] { return check_fitter_roundtrip(); }},
    };
    bool all_pass = true;
    for (const auto& e : entries) {
        CheckOutcome out;
        try {
            out = e.fn();
        } catch (const std::exception& ex) {
            out = {false, std::string("error=") + ex.what()};
        }
        all_pass = all_pass && out.pass;
        std::cout << "CHECK " << e.name << ' ' << (out.pass ? "PASS" : "FAIL")
                  << ' ' << out.metric << "\n";
    }
    std::cout << (all_pass ? "all checks passed" : "CHECK BATTERY FAILED")
              << "\n";
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"driven-dissipative Bose-Hubbard lattice simulator"};
    app.require_subcommand(1);

    std::string config_path, run_dir, axis;
    std::vector<double> values;
    int workers = -1;
    double dt_rk = 1e-3;
    std::size_t dim_cap = 400;
    bool jump = false, fast = false, inject_dt_error = false;
    long jump_traj = 50;
    double floor_flag = 0.0;

    CLI::App* run = app.add_subcommand("run", "integrate one trajectory ensemble");
    run->add_option("config", config_path, "JSON run configuration")->required();
    run->add_option("--workers", workers,
                    "worker threads (0 = all cores; DG_WORKERS overrides)");

    CLI::App* sweep =
        app.add_subcommand("sweep", "run once per value of one parameter axis");
    sweep->add_option("config", config_path, "JSON run configuration")->required();
    sweep->add_option("--axis", axis, "parameter to sweep (e.g. j_hop)");
    sweep->add_option("--values", values, "axis values")->delimiter(',');
    sweep->add_option("--workers", workers, "worker threads");

    CLI::App* oracle = app.add_subcommand(
        "oracle", "exact density-matrix reference (1-2 sites)");
    oracle->add_option("config", config_path, "JSON run configuration")->required();
    oracle->add_option("--dt-rk", dt_rk, "Runge-Kutta step");
    oracle->add_option("--dim-cap", dim_cap, "total dimension cap");
    oracle->add_flag("--jump", jump,
                     "run the jump-unraveling comparison instead");
    oracle->add_option("--jump-traj", jump_traj,
                       "trajectories for the jump comparison");

    CLI::App* check = app.add_subcommand("check", "fast self-verification battery");
    check->add_flag("--fast", fast, "reduced trajectory counts");
    check->add_flag("--inject-dt-error", inject_dt_error)->group("");

    CLI::App* analyze =
        app.add_subcommand("analyze", "re-fit persisted outputs of a run");
    analyze->add_option("run_dir", run_dir, "directory written by `dg run`")
        ->required();
    CLI::Option* floor_opt =
        analyze->add_option("--noise-floor", floor_flag, "override the fit floor");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(run)) return cmd_run(config_path, workers);
        if (app.got_subcommand(sweep))
            return cmd_sweep(config_path, axis, values, workers);
        if (app.got_subcommand(oracle))
            return cmd_oracle(config_path, dt_rk, dim_cap, jump, jump_traj);
        if (app.got_subcommand(check)) return cmd_check(fast, inject_dt_error);
        if (app.got_subcommand(analyze)) {
            std::optional<double> floor;
            if (floor_opt->count() > 0) floor = floor_flag;
            return cmd_analyze(run_dir, floor);
        }
    } catch (const dg::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const dg::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
