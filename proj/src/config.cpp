#include "dg/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>

#include "dg/errors.hpp"

namespace dg {

namespace {

using nlohmann::json;

const char* scheme_name(Scheme s) {
    return s == Scheme::ExpEuler ? "exponential_euler" : "euler";
}
const char* kind_name(LatticeKind k) {
    return k == LatticeKind::Chain1D ? "chain" : "square";
}
const char* boundary_name(Boundary b) {
    return b == Boundary::Open ? "open" : "periodic";
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed,
                std::vector<std::string>& errs) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known)
            errs.push_back((path.empty() ? it.key() : path + "." + it.key()) +
                           ": unknown key");
    }
}

template <class T>
void fetch_num(const json& obj, const std::string& path, const char* key,
               T& out, std::vector<std::string>& errs) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_number()) {
        errs.push_back(path + "." + key + ": expected a number");
        return;
    }
    out = it->get<T>();
}

void fetch_index(const json& obj, const std::string& path, const char* key,
                 std::size_t& out, std::vector<std::string>& errs) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_number_integer() || it->get<long long>() < 0) {
        errs.push_back(path + "." + key + ": expected a non-negative integer");
        return;
    }
    out = it->get<std::size_t>();
}

void fetch_bool(const json& obj, const std::string& path, const char* key,
                bool& out, std::vector<std::string>& errs) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_boolean()) {
        errs.push_back(path + "." + key + ": expected true or false");
        return;
    }
    out = it->get<bool>();
}

void fetch_string(const json& obj, const std::string& path, const char* key,
                  std::string& out, std::vector<std::string>& errs) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_string()) {
        errs.push_back(path + "." + key + ": expected a string");
        return;
    }
    out = it->get<std::string>();
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    std::vector<std::string> errs;
    RunConfig cfg;

    check_keys(j, "",
               {"model", "lattice", "integration", "ensemble", "analysis",
                "output", "sweep"},
               errs);

    auto section = [&](const char* name) -> const json* {
        auto it = j.find(name);
        if (it == j.end()) return nullptr;
        if (!it->is_object()) {
            errs.push_back(std::string(name) + ": expected an object");
            return nullptr;
        }
        return &*it;
    };

    if (const json* m = section("model")) {
        check_keys(*m, "model",
                   {"delta", "u", "g2", "j_hop", "gamma1", "gamma2", "cutoff"},
                   errs);
        fetch_num(*m, "model", "delta", cfg.model.delta, errs);
        fetch_num(*m, "model", "u", cfg.model.u, errs);
        fetch_num(*m, "model", "g2", cfg.model.g2, errs);
        fetch_num(*m, "model", "j_hop", cfg.model.j_hop, errs);
        fetch_num(*m, "model", "gamma1", cfg.model.gamma1, errs);
        fetch_num(*m, "model", "gamma2", cfg.model.gamma2, errs);
        fetch_index(*m, "model", "cutoff", cfg.model.cutoff, errs);
    }

    if (const json* l = section("lattice")) {
        check_keys(*l, "lattice", {"kind", "extent", "boundary"}, errs);
        std::string kind = kind_name(cfg.lattice.kind);
        std::string boundary = boundary_name(cfg.lattice.boundary);
        fetch_string(*l, "lattice", "kind", kind, errs);
        fetch_string(*l, "lattice", "boundary", boundary, errs);
        fetch_index(*l, "lattice", "extent", cfg.lattice.extent, errs);
        if (kind == "chain")
            cfg.lattice.kind = LatticeKind::Chain1D;
        else if (kind == "square")
            cfg.lattice.kind = LatticeKind::Square2D;
        else
            errs.push_back("lattice.kind: expected \"chain\" or \"square\"");
        if (boundary == "open")
            cfg.lattice.boundary = Boundary::Open;
        else if (boundary == "periodic")
            cfg.lattice.boundary = Boundary::Periodic;
        else
            errs.push_back("lattice.boundary: expected \"open\" or \"periodic\"");
    }

    if (const json* it = section("integration")) {
        check_keys(*it, "integration",
                   {"dt", "scheme", "milstein", "t_final", "sample_interval"},
                   errs);
        fetch_num(*it, "integration", "dt", cfg.step.dt, errs);
        fetch_num(*it, "integration", "t_final", cfg.t_final, errs);
        fetch_num(*it, "integration", "sample_interval", cfg.sample_interval, errs);
        fetch_bool(*it, "integration", "milstein", cfg.step.milstein, errs);
        std::string scheme = scheme_name(cfg.step.scheme);
        fetch_string(*it, "integration", "scheme", scheme, errs);
        if (scheme == "exponential_euler")
            cfg.step.scheme = Scheme::ExpEuler;
        else if (scheme == "euler")
            cfg.step.scheme = Scheme::Euler;
        else
            errs.push_back(
                "integration.scheme: expected \"exponential_euler\" or "
                "\"euler\"");
    }

    if (const json* e = section("ensemble")) {
        check_keys(*e, "ensemble",
                   {"n_traj", "master_seed", "workers", "init_alpha",
                    "record_trajectories"},
                   errs);
        fetch_num(*e, "ensemble", "n_traj", cfg.n_traj, errs);
        fetch_num(*e, "ensemble", "workers", cfg.workers, errs);
        fetch_num(*e, "ensemble", "record_trajectories", cfg.record_trajectories,
                  errs);
        if (auto s = e->find("master_seed"); s != e->end()) {
            if (!s->is_number_integer() || s->get<long long>() < 0)
                errs.push_back("ensemble.master_seed: expected a non-negative integer");
            else
                cfg.master_seed = s->get<std::uint64_t>();
        }
        if (auto a = e->find("init_alpha"); a != e->end()) {
            if (a->is_number())
                cfg.init_alpha = cplx(a->get<double>(), 0.0);
            else if (a->is_array() && a->size() == 2 && (*a)[0].is_number() &&
                     (*a)[1].is_number())
                cfg.init_alpha = cplx((*a)[0].get<double>(), (*a)[1].get<double>());
            else
                errs.push_back("ensemble.init_alpha: expected a number or [re, im]");
        }
    }

    if (const json* a = section("analysis")) {
        check_keys(*a, "analysis", {"corr_window_frac", "noise_floor"}, errs);
        fetch_num(*a, "analysis", "corr_window_frac", cfg.corr_window_frac, errs);
        if (auto nf = a->find("noise_floor"); nf != a->end()) {
            if (nf->is_null())
                cfg.noise_floor.reset();
            else if (nf->is_number())
                cfg.noise_floor = nf->get<double>();
            else
                errs.push_back("analysis.noise_floor: expected a number or null");
        }
    }

    if (const json* o = section("output")) {
        check_keys(*o, "output", {"dir"}, errs);
        fetch_string(*o, "output", "dir", cfg.out_dir, errs);
    }

    if (const json* s = section("sweep")) {
        check_keys(*s, "sweep", {"axis", "values", "slave_delta"}, errs);
        fetch_string(*s, "sweep", "axis", cfg.sweep_axis, errs);
        fetch_bool(*s, "sweep", "slave_delta", cfg.slave_delta, errs);
        if (auto v = s->find("values"); v != s->end()) {
            if (!v->is_array()) {
                errs.push_back("sweep.values: expected an array of numbers");
            } else {
                for (const auto& x : *v) {
                    if (!x.is_number()) {
                        errs.push_back("sweep.values: expected an array of numbers");
                        cfg.sweep_values.clear();
                        break;
                    }
                    cfg.sweep_values.push_back(x.get<double>());
                }
            }
        }
    }

    // cross-field invariants (only meaningful once the fields parsed)
    for (const auto& v : cfg.model.violations()) errs.push_back("model: " + v);
    if (cfg.lattice.extent < 1) errs.push_back("lattice.extent: must be >= 1");
    if (!(cfg.step.dt > 0.0)) errs.push_back("integration.dt: must be > 0");
    if (!(cfg.t_final >= 0.0)) errs.push_back("integration.t_final: must be >= 0");
    if (!(cfg.sample_interval > 0.0))
        errs.push_back("integration.sample_interval: must be > 0");
    if (cfg.step.dt > 0.0 && cfg.sample_interval > 0.0) {
        const long per = std::lround(cfg.sample_interval / cfg.step.dt);
        if (per < 1 ||
            std::abs(per * cfg.step.dt - cfg.sample_interval) >
                1e-9 * cfg.sample_interval)
            errs.push_back(
                "integration.sample_interval: must be a positive integer "
                "multiple of dt");
        const long ns = std::lround(cfg.t_final / cfg.sample_interval);
        if (cfg.t_final > 0.0 &&
            (ns < 1 || std::abs(ns * cfg.sample_interval - cfg.t_final) >
                           1e-9 * cfg.t_final))
            errs.push_back(
                "integration.t_final: must be an integer multiple of "
                "sample_interval");
    }
    if (cfg.n_traj < 1) errs.push_back("ensemble.n_traj: must be >= 1");
    if (cfg.workers < 0) errs.push_back("ensemble.workers: must be >= 0");
    if (cfg.record_trajectories < 0)
        errs.push_back("ensemble.record_trajectories: must be >= 0");
    if (!(cfg.corr_window_frac > 0.0 && cfg.corr_window_frac <= 1.0))
        errs.push_back("analysis.corr_window_frac: must be in (0, 1]");
    if (cfg.noise_floor && !(*cfg.noise_floor > 0.0))
        errs.push_back("analysis.noise_floor: must be > 0");
    if (cfg.out_dir.empty()) errs.push_back("output.dir: must not be empty");
    if (!cfg.sweep_values.empty() || !cfg.sweep_axis.empty()) {
        static const char* axes[] = {"j_hop", "delta", "u",
                                     "g2",    "gamma1", "gamma2"};
        bool ok = false;
        for (const char* a : axes) ok = ok || cfg.sweep_axis == a;
        if (!ok)
            errs.push_back(
                "sweep.axis: expected one of j_hop, delta, u, g2, gamma1, "
                "gamma2");
    }

    if (!errs.empty()) throw ConfigError("invalid configuration", std::move(errs));
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("JSON parse error in " + path + ": " + e.what());
    }
    return config_from_json(j);
}

nlohmann::json normalized_json(const RunConfig& cfg) {
    json j;
    j["model"] = {{"delta", cfg.model.delta},   {"u", cfg.model.u},
                  {"g2", cfg.model.g2},         {"j_hop", cfg.model.j_hop},
                  {"gamma1", cfg.model.gamma1}, {"gamma2", cfg.model.gamma2},
                  {"cutoff", cfg.model.cutoff}};
    j["lattice"] = {{"kind", kind_name(cfg.lattice.kind)},
                    {"extent", cfg.lattice.extent},
                    {"boundary", boundary_name(cfg.lattice.boundary)}};
    j["integration"] = {{"dt", cfg.step.dt},
                        {"scheme", scheme_name(cfg.step.scheme)},
                        {"milstein", cfg.step.milstein},
                        {"t_final", cfg.t_final},
                        {"sample_interval", cfg.sample_interval}};
    j["ensemble"] = {{"n_traj", cfg.n_traj},
                     {"master_seed", cfg.master_seed},
                     {"workers", cfg.workers},
                     {"init_alpha",
                      json::array({cfg.init_alpha.real(), cfg.init_alpha.imag()})},
                     {"record_trajectories", cfg.record_trajectories}};
    j["analysis"] = {{"corr_window_frac", cfg.corr_window_frac},
                     {"noise_floor",
                      cfg.noise_floor ? json(*cfg.noise_floor) : json(nullptr)}};
    j["output"] = {{"dir", cfg.out_dir}};
    j["sweep"] = {{"axis", cfg.sweep_axis},
                  {"values", cfg.sweep_values},
                  {"slave_delta", cfg.slave_delta}};
    return j;
}

std::string config_hash(const RunConfig& cfg) {
    const std::string s = normalized_json(cfg).dump();
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a, 64-bit
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunConfig apply_axis(const RunConfig& base, const std::string& axis, double value) {
    RunConfig c = base;
    if (axis == "j_hop") {
        c.model.j_hop = value;
        if (c.slave_delta) c.model.delta = value;
    } else if (axis == "delta") {
        c.model.delta = value;
    } else if (axis == "u") {
        c.model.u = value;
    } else if (axis == "g2") {
        c.model.g2 = value;
    } else if (axis == "gamma1") {
        c.model.gamma1 = value;
    } else if (axis == "gamma2") {
        c.model.gamma2 = value;
    } else {
        throw ConfigError("unknown sweep axis '" + axis + "'");
    }
    return c;
}

EnsembleSpec RunConfig::ensemble_spec() const {
    EnsembleSpec spec;
    spec.model = model;
    spec.geom = lattice;
    spec.step = step;
    spec.t_final = t_final;
    spec.sample_interval = sample_interval;
    spec.n_traj = n_traj;
    spec.master_seed = master_seed;
    spec.workers = workers;
    spec.init_alpha = init_alpha;
    spec.corr_window_frac = corr_window_frac;
    spec.record_trajectories = record_trajectories;
    spec.track_correlations = true;
    return spec;
}

}  // namespace dg
