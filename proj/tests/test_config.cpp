#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "dg/config.hpp"
#include "dg/errors.hpp"

using nlohmann::json;

namespace {

json full_config() {
    return json::parse(R"({
        "model": {"delta": 0.6, "u": 10.0, "g2": 4.0, "j_hop": 0.6,
                  "gamma1": 1.0, "gamma2": 1.0, "cutoff": 12},
        "lattice": {"kind": "square", "extent": 5, "boundary": "periodic"},
        "integration": {"dt": 0.002, "scheme": "euler", "milstein": true,
                        "t_final": 8.0, "sample_interval": 0.2},
        "ensemble": {"n_traj": 64, "master_seed": 99, "workers": 2,
                     "init_alpha": [0.3, -0.1], "record_trajectories": 4},
        "analysis": {"corr_window_frac": 0.5, "noise_floor": 0.01},
        "output": {"dir": "results/run1"},
        "sweep": {"axis": "j_hop", "values": [0.2, 0.4], "slave_delta": false}
    })");
}

std::string error_text(const json& j) {
    try {
        (void)dg::config_from_json(j);
    } catch (const dg::ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("full document parses into every field") {
    const dg::RunConfig cfg = dg::config_from_json(full_config());
    CHECK(cfg.model.delta == 0.6);
    CHECK(cfg.model.u == 10.0);
    CHECK(cfg.model.g2 == 4.0);
    CHECK(cfg.model.j_hop == 0.6);
    CHECK(cfg.model.cutoff == 12);
    CHECK(cfg.lattice.kind == dg::LatticeKind::Square2D);
    CHECK(cfg.lattice.extent == 5);
    CHECK(cfg.lattice.boundary == dg::Boundary::Periodic);
    CHECK(cfg.step.dt == 0.002);
    CHECK(cfg.step.scheme == dg::Scheme::Euler);
    CHECK(cfg.step.milstein);
    CHECK(cfg.t_final == 8.0);
    CHECK(cfg.sample_interval == 0.2);
    CHECK(cfg.n_traj == 64);
    CHECK(cfg.master_seed == 99);
    CHECK(cfg.workers == 2);
    CHECK(cfg.init_alpha == dg::cplx{0.3, -0.1});
    CHECK(cfg.record_trajectories == 4);
    CHECK(cfg.corr_window_frac == 0.5);
    REQUIRE(cfg.noise_floor.has_value());
    CHECK(*cfg.noise_floor == 0.01);
    CHECK(cfg.out_dir == "results/run1");
    CHECK(cfg.sweep_axis == "j_hop");
    CHECK(cfg.sweep_values == std::vector<double>{0.2, 0.4});
    CHECK_FALSE(cfg.slave_delta);

    const dg::EnsembleSpec spec = cfg.ensemble_spec();
    CHECK(spec.n_traj == 64);
    CHECK(spec.geom.n_sites() == 25);
    CHECK(spec.track_correlations);
}

TEST_CASE("empty document yields the documented defaults") {
    const dg::RunConfig cfg = dg::config_from_json(json::object());
    CHECK(cfg.model.gamma1 == 1.0);
    CHECK(cfg.model.gamma2 == 1.0);
    CHECK(cfg.model.cutoff == 15);
    CHECK(cfg.lattice.kind == dg::LatticeKind::Chain1D);
    CHECK(cfg.lattice.extent == 1);
    CHECK(cfg.step.scheme == dg::Scheme::ExpEuler);
    CHECK_FALSE(cfg.step.milstein);
    CHECK(cfg.step.dt == 1e-3);
    CHECK(cfg.t_final == 10.0);
    CHECK(cfg.n_traj == 100);
    CHECK(cfg.workers == 0);  // auto
    CHECK(cfg.init_alpha == dg::cplx{0.0, 0.0});
    CHECK_FALSE(cfg.noise_floor.has_value());
    CHECK(cfg.out_dir == "out");
    CHECK(cfg.sweep_values.empty());
    CHECK(cfg.slave_delta);
}

TEST_CASE("all violations surface in one consolidated error") {
    json j = full_config();
    j["model"]["bogus"] = 1;
    j["integration"]["dt"] = -0.5;
    j["ensemble"]["n_traj"] = 0;
    j["analysis"]["corr_window_frac"] = 1.5;
    const std::string msg = error_text(j);
    REQUIRE_FALSE(msg.empty());
    CHECK(msg.find("model.bogus: unknown key") != std::string::npos);
    CHECK(msg.find("integration.dt: must be > 0") != std::string::npos);
    CHECK(msg.find("ensemble.n_traj: must be >= 1") != std::string::npos);
    CHECK(msg.find("analysis.corr_window_frac") != std::string::npos);
}

TEST_CASE("type mismatches are reported with their JSON path") {
    json j = full_config();
    j["model"]["u"] = "ten";
    j["integration"]["milstein"] = 1;
    j["lattice"]["kind"] = "triangular";
    const std::string msg = error_text(j);
    CHECK(msg.find("model.u: expected a number") != std::string::npos);
    CHECK(msg.find("integration.milstein: expected true or false") !=
          std::string::npos);
    CHECK(msg.find("lattice.kind: expected \"chain\" or \"square\"") !=
          std::string::npos);
}

TEST_CASE("sampling grid must be commensurate") {
    json j = full_config();
    j["integration"]["sample_interval"] = 0.003;  // not a multiple of t_final
    j["integration"]["dt"] = 0.002;               // 0.003/0.002 = 1.5 steps
    const std::string msg = error_text(j);
    CHECK(msg.find("sample_interval: must be a positive integer multiple") !=
          std::string::npos);
    j = full_config();
    j["integration"]["t_final"] = 8.3;  // 41.5 sample intervals
    CHECK(error_text(j).find("t_final: must be an integer multiple") !=
          std::string::npos);
}

TEST_CASE("init_alpha accepts a real number or a [re, im] pair") {
    json j = full_config();
    j["ensemble"]["init_alpha"] = 0.7;
    CHECK(dg::config_from_json(j).init_alpha == dg::cplx{0.7, 0.0});
    j["ensemble"]["init_alpha"] = json::array({1.0, 2.0, 3.0});
    CHECK(error_text(j).find("ensemble.init_alpha") != std::string::npos);
}

TEST_CASE("noise_floor is tri-state: absent, null, or positive") {
    json j = full_config();
    j["analysis"]["noise_floor"] = nullptr;
    CHECK_FALSE(dg::config_from_json(j).noise_floor.has_value());
    j["analysis"].erase("noise_floor");
    CHECK_FALSE(dg::config_from_json(j).noise_floor.has_value());
    j["analysis"]["noise_floor"] = -0.1;
    CHECK(error_text(j).find("analysis.noise_floor: must be > 0") !=
          std::string::npos);
}

TEST_CASE("sweep axis is restricted to model parameters") {
    json j = full_config();
    j["sweep"]["axis"] = "cutoff";
    CHECK(error_text(j).find("sweep.axis") != std::string::npos);
    j["sweep"]["values"] = json::array({0.1, "x"});
    CHECK(error_text(j).find("sweep.values") != std::string::npos);
}

TEST_CASE("normalized form is round-trip idempotent") {
    const dg::RunConfig cfg = dg::config_from_json(full_config());
    const json n1 = dg::normalized_json(cfg);
    const dg::RunConfig cfg2 = dg::config_from_json(n1);
    const json n2 = dg::normalized_json(cfg2);
    CHECK(n1 == n2);
    // every section is explicit in the normalized form
    for (const char* k :
         {"model", "lattice", "integration", "ensemble", "analysis", "output",
          "sweep"})
        CHECK(n1.contains(k));
    CHECK(n1["ensemble"]["init_alpha"].is_array());
}

TEST_CASE("config hash tracks content, not object identity") {
    const dg::RunConfig a = dg::config_from_json(full_config());
    dg::RunConfig b = dg::config_from_json(full_config());
    CHECK(dg::config_hash(a) == dg::config_hash(b));
    CHECK(dg::config_hash(a).size() == 16);
    b.model.j_hop = 0.61;
    CHECK(dg::config_hash(a) != dg::config_hash(b));
}

TEST_CASE("axis application and delta slaving") {
    dg::RunConfig base = dg::config_from_json(full_config());
    base.slave_delta = true;
    const dg::RunConfig p1 = dg::apply_axis(base, "j_hop", 0.25);
    CHECK(p1.model.j_hop == 0.25);
    CHECK(p1.model.delta == 0.25);
    base.slave_delta = false;
    const dg::RunConfig p2 = dg::apply_axis(base, "j_hop", 0.25);
    CHECK(p2.model.j_hop == 0.25);
    CHECK(p2.model.delta == 0.6);  // untouched
    const dg::RunConfig p3 = dg::apply_axis(base, "gamma2", 0.5);
    CHECK(p3.model.gamma2 == 0.5);
    CHECK_THROWS_AS((void)dg::apply_axis(base, "cutoff", 3.0), dg::ConfigError);
}

TEST_CASE("file loading reports open and parse failures") {
    namespace fs = std::filesystem;
    CHECK_THROWS_AS((void)dg::load_config("/nonexistent/path/cfg.json"),
                    dg::ConfigError);
    const fs::path dir = fs::temp_directory_path() / "dg_config_test";
    fs::create_directories(dir);
    const fs::path bad = dir / "bad.json";
    std::ofstream(bad) << "{\"model\": ";
    CHECK_THROWS_AS((void)dg::load_config(bad.string()), dg::ConfigError);
    const fs::path good = dir / "good.json";
    std::ofstream(good) << full_config().dump();
    CHECK(dg::load_config(good.string()).n_traj == 64);
    fs::remove_all(dir);
}

}  // TEST_SUITE
