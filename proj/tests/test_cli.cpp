// End-to-end tests of the command-line binary, driven as a real subprocess
// (path injected by the build as DG_CLI_PATH).
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const char* name)
        : path(fs::temp_directory_path() / "dg_cli_test" / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const char* rel) const { return (path / rel).string(); }
};

int run_cli(const TempDir& tmp, const std::string& args,
            std::string* output = nullptr, const std::string& env = "") {
    const std::string log = tmp.str("cli.log");
    const std::string cmd =
        env + (env.empty() ? "" : " ") + "\"" DG_CLI_PATH "\" " + args + " > \"" +
        log + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    if (output) {
        std::ifstream in(log, std::ios::binary);
        output->assign(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
    }
    REQUIRE(rc != -1);
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

json base_config(const std::string& out_dir) {
    return json{
        {"model",
         {{"delta", 0.6},
          {"u", 10.0},
          {"g2", 4.0},
          {"j_hop", 0.6},
          {"gamma1", 1.0},
          {"gamma2", 1.0},
          {"cutoff", 8}}},
        {"lattice", {{"kind", "chain"}, {"extent", 3}, {"boundary", "open"}}},
        {"integration",
         {{"dt", 0.002}, {"t_final", 0.4}, {"sample_interval", 0.1}}},
        {"ensemble",
         {{"n_traj", 12},
          {"master_seed", 7},
          {"workers", 1},
          {"record_trajectories", 2}}},
        {"output", {{"dir", out_dir}}}};
}

std::string write_config(const TempDir& tmp, const json& cfg,
                         const char* name = "config.json") {
    const std::string path = tmp.str(name);
    std::ofstream(path) << cfg.dump(2);
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("run writes the full output set") {
    TempDir tmp("run_basic");
    const std::string out = tmp.str("out");
    const std::string cfg = write_config(tmp, base_config(out));
    std::string log;
    CHECK(run_cli(tmp, "run \"" + cfg + "\"", &log) == 0);
    CHECK(log.find("wrote ") != std::string::npos);
    for (const char* f : {"config.json", "timeseries.csv", "trajectories.csv",
                          "corrmap.csv", "projection.csv", "summary.json"})
        CHECK_MESSAGE(fs::exists(fs::path(out) / f), f);

    const json summary = json::parse(slurp(out + "/summary.json"));
    CHECK(summary["n_traj"] == 12);
    CHECK(summary["config_hash"].get<std::string>().size() == 16);
    CHECK(summary.contains("fits"));
    CHECK(summary["steady"]["n_ss"].is_number());
    CHECK(summary["max_tail_population"].get<double>() < 1e-3);

    // the stamp in every CSV matches the summary
    const std::string stamp =
        "# config=" + summary["config_hash"].get<std::string>();
    CHECK(slurp(out + "/timeseries.csv").find(stamp) == 0);
    CHECK(slurp(out + "/corrmap.csv").find(stamp) == 0);
}

TEST_CASE("reruns and worker counts do not change a single byte") {
    TempDir tmp("run_repro");
    const std::string out = tmp.str("out");
    const std::string cfg = write_config(tmp, base_config(out));
    REQUIRE(run_cli(tmp, "run \"" + cfg + "\"") == 0);
    const std::string first_ts = slurp(out + "/timeseries.csv");
    const std::string first_cm = slurp(out + "/corrmap.csv");
    const std::string first_tr = slurp(out + "/trajectories.csv");

    REQUIRE(run_cli(tmp, "run \"" + cfg + "\"") == 0);
    CHECK(slurp(out + "/timeseries.csv") == first_ts);
    CHECK(slurp(out + "/corrmap.csv") == first_cm);

    // more workers than trajectories per chunk, via the env override
    REQUIRE(run_cli(tmp, "run \"" + cfg + "\"", nullptr, "DG_WORKERS=3") == 0);
    CHECK(slurp(out + "/timeseries.csv") == first_ts);
    CHECK(slurp(out + "/corrmap.csv") == first_cm);
    CHECK(slurp(out + "/trajectories.csv") == first_tr);
}

TEST_CASE("invalid configuration exits with code 2 and names the fields") {
    TempDir tmp("run_badcfg");
    json cfg = base_config(tmp.str("out"));
    cfg["integration"]["dt"] = -1.0;
    cfg["model"]["mystery"] = true;
    const std::string path = write_config(tmp, cfg);
    std::string log;
    CHECK(run_cli(tmp, "run \"" + path + "\"", &log) == 2);
    CHECK(log.find("invalid configuration") != std::string::npos);
    CHECK(log.find("integration.dt") != std::string::npos);
    CHECK(log.find("model.mystery: unknown key") != std::string::npos);
    CHECK(run_cli(tmp, "run \"" + tmp.str("absent.json") + "\"") == 2);
}

TEST_CASE("a diverging integration exits with code 3 and a replay seed") {
    TempDir tmp("run_diverge");
    json cfg = base_config(tmp.str("out"));
    cfg["model"]["cutoff"] = 15;  // deep Kerr ladder, violently stiff at dt=5
    cfg["integration"] = {{"dt", 5.0},
                          {"scheme", "euler"},
                          {"t_final", 50.0},
                          {"sample_interval", 5.0}};
    cfg["ensemble"]["n_traj"] = 2;
    const std::string path = write_config(tmp, cfg);
    std::string log;
    CHECK(run_cli(tmp, "run \"" + path + "\"", &log) == 3);
    CHECK(log.find("replay seed") != std::string::npos);
}

TEST_CASE("self-check battery passes and the negative control fails") {
    TempDir tmp("check");
    std::string log;
    CHECK(run_cli(tmp, "check --fast", &log) == 0);
    CHECK(log.find("all checks passed") != std::string::npos);
    CHECK(log.find("CHECK vacuum_fixed_point PASS") != std::string::npos);
    CHECK(log.find("FAIL") == std::string::npos);

    // deliberately corrupted step size must be caught by the convergence probe
    std::string bad;
    CHECK(run_cli(tmp, "check --fast --inject-dt-error", &bad) == 1);
    CHECK(bad.find("CHECK BATTERY FAILED") != std::string::npos);
    CHECK(bad.find("dt_convergence FAIL") != std::string::npos);
}

TEST_CASE("sweep produces one row per axis value plus per-point runs") {
    TempDir tmp("sweep");
    const std::string out = tmp.str("sweepout");
    json cfg = base_config(out);
    cfg["ensemble"]["n_traj"] = 6;
    cfg["ensemble"]["record_trajectories"] = 0;
    const std::string path = write_config(tmp, cfg);
    std::string log;
    CHECK(run_cli(tmp, "sweep \"" + path + "\" --axis j_hop --values 0.2,0.5",
                  &log) == 0);
    REQUIRE(fs::exists(fs::path(out) / "sweep.csv"));
    const std::string table = slurp(out + "/sweep.csv");
    CHECK(table.find("j_hop,n_ss,") != std::string::npos);
    CHECK(table.find("\n0.2,") != std::string::npos);
    CHECK(table.find("\n0.5,") != std::string::npos);
    CHECK(fs::exists(fs::path(out) / "j_hop_0.2" / "summary.json"));
    CHECK(fs::exists(fs::path(out) / "j_hop_0.5" / "summary.json"));

    // per-point seeds differ from each other and from the master seed
    const json s1 = json::parse(slurp(out + "/j_hop_0.2/summary.json"));
    const json s2 = json::parse(slurp(out + "/j_hop_0.5/summary.json"));
    CHECK(s1["master_seed"] != s2["master_seed"]);

    // without flags and without a sweep block there is nothing to sweep
    std::string err;
    CHECK(run_cli(tmp, "sweep \"" + path + "\"", &err) == 2);
    CHECK(err.find("sweep needs an axis and values") != std::string::npos);
}

TEST_CASE("analyze re-fits persisted outputs in place") {
    TempDir tmp("analyze");
    const std::string out = tmp.str("out");
    const std::string cfg = write_config(tmp, base_config(out));
    REQUIRE(run_cli(tmp, "run \"" + cfg + "\"") == 0);
    std::string log;
    CHECK(run_cli(tmp, "analyze \"" + out + "\"", &log) == 0);
    const json summary = json::parse(slurp(out + "/summary.json"));
    CHECK(summary.contains("fits"));
    CHECK(run_cli(tmp, "analyze \"" + out + "\" --noise-floor 0.001") == 0);
    // a directory that was never run has nothing to analyze
    CHECK(run_cli(tmp, "analyze \"" + tmp.str("empty") + "\"") == 2);
}

TEST_CASE("argument errors exit with code 2, help with 0") {
    TempDir tmp("args");
    CHECK(run_cli(tmp, "run") == 2);             // missing config
    CHECK(run_cli(tmp, "frobnicate") == 2);      // unknown subcommand
    std::string help;
    CHECK(run_cli(tmp, "--help", &help) == 0);
    CHECK(help.find("run") != std::string::npos);
    CHECK(help.find("sweep") != std::string::npos);
    CHECK(help.find("inject") == std::string::npos);  // hidden flag stays hidden
}

}  // TEST_SUITE
