#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ergctl/pipeline.hpp"

using namespace ergctl;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json ou_model_json() {
    return {{"kind", "ou_inventory"},
            {"params", {{"m", 0.0}, {"b", 1.0}, {"delta", 0.5},
                        {"sigma1", 0.5}, {"sigma2", 0.5}, {"rho", 0.3}}},
            {"K_plus", 1.0},
            {"K_minus", 1.0}};
}

json quick_config(const std::string& out_dir) {
    return {{"model", ou_model_json()},
            {"grid", {{"x_lo", -4.0}, {"x_hi", 4.0}, {"n_x", 81}, {"n_y", 81}}},
            {"solver", {{"residual_target", 1e-5}}},
            {"sim", nullptr},
            {"output_dir", out_dir},
            {"checks", {"obstacle_bounds", "monotonicity", "hypothesis"}}};
}

std::string slurp(const fs::path& p) {
    std::ostringstream ss;
    ss << std::ifstream(p).rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("config parsing applies defaults and rejects unknowns") {
    const PipelineConfig cfg =
        pipeline_config_from_json(json{{"model", ou_model_json()}});
    CHECK(cfg.grid.n_x == 201);
    CHECK(cfg.grid.n_y == 201);
    CHECK(cfg.grid.x_lo < cfg.grid.x_hi);
    CHECK_FALSE(cfg.alpha.has_value()); // auto
    REQUIRE(cfg.sim.has_value());
    CHECK(cfg.sim->T == doctest::Approx(500.0));
    CHECK(cfg.sim->seed == 12345);
    CHECK(cfg.checks.empty());

    json null_sim{{"model", ou_model_json()}, {"sim", nullptr}};
    CHECK_FALSE(pipeline_config_from_json(null_sim).sim.has_value());

    json bad_key{{"model", ou_model_json()}, {"stuff", 1}};
    CHECK_THROWS_AS(pipeline_config_from_json(bad_key), ConfigError);
    json bad_check{{"model", ou_model_json()}, {"checks", {"not_a_check"}}};
    CHECK_THROWS_AS(pipeline_config_from_json(bad_check), ConfigError);
    json bad_alpha{{"model", ou_model_json()}, {"alpha", "mid"}};
    CHECK_THROWS_AS(pipeline_config_from_json(bad_alpha), ConfigError);
    CHECK_THROWS_AS(pipeline_config_from_json(json{{"grid", json::object()}}),
                    ConfigError);
}

TEST_CASE("pipeline run writes consistent artifacts") {
    TempDir dir("pipe_run");
    const PipelineConfig cfg =
        pipeline_config_from_json(quick_config(dir.path.string()));
    const RunManifest man = run_pipeline(cfg);

    CHECK(man.all_checks_pass);
    CHECK(man.checks.size() == 3);
    CHECK_FALSE(man.config_hash.empty());
    CHECK(man.alpha > -1.0);
    CHECK(man.alpha < 1.0);
    CHECK(man.lambda_star > 0.0);

    // 7 artifacts without a simulation stage, sizes as recorded
    REQUIRE(man.artifacts.size() == 7);
    for (const auto& [name, bytes] : man.artifacts) {
        CAPTURE(name);
        REQUIRE(fs::exists(dir.path / name));
        CHECK(static_cast<long>(fs::file_size(dir.path / name)) == bytes);
        CHECK(name != "sim.json");
    }

    // csv headers
    std::ifstream u(dir.path / "U.csv");
    std::string line;
    std::getline(u, line);
    CHECK(line == "x,y,value");
    std::ifstream b(dir.path / "boundaries.csv");
    std::getline(b, line);
    CHECK(line == "y,a_plus,a_minus");
    std::ifstream l(dir.path / "lambda.csv");
    std::getline(l, line);
    CHECK(line == "y,lambda");
    std::ifstream d(dir.path / "density.csv");
    std::getline(d, line);
    CHECK(line == "y,p");

    const json report = json::parse(slurp(dir.path / "report.json"));
    CHECK(report["hypothesis"]["separation_ok"].get<bool>());
    CHECK(report["lambda_star"].get<double>() == doctest::Approx(man.lambda_star));
    const json jman = json::parse(slurp(dir.path / "manifest.json"));
    CHECK(jman["config_hash"].get<std::string>() == man.config_hash);
}

TEST_CASE("reruns are reproducible and the hash ignores the output directory") {
    TempDir d1("pipe_rerun_a"), d2("pipe_rerun_b");
    const RunManifest m1 =
        run_pipeline(pipeline_config_from_json(quick_config(d1.path.string())));
    const RunManifest m2 =
        run_pipeline(pipeline_config_from_json(quick_config(d2.path.string())));
    CHECK(m1.config_hash == m2.config_hash);
    for (const char* name : {"U.csv", "boundaries.csv", "V.csv", "lambda.csv",
                             "density.csv", "report.json"})
        CHECK(slurp(d1.path / name) == slurp(d2.path / name));

    json finer = quick_config(d2.path.string());
    finer["grid"]["n_x"] = 101;
    const RunManifest m3 = run_pipeline(pipeline_config_from_json(finer));
    CHECK(m3.config_hash != m1.config_hash);
}

TEST_CASE("simulation stage adds sim artifacts and the path plot") {
    TempDir dir("pipe_sim");
    json cfg = quick_config(dir.path.string());
    cfg["sim"] = {{"T", 20.0}, {"dt", 0.01}, {"n_paths", 2}, {"seed", 7},
                  {"trace_stride", 200}};
    const RunManifest man = run_pipeline(pipeline_config_from_json(cfg));
    REQUIRE(man.artifacts.size() == 8);
    CHECK(fs::exists(dir.path / "sim.json"));
    CHECK(fs::exists(dir.path / "path.csv"));
    const json sim = json::parse(slurp(dir.path / "sim.json"));
    CHECK(sim["paths_used"].get<int>() == 2);
    CHECK(sim["config"]["seed"].get<int>() == 7);

    const auto scripts = emit_plots(man, dir.path.string());
    REQUIRE(scripts.size() == 3);
    for (const auto& s : scripts) CHECK(fs::exists(dir.path / s));
}

TEST_CASE("plot emission without simulation skips the path script") {
    TempDir dir("pipe_plots");
    const RunManifest man =
        run_pipeline(pipeline_config_from_json(quick_config(dir.path.string())));
    const auto scripts = emit_plots(man, dir.path.string());
    REQUIRE(scripts.size() == 2);
    CHECK(scripts[0] == "plot_value.py");
    CHECK(scripts[1] == "plot_lambda.py");

    fs::remove(dir.path / "lambda.csv");
    CHECK_THROWS_AS(emit_plots(man, dir.path.string()), MissingArtifact);
}

TEST_CASE("fixed alpha snaps to the grid and is recorded") {
    TempDir dir("pipe_alpha");
    json cfg = quick_config(dir.path.string());
    cfg["alpha"] = 0.03; // h_x = 0.1 on this grid, snaps to 0.0
    const RunManifest man = run_pipeline(pipeline_config_from_json(cfg));
    CHECK(man.alpha == doctest::Approx(0.0).epsilon(1e-12));
    const json report = json::parse(slurp(dir.path / "report.json"));
    CHECK(report["alpha"].get<double>() == doctest::Approx(0.0));
}

TEST_CASE("degenerate model gets its boundary relation check by default") {
    TempDir dir("pipe_degen");
    const json cfg{
        {"model", {{"kind", "degenerate_no_factor"},
                   {"params", {{"delta", 0.5}, {"sigma", 1.0}}},
                   {"cost", {{"kind", "quadratic"}, {"target", 0.0}}},
                   {"K_plus", 1.0}, {"K_minus", 1.0}}},
        {"grid", {{"x_lo", -4.0}, {"x_hi", 4.0}, {"n_x", 101}, {"n_y", 11}}},
        {"solver", {{"residual_target", 1e-5}}},
        {"sim", nullptr},
        {"output_dir", dir.path.string()}};
    const RunManifest man = run_pipeline(pipeline_config_from_json(cfg));
    bool found = false;
    for (const auto& c : man.checks)
        if (c.name == "degenerate_relation") {
            found = true;
            CHECK(c.pass);
        }
    CHECK(found);
}

TEST_CASE("filtered model solves through the transformed scheme") {
    const ModelSpec spec =
        make_filtered_inventory_model(0.5, -0.5, 1, 1, 1, 1, 1, 1);
    const Grid2D g = build_grid(-3, 3, 61, 0.1, 0.9, 61);
    SolverConfig cfg;
    cfg.residual_target = 0.0;
    const DynkinSolution sol = solve_model(spec, g, cfg);
    REQUIRE(sol.U_hat.has_value());
    CHECK(sol.U.grid.ny() == 61);
    sol.U.check_finite();
    for (double v : sol.U.values) {
        CHECK(v <= spec.K_minus + 1e-12);
        CHECK(v >= -spec.K_plus - 1e-12);
    }
    CHECK(sol.residual.obstacle_violation <= 1e-12);
}

TEST_CASE("cli solves a config end to end") {
    const char* bin = std::getenv("SOLVE_BIN");
    if (!bin) return; // only wired up under ctest
    TempDir dir("pipe_cli");
    {
        std::ofstream f(dir.path / "cfg.json");
        f << quick_config(dir.path.string()).dump(2);
    }
    const std::string base = std::string(bin) + " solve " +
                             (dir.path / "cfg.json").string();
    CHECK(std::system((base + " > /dev/null").c_str()) == 0);
    CHECK(fs::exists(dir.path / "report.json"));

    const int missing =
        std::system((std::string(bin) + " solve nope.json > /dev/null 2>&1").c_str());
    CHECK(WEXITSTATUS(missing) == 2);

    {
        std::ofstream f(dir.path / "bad.json");
        f << "{ not json";
    }
    const int bad = std::system(
        (std::string(bin) + " solve " + (dir.path / "bad.json").string() +
         " > /dev/null 2>&1").c_str());
    CHECK(WEXITSTATUS(bad) == 2);
}
