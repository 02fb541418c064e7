#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ergctl/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"free-boundary solver for ergodic singular control"};
    app.require_subcommand(1);

    CLI::App* solve = app.add_subcommand("solve", "run the full pipeline from a JSON config");
    std::string config_path;
    std::string output_dir;
    bool no_sim = false;
    std::vector<std::string> checks;
    solve->add_option("config", config_path, "path to config.json")->required();
    solve->add_option("--output-dir", output_dir, "override the configured output directory");
    solve->add_flag("--no-sim", no_sim, "skip the simulation stage");
    solve->add_option("--check", checks, "enable only the named checks (repeatable)");

    CLI11_PARSE(app, argc, argv);

    try {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "cannot open config file: " << config_path << "\n";
            return 2;
        }
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::parse_error& e) {
            std::cerr << "config parse error: " << e.what() << "\n";
            return 2;
        }

        ergctl::PipelineConfig cfg = ergctl::pipeline_config_from_json(j);
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        if (const char* env = std::getenv("OUTPUT_DIR"); env && output_dir.empty())
            cfg.output_dir = env;
        if (no_sim) cfg.sim.reset();
        if (!checks.empty()) cfg.checks = checks;

        const ergctl::RunManifest manifest = ergctl::run_pipeline(cfg);
        const auto scripts = ergctl::emit_plots(manifest, cfg.output_dir);

        std::cout << "alpha = " << manifest.alpha
                  << "\nlambda* = " << manifest.lambda_star << "\n";
        for (const auto& c : manifest.checks)
            std::cout << "check " << c.name << ": " << (c.pass ? "pass" : "FAIL")
                      << " (value " << c.value << ", tolerance " << c.tolerance << ")\n";
        std::cout << "artifacts in " << cfg.output_dir << " ("
                  << manifest.artifacts.size() << " files, " << scripts.size()
                  << " plot scripts)\n";
        if (!cfg.sim)
            std::cout << "path plot skipped: no simulation artifacts\n";

        return manifest.all_checks_pass ? 0 : 4;
    } catch (const ergctl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    }
}
