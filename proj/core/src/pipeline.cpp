#include "ergctl/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "ergctl/io.hpp"

namespace ergctl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kKnownChecks = {
    "obstacle_bounds", "monotonicity", "hypothesis", "hjb_residual",
    "alpha_invariance", "simulation_consistency", "degenerate_relation"};

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

double num_or(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ConfigError("'" + key + "' must be a number");
    return j[key].get<double>();
}

int int_or(const json& j, const std::string& key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
    return j[key].get<int>();
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

class StageTimer {
  public:
    explicit StageTimer(json& sink) : sink_(sink) {}
    template <typename Fn>
    auto run(const std::string& stage, Fn&& fn) -> decltype(fn()) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            if constexpr (std::is_void_v<decltype(fn())>) {
                fn();
                record(stage, t0);
            } else {
                auto out = fn();
                record(stage, t0);
                return out;
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw DomainError("stage '" + stage + "' failed: " + e.what());
        }
    }

  private:
    void record(const std::string& stage, std::chrono::steady_clock::time_point t0) {
        const auto dt = std::chrono::steady_clock::now() - t0;
        sink_[stage] =
            std::chrono::duration_cast<std::chrono::milliseconds>(dt).count();
    }
    json& sink_;
};

long file_bytes(const fs::path& p) {
    return static_cast<long>(fs::file_size(p));
}

json monotonicity_stats(const ValueField& U) {
    double worst_x = 0.0, worst_y = 0.0;
    const Grid2D& g = U.grid;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i + 1 < g.nx(); ++i)
            worst_x = std::max(worst_x, U.at(i, j) - U.at(i + 1, j));
    for (int j = 0; j + 1 < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            worst_y = std::max(worst_y, U.at(i, j) - U.at(i, j + 1));
    return json{{"worst_decrease_x", worst_x}, {"worst_decrease_y", worst_y}};
}

} // namespace

PipelineConfig pipeline_config_from_json(const json& j) {
    check_keys(j, {"model", "grid", "solver", "alpha", "sim", "output_dir", "checks"},
               "config");
    if (!j.contains("model")) throw ConfigError("config: missing 'model'");

    PipelineConfig cfg;
    cfg.model_json = j["model"];
    // parse eagerly so bad model configs fail before any stage runs
    const ModelSpec spec = model_from_json(cfg.model_json);

    const json grid = j.value("grid", json::object());
    check_keys(grid, {"x_lo", "x_hi", "n_x", "y_lo", "y_hi", "n_y"}, "grid");
    const Interval xd = default_x_domain(spec);
    cfg.grid.x_lo = num_or(grid, "x_lo", xd.lo);
    cfg.grid.x_hi = num_or(grid, "x_hi", xd.hi);
    cfg.grid.n_x = int_or(grid, "n_x", 201);
    cfg.grid.y_lo = num_or(grid, "y_lo", spec.factor_domain.lo);
    cfg.grid.y_hi = num_or(grid, "y_hi", spec.factor_domain.hi);
    cfg.grid.n_y = int_or(grid, "n_y", 201);

    const json solver = j.value("solver", json::object());
    check_keys(solver, {"tolerance", "max_iters", "omega", "sweep", "residual_target"},
               "solver");
    cfg.solver.tolerance = num_or(solver, "tolerance", 1e-8);
    cfg.solver.max_iters = int_or(solver, "max_iters", 200000);
    // the advection-dominated transformed scheme limit-cycles under
    // over-relaxation, so the filtered model defaults to plain Gauss-Seidel
    const double omega_default =
        (spec.kind == ModelKind::FilteredInventory) ? 1.0 : 1.5;
    cfg.solver.omega = num_or(solver, "omega", omega_default);
    if (solver.contains("sweep")) {
        const std::string s = solver["sweep"].get<std::string>();
        if (s == "lexicographic") cfg.solver.sweep = SweepOrder::Lexicographic;
        else if (s == "red_black") cfg.solver.sweep = SweepOrder::RedBlack;
        else throw ConfigError("solver.sweep must be 'lexicographic' or 'red_black'");
    }
    cfg.solver.residual_target = num_or(solver, "residual_target", 0.0);

    if (j.contains("alpha")) {
        if (j["alpha"].is_string()) {
            if (j["alpha"].get<std::string>() != "auto")
                throw ConfigError("alpha must be a number or \"auto\"");
        } else if (j["alpha"].is_number()) {
            cfg.alpha = j["alpha"].get<double>();
        } else {
            throw ConfigError("alpha must be a number or \"auto\"");
        }
    }

    if (j.contains("sim") && !j["sim"].is_null()) {
        const json sim = j["sim"];
        check_keys(sim, {"T", "dt", "n_paths", "burn_in", "seed", "stepper",
                         "n_threads", "trace_stride"}, "sim");
        SimConfig sc;
        sc.T = num_or(sim, "T", 500.0);
        sc.dt = num_or(sim, "dt", 1e-3);
        sc.n_paths = int_or(sim, "n_paths", 16);
        sc.burn_in = num_or(sim, "burn_in", -1.0);
        sc.seed = static_cast<std::uint64_t>(int_or(sim, "seed", 12345));
        sc.n_threads = int_or(sim, "n_threads", 0);
        sc.trace_stride = int_or(sim, "trace_stride", 1000);
        if (sim.contains("stepper")) {
            const std::string s = sim["stepper"].get<std::string>();
            if (s == "euler") sc.stepper = Stepper::EulerMaruyama;
            else if (s == "exact_ou") sc.stepper = Stepper::ExactOUFactor;
            else throw ConfigError("sim.stepper must be 'euler' or 'exact_ou'");
        }
        cfg.sim = sc;
    } else if (!j.contains("sim")) {
        SimConfig sc;
        sc.T = 500.0;
        sc.dt = 1e-3;
        sc.n_paths = 16;
        sc.seed = 12345;
        cfg.sim = sc;
    }

    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("checks")) {
        for (const auto& c : j["checks"]) {
            const std::string name = c.get<std::string>();
            if (!kKnownChecks.count(name))
                throw ConfigError("unknown check '" + name + "'");
            cfg.checks.push_back(name);
        }
    }
    return cfg;
}

DynkinSolution solve_model(const ModelSpec& spec, const Grid2D& grid,
                           const SolverConfig& cfg) {
    DynkinSolution sol;
    if (spec.kind == ModelKind::FilteredInventory) {
        const Interval zr = z_range_for(spec, grid.x_nodes.front(), grid.x_nodes.back(),
                                        grid.y_nodes.front(), grid.y_nodes.back());
        const Grid2D xz = build_grid(grid.x_nodes.front(), grid.x_nodes.back(),
                                     grid.nx(), zr.lo, zr.hi, grid.ny());
        const DiscreteOperator op = assemble_generator(spec, xz, Scheme::DegenerateXZ);
        sol.U_hat = solve_dynkin(op, spec, xz, cfg, nullptr, &sol.residual);
        sol.U_hat->label = "U_hat";
        MappedField mapped = map_xz_to_xy(*sol.U_hat, spec, grid);
        sol.U = std::move(mapped.field);
        sol.U.label = "U";
        sol.mapped_clamped = mapped.clamped_nodes;
    } else {
        const DiscreteOperator op =
            assemble_generator(spec, grid, Scheme::EllipticNinePoint);
        sol.U = solve_dynkin(op, spec, grid, cfg, nullptr, &sol.residual);
    }
    return sol;
}

RunManifest run_pipeline(const PipelineConfig& config) {
    RunManifest manifest;
    json timings;
    StageTimer timer(timings);

    const ModelSpec spec = model_from_json(config.model_json);
    const ValidationReport validation =
        timer.run("validate", [&] { return validate_params(spec); });

    const Grid2D grid = build_grid(config.grid.x_lo, config.grid.x_hi, config.grid.n_x,
                                   config.grid.y_lo, config.grid.y_hi, config.grid.n_y);

    const DynkinSolution sol =
        timer.run("solve", [&] { return solve_model(spec, grid, config.solver); });

    const FreeBoundaries fb =
        timer.run("boundaries", [&] { return extract_boundaries(sol.U, spec); });
    const HypothesisReport hyp = check_hypothesis(fb, spec, grid);

    double alpha = config.alpha
                       ? *config.alpha
                       : 0.5 * (fb.sup_a_plus + fb.inf_a_minus);
    const PseudoPotential V =
        timer.run("potential", [&] { return build_pseudo_potential(sol.U, alpha, fb); });
    alpha = V.alpha;
    manifest.alpha = alpha;

    const LambdaProfile lam = timer.run("lambda", [&] {
        if (sol.U_hat)
            return compute_lambda_profile_xz(*sol.U_hat, spec, alpha, fb, grid.y_nodes);
        return compute_lambda_profile(sol.U, spec, alpha, fb);
    });

    const Density density = timer.run("density", [&] {
        switch (spec.kind) {
            case ModelKind::FilteredInventory:
                return filter_stationary_density(spec.param("lambda1"),
                                                 spec.param("lambda2"),
                                                 spec.param("gamma"), 2001,
                                                 spec.param("eps_y"));
            case ModelKind::OUInventory:
                return ou_stationary_density(spec.param("m"), spec.param("b"),
                                             spec.param("sigma2"));
            default: {
                // frozen factor: weight rows uniformly over the declared interval
                Density d;
                d.kind = DensityKind::GridDensity;
                d.y_nodes = grid.y_nodes;
                d.mass.assign(grid.y_nodes.size(),
                              1.0 / (grid.y_nodes.back() - grid.y_nodes.front()));
                return d;
            }
        }
    });
    manifest.lambda_star = ergodic_value(lam, density);

    const fs::path out_dir(config.output_dir);
    fs::create_directories(out_dir);

    std::optional<ErgodicEstimate> sim_estimate;
    if (config.sim) {
        timer.run("simulate", [&] {
            SimConfig sc = *config.sim;
            if (sc.trace_stride > 0) sc.trace_path = (out_dir / "path.csv").string();
            const double y0 = 0.5 * (grid.y_nodes.front() + grid.y_nodes.back());
            sim_estimate = simulate_reflected(spec, fb, alpha, y0, sc);
        });
    }

    // checks
    std::vector<std::string> enabled = config.checks;
    if (enabled.empty()) {
        enabled = {"obstacle_bounds", "monotonicity", "hypothesis", "hjb_residual",
                   "alpha_invariance"};
        if (config.sim) enabled.push_back("simulation_consistency");
        if (spec.kind == ModelKind::DegenerateNoFactor)
            enabled.push_back("degenerate_relation");
    }

    HJBResidualReport hjb{};
    AlphaInvarianceReport alpha_inv{};
    const json mono = monotonicity_stats(sol.U);

    timer.run("checks", [&] {
        for (const std::string& name : enabled) {
            CheckResult res;
            res.name = name;
            if (name == "obstacle_bounds") {
                res.value = sol.residual.obstacle_violation;
                res.tolerance = 1e-12;
                res.pass = res.value <= res.tolerance;
                res.detail = "max obstacle overshoot of U";
            } else if (name == "monotonicity") {
                res.value = std::max(mono["worst_decrease_x"].get<double>(),
                                     mono["worst_decrease_y"].get<double>());
                res.tolerance = 1e-8;
                res.pass = res.value <= res.tolerance;
                res.detail = "worst pointwise decrease of U in x or y";
            } else if (name == "hypothesis") {
                res.value = hyp.all_ok() ? 0.0 : 1.0;
                res.tolerance = 0.0;
                res.pass = hyp.all_ok();
                res.detail = "separation, sign conditions, boundary monotonicity, bounds";
            } else if (name == "hjb_residual") {
                hjb = hjb_residual(V, lam, spec, grid);
                res.value = hjb.continuation;
                res.tolerance = 0.1 * std::max(1.0, std::abs(manifest.lambda_star));
                res.pass = res.value <= res.tolerance;
                res.detail = "sup |L V + c - lambda| where the PDE branch is active";
            } else if (name == "alpha_invariance") {
                const double gap = fb.inf_a_minus - fb.sup_a_plus;
                const double a1 = fb.sup_a_plus + 0.25 * gap;
                const double a2 = fb.sup_a_plus + 0.75 * gap;
                alpha_inv = check_alpha_invariance(sol.U, spec, a1, a2, density, fb);
                res.value = alpha_inv.delta_star;
                res.tolerance = 1e-2;
                res.pass = res.value <= res.tolerance &&
                           alpha_inv.pointwise_identity_err <= 5e-2;
                res.detail = "lambda* across anchors; pointwise identity err " +
                             format_double(alpha_inv.pointwise_identity_err);
            } else if (name == "simulation_consistency") {
                if (!sim_estimate) continue;
                res.value = std::abs(sim_estimate->mean_cost - manifest.lambda_star);
                res.tolerance = 3.0 * sim_estimate->stderr_;
                res.pass = res.value <= res.tolerance;
                res.detail = "|MC mean cost - lambda*| vs 3 stderr";
            } else if (name == "degenerate_relation") {
                const double y = 0.5 * (grid.y_nodes.front() + grid.y_nodes.back());
                res.value = check_degenerate_relation(spec, fb, y);
                res.tolerance = std::max(5e-2, 2.0 * grid.h_x);
                res.pass = res.value <= res.tolerance;
                res.detail = "1-D boundary relation defect at the middle row";
            } else {
                continue;
            }
            manifest.checks.push_back(res);
            manifest.all_checks_pass = manifest.all_checks_pass && res.pass;
        }
    });

    // artifacts
    timer.run("artifacts", [&] {
        write_field_csv(sol.U, (out_dir / "U.csv").string());
        write_boundaries_csv(fb, (out_dir / "boundaries.csv").string());
        write_field_csv(V.V, (out_dir / "V.csv").string());
        write_lambda_csv(lam, (out_dir / "lambda.csv").string());
        write_density_csv(density, grid.y_nodes, (out_dir / "density.csv").string());

        if (sim_estimate) {
            json sim_json{
                {"mean_cost", sim_estimate->mean_cost},
                {"stderr", sim_estimate->stderr_},
                {"running", sim_estimate->running},
                {"push_plus", sim_estimate->push_plus},
                {"push_minus", sim_estimate->push_minus},
                {"band_violation_max", sim_estimate->band_violation_max},
                {"paths_used", sim_estimate->paths_used},
                {"extrapolated_band", sim_estimate->extrapolated_band},
                {"lambda_star", manifest.lambda_star},
                {"config", {{"T", config.sim->T},
                            {"dt", config.sim->dt},
                            {"n_paths", config.sim->n_paths},
                            {"seed", config.sim->seed}}}};
            std::ofstream(out_dir / "sim.json") << sim_json.dump(2) << '\n';
        }

        json report{
            {"validation", json::array()},
            {"hypothesis",
             {{"separation_ok", hyp.separation_ok},
              {"sign_minus_ok", hyp.sign_minus_ok},
              {"sign_plus_ok", hyp.sign_plus_ok},
              {"monotone_ok", hyp.monotone_ok},
              {"bounds_ok", hyp.bounds_ok},
              {"bounds_checked", hyp.bounds_checked}}},
            {"solver",
             {{"comp_residual", sol.residual.comp_residual},
              {"obstacle_violation", sol.residual.obstacle_violation},
              {"iters_used", sol.residual.iters_used},
              {"mapped_clamped_nodes", sol.mapped_clamped}}},
            {"monotonicity", mono},
            {"boundaries",
             {{"sup_a_plus", fb.sup_a_plus},
              {"inf_a_minus", fb.inf_a_minus},
              {"lipschitz_estimate", lipschitz_estimate(fb)}}},
            {"alpha", alpha},
            {"lambda_star", manifest.lambda_star},
            {"hjb_residual",
             {{"continuation", hjb.continuation},
              {"contact_minus", hjb.contact_minus},
              {"contact_plus", hjb.contact_plus},
              {"min_defect", hjb.min_defect}}},
            {"alpha_invariance",
             {{"delta_star", alpha_inv.delta_star},
              {"pointwise_identity_err", alpha_inv.pointwise_identity_err}}},
            {"checks", json::array()}};
        for (const auto& c : validation.checks)
            report["validation"].push_back(
                {{"name", c.name}, {"pass", c.pass}, {"message", c.message}});
        for (const auto& c : manifest.checks)
            report["checks"].push_back({{"name", c.name},
                                        {"pass", c.pass},
                                        {"value", c.value},
                                        {"tolerance", c.tolerance},
                                        {"detail", c.detail}});
        std::ofstream(out_dir / "report.json") << report.dump(2) << '\n';
    });

    // hash over the semantically meaningful configuration
    json hashable{{"model", config.model_json},
                  {"grid", {{"x_lo", config.grid.x_lo}, {"x_hi", config.grid.x_hi},
                            {"n_x", config.grid.n_x}, {"y_lo", config.grid.y_lo},
                            {"y_hi", config.grid.y_hi}, {"n_y", config.grid.n_y}}},
                  {"solver", {{"tolerance", config.solver.tolerance},
                              {"omega", config.solver.omega},
                              {"residual_target", config.solver.residual_target}}},
                  {"alpha", config.alpha ? json(*config.alpha) : json("auto")},
                  {"checks", enabled}};
    if (config.sim)
        hashable["sim"] = {{"T", config.sim->T}, {"dt", config.sim->dt},
                           {"n_paths", config.sim->n_paths},
                           {"seed", config.sim->seed}};
    std::ostringstream hash_hex;
    hash_hex << std::hex << fnv1a(hashable.dump());
    manifest.config_hash = hash_hex.str();

    std::vector<std::string> names = {"U.csv", "boundaries.csv", "V.csv",
                                      "lambda.csv", "density.csv"};
    if (sim_estimate) names.push_back("sim.json");
    names.push_back("report.json");
    names.push_back("manifest.json");

    // manifest lists itself; iterate until its recorded size is its real size
    long own_size = 0;
    for (int attempt = 0; attempt < 4; ++attempt) {
        manifest.artifacts.clear();
        json jman{{"config_hash", manifest.config_hash},
                  {"alpha", manifest.alpha},
                  {"lambda_star", manifest.lambda_star},
                  {"all_checks_pass", manifest.all_checks_pass},
                  {"timings_ms", timings},
                  {"artifacts", json::array()},
                  {"checks", json::array()}};
        for (const auto& n : names) {
            const long bytes =
                (n == "manifest.json") ? own_size : file_bytes(out_dir / n);
            manifest.artifacts.emplace_back(n, bytes);
            jman["artifacts"].push_back({{"name", n}, {"bytes", bytes}});
        }
        for (const auto& c : manifest.checks)
            jman["checks"].push_back({{"name", c.name}, {"pass", c.pass}});
        const std::string payload = jman.dump(2) + "\n";
        std::ofstream(out_dir / "manifest.json") << payload;
        const long real = static_cast<long>(payload.size());
        if (real == own_size) break;
        own_size = real;
    }
    manifest.timings_ms = timings;
    return manifest;
}

std::vector<std::string> emit_plots(const RunManifest& manifest,
                                    const std::string& output_dir) {
    const fs::path dir(output_dir);
    auto has = [&](const std::string& name) {
        for (const auto& [n, b] : manifest.artifacts)
            if (n == name) {
                if (!fs::exists(dir / n))
                    throw MissingArtifact("artifact '" + n + "' listed but missing");
                return true;
            }
        return false;
    };

    std::vector<std::string> written;
    if (!has("U.csv") || !has("boundaries.csv") || !has("lambda.csv"))
        throw MissingArtifact("need U.csv, boundaries.csv and lambda.csv to plot");

    {
        std::ofstream s(dir / "plot_value.py");
        s << "import csv\n"
             "import matplotlib.pyplot as plt\n"
             "\n"
             "xs, ys, vs = [], [], []\n"
             "with open('U.csv') as f:\n"
             "    for row in csv.DictReader(f):\n"
             "        xs.append(float(row['x']))\n"
             "        ys.append(float(row['y']))\n"
             "        vs.append(float(row['value']))\n"
             "nx = len(set(xs))\n"
             "ny = len(set(ys))\n"
             "by, bp, bm = [], [], []\n"
             "with open('boundaries.csv') as f:\n"
             "    for row in csv.DictReader(f):\n"
             "        by.append(float(row['y']))\n"
             "        bp.append(float(row['a_plus']))\n"
             "        bm.append(float(row['a_minus']))\n"
             "plt.figure(figsize=(7, 5))\n"
             "plt.tricontourf(xs, ys, vs, levels=41)\n"
             "plt.colorbar(label='U')\n"
             "plt.plot(bp, by, 'w-', label='a_plus')\n"
             "plt.plot(bm, by, 'w--', label='a_minus')\n"
             "plt.xlabel('x')\n"
             "plt.ylabel('y')\n"
             "plt.legend()\n"
             "plt.savefig('value.png', dpi=150)\n";
        written.push_back("plot_value.py");
    }
    {
        std::ofstream s(dir / "plot_lambda.py");
        s << "import csv\n"
             "import matplotlib.pyplot as plt\n"
             "\n"
             "ys, ls = [], []\n"
             "with open('lambda.csv') as f:\n"
             "    for row in csv.DictReader(f):\n"
             "        ys.append(float(row['y']))\n"
             "        ls.append(float(row['lambda']))\n"
             "plt.figure(figsize=(7, 4))\n"
             "plt.plot(ys, ls)\n"
             "plt.xlabel('y')\n"
             "plt.ylabel('lambda(y)')\n"
             "plt.savefig('lambda.png', dpi=150)\n";
        written.push_back("plot_lambda.py");
    }
    if (has("sim.json") && fs::exists(dir / "path.csv")) {
        std::ofstream s(dir / "plot_path.py");
        s << "import csv\n"
             "import matplotlib.pyplot as plt\n"
             "\n"
             "t, x, y = [], [], []\n"
             "with open('path.csv') as f:\n"
             "    for row in csv.DictReader(f):\n"
             "        t.append(float(row['t']))\n"
             "        x.append(float(row['x']))\n"
             "        y.append(float(row['y']))\n"
             "fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(8, 5))\n"
             "ax1.plot(t, x)\n"
             "ax1.set_ylabel('x')\n"
             "ax2.plot(t, y)\n"
             "ax2.set_ylabel('y')\n"
             "ax2.set_xlabel('t')\n"
             "plt.savefig('path.png', dpi=150)\n";
        written.push_back("plot_path.py");
    }
    return written;
}

} // namespace ergctl
