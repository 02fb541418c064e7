#include "ergctl/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <random>
#include <thread>
#include <vector>

#include "ergctl/io.hpp"

namespace ergctl {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 path_rng(std::uint64_t seed, int path) {
    return std::mt19937_64(
        splitmix64(seed ^ (0x51ed270b2f9bb0ffULL * (std::uint64_t(path) + 1))));
}

// compensated accumulator for long per-path sums
struct Kahan {
    double sum = 0.0, carry = 0.0;
    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

struct StepCounts {
    long total = 0;
    long burn = 0;
    double effective_time = 0.0;
};

StepCounts step_counts(const SimConfig& cfg) {
    if (!(cfg.dt > 0)) throw InvalidParameter("sim dt must be positive");
    if (cfg.dt > cfg.T / 100.0)
        throw InvalidParameter("sim dt must be at most T/100");
    if (cfg.n_paths < 1) throw InvalidParameter("sim n_paths must be >= 1");
    const double burn = cfg.burn_in < 0 ? 0.1 * cfg.T : cfg.burn_in;
    if (burn >= cfg.T) throw InvalidParameter("burn_in must be below T");
    StepCounts s;
    s.total = std::lround(cfg.T / cfg.dt);
    s.burn = std::lround(burn / cfg.dt);
    s.effective_time = (s.total - s.burn) * cfg.dt;
    return s;
}

struct PathTotals {
    double running = 0.0;
    double push_plus = 0.0;
    double push_minus = 0.0;
    double band_violation = 0.0;
    bool extrapolated = false;
    bool collapsed = false;
    bool escaped = false;
};

struct TraceRow {
    double t, x, y, xi_plus, xi_minus, cost_running;
};

int resolve_threads(const SimConfig& cfg) {
    if (cfg.n_threads > 0) return cfg.n_threads;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

template <typename PathFn>
std::vector<PathTotals> run_paths(const SimConfig& cfg, PathFn&& fn) {
    std::vector<PathTotals> totals(cfg.n_paths);
    const int n_threads = std::min(resolve_threads(cfg), cfg.n_paths);
    if (n_threads <= 1) {
        for (int p = 0; p < cfg.n_paths; ++p) totals[p] = fn(p);
        return totals;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
        workers.emplace_back([&] {
            for (;;) {
                const int p = next.fetch_add(1);
                if (p >= cfg.n_paths) return;
                totals[p] = fn(p);
            }
        });
    }
    for (auto& w : workers) w.join();
    return totals;
}

ErgodicEstimate reduce(const std::vector<PathTotals>& totals, const ModelSpec& spec,
                       double effective_time) {
    for (const auto& t : totals) {
        if (t.collapsed)
            throw BandCollapse("interpolated a_plus >= a_minus at a visited factor value");
        if (t.escaped)
            throw FilterEscape("filter left [0,1] by more than 1e-10; reduce dt");
    }
    ErgodicEstimate est;
    est.paths_used = static_cast<int>(totals.size());
    est.path_costs.resize(totals.size());
    double run_sum = 0.0, pp_sum = 0.0, pm_sum = 0.0;
    for (size_t p = 0; p < totals.size(); ++p) {
        const double run = totals[p].running / effective_time;
        const double pp = spec.K_plus * totals[p].push_plus / effective_time;
        const double pm = spec.K_minus * totals[p].push_minus / effective_time;
        est.path_costs[p] = run + pp + pm;
        run_sum += run;
        pp_sum += pp;
        pm_sum += pm;
        est.band_violation_max = std::max(est.band_violation_max, totals[p].band_violation);
        est.extrapolated_band = est.extrapolated_band || totals[p].extrapolated;
    }
    const double n = static_cast<double>(totals.size());
    est.running = run_sum / n;
    est.push_plus = pp_sum / n;
    est.push_minus = pm_sum / n;
    est.mean_cost = est.running + est.push_plus + est.push_minus;
    if (totals.size() > 1) {
        const double mean = est.mean_cost;
        double ss = 0.0;
        for (double c : est.path_costs) ss += (c - mean) * (c - mean);
        est.stderr_ = std::sqrt(ss / (n * (n - 1.0)));
    }
    return est;
}

void write_trace(const std::string& path, const std::vector<TraceRow>& rows) {
    std::ofstream out(path);
    out << "t,x,y,xi_plus,xi_minus,cost_running\n";
    for (const auto& r : rows)
        out << format_double(r.t) << ',' << format_double(r.x) << ','
            << format_double(r.y) << ',' << format_double(r.xi_plus) << ','
            << format_double(r.xi_minus) << ',' << format_double(r.cost_running) << '\n';
}

} // namespace

ErgodicEstimate simulate_reflected(const ModelSpec& spec, const FreeBoundaries& fb,
                                   double x0, double y0, const SimConfig& cfg) {
    const StepCounts sc = step_counts(cfg);
    const double dt = cfg.dt, sqdt = std::sqrt(dt);
    const double rho = spec.rho;
    const double rho_orth = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    const bool exact_ou = (cfg.stepper == Stepper::ExactOUFactor);
    if (exact_ou && spec.kind != ModelKind::OUInventory)
        throw InvalidParameter("ExactOUFactor stepper needs the OU factor model");

    double ou_mean = 0.0, ou_decay = 0.0, ou_sd = 0.0;
    if (exact_ou) {
        const double b = spec.param("b"), m = spec.param("m"), s2 = spec.param("sigma2");
        ou_mean = m / b;
        ou_decay = std::exp(-b * dt);
        ou_sd = s2 * std::sqrt((1.0 - std::exp(-2.0 * b * dt)) / (2.0 * b));
    }

    std::vector<TraceRow> trace;
    const bool want_trace = cfg.trace_stride > 0 && !cfg.trace_path.empty();

    auto one_path = [&](int p) {
        auto rng = path_rng(cfg.seed, p);
        std::normal_distribution<double> normal(0.0, 1.0);
        PathTotals tot;
        Kahan running;
        double x = x0, y = y0;
        double xi_plus = 0.0, xi_minus = 0.0;
        const bool tracing = want_trace && p == 0;

        for (long step = 0; step < sc.total; ++step) {
            const double n1 = normal(rng);
            const double n2 = normal(rng);
            const double dB = n1 * sqdt;
            const double dW = (rho * n1 + rho_orth * n2) * sqdt;

            if (exact_ou) {
                y = ou_mean + (y - ou_mean) * ou_decay + ou_sd * n1;
            } else {
                y += spec.eta(y) * dt + spec.zeta(y) * dB;
            }
            if (spec.kind == ModelKind::FilteredInventory)
                y = std::clamp(y, 1e-12, 1.0 - 1e-12);

            x += spec.b(x, y) * dt + spec.sigma(x, y) * dW;

            bool extrap = false;
            const double ap = fb.eval_plus(y, &extrap);
            bool extrap2 = false;
            const double am = fb.eval_minus(y, &extrap2);
            tot.extrapolated = tot.extrapolated || extrap || extrap2;
            if (ap >= am) {
                tot.collapsed = true;
                return tot;
            }
            const bool counted = step >= sc.burn;
            if (x < ap) {
                const double push = ap - x;
                if (counted) tot.push_plus += push;
                xi_plus += push;
                tot.band_violation = std::max(tot.band_violation, push);
                x = ap;
            } else if (x > am) {
                const double push = x - am;
                if (counted) tot.push_minus += push;
                xi_minus += push;
                tot.band_violation = std::max(tot.band_violation, push);
                x = am;
            }
            if (counted) running.add(spec.c(x, y) * dt);
            if (tracing && step % cfg.trace_stride == 0)
                trace.push_back({(step + 1) * dt, x, y, xi_plus, xi_minus, running.sum});
        }
        tot.running = running.sum;
        return tot;
    };

    std::vector<PathTotals> totals;
    if (want_trace) {
        // path 0 runs first on this thread so the trace buffer needs no locking
        totals.resize(cfg.n_paths);
        totals[0] = one_path(0);
        SimConfig rest = cfg;
        rest.n_paths = cfg.n_paths - 1;
        if (rest.n_paths > 0) {
            auto others = run_paths(rest, [&](int p) { return one_path(p + 1); });
            for (int p = 1; p < cfg.n_paths; ++p) totals[p] = others[p - 1];
        }
        write_trace(cfg.trace_path, trace);
    } else {
        totals = run_paths(cfg, one_path);
    }
    return reduce(totals, spec, sc.effective_time);
}

ErgodicEstimate simulate_partially_observed(const ModelSpec& spec,
                                            const FreeBoundaries& fb,
                                            double x0, double pi0,
                                            const SimConfig& cfg,
                                            double* chain_occupation,
                                            double* filter_mean) {
    if (spec.kind != ModelKind::FilteredInventory)
        throw InvalidParameter("partially observed simulation needs the filtered model");
    if (!(pi0 > 0 && pi0 < 1)) throw InvalidParameter("pi0 must lie in (0,1)");
    const StepCounts sc = step_counts(cfg);
    const double dt = cfg.dt, sqdt = std::sqrt(dt);
    const double m1 = spec.param("m1"), m2 = spec.param("m2");
    const double sigma = spec.param("sigma");
    const double l1 = spec.param("lambda1"), l2 = spec.param("lambda2");
    const double gamma = spec.param("gamma");
    const double delta = spec.param("delta");
    const double p_switch_1 = -std::expm1(-l1 * dt);
    const double p_switch_2 = -std::expm1(-l2 * dt);

    std::vector<double> occ(cfg.n_paths, 0.0), fmean(cfg.n_paths, 0.0);

    auto one_path = [&](int p) {
        auto rng = path_rng(cfg.seed, p);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        PathTotals tot;
        Kahan running, occ_time, pi_time;
        double x = x0, pi = pi0;
        int state = (unif(rng) < pi0) ? 1 : 2;

        for (long step = 0; step < sc.total; ++step) {
            const double u = unif(rng);
            const double n = normal(rng);
            if (state == 1) {
                if (u < p_switch_1) state = 2;
            } else {
                if (u < p_switch_2) state = 1;
            }
            const double m_true = (state == 1) ? m1 : m2;
            const double m_filt = m2 + (m1 - m2) * pi;
            const double dWobs = n * sqdt;
            // innovation from the realized observation increment
            const double dB = dWobs + (m_true - m_filt) / sigma * dt;

            x += (m_true - delta * x) * dt + sigma * dWobs;
            pi += (l2 - (l1 + l2) * pi) * dt + gamma * pi * (1.0 - pi) * dB;
            if (pi < -1e-10 || pi > 1.0 + 1e-10) {
                tot.escaped = true;
                return tot;
            }
            pi = std::clamp(pi, 1e-12, 1.0 - 1e-12);

            bool extrap = false, extrap2 = false;
            const double ap = fb.eval_plus(pi, &extrap);
            const double am = fb.eval_minus(pi, &extrap2);
            tot.extrapolated = tot.extrapolated || extrap || extrap2;
            if (ap >= am) {
                tot.collapsed = true;
                return tot;
            }
            const bool counted = step >= sc.burn;
            if (x < ap) {
                const double push = ap - x;
                if (counted) tot.push_plus += push;
                tot.band_violation = std::max(tot.band_violation, push);
                x = ap;
            } else if (x > am) {
                const double push = x - am;
                if (counted) tot.push_minus += push;
                tot.band_violation = std::max(tot.band_violation, push);
                x = am;
            }
            if (counted) {
                running.add(spec.c(x, pi) * dt);
                occ_time.add((state == 1 ? 1.0 : 0.0) * dt);
                pi_time.add(pi * dt);
            }
        }
        tot.running = running.sum;
        occ[p] = occ_time.sum / sc.effective_time;
        fmean[p] = pi_time.sum / sc.effective_time;
        return tot;
    };

    auto totals = run_paths(cfg, one_path);
    if (chain_occupation) {
        double s = 0.0;
        for (double v : occ) s += v;
        *chain_occupation = s / cfg.n_paths;
    }
    if (filter_mean) {
        double s = 0.0;
        for (double v : fmean) s += v;
        *filter_mean = s / cfg.n_paths;
    }
    return reduce(totals, spec, sc.effective_time);
}

std::vector<PolicyComparison> compare_policies(const ModelSpec& spec,
                                               const FreeBoundaries& fb,
                                               const std::vector<double>& shifts,
                                               const SimConfig& cfg) {
    const double y0 = 0.5 * (spec.factor_domain.lo + spec.factor_domain.hi);
    const double x0 = 0.5 * (fb.eval_plus(y0) + fb.eval_minus(y0));

    auto shifted = [&](double dplus, double dminus) {
        FreeBoundaries v = fb;
        for (double& a : v.a_plus) a += dplus;
        for (double& a : v.a_minus) a += dminus;
        v.sup_a_plus += dplus;
        v.inf_a_minus += dminus;
        if (v.sup_a_plus >= v.inf_a_minus)
            throw InvalidParameter("perturbed band is empty");
        return v;
    };

    std::vector<PolicyComparison> table;
    const ErgodicEstimate base = simulate_reflected(spec, fb, x0, y0, cfg);
    table.push_back({"baseline", 0.0, base, 0.0, 0.0});

    auto add_variant = [&](const std::string& label, double s,
                           const FreeBoundaries& band) {
        PolicyComparison pc;
        pc.label = label;
        pc.shift = s;
        pc.estimate = simulate_reflected(spec, band, x0, y0, cfg);
        const int n = base.paths_used;
        double mean = 0.0;
        std::vector<double> diffs(n);
        for (int p = 0; p < n; ++p) {
            diffs[p] = pc.estimate.path_costs[p] - base.path_costs[p];
            mean += diffs[p];
        }
        mean /= n;
        pc.diff_mean = mean;
        if (n > 1) {
            double ss = 0.0;
            for (double d : diffs) ss += (d - mean) * (d - mean);
            pc.diff_stderr = std::sqrt(ss / (double(n) * (n - 1.0)));
        }
        table.push_back(std::move(pc));
    };

    for (double s : shifts) {
        add_variant("shift+" + std::to_string(s), s, shifted(s, s));
        add_variant("widen+" + std::to_string(s), s, shifted(-s, s));
    }
    return table;
}

std::vector<double> factor_occupation(const ModelSpec& spec, double y0,
                                      const SimConfig& cfg,
                                      double y_lo, double y_hi, int n_bins) {
    const StepCounts sc = step_counts(cfg);
    const double dt = cfg.dt, sqdt = std::sqrt(dt);
    std::vector<std::vector<double>> counts(cfg.n_paths,
                                            std::vector<double>(n_bins, 0.0));

    auto one_path = [&](int p) {
        auto rng = path_rng(cfg.seed, p);
        std::normal_distribution<double> normal(0.0, 1.0);
        double y = y0;
        for (long step = 0; step < sc.total; ++step) {
            y += spec.eta(y) * dt + spec.zeta(y) * normal(rng) * sqdt;
            if (spec.kind == ModelKind::FilteredInventory)
                y = std::clamp(y, 1e-12, 1.0 - 1e-12);
            if (step >= sc.burn && y >= y_lo && y <= y_hi) {
                int b = static_cast<int>((y - y_lo) / (y_hi - y_lo) * n_bins);
                b = std::clamp(b, 0, n_bins - 1);
                counts[p][b] += 1.0;
            }
        }
        return PathTotals{};
    };
    run_paths(cfg, one_path);

    std::vector<double> hist(n_bins, 0.0);
    double total = 0.0;
    for (int p = 0; p < cfg.n_paths; ++p)
        for (int b = 0; b < n_bins; ++b) {
            hist[b] += counts[p][b];
            total += counts[p][b];
        }
    if (total > 0)
        for (double& v : hist) v /= total;
    return hist;
}

} // namespace ergctl
