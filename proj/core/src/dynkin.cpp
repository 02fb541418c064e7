#include "ergctl/dynkin.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

#include "ergctl/io.hpp"

namespace ergctl {

double source_at(const DiscreteOperator& op, const ModelSpec& spec, int i, int j) {
    const double x = op.grid.x_nodes[i];
    if (op.scheme == Scheme::DegenerateXZ)
        return spec.c_x(x, y_of_xz(spec, x, op.grid.y_nodes[j]));
    return spec.c_x(x, op.grid.y_nodes[j]);
}

namespace {

std::vector<double> build_source(const DiscreteOperator& op, const ModelSpec& spec) {
    std::vector<double> src(op.grid.size(), 0.0);
    for (int j = 0; j < op.grid.ny(); ++j)
        for (int i = 0; i < op.grid.nx(); ++i)
            src[op.grid.index(i, j)] = source_at(op, spec, i, j);
    return src;
}

// x-extreme columns carry the projected spatially-homogeneous balance
// clamp(c_x / (-b_x), -K_plus, K_minus). Where the contact sign conditions
// hold at the extremes this equals the obstacle value the boundary lemma
// guarantees; when a source saturates the whole domain it saturates too.
double boundary_value(const DiscreteOperator& op, const ModelSpec& spec,
                      const std::vector<double>& src, int i, int j) {
    const double x = op.grid.x_nodes[i];
    const double y = (op.scheme == Scheme::DegenerateXZ)
                         ? y_of_xz(spec, x, op.grid.y_nodes[j])
                         : op.grid.y_nodes[j];
    const double bx = spec.b_x(x, y);
    double v;
    if (bx < 0.0)
        v = src[op.grid.index(i, j)] / (-bx);
    else
        v = (i == 0) ? -spec.K_plus : spec.K_minus;
    return std::clamp(v, -spec.K_plus, spec.K_minus);
}

double comp_defect_at(const DiscreteOperator& op, const std::vector<double>& u,
                      const std::vector<double>& src, int i, int j,
                      double K_plus, double K_minus, double eps) {
    const int idx = op.grid.index(i, j);
    const double pde = op.offdiag_sum(u, i, j) + op.diagonal(i, j) * u[idx] + src[idx];
    if (u[idx] >= K_minus - eps) return std::max(0.0, -pde);
    if (u[idx] <= -K_plus + eps) return std::max(0.0, pde);
    return std::abs(pde);
}

double comp_residual_of(const DiscreteOperator& op, const std::vector<double>& u,
                        const std::vector<double>& src, double K_plus, double K_minus) {
    const double eps = 1e-9 * (K_plus + K_minus);
    double worst = 0.0;
    for (int j = 0; j < op.grid.ny(); ++j)
        for (int i = 1; i + 1 < op.grid.nx(); ++i)
            worst = std::max(worst,
                             comp_defect_at(op, u, src, i, j, K_plus, K_minus, eps));
    return worst;
}

} // namespace

ValueField solve_dynkin(const DiscreteOperator& op, const ModelSpec& spec,
                        const Grid2D& grid, const SolverConfig& cfg,
                        const ValueField* initial_guess, ResidualReport* report) {
    if (!(cfg.tolerance > 0)) throw InvalidParameter("solver tolerance must be positive");
    if (!(cfg.omega > 0 && cfg.omega < 2))
        throw InvalidParameter("relaxation omega must lie in (0,2)");

    const int nx = grid.nx(), ny = grid.ny();
    const double Kp = spec.K_plus, Km = spec.K_minus;
    const double scale = Kp + Km;

    for (int j = 0; j < ny; ++j)
        for (int i = 1; i + 1 < nx; ++i)
            if (op.diagonal(i, j) >= 0.0)
                throw DiagonalSignError("non-negative diagonal at node (" +
                                        std::to_string(i) + "," + std::to_string(j) + ")");

    const std::vector<double> src = build_source(op, spec);

    ValueField U(grid, "U");
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            double v;
            if (i == 0 || i == nx - 1) {
                v = boundary_value(op, spec, src, i, j);
            } else if (initial_guess) {
                v = initial_guess->interpolate(grid.x_nodes[i], grid.y_nodes[j]);
            } else {
                const double bx = op.zeroth[grid.index(i, j)];
                v = (bx < 0.0) ? src[grid.index(i, j)] / (-bx) : 0.0;
            }
            U.at(i, j) = std::clamp(v, -Kp, Km);
        }
    }

    std::ofstream trace;
    if (!cfg.trace_path.empty()) {
        trace.open(cfg.trace_path);
        trace << "iter,delta,comp_residual\n";
    }

    auto& u = U.values;
    auto sweep_node = [&](int i, int j, double& delta) {
        const int idx = grid.index(i, j);
        const double diag = op.diagonal(i, j);
        const double target = -(op.offdiag_sum(u, i, j) + src[idx]) / diag;
        double v = u[idx] + cfg.omega * (target - u[idx]);
        v = std::clamp(v, -Kp, Km);
        delta = std::max(delta, std::abs(v - u[idx]));
        u[idx] = v;
    };

    double delta = 0.0, comp = std::numeric_limits<double>::infinity();
    int iter = 0;
    for (iter = 1; iter <= cfg.max_iters; ++iter) {
        delta = 0.0;
        if (cfg.sweep == SweepOrder::Lexicographic) {
            for (int j = 0; j < ny; ++j)
                for (int i = 1; i + 1 < nx; ++i)
                    sweep_node(i, j, delta);
        } else {
            for (int parity = 0; parity < 2; ++parity)
                for (int j = 0; j < ny; ++j)
                    for (int i = 1; i + 1 < nx; ++i)
                        if (((i + j) & 1) == parity) sweep_node(i, j, delta);
        }

        const bool delta_ok = delta <= cfg.tolerance * scale;
        bool residual_ok = cfg.residual_target <= 0.0;
        const bool check_now =
            delta_ok || (iter % std::max(1, cfg.residual_check_every) == 0);
        if (!residual_ok && check_now) {
            comp = comp_residual_of(op, u, src, Kp, Km);
            residual_ok = comp <= cfg.residual_target;
        }
        if (trace.is_open() && check_now) {
            if (cfg.residual_target <= 0.0) comp = comp_residual_of(op, u, src, Kp, Km);
            trace << iter << ',' << format_double(delta) << ','
                  << format_double(comp) << '\n';
        }
        if (delta_ok && residual_ok) break;
    }
    if (iter > cfg.max_iters) throw NoConvergence(cfg.max_iters, delta);

    if (report) {
        report->comp_residual = comp_residual_of(op, u, src, Kp, Km);
        report->obstacle_violation = 0.0;
        for (double v : u)
            report->obstacle_violation =
                std::max(report->obstacle_violation, std::max(v - Km, -Kp - v));
        report->obstacle_violation = std::max(report->obstacle_violation, 0.0);
        report->iters_used = iter;
    }
    return U;
}

ResidualReport residual(const ValueField& U, const DiscreteOperator& op,
                        const ModelSpec& spec) {
    const std::vector<double> src = build_source(op, spec);
    ResidualReport r;
    r.comp_residual = comp_residual_of(op, U.values, src, spec.K_plus, spec.K_minus);
    for (double v : U.values)
        r.obstacle_violation =
            std::max(r.obstacle_violation, std::max(v - spec.K_minus, -spec.K_plus - v));
    r.obstacle_violation = std::max(r.obstacle_violation, 0.0);
    return r;
}

} // namespace ergctl
