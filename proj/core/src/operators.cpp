#include "ergctl/operators.hpp"

#include <cmath>

namespace ergctl {

namespace {

struct StencilRef {
    double* c0;
    double* xm;
    double* xp;
    double* ym;
    double* yp;
    double* dpp;
    double* dmm;
    double* dpm;
    double* dmp;
};

StencilRef node_ref(DiscreteOperator& op, int idx) {
    return {&op.c0[idx], &op.xm[idx], &op.xp[idx], &op.ym[idx], &op.yp[idx],
            &op.dpp[idx], &op.dmm[idx], &op.dpm[idx], &op.dmp[idx]};
}

void scan_monotonicity(DiscreteOperator& op) {
    const std::vector<double>* offdiags[] = {&op.xm, &op.xp, &op.ym, &op.yp,
                                             &op.dpp, &op.dmm, &op.dpm, &op.dmp};
    for (int idx = 0; idx < op.grid.size(); ++idx) {
        double worst_here = 0.0;
        for (const auto* arr : offdiags)
            worst_here = std::min(worst_here, (*arr)[idx]);
        if (worst_here < -1e-14) {
            op.mono.violations += 1;
            op.mono.worst = std::min(op.mono.worst, worst_here);
        }
    }
}

void assemble_elliptic(const ModelSpec& spec, DiscreteOperator& op,
                       const AssemblyOptions& opts) {
    const Grid2D& g = op.grid;
    const double hx = g.h_x, hy = g.h_y;
    const double hx2 = hx * hx, hy2 = hy * hy;

    if (!opts.allow_degenerate_cross && std::abs(spec.rho) >= 1.0 - 1e-12) {
        double zmax = 0.0;
        for (double y : g.y_nodes) zmax = std::max(zmax, std::abs(spec.zeta(y)));
        if (zmax > 0.0)
            throw SchemeMismatch(
                "nine-point scheme needs |rho| < 1 or zeta == 0; use DegenerateXZ");
    }

    for (int j = 0; j < g.ny(); ++j) {
        const bool y_interior = (j > 0 && j + 1 < g.ny());
        for (int i = 1; i + 1 < g.nx(); ++i) {
            const int idx = g.index(i, j);
            const auto s = eval_coefficients(spec, g.x_nodes[i], g.y_nodes[j]);
            auto n = node_ref(op, idx);

            const double Dx = 0.5 * s.sigma * s.sigma / hx2;
            *n.xm += Dx;
            *n.xp += Dx;
            *n.c0 -= 2.0 * Dx;

            if (y_interior) {
                const double Dy = 0.5 * s.zeta * s.zeta / hy2;
                *n.ym += Dy;
                *n.yp += Dy;
                *n.c0 -= 2.0 * Dy;

                const double cross = s.sigma * s.rho_zeta;
                if (cross != 0.0) {
                    // sign-split diagonal differences for the mixed derivative
                    const double w = std::abs(cross) / (2.0 * hx * hy);
                    *n.c0 += 2.0 * w;
                    *n.xm -= w;
                    *n.xp -= w;
                    *n.ym -= w;
                    *n.yp -= w;
                    if (cross > 0.0) {
                        *n.dpp += w;
                        *n.dmm += w;
                    } else {
                        *n.dpm += w;
                        *n.dmp += w;
                    }
                }
            }

            const double bh = s.hat_drift_x;
            if (bh >= 0.0) {
                *n.xp += bh / hx;
                *n.c0 -= bh / hx;
            } else {
                *n.xm += -bh / hx;
                *n.c0 += bh / hx;
            }

            // y-drift: upwind inside, one-sided into the domain at the edges
            const double eh = s.hat_drift_y;
            if (eh != 0.0) {
                const bool forward = (j == 0) || (j + 1 < g.ny() && eh >= 0.0);
                if (forward) {
                    *n.yp += eh / hy;
                    *n.c0 -= eh / hy;
                } else {
                    *n.ym += -eh / hy;
                    *n.c0 += eh / hy;
                }
            }

            op.zeroth[idx] = s.b_x;
        }
    }
}

void assemble_degenerate_xz(const ModelSpec& spec, DiscreteOperator& op) {
    if (spec.kind != ModelKind::FilteredInventory)
        throw SchemeMismatch("DegenerateXZ applies to the filtered model only");

    const Grid2D& g = op.grid; // y_nodes hold z here
    const double hx = g.h_x, hz = g.h_y;
    const double sigma = spec.param("sigma");
    const double delta = spec.param("delta");
    const double Dx = 0.5 * sigma * sigma / (hx * hx);

    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 1; i + 1 < g.nx(); ++i) {
            const int idx = g.index(i, j);
            auto n = node_ref(op, idx);
            const XZDrift d = filtered_xz_drift(spec, g.x_nodes[i], g.y_nodes[j]);

            *n.xm += Dx;
            *n.xp += Dx;
            *n.c0 -= 2.0 * Dx;

            if (d.mu >= 0.0) {
                *n.xp += d.mu / hx;
                *n.c0 -= d.mu / hx;
            } else {
                *n.xm += -d.mu / hx;
                *n.c0 += d.mu / hx;
            }

            // z-advection: upwind; dropped when the upwind neighbor is off
            // grid (the solution is flat in z far out, both obstacles active)
            if (d.q >= 0.0) {
                if (j + 1 < g.ny()) {
                    *n.yp += d.q / hz;
                    *n.c0 -= d.q / hz;
                }
            } else {
                if (j > 0) {
                    *n.ym += -d.q / hz;
                    *n.c0 += d.q / hz;
                }
            }

            op.zeroth[idx] = -delta;
        }
    }
}

} // namespace

DiscreteOperator assemble_generator(const ModelSpec& spec, const Grid2D& grid,
                                    Scheme scheme, const AssemblyOptions& opts) {
    DiscreteOperator op;
    op.grid = grid;
    op.scheme = scheme;
    const int n = grid.size();
    for (auto* arr : {&op.c0, &op.xm, &op.xp, &op.ym, &op.yp,
                      &op.dpp, &op.dmm, &op.dpm, &op.dmp, &op.zeroth})
        arr->assign(n, 0.0);

    if (scheme == Scheme::EllipticNinePoint)
        assemble_elliptic(spec, op, opts);
    else
        assemble_degenerate_xz(spec, op);

    scan_monotonicity(op);
    return op;
}

void DiscreteOperator::apply(const std::vector<double>& u, std::vector<double>& out,
                             bool include_zeroth) const {
    out.assign(grid.size(), 0.0);
    const int nx = grid.nx(), ny = grid.ny();
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int idx = grid.index(i, j);
            double acc = c0[idx] * u[idx];
            if (xm[idx] != 0.0) acc += xm[idx] * u[idx - 1];
            if (xp[idx] != 0.0) acc += xp[idx] * u[idx + 1];
            if (ym[idx] != 0.0) acc += ym[idx] * u[idx - nx];
            if (yp[idx] != 0.0) acc += yp[idx] * u[idx + nx];
            if (dpp[idx] != 0.0) acc += dpp[idx] * u[idx + nx + 1];
            if (dmm[idx] != 0.0) acc += dmm[idx] * u[idx - nx - 1];
            if (dpm[idx] != 0.0) acc += dpm[idx] * u[idx - nx + 1];
            if (dmp[idx] != 0.0) acc += dmp[idx] * u[idx + nx - 1];
            if (include_zeroth) acc += zeroth[idx] * u[idx];
            out[idx] = acc;
        }
    }
}

double DiscreteOperator::offdiag_sum(const std::vector<double>& u, int i, int j) const {
    const int nx = grid.nx();
    const int idx = grid.index(i, j);
    double acc = 0.0;
    if (xm[idx] != 0.0) acc += xm[idx] * u[idx - 1];
    if (xp[idx] != 0.0) acc += xp[idx] * u[idx + 1];
    if (ym[idx] != 0.0) acc += ym[idx] * u[idx - nx];
    if (yp[idx] != 0.0) acc += yp[idx] * u[idx + nx];
    if (dpp[idx] != 0.0) acc += dpp[idx] * u[idx + nx + 1];
    if (dmm[idx] != 0.0) acc += dmm[idx] * u[idx - nx - 1];
    if (dpm[idx] != 0.0) acc += dpm[idx] * u[idx - nx + 1];
    if (dmp[idx] != 0.0) acc += dmp[idx] * u[idx + nx - 1];
    return acc;
}

MappedField map_xy_to_xz(const ValueField& field, const ModelSpec& spec,
                         const Grid2D& xz_grid) {
    MappedField out;
    out.field = ValueField(xz_grid, field.label + "_xz");
    for (int j = 0; j < xz_grid.ny(); ++j) {
        for (int i = 0; i < xz_grid.nx(); ++i) {
            bool clamped = false;
            const double y = y_of_xz(spec, xz_grid.x_nodes[i], xz_grid.y_nodes[j]);
            out.field.at(i, j) = field.interpolate(xz_grid.x_nodes[i], y, &clamped);
            if (clamped) out.clamped_nodes += 1;
        }
    }
    return out;
}

MappedField map_xz_to_xy(const ValueField& field, const ModelSpec& spec,
                         const Grid2D& xy_grid) {
    MappedField out;
    out.field = ValueField(xy_grid, field.label + "_xy");
    for (int j = 0; j < xy_grid.ny(); ++j) {
        for (int i = 0; i < xy_grid.nx(); ++i) {
            bool clamped = false;
            const double z = z_of_xy(spec, xy_grid.x_nodes[i], xy_grid.y_nodes[j]);
            out.field.at(i, j) = field.interpolate(xy_grid.x_nodes[i], z, &clamped);
            if (clamped) out.clamped_nodes += 1;
        }
    }
    return out;
}

Interval z_range_for(const ModelSpec& spec, double x_lo, double x_hi,
                     double y_lo, double y_hi) {
    // z is increasing in y and decreasing in x
    return {z_of_xy(spec, x_hi, y_lo), z_of_xy(spec, x_lo, y_hi)};
}

} // namespace ergctl
