#include "ergctl/value_profile.hpp"

#include <algorithm>
#include <cmath>

namespace ergctl {

namespace {

int snap_to_x_node(const Grid2D& g, double alpha, double* dist = nullptr) {
    int best = 0;
    double bd = std::abs(g.x_nodes[0] - alpha);
    for (int i = 1; i < g.nx(); ++i) {
        const double d = std::abs(g.x_nodes[i] - alpha);
        if (d < bd) { bd = d; best = i; }
    }
    if (dist) *dist = bd;
    return best;
}

void require_in_gap(double alpha, const FreeBoundaries& fb) {
    if (!(alpha > fb.sup_a_plus && alpha < fb.inf_a_minus))
        throw AlphaOutsideGap("alpha = " + std::to_string(alpha) +
                              " outside (" + std::to_string(fb.sup_a_plus) + ", " +
                              std::to_string(fb.inf_a_minus) + ")");
}

} // namespace

PseudoPotential build_pseudo_potential(const ValueField& U, double alpha,
                                       const FreeBoundaries& fb) {
    require_in_gap(alpha, fb);
    const Grid2D& g = U.grid;
    PseudoPotential P;
    const int ia = snap_to_x_node(g, alpha, &P.snap_distance);
    P.alpha = g.x_nodes[ia];
    P.V = ValueField(g, "V");
    for (int j = 0; j < g.ny(); ++j) {
        P.V.at(ia, j) = 0.0;
        for (int i = ia + 1; i < g.nx(); ++i)
            P.V.at(i, j) = P.V.at(i - 1, j) +
                           0.5 * (U.at(i - 1, j) + U.at(i, j)) * g.h_x;
        for (int i = ia - 1; i >= 0; --i)
            P.V.at(i, j) = P.V.at(i + 1, j) -
                           0.5 * (U.at(i, j) + U.at(i + 1, j)) * g.h_x;
    }
    return P;
}

LambdaProfile compute_lambda_profile(const ValueField& U, const ModelSpec& spec,
                                     double alpha, const FreeBoundaries& fb) {
    require_in_gap(alpha, fb);
    const Grid2D& g = U.grid;
    const int ia = snap_to_x_node(g, alpha);
    const double a = g.x_nodes[ia];

    LambdaProfile lam;
    lam.alpha = a;
    lam.model = spec.kind;
    lam.y_nodes = g.y_nodes;
    lam.lambda_values.resize(g.ny());
    for (int j = 0; j < g.ny(); ++j) {
        const double y = g.y_nodes[j];
        const double Ux = (U.at(ia + 1, j) - U.at(ia - 1, j)) / (2.0 * g.h_x);
        double Uy;
        if (j == 0)
            Uy = (U.at(ia, 1) - U.at(ia, 0)) / g.h_y;
        else if (j + 1 == g.ny())
            Uy = (U.at(ia, j) - U.at(ia, j - 1)) / g.h_y;
        else
            Uy = (U.at(ia, j + 1) - U.at(ia, j - 1)) / (2.0 * g.h_y);
        const auto s = eval_coefficients(spec, a, y);
        lam.lambda_values[j] = s.c + U.at(ia, j) * s.b +
                               0.5 * s.sigma * s.sigma * Ux +
                               s.sigma * s.rho_zeta * Uy;
    }
    return lam;
}

LambdaProfile compute_lambda_profile_xz(const ValueField& U_hat, const ModelSpec& spec,
                                        double alpha, const FreeBoundaries& fb,
                                        const std::vector<double>& y_nodes) {
    require_in_gap(alpha, fb);
    const Grid2D& g = U_hat.grid;
    const int ia = snap_to_x_node(g, alpha);
    const double a = g.x_nodes[ia];
    const double sigma = spec.param("sigma");
    const double gamma = spec.param("gamma");

    LambdaProfile lam;
    lam.alpha = a;
    lam.model = spec.kind;
    lam.y_nodes = y_nodes;
    lam.lambda_values.resize(y_nodes.size());
    for (size_t j = 0; j < y_nodes.size(); ++j) {
        const double y = y_nodes[j];
        const double z = z_of_xy(spec, a, y);
        const double Uhx = (U_hat.interpolate(a + g.h_x, z) -
                            U_hat.interpolate(a - g.h_x, z)) / (2.0 * g.h_x);
        const double Uhz = (U_hat.interpolate(a, z + g.h_y) -
                            U_hat.interpolate(a, z - g.h_y)) / (2.0 * g.h_y);
        // chain rule through Psi: U_x = U^_x - U^_z, U_y = (sigma/gamma) U^_z / (y(1-y))
        const double Ux = Uhx - Uhz;
        const double Uy = (sigma / gamma) * Uhz / (y * (1.0 - y));
        const double Uval = U_hat.interpolate(a, z);
        const auto s = eval_coefficients(spec, a, y);
        lam.lambda_values[j] = s.c + Uval * s.b + 0.5 * s.sigma * s.sigma * Ux +
                               s.sigma * s.rho_zeta * Uy;
    }
    return lam;
}

HJBResidualReport hjb_residual(const PseudoPotential& P, const LambdaProfile& lam,
                               const ModelSpec& spec, const Grid2D& grid) {
    AssemblyOptions opts;
    opts.allow_degenerate_cross = true;
    const DiscreteOperator op =
        assemble_generator(spec, grid, Scheme::EllipticNinePoint, opts);
    std::vector<double> LV;
    op.apply(P.V.values, LV, /*include_zeroth=*/false);

    HJBResidualReport rep;
    for (int j = 1; j + 1 < grid.ny(); ++j) {
        const double lambda_j = lam.lambda_values[j];
        for (int i = 1; i + 1 < grid.nx(); ++i) {
            const int idx = grid.index(i, j);
            const double x = grid.x_nodes[i], y = grid.y_nodes[j];
            const double pde = LV[idx] + spec.c(x, y) - lambda_j;
            const double Vx =
                (P.V.at(i + 1, j) - P.V.at(i - 1, j)) / (2.0 * grid.h_x);
            const double grad_minus = spec.K_minus - Vx;
            const double grad_plus = Vx + spec.K_plus;
            const double m = std::min({pde, grad_minus, grad_plus});
            rep.min_defect = std::max(rep.min_defect, std::abs(m));
            if (m == pde)
                rep.continuation = std::max(rep.continuation, std::abs(pde));
            else if (m == grad_minus)
                rep.contact_minus = std::max(rep.contact_minus, std::abs(grad_minus));
            else
                rep.contact_plus = std::max(rep.contact_plus, std::abs(grad_plus));
        }
    }
    return rep;
}

AlphaInvarianceReport check_alpha_invariance(const ValueField& U, const ModelSpec& spec,
                                             double alpha1, double alpha2,
                                             const Density& pinf,
                                             const FreeBoundaries& fb) {
    const Grid2D& g = U.grid;
    const LambdaProfile l1 = compute_lambda_profile(U, spec, alpha1, fb);
    const LambdaProfile l2 = compute_lambda_profile(U, spec, alpha2, fb);

    AlphaInvarianceReport rep;
    rep.lambda_star_1 = ergodic_value(l1, pinf);
    rep.lambda_star_2 = ergodic_value(l2, pinf);
    rep.delta_star = std::abs(rep.lambda_star_1 - rep.lambda_star_2);

    int i1 = snap_to_x_node(g, alpha1);
    int i2 = snap_to_x_node(g, alpha2);
    const double sign = (i2 >= i1) ? 1.0 : -1.0;
    if (i2 < i1) std::swap(i1, i2);

    // identity: lambda(y;a2) - lambda(y;a1) = -int_{a1}^{a2} (eta U_y + 1/2 zeta^2 U_yy) dx
    // checked away from the y-extremes where U_yy uses extrapolated rows
    for (int j = 2; j + 2 < g.ny(); ++j) {
        const double y = g.y_nodes[j];
        const double eta = spec.eta(y), zeta = spec.zeta(y);
        std::vector<double> f(i2 - i1 + 1);
        for (int i = i1; i <= i2; ++i) {
            const double Uy = (U.at(i, j + 1) - U.at(i, j - 1)) / (2.0 * g.h_y);
            const double Uyy = (U.at(i, j + 1) - 2.0 * U.at(i, j) + U.at(i, j - 1)) /
                               (g.h_y * g.h_y);
            f[i - i1] = eta * Uy + 0.5 * zeta * zeta * Uyy;
        }
        double integral = 0.0;
        for (size_t k = 0; k + 1 < f.size(); ++k)
            integral += 0.5 * (f[k] + f[k + 1]) * g.h_x;
        integral *= sign;
        const double err =
            std::abs(l2.lambda_values[j] - l1.lambda_values[j] + integral);
        rep.pointwise_identity_err = std::max(rep.pointwise_identity_err, err);
    }
    return rep;
}

double check_degenerate_relation(const ModelSpec& spec, const FreeBoundaries& fb,
                                 double y) {
    const double am = fb.eval_minus(y);
    const double ap = fb.eval_plus(y);
    const double lhs = spec.c(am, y) + spec.K_minus * spec.b(am, y);
    const double rhs = spec.c(ap, y) - spec.K_plus * spec.b(ap, y);
    return std::abs(lhs - rhs);
}

} // namespace ergctl
