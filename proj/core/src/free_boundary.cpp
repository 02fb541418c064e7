#include "ergctl/free_boundary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ergctl {

namespace {

double interp_on(const std::vector<double>& ys, const std::vector<double>& a,
                 double y, bool* extrapolated) {
    if (extrapolated) *extrapolated = false;
    if (y <= ys.front()) {
        if (extrapolated) *extrapolated = y < ys.front();
        return a.front();
    }
    if (y >= ys.back()) {
        if (extrapolated) *extrapolated = y > ys.back();
        return a.back();
    }
    auto it = std::upper_bound(ys.begin(), ys.end(), y);
    const int j = static_cast<int>(it - ys.begin()) - 1;
    const double t = (y - ys[j]) / (ys[j + 1] - ys[j]);
    return (1.0 - t) * a[j] + t * a[j + 1];
}

} // namespace

double FreeBoundaries::eval_plus(double y, bool* extrapolated) const {
    return interp_on(y_nodes, a_plus, y, extrapolated);
}

double FreeBoundaries::eval_minus(double y, bool* extrapolated) const {
    return interp_on(y_nodes, a_minus, y, extrapolated);
}

FreeBoundaries extract_boundaries(const ValueField& U, const ModelSpec& spec) {
    const Grid2D& g = U.grid;
    const double eps_c = 1e-6 * (spec.K_plus + spec.K_minus);
    const double lower = -spec.K_plus + eps_c;
    const double upper = spec.K_minus - eps_c;

    FreeBoundaries fb;
    fb.y_nodes = g.y_nodes;
    fb.a_plus.resize(g.ny());
    fb.a_minus.resize(g.ny());
    std::vector<int> truncated;

    for (int j = 0; j < g.ny(); ++j) {
        // a_plus: rightmost crossing of the lower obstacle level
        if (U.at(0, j) > lower || U.at(g.nx() - 1, j) < upper) {
            truncated.push_back(j);
            continue;
        }
        int ip = 0;
        while (ip + 1 < g.nx() && U.at(ip + 1, j) <= lower) ++ip;
        {
            const double u0 = U.at(ip, j), u1 = U.at(ip + 1, j);
            const double t = (u1 > u0) ? (lower - u0) / (u1 - u0) : 0.0;
            fb.a_plus[j] = g.x_nodes[ip] + std::clamp(t, 0.0, 1.0) * g.h_x;
        }
        // a_minus: leftmost crossing of the upper obstacle level
        int im = g.nx() - 1;
        while (im > 0 && U.at(im - 1, j) >= upper) --im;
        {
            const double u0 = U.at(im - 1, j), u1 = U.at(im, j);
            const double t = (u1 > u0) ? (upper - u0) / (u1 - u0) : 1.0;
            fb.a_minus[j] = g.x_nodes[im - 1] + std::clamp(t, 0.0, 1.0) * g.h_x;
        }
    }

    if (!truncated.empty()) {
        std::ostringstream os;
        os << "x-grid misses a contact set in " << truncated.size()
           << " rows (first row j=" << truncated.front()
           << ", y=" << g.y_nodes[truncated.front()] << "); widen the x-domain";
        throw DomainTooSmall(os.str());
    }

    fb.sup_a_plus = *std::max_element(fb.a_plus.begin(), fb.a_plus.end());
    fb.inf_a_minus = *std::min_element(fb.a_minus.begin(), fb.a_minus.end());
    return fb;
}

HypothesisReport check_hypothesis(const FreeBoundaries& fb, const ModelSpec& spec,
                                  const Grid2D& grid) {
    HypothesisReport rep;

    for (int j = 0; j < static_cast<int>(fb.y_nodes.size()); ++j) {
        const double gap = fb.a_minus[j] - fb.a_plus[j];
        if (gap <= 0 && (rep.separation_ok || gap < rep.separation_worst.margin)) {
            rep.separation_ok = false;
            rep.separation_worst = {j, gap};
        }
    }

    // sign conditions on the two contact regions
    for (int j = 0; j < grid.ny(); ++j) {
        const double y = grid.y_nodes[j];
        const double ap = fb.eval_plus(y), am = fb.eval_minus(y);
        for (int i = 0; i < grid.nx(); ++i) {
            const double x = grid.x_nodes[i];
            if (x >= am) {
                const double v = spec.c_x(x, y) + spec.K_minus * spec.b_x(x, y);
                if (v < 0 && (rep.sign_minus_ok || v < rep.sign_minus_worst.margin)) {
                    rep.sign_minus_ok = false;
                    rep.sign_minus_worst = {j, v};
                }
            }
            if (x <= ap) {
                const double v = spec.c_x(x, y) - spec.K_plus * spec.b_x(x, y);
                if (v > 0 && (rep.sign_plus_ok || v > rep.sign_plus_worst.margin)) {
                    rep.sign_plus_ok = false;
                    rep.sign_plus_worst = {j, v};
                }
            }
        }
    }

    const double h_y =
        fb.y_nodes.size() > 1 ? fb.y_nodes[1] - fb.y_nodes[0] : 1.0;
    const double h_x = grid.h_x;
    const double slack = 1e-6 * h_x;
    (void)h_y;
    for (size_t j = 0; j + 1 < fb.y_nodes.size(); ++j) {
        const double dp = fb.a_plus[j + 1] - fb.a_plus[j];
        const double dm = fb.a_minus[j + 1] - fb.a_minus[j];
        const double worst = std::max(dp, dm);
        if (worst > slack &&
            (rep.monotone_ok || worst > rep.monotone_worst.margin)) {
            rep.monotone_ok = false;
            rep.monotone_worst = {static_cast<int>(j), worst};
        }
    }

    if (spec.c_x_inverse) {
        rep.bounds_checked = true;
        const double ymid = 0.5 * (spec.factor_domain.lo + spec.factor_domain.hi);
        const double delta = -spec.b_x(0.0, ymid);
        const double plus_bound = (*spec.c_x_inverse)(-spec.K_plus * delta);
        const double minus_bound = (*spec.c_x_inverse)(spec.K_minus * delta);
        const double tol = 2.0 * h_x;
        for (int j = 0; j < static_cast<int>(fb.y_nodes.size()); ++j) {
            const double over = std::max(fb.a_plus[j] - (plus_bound + tol),
                                         (minus_bound - tol) - fb.a_minus[j]);
            if (over > 0 && (rep.bounds_ok || over > rep.bounds_worst.margin)) {
                rep.bounds_ok = false;
                rep.bounds_worst = {j, over};
            }
        }
    }

    return rep;
}

double lipschitz_estimate(const FreeBoundaries& fb) {
    double worst = 0.0;
    for (size_t j = 0; j + 1 < fb.y_nodes.size(); ++j) {
        const double h = fb.y_nodes[j + 1] - fb.y_nodes[j];
        worst = std::max(worst, std::abs(fb.a_plus[j + 1] - fb.a_plus[j]) / h);
        worst = std::max(worst, std::abs(fb.a_minus[j + 1] - fb.a_minus[j]) / h);
    }
    return worst;
}

} // namespace ergctl
