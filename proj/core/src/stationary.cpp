#include "ergctl/stationary.hpp"

#include <algorithm>
#include <cmath>

#include "ergctl/value_profile.hpp"

namespace ergctl {

namespace {

constexpr double kPi = 3.14159265358979323846;

double trapezoid(const std::vector<double>& x, const std::vector<double>& f) {
    double acc = 0.0;
    for (size_t k = 0; k + 1 < x.size(); ++k)
        acc += 0.5 * (f[k] + f[k + 1]) * (x[k + 1] - x[k]);
    return acc;
}

double interp_clamped(const std::vector<double>& xs, const std::vector<double>& fs,
                      double x) {
    if (x <= xs.front()) return fs.front();
    if (x >= xs.back()) return fs.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const size_t j = static_cast<size_t>(it - xs.begin()) - 1;
    const double t = (x - xs[j]) / (xs[j + 1] - xs[j]);
    return (1.0 - t) * fs[j] + t * fs[j + 1];
}

// Antiderivative of (lambda2 - (lambda1+lambda2) u) / (u^2 (1-u)^2),
// by partial fractions; real-valued on (0,1).
double speed_exponent_antiderivative(double lambda1, double lambda2, double u) {
    return -lambda2 / (u * (1.0 - u)) - (lambda1 - lambda2) / (1.0 - u) +
           (lambda1 - lambda2) * std::log((1.0 - u) / u);
}

double speed_density(double lambda1, double lambda2, double gamma, double F_half,
                     double x) {
    const double g2 = gamma * gamma;
    const double F = speed_exponent_antiderivative(lambda1, lambda2, x);
    const double expo = 2.0 * (F - F_half) / g2;
    if (expo < -700.0) return 0.0;
    return 2.0 / (g2 * x * x * (1.0 - x) * (1.0 - x)) * std::exp(expo);
}

} // namespace

double Density::pdf(double y) const {
    if (kind == DensityKind::GaussianClosedForm) {
        const double d = y - mean;
        return std::exp(-0.5 * d * d / variance) / std::sqrt(2.0 * kPi * variance);
    }
    if (y < y_nodes.front() || y > y_nodes.back()) return 0.0;
    return interp_clamped(y_nodes, mass, y);
}

Density ou_stationary_density(double m, double b, double sigma2) {
    if (!(b > 0)) throw InvalidParameter("ou_stationary_density: b must be positive");
    if (!(sigma2 > 0)) throw InvalidParameter("ou_stationary_density: sigma2 must be positive");
    Density d;
    d.kind = DensityKind::GaussianClosedForm;
    d.mean = m / b;
    d.variance = sigma2 * sigma2 / (2.0 * b);
    d.normalization_error = 0.0;
    return d;
}

Density filter_stationary_density(double lambda1, double lambda2, double gamma,
                                  int n_quad, double eps_y) {
    if (!(lambda1 > 0 && lambda2 > 0 && gamma > 0))
        throw InvalidParameter("filter_stationary_density: parameters must be positive");
    if (n_quad < 100)
        throw InvalidParameter("filter_stationary_density: n_quad must be >= 100");
    if (!(eps_y > 0 && eps_y < 0.5))
        throw InvalidParameter("filter_stationary_density: eps_y must lie in (0, 0.5)");

    const double F_half = speed_exponent_antiderivative(lambda1, lambda2, 0.5);

    Density d;
    d.kind = DensityKind::GridDensity;
    d.y_nodes.resize(n_quad);
    d.mass.resize(n_quad);
    const double h = (1.0 - 2.0 * eps_y) / (n_quad - 1);
    for (int k = 0; k < n_quad; ++k) {
        d.y_nodes[k] = eps_y + k * h;
        d.mass[k] = speed_density(lambda1, lambda2, gamma, F_half, d.y_nodes[k]);
    }
    const double main_mass = trapezoid(d.y_nodes, d.mass);

    // mass clipped away by the eps_y truncation, resolved on finer tail grids
    auto tail_mass = [&](double lo, double hi) {
        const int n = 400;
        std::vector<double> xs(n), fs(n);
        for (int k = 0; k < n; ++k) {
            xs[k] = lo + (hi - lo) * k / (n - 1);
            fs[k] = speed_density(lambda1, lambda2, gamma, F_half, xs[k]);
        }
        return trapezoid(xs, fs);
    };
    const double clipped =
        tail_mass(eps_y / 100.0, eps_y) + tail_mass(1.0 - eps_y, 1.0 - eps_y / 100.0);
    d.normalization_error = clipped / (main_mass + clipped);
    if (d.normalization_error > 1e-4)
        throw QuadratureFailure("eps_y truncation clips too much stationary mass ("
                                + std::to_string(d.normalization_error) + ")");

    for (double& v : d.mass) v /= main_mass;
    return d;
}

double ergodic_value(const LambdaProfile& lam, const Density& pinf) {
    const std::vector<double>* nodes;
    std::vector<double> weights;
    if (pinf.kind == DensityKind::GridDensity) {
        nodes = &pinf.y_nodes;
        weights = pinf.mass;
    } else {
        nodes = &lam.y_nodes;
        weights.resize(nodes->size());
        for (size_t k = 0; k < nodes->size(); ++k)
            weights[k] = pinf.pdf((*nodes)[k]);
    }
    std::vector<double> integrand(nodes->size());
    for (size_t k = 0; k < nodes->size(); ++k)
        integrand[k] =
            interp_clamped(lam.y_nodes, lam.lambda_values, (*nodes)[k]) * weights[k];
    const double norm = trapezoid(*nodes, weights);
    return trapezoid(*nodes, integrand) / norm;
}

} // namespace ergctl
