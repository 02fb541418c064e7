#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergctl/errors.hpp"

namespace ergctl {

enum class ModelKind { FilteredInventory, OUInventory, Custom1DFactor, DegenerateNoFactor };

std::string to_string(ModelKind kind);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Quadratic running cost c(x) = weight * (x - target)^2.
struct CostSpec {
    double target = 0.0;
    double weight = 1.0;
};

struct CoefficientSample {
    double b, b_x, sigma, sigma_x, eta, zeta, rho_zeta, c, c_x;
    double hat_drift_x; // b + sigma*sigma_x
    double hat_drift_y; // eta + sigma_x*rho*zeta
};

struct ModelSpec {
    ModelKind kind = ModelKind::Custom1DFactor;
    std::function<double(double, double)> b, b_x, sigma, sigma_x, c, c_x;
    std::function<double(double)> eta, zeta;
    // Inverse of x -> c_x(x, .) when the cost is x-only and strictly convex;
    // absent otherwise (disables the analytic boundary-bound check).
    std::optional<std::function<double(double)>> c_x_inverse;
    double rho = 0.0;
    double K_plus = 1.0;
    double K_minus = 1.0;
    Interval factor_domain;
    std::map<std::string, double> params;

    double param(const std::string& name) const;
};

struct ValidationCheck {
    std::string name;
    bool pass;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    bool overall = true;
};

ModelSpec make_filtered_inventory_model(double m1, double m2, double sigma, double delta,
                                        double lambda1, double lambda2,
                                        double K_plus, double K_minus,
                                        const CostSpec& cost = {},
                                        double eps_y = 1e-3);

ModelSpec make_ou_inventory_model(double m, double b, double delta,
                                  double sigma1, double sigma2, double rho,
                                  double K_plus, double K_minus);

// One-dimensional inventory with the factor frozen at a parameter value:
// b(x,y) = y - delta*x, eta = zeta = 0. Each y-row of a grid is an
// independent copy of the same 1-D problem.
ModelSpec make_degenerate_model(double delta, double sigma,
                                double K_plus, double K_minus,
                                const CostSpec& cost,
                                double y_lo = -1.0, double y_hi = 1.0);

ValidationReport validate_params(const ModelSpec& spec);

CoefficientSample eval_coefficients(const ModelSpec& spec, double x, double y);

ModelSpec model_from_json(const nlohmann::json& j);

// Coordinate change for the filtered model: z = (sigma/gamma) log(y/(1-y)) - x.
double z_of_xy(const ModelSpec& spec, double x, double y);
double y_of_xz(const ModelSpec& spec, double x, double z);

// Drift pair (mu, q) of the filtered model in (x,z) coordinates.
struct XZDrift {
    double mu;
    double q;
};
XZDrift filtered_xz_drift(const ModelSpec& spec, double x, double z);

// Default x-domain half-width suggestion: contains the analytic boundary
// bounds with generous margin.
Interval default_x_domain(const ModelSpec& spec);

} // namespace ergctl
