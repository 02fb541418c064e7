#pragma once

#include <vector>

#include "ergctl/errors.hpp"

namespace ergctl {

enum class DensityKind { GaussianClosedForm, GridDensity };

struct Density {
    DensityKind kind = DensityKind::GridDensity;
    // GridDensity payload
    std::vector<double> y_nodes;
    std::vector<double> mass; // density values, trapezoid-normalized to 1
    // GaussianClosedForm payload
    double mean = 0.0;
    double variance = 0.0;
    double normalization_error = 0.0;

    double pdf(double y) const; // grid interp (0 outside) or Gaussian formula
};

Density ou_stationary_density(double m, double b, double sigma2);

// Normalized speed-measure density of the filter on (eps_y, 1-eps_y).
Density filter_stationary_density(double lambda1, double lambda2, double gamma,
                                  int n_quad, double eps_y = 1e-3);

struct LambdaProfile; // value_profile.hpp

double ergodic_value(const LambdaProfile& lam, const Density& pinf);

} // namespace ergctl
