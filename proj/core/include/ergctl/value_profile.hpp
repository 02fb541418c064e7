#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ergctl/free_boundary.hpp"
#include "ergctl/grid.hpp"
#include "ergctl/model.hpp"
#include "ergctl/operators.hpp"
#include "ergctl/stationary.hpp"

namespace ergctl {

struct PseudoPotential {
    ValueField V;
    double alpha = 0.0;       // snapped to the nearest x node
    double snap_distance = 0.0;
};

struct LambdaProfile {
    std::vector<double> y_nodes;
    std::vector<double> lambda_values;
    double alpha = 0.0;
    ModelKind model = ModelKind::Custom1DFactor;
};

struct HJBResidualReport {
    double continuation = 0.0; // sup |L V + c - lambda| on C
    double contact_minus = 0.0; // sup |V_x - K_minus| on S_minus
    double contact_plus = 0.0;  // sup |V_x + K_plus| on S_plus
    double min_defect = 0.0;    // sup |min of the three terms| overall
};

struct AlphaInvarianceReport {
    double delta_star = 0.0;
    double pointwise_identity_err = 0.0;
    double lambda_star_1 = 0.0;
    double lambda_star_2 = 0.0;
};

PseudoPotential build_pseudo_potential(const ValueField& U, double alpha,
                                       const FreeBoundaries& fb);

LambdaProfile compute_lambda_profile(const ValueField& U, const ModelSpec& spec,
                                     double alpha, const FreeBoundaries& fb);

// Filtered-model variant taking derivatives on the (x,z) solution and mapping
// them through the chain rule U_x = U^_x - U^_z, U_y = (sigma/gamma) U^_z / (y(1-y)).
LambdaProfile compute_lambda_profile_xz(const ValueField& U_hat, const ModelSpec& spec,
                                        double alpha, const FreeBoundaries& fb,
                                        const std::vector<double>& y_nodes);

HJBResidualReport hjb_residual(const PseudoPotential& V, const LambdaProfile& lam,
                               const ModelSpec& spec, const Grid2D& grid);

AlphaInvarianceReport check_alpha_invariance(const ValueField& U, const ModelSpec& spec,
                                             double alpha1, double alpha2,
                                             const Density& pinf,
                                             const FreeBoundaries& fb);

// |c(a_-,y) + K_- b(a_-,y) - (c(a_+,y) - K_+ b(a_+,y))| at grid row nearest y.
double check_degenerate_relation(const ModelSpec& spec, const FreeBoundaries& fb,
                                 double y);

} // namespace ergctl
