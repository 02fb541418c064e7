#pragma once

#include <string>
#include <vector>

#include "ergctl/grid.hpp"
#include "ergctl/model.hpp"

namespace ergctl {

struct FreeBoundaries {
    std::vector<double> y_nodes;
    std::vector<double> a_plus;   // lower boundary
    std::vector<double> a_minus;  // upper boundary
    double sup_a_plus = 0.0;
    double inf_a_minus = 0.0;

    // Linear interpolation in y, constant extrapolation beyond the ends.
    // If extrapolated is non-null it is set when y fell outside.
    double eval_plus(double y, bool* extrapolated = nullptr) const;
    double eval_minus(double y, bool* extrapolated = nullptr) const;
};

struct Offender {
    int j = -1;
    double margin = 0.0;
};

struct HypothesisReport {
    bool separation_ok = true;
    bool sign_minus_ok = true;
    bool sign_plus_ok = true;
    bool monotone_ok = true;
    bool bounds_ok = true;
    bool bounds_checked = false; // false when no (c')^{-1} is available
    Offender separation_worst, sign_minus_worst, sign_plus_worst,
        monotone_worst, bounds_worst;
    bool all_ok() const {
        return separation_ok && sign_minus_ok && sign_plus_ok && monotone_ok && bounds_ok;
    }
};

// Per row, a_minus = x where U crosses K_minus - eps_c from below and
// a_plus = crossing of -K_plus + eps_c, by linear interpolation
// (eps_c = 1e-6 (K_plus + K_minus)). Rows where U never reaches an obstacle
// mean the x-grid truncates a contact set.
FreeBoundaries extract_boundaries(const ValueField& U, const ModelSpec& spec);

HypothesisReport check_hypothesis(const FreeBoundaries& fb, const ModelSpec& spec,
                                  const Grid2D& grid);

// max_j |a[j+1]-a[j]| / h_y over both boundaries.
double lipschitz_estimate(const FreeBoundaries& fb);

} // namespace ergctl
