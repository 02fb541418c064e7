#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ergctl/free_boundary.hpp"
#include "ergctl/model.hpp"

namespace ergctl {

enum class Stepper { EulerMaruyama, ExactOUFactor };

struct SimConfig {
    double T = 1000.0;
    double dt = 1e-3;
    int n_paths = 16;
    double burn_in = -1.0; // < 0 means the default of 0.1*T
    std::uint64_t seed = 1;
    Stepper stepper = Stepper::EulerMaruyama;
    int n_threads = 0;     // 0 = hardware concurrency
    // Per-path trace of path 0 at this stride (0 disables).
    int trace_stride = 0;
    std::string trace_path;
};

struct ErgodicEstimate {
    double mean_cost = 0.0;  // per unit time, running + pushes
    double stderr_ = 0.0;
    double running = 0.0;
    double push_plus = 0.0;
    double push_minus = 0.0;
    double band_violation_max = 0.0;
    int paths_used = 0;
    bool extrapolated_band = false;
    // per-path totals, kept for paired comparisons
    std::vector<double> path_costs;
};

ErgodicEstimate simulate_reflected(const ModelSpec& spec, const FreeBoundaries& fb,
                                   double x0, double y0, const SimConfig& cfg);

// Filtered model only: simulates the hidden chain, the observation noise and
// the filter, reflecting X at the band evaluated at the filter state.
ErgodicEstimate simulate_partially_observed(const ModelSpec& spec,
                                            const FreeBoundaries& fb,
                                            double x0, double pi0,
                                            const SimConfig& cfg,
                                            double* chain_occupation = nullptr,
                                            double* filter_mean = nullptr);

struct PolicyComparison {
    std::string label;
    double shift = 0.0;
    ErgodicEstimate estimate;
    double diff_mean = 0.0;   // variant minus baseline, paired per path
    double diff_stderr = 0.0;
};

std::vector<PolicyComparison> compare_policies(const ModelSpec& spec,
                                               const FreeBoundaries& fb,
                                               const std::vector<double>& shifts,
                                               const SimConfig& cfg);

// Occupation histogram of the factor alone (used to cross-check the
// stationary density): bins over [y_lo,y_hi], mass normalized to 1.
std::vector<double> factor_occupation(const ModelSpec& spec, double y0,
                                      const SimConfig& cfg,
                                      double y_lo, double y_hi, int n_bins);

} // namespace ergctl
