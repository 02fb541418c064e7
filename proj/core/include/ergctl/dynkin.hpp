#pragma once

#include <optional>
#include <string>

#include "ergctl/grid.hpp"
#include "ergctl/model.hpp"
#include "ergctl/operators.hpp"

namespace ergctl {

enum class SweepOrder { Lexicographic, RedBlack };

struct SolverConfig {
    double tolerance = 1e-8;      // sup-norm of successive iterates, scaled by K_plus+K_minus
    int max_iters = 200000;
    double omega = 1.5;
    SweepOrder sweep = SweepOrder::Lexicographic;
    // When > 0, iterate until comp_residual <= residual_target (checked every
    // `residual_check_every` sweeps) in addition to the delta tolerance.
    double residual_target = 0.0;
    int residual_check_every = 50;
    std::string trace_path; // convergence trace CSV when non-empty
};

struct ResidualReport {
    double comp_residual = 0.0;
    double obstacle_violation = 0.0;
    int iters_used = 0;
};

// Projected SOR for the double-obstacle problem
//   L U + b_x U + c_x = 0 on {-K_plus < U < K_minus},  -K_plus <= U <= K_minus.
// x-extreme columns carry the obstacle Dirichlet data (-K_plus at x_lo,
// K_minus at x_hi). For DegenerateXZ operators the source is c_x(x, y(x,z)).
ValueField solve_dynkin(const DiscreteOperator& op, const ModelSpec& spec,
                        const Grid2D& grid, const SolverConfig& cfg,
                        const ValueField* initial_guess = nullptr,
                        ResidualReport* report = nullptr);

ResidualReport residual(const ValueField& U, const DiscreteOperator& op,
                        const ModelSpec& spec);

// Source term c_x at node (i,j), mapping z back to y for DegenerateXZ grids.
double source_at(const DiscreteOperator& op, const ModelSpec& spec, int i, int j);

} // namespace ergctl
