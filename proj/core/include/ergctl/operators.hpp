#pragma once

#include <vector>

#include "ergctl/grid.hpp"
#include "ergctl/model.hpp"

namespace ergctl {

enum class Scheme { EllipticNinePoint, DegenerateXZ };

struct MonotonicityReport {
    int violations = 0;      // nodes with a negative off-diagonal weight
    double worst = 0.0;      // most negative off-diagonal weight seen
};

// Nine-point discrete generator plus a zeroth-order term. Stencil arrays are
// per node (row-major by y then x). Entries referencing off-grid neighbors
// are identically zero by construction, as are the x-boundary columns
// (handled by Dirichlet data in the solver).
struct DiscreteOperator {
    Grid2D grid;
    Scheme scheme = Scheme::EllipticNinePoint;
    std::vector<double> c0;      // center
    std::vector<double> xm, xp;  // (i-1,j), (i+1,j)
    std::vector<double> ym, yp;  // (i,j-1), (i,j+1)
    std::vector<double> dpp, dmm; // (i+1,j+1), (i-1,j-1)
    std::vector<double> dpm, dmp; // (i+1,j-1), (i-1,j+1)
    std::vector<double> zeroth;  // b_x at the node
    MonotonicityReport mono;

    // out = L u (pure generator part); include_zeroth adds zeroth*u.
    void apply(const std::vector<double>& u, std::vector<double>& out,
               bool include_zeroth) const;

    // Generator + zeroth applied at a single node, splitting off the diagonal:
    // returns sum over neighbors (excluding the center); *diag gets
    // c0+zeroth.
    double offdiag_sum(const std::vector<double>& u, int i, int j) const;
    double diagonal(int i, int j) const {
        return c0[grid.index(i, j)] + zeroth[grid.index(i, j)];
    }
};

struct AssemblyOptions {
    // The nine-point scheme refuses |rho| = 1 with zeta not identically 0
    // unless this is set (used by consistency tests and residual evaluation).
    bool allow_degenerate_cross = false;
};

DiscreteOperator assemble_generator(const ModelSpec& spec, const Grid2D& grid,
                                    Scheme scheme, const AssemblyOptions& opts = {});

struct MappedField {
    ValueField field;
    int clamped_nodes = 0;
};

// Resample a field living on an (x,y) grid onto an (x,z) grid through the
// coordinate change of the filtered model, and the inverse direction.
MappedField map_xy_to_xz(const ValueField& field, const ModelSpec& spec,
                         const Grid2D& xz_grid);
MappedField map_xz_to_xy(const ValueField& field, const ModelSpec& spec,
                         const Grid2D& xy_grid);

// Smallest z-interval whose image covers [x_lo,x_hi] x [y_lo,y_hi].
Interval z_range_for(const ModelSpec& spec, double x_lo, double x_hi,
                     double y_lo, double y_hi);

} // namespace ergctl
