#pragma once

#include <string>
#include <vector>

#include "ergctl/errors.hpp"

namespace ergctl {

// Uniform rectangular grid. Node (i,j) sits at (x_nodes[i], y_nodes[j]).
struct Grid2D {
    std::vector<double> x_nodes;
    std::vector<double> y_nodes;
    double h_x = 0.0;
    double h_y = 0.0;

    int nx() const { return static_cast<int>(x_nodes.size()); }
    int ny() const { return static_cast<int>(y_nodes.size()); }
    int size() const { return nx() * ny(); }
    // Row-major by y then x: index = j*nx + i.
    int index(int i, int j) const { return j * nx() + i; }
};

Grid2D build_grid(double x_lo, double x_hi, int n_x,
                  double y_lo, double y_hi, int n_y);

// Scalar function sampled on a grid. Values are stored row-major by y then x.
struct ValueField {
    Grid2D grid;
    std::vector<double> values;
    std::string label;

    ValueField() = default;
    ValueField(Grid2D g, std::string lbl)
        : grid(std::move(g)), values(grid.size(), 0.0), label(std::move(lbl)) {}

    double& at(int i, int j) { return values[grid.index(i, j)]; }
    double at(int i, int j) const { return values[grid.index(i, j)]; }

    // Bilinear interpolation with clamping to the grid rectangle.
    // If clamped is non-null it is set when (x,y) fell outside.
    double interpolate(double x, double y, bool* clamped = nullptr) const;

    void check_finite() const;
};

} // namespace ergctl
