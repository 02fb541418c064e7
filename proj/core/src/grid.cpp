#include "ergctl/grid.hpp"

#include <algorithm>
#include <cmath>

namespace ergctl {

Grid2D build_grid(double x_lo, double x_hi, int n_x,
                  double y_lo, double y_hi, int n_y) {
    if (!(x_lo < x_hi)) throw InvalidParameter("build_grid: x_lo must be < x_hi");
    if (!(y_lo < y_hi)) throw InvalidParameter("build_grid: y_lo must be < y_hi");
    if (n_x < 3 || n_y < 3) throw InvalidParameter("build_grid: need at least 3 nodes per axis");

    Grid2D g;
    g.h_x = (x_hi - x_lo) / (n_x - 1);
    g.h_y = (y_hi - y_lo) / (n_y - 1);
    g.x_nodes.resize(n_x);
    g.y_nodes.resize(n_y);
    for (int i = 0; i < n_x; ++i) g.x_nodes[i] = x_lo + i * g.h_x;
    for (int j = 0; j < n_y; ++j) g.y_nodes[j] = y_lo + j * g.h_y;
    g.x_nodes.back() = x_hi;
    g.y_nodes.back() = y_hi;
    return g;
}

double ValueField::interpolate(double x, double y, bool* clamped) const {
    const auto& xs = grid.x_nodes;
    const auto& ys = grid.y_nodes;
    bool out = false;
    if (x < xs.front()) { x = xs.front(); out = true; }
    if (x > xs.back())  { x = xs.back();  out = true; }
    if (y < ys.front()) { y = ys.front(); out = true; }
    if (y > ys.back())  { y = ys.back();  out = true; }
    if (clamped) *clamped = out;

    int i = static_cast<int>((x - xs.front()) / grid.h_x);
    int j = static_cast<int>((y - ys.front()) / grid.h_y);
    i = std::clamp(i, 0, grid.nx() - 2);
    j = std::clamp(j, 0, grid.ny() - 2);
    double tx = (x - xs[i]) / grid.h_x;
    double ty = (y - ys[j]) / grid.h_y;
    tx = std::clamp(tx, 0.0, 1.0);
    ty = std::clamp(ty, 0.0, 1.0);

    double v00 = at(i, j), v10 = at(i + 1, j);
    double v01 = at(i, j + 1), v11 = at(i + 1, j + 1);
    return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 +
           (1 - tx) * ty * v01 + tx * ty * v11;
}

void ValueField::check_finite() const {
    for (double v : values)
        if (!std::isfinite(v))
            throw DomainError("ValueField '" + label + "' contains a non-finite value");
}

} // namespace ergctl
