#include "ergctl/io.hpp"

#include <cstdio>
#include <fstream>

namespace ergctl {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_field_csv(const ValueField& field, const std::string& path) {
    std::ofstream out(path);
    out << "x,y,value\n";
    const Grid2D& g = field.grid;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            out << format_double(g.x_nodes[i]) << ',' << format_double(g.y_nodes[j])
                << ',' << format_double(field.at(i, j)) << '\n';
}

void write_boundaries_csv(const FreeBoundaries& fb, const std::string& path) {
    std::ofstream out(path);
    out << "y,a_plus,a_minus\n";
    for (size_t j = 0; j < fb.y_nodes.size(); ++j)
        out << format_double(fb.y_nodes[j]) << ',' << format_double(fb.a_plus[j])
            << ',' << format_double(fb.a_minus[j]) << '\n';
}

void write_lambda_csv(const LambdaProfile& lam, const std::string& path) {
    std::ofstream out(path);
    out << "y,lambda\n";
    for (size_t j = 0; j < lam.y_nodes.size(); ++j)
        out << format_double(lam.y_nodes[j]) << ','
            << format_double(lam.lambda_values[j]) << '\n';
}

void write_density_csv(const Density& d, const std::vector<double>& y_nodes,
                       const std::string& path) {
    std::ofstream out(path);
    out << "y,p\n";
    if (d.kind == DensityKind::GridDensity) {
        for (size_t j = 0; j < d.y_nodes.size(); ++j)
            out << format_double(d.y_nodes[j]) << ',' << format_double(d.mass[j]) << '\n';
    } else {
        for (double y : y_nodes)
            out << format_double(y) << ',' << format_double(d.pdf(y)) << '\n';
    }
}

} // namespace ergctl
