#pragma once

#include <string>
#include <vector>

#include "ergctl/free_boundary.hpp"
#include "ergctl/grid.hpp"
#include "ergctl/stationary.hpp"
#include "ergctl/value_profile.hpp"

namespace ergctl {

// All CSV output uses 17 significant digits so round-trips are exact.
std::string format_double(double v);

void write_field_csv(const ValueField& field, const std::string& path);
void write_boundaries_csv(const FreeBoundaries& fb, const std::string& path);
void write_lambda_csv(const LambdaProfile& lam, const std::string& path);
void write_density_csv(const Density& d, const std::vector<double>& y_nodes,
                       const std::string& path);

} // namespace ergctl
