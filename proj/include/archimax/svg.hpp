#pragma once

#include <string>
#include <vector>

#include "archimax/matrix.hpp"
#include "archimax/metrics.hpp"

namespace archimax {

/// Pairwise scatter plots of the columns of `u` (entries in [0,1]).
std::string svg_scatter_matrix(const Matrix& u, const std::vector<std::string>& names, std::size_t max_points = 2000);

/// lambda curves on a shared grid; the first curve's band is drawn as +-2 sd.
std::string svg_lambda_curves(const std::vector<LambdaCurve>& curves, const std::vector<std::string>& labels);

}  // namespace archimax
