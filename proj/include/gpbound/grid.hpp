#pragma once

#include <Eigen/Core>
#include <vector>

#include "gpbound/domain.hpp"

namespace gpbound {

// Uniform inclusive grid over the box; rows are points, the first axis
// varies fastest.  A dimension with a single node is placed at the center.
Eigen::MatrixXd uniform_grid(const Domain& domain, const std::vector<int>& nodes_per_dim);
Eigen::MatrixXd uniform_grid(const Domain& domain, int nodes_per_dim);

}  // namespace gpbound
