#include "gpbound/grid.hpp"

#include <stdexcept>

namespace gpbound {

Eigen::MatrixXd uniform_grid(const Domain& domain, const std::vector<int>& nodes_per_dim) {
  const int d = domain.dimension();
  if (d == 0) {
    throw std::invalid_argument("grid: domain is empty");
  }
  if (static_cast<int>(nodes_per_dim.size()) != d) {
    throw std::invalid_argument("grid: node counts and domain dimension mismatch");
  }
  Eigen::Index total = 1;
  for (const int n : nodes_per_dim) {
    if (n < 1) {
      throw std::invalid_argument("grid: node counts must be positive");
    }
    total *= n;
  }
  Eigen::MatrixXd points(total, d);
  std::vector<int> index(d, 0);
  for (Eigen::Index row = 0; row < total; ++row) {
    for (int i = 0; i < d; ++i) {
      const int n = nodes_per_dim[i];
      const double lo = domain.lower()[i];
      const double hi = domain.upper()[i];
      points(row, i) = n == 1 ? 0.5 * (lo + hi)
                              : lo + (hi - lo) * static_cast<double>(index[i]) / (n - 1);
    }
    int axis = 0;
    while (axis < d && ++index[axis] == nodes_per_dim[axis]) {
      index[axis] = 0;
      ++axis;
    }
  }
  return points;
}

Eigen::MatrixXd uniform_grid(const Domain& domain, int nodes_per_dim) {
  return uniform_grid(domain, std::vector<int>(domain.dimension(), nodes_per_dim));
}

}  // namespace gpbound
