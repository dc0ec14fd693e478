#include "gpbound/domain.hpp"

#include <cmath>
#include <stdexcept>

namespace gpbound {

Domain::Domain(Eigen::VectorXd lower, Eigen::VectorXd upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) {
    throw std::invalid_argument("domain: lower and upper bounds differ in size");
  }
  if (lower_.size() == 0) {
    throw std::invalid_argument("domain: dimension must be positive");
  }
  if (!lower_.allFinite() || !upper_.allFinite()) {
    throw std::invalid_argument("domain: bounds must be finite");
  }
  for (int i = 0; i < lower_.size(); ++i) {
    if (!(lower_[i] < upper_[i])) {
      throw std::invalid_argument("domain: lower bound must be strictly below upper bound in every dimension");
    }
  }
}

double Domain::diameter() const { return widths().norm(); }

bool Domain::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != lower_.size()) return false;
  for (int i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lower_[i] && x[i] <= upper_[i])) return false;
  }
  return true;
}

Eigen::VectorXd Domain::project(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != lower_.size()) {
    throw std::invalid_argument("domain: point dimension mismatch in project");
  }
  return x.cwiseMax(lower_).cwiseMin(upper_);
}

Domain Domain::cube(double lower, double upper, int dimension) {
  if (dimension <= 0) {
    throw std::invalid_argument("domain: dimension must be positive");
  }
  return Domain(Eigen::VectorXd::Constant(dimension, lower),
                Eigen::VectorXd::Constant(dimension, upper));
}

}  // namespace gpbound
