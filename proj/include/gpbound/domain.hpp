#pragma once

#include <Eigen/Core>

namespace gpbound {

// Axis-aligned box, the region every certificate is issued over.
class Domain {
 public:
  Domain() = default;
  Domain(Eigen::VectorXd lower, Eigen::VectorXd upper);

  int dimension() const { return static_cast<int>(lower_.size()); }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  Eigen::VectorXd widths() const { return upper_ - lower_; }

  // Euclidean diameter, i.e. the length of the main diagonal.
  double diameter() const;

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  // Componentwise clamp of x onto the box.
  Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  static Domain cube(double lower, double upper, int dimension);

 private:
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

}  // namespace gpbound
