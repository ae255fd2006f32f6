#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace momopt {

/// Closed convex feasible set with a membership test and an exact (or, for
/// halfspace intersections, iterative) Euclidean projection.
///
/// Supported kinds: the whole space, coordinate boxes, the non-negative
/// orthant, and finite intersections of halfspaces {x : <a,x> <= b}.
class FeasibleSet {
 public:
  enum class Kind { all_of_space, box, nonneg_orthant, halfspace_intersection };

  static FeasibleSet all_of_space();
  static FeasibleSet box(Eigen::VectorXd lower, Eigen::VectorXd upper);
  static FeasibleSet nonneg_orthant();
  static FeasibleSet halfspace_intersection(
      std::vector<std::pair<Eigen::VectorXd, double>> halfspaces);

  Kind kind() const { return kind_; }

  bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const;

  /// Euclidean projection onto the set. Box and orthant projections are
  /// exact clamps; halfspace intersections use Dykstra's algorithm.
  Eigen::VectorXd project(const Eigen::VectorXd& x) const;

  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  const std::vector<std::pair<Eigen::VectorXd, double>>& halfspaces() const {
    return halfspaces_;
  }

 private:
  FeasibleSet() = default;

  Kind kind_ = Kind::all_of_space;
  Eigen::VectorXd lower_, upper_;  // box bounds, may contain +-inf
  std::vector<std::pair<Eigen::VectorXd, double>> halfspaces_;
};

}  // namespace momopt
