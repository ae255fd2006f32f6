#include "momopt/feasible_set.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace momopt {

FeasibleSet FeasibleSet::all_of_space() {
  FeasibleSet s;
  s.kind_ = Kind::all_of_space;
  return s;
}

FeasibleSet FeasibleSet::box(Eigen::VectorXd lower, Eigen::VectorXd upper) {
  if (lower.size() != upper.size()) {
    throw std::invalid_argument("FeasibleSet::box: bound dimensions differ");
  }
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (lower[i] > upper[i]) {
      throw std::invalid_argument("FeasibleSet::box: lower > upper");
    }
  }
  FeasibleSet s;
  s.kind_ = Kind::box;
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  return s;
}

FeasibleSet FeasibleSet::nonneg_orthant() {
  FeasibleSet s;
  s.kind_ = Kind::nonneg_orthant;
  return s;
}

FeasibleSet FeasibleSet::halfspace_intersection(
    std::vector<std::pair<Eigen::VectorXd, double>> halfspaces) {
  if (halfspaces.empty()) {
    throw std::invalid_argument("halfspace_intersection: empty constraint list");
  }
  for (const auto& [a, b] : halfspaces) {
    if (a.norm() == 0.0) {
      throw std::invalid_argument("halfspace_intersection: zero normal vector");
    }
    (void)b;
  }
  FeasibleSet s;
  s.kind_ = Kind::halfspace_intersection;
  s.halfspaces_ = std::move(halfspaces);
  return s;
}

bool FeasibleSet::contains(const Eigen::VectorXd& x, double tol) const {
  switch (kind_) {
    case Kind::all_of_space:
      return true;
    case Kind::box:
      if (x.size() != lower_.size()) return false;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x[i] < lower_[i] - tol || x[i] > upper_[i] + tol) return false;
      }
      return true;
    case Kind::nonneg_orthant:
      return (x.array() >= -tol).all();
    case Kind::halfspace_intersection:
      for (const auto& [a, b] : halfspaces_) {
        if (a.dot(x) > b + tol * std::max(1.0, a.norm())) return false;
      }
      return true;
  }
  return false;
}

Eigen::VectorXd FeasibleSet::project(const Eigen::VectorXd& x) const {
  switch (kind_) {
    case Kind::all_of_space:
      return x;
    case Kind::box: {
      if (x.size() != lower_.size()) {
        throw std::invalid_argument("FeasibleSet::project: dimension mismatch");
      }
      return x.cwiseMax(lower_).cwiseMin(upper_);
    }
    case Kind::nonneg_orthant:
      return x.cwiseMax(0.0);
    case Kind::halfspace_intersection: {
      // Dykstra's alternating projections; each halfspace projection is
      // closed-form, the correction terms make the limit the true
      // projection onto the intersection (not just a feasible point).
      const int max_sweeps = 1000;
      const double tol = 1e-12 * std::max(1.0, x.norm());
      Eigen::VectorXd y = x;
      std::vector<Eigen::VectorXd> corrections(
          halfspaces_.size(), Eigen::VectorXd::Zero(x.size()));
      for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double moved = 0.0;
        for (std::size_t k = 0; k < halfspaces_.size(); ++k) {
          const auto& [a, b] = halfspaces_[k];
          const Eigen::VectorXd z = y + corrections[k];
          const double viol = a.dot(z) - b;
          Eigen::VectorXd ynew =
              viol > 0.0 ? (z - (viol / a.squaredNorm()) * a).eval() : z;
          corrections[k] = z - ynew;
          moved += (ynew - y).norm();
          y = std::move(ynew);
        }
        if (moved < tol) break;
      }
      return y;
    }
  }
  return x;
}

}  // namespace momopt
