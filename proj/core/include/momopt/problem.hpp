#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "momopt/feasible_set.hpp"

namespace momopt {

/// An action x in the feasible set; a plain real vector of the problem's
/// dimension d.
using Action = Eigen::VectorXd;

/// One scenario draw xi, flattened to a real vector. Pair-valued scenarios
/// (X, Y) store X in the first d entries and Y last; matrix-valued payloads
/// are column-major vectorized. The owning problem fixes the layout.
using Scenario = Eigen::VectorXd;

/// An ordered i.i.d. sample with its seed lineage. Columns are scenarios.
/// Regenerating from (seed, generator_id, size) is bit-identical.
struct ScenarioSample {
  Eigen::MatrixXd scenarios;  // payload_dim x N
  std::uint64_t seed = 0;
  std::string generator_id;

  Eigen::Index size() const { return scenarios.cols(); }
  Scenario scenario(Eigen::Index i) const { return scenarios.col(i); }

  /// Contiguous sub-sample [begin, begin+count); keeps the seed lineage
  /// with a range annotation.
  ScenarioSample slice(Eigen::Index begin, Eigen::Index count) const;
};

/// Optional exact metadata: the optimum, the Hessian of f at it, the
/// gradient covariance, and (when available) closed forms for f and f*.
struct GroundTruth {
  Action x_star;
  Eigen::MatrixXd hessian;     // H = hess f(x*), symmetric positive definite
  Eigen::MatrixXd grad_cov;    // G = Cov[grad F(x*, xi)]
  double f_star = 0.0;
  std::function<double(const Action&)> objective;  // population f, if closed-form
};

/// Evaluation surface of a convex stochastic optimization problem:
/// F(x, xi), its gradient and Hessian in x, the feasible set, and optional
/// ground truth. Instances are immutable after construction and all
/// callables are pure, so concurrent evaluation is safe.
struct StochasticProblem {
  /// Closed-form empirical-minimizer family, for the SAA dispatch.
  enum class ClosedForm { none, mean, linear_regression, ridge, quadratic };

  int dimension = 0;
  FeasibleSet feasible_set = FeasibleSet::all_of_space();
  std::function<double(const Action&, const Scenario&)> objective;
  std::function<Eigen::VectorXd(const Action&, const Scenario&)> gradient;
  std::function<Eigen::MatrixXd(const Action&, const Scenario&)> hessian;
  std::optional<GroundTruth> ground_truth;

  std::string name;
  ClosedForm closed_form = ClosedForm::none;

  /// Curvature constant c_H >= 1 when a closed form is known (constant
  /// Hessian after normalization gives 1); unset otherwise.
  std::optional<double> c_H;
};

}  // namespace momopt
