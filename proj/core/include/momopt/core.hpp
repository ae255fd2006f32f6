#pragma once

#include <Eigen/Dense>
#include <optional>

#include "momopt/hnorm.hpp"
#include "momopt/problem.hpp"

namespace momopt {

/// Sample-complexity diagnostics of a problem at accuracy r:
///   N_G(r)  = trace(H^{-1} G) / r^2   (Gaussian-benchmark sample size)
///   sigma2  = lambda_max(H^{-1} G)    (variance proxy, high-probability regime)
/// plus optional curvature / norm-equivalence constants.
struct Diagnostics {
  double r = 0.0;
  double N_G = 0.0;
  double sigma2 = 0.0;
  double c_H = 1.0;
  std::optional<double> N_HE;
  std::optional<double> L;
};

/// Where a tournament's (norm, sigma2, c_H) came from. The paper treats the
/// parameters as known; in practice they are exact (ground truth), supplied
/// by the caller, or estimated from a pilot sample.
enum class ParameterTier { exact, user_supplied, empirical };

const char* to_string(ParameterTier tier);

/// N_G(r) and sigma2 from exact ground truth. sigma2 is computed as the
/// largest eigenvalue of the symmetrized H^{-1/2} G H^{-1/2}, which has the
/// same spectrum as H^{-1}G. Throws if ground truth is missing or H is
/// singular, or r <= 0.
Diagnostics compute_diagnostics(const StochasticProblem& problem, double r);

/// Empirical Hessian norm at a pilot action: the sample mean of
/// hess F(pilot, xi_i), floored to positive definite by adding
/// (1e-10 * mean diagonal) * Id when lambda_min falls below that floor.
/// Throws on an all-zero Hessian sample (the norm would be degenerate).
HNorm estimate_hessian_norm(const StochasticProblem& problem,
                            const Action& pilot, const ScenarioSample& sample,
                            double regularization_scale = 1e-10);

/// Central finite differences of F and grad F, used to cross-check the
/// supplied derivatives.
Eigen::VectorXd finite_difference_gradient(const StochasticProblem& problem,
                                           const Action& x, const Scenario& xi,
                                           double step = 1e-5);
Eigen::MatrixXd finite_difference_hessian(const StochasticProblem& problem,
                                          const Action& x, const Scenario& xi,
                                          double step = 1e-5);

}  // namespace momopt
