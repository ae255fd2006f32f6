#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "momopt/core.hpp"
#include "momopt/problem.hpp"
#include "momopt/samplers.hpp"

namespace momopt {

/// Strictly convex, increasing loss with three continuous derivatives, used
/// by the portfolio objective F(x, xi) = loss(-Y - <X - prices, x>).
///
/// Built-ins: the exponential loss (the exponential-utility case) and the
/// softplus-power family loss(t) = softplus(t)^p, p >= 3, whose polynomial
/// tails keep heavy-tailed scenario sets integrable where exp diverges.
class Loss {
 public:
  enum class Kind { exponential, softplus_power };

  static Loss exponential();
  static Loss softplus_power(double p);

  Kind kind() const { return kind_; }
  double power() const { return p_; }

  double value(double t) const;
  double d1(double t) const;
  double d2(double t) const;
  double d3(double t) const;

  /// True when the third derivative is non-negative and increasing, which
  /// admits the closed-form supremum reduction in the v_K / v_E estimates.
  bool third_derivative_monotone() const {
    return kind_ == Kind::exponential;
  }

  std::string name() const;

 private:
  Loss(Kind kind, double p) : kind_(kind), p_(p) {}
  Kind kind_;
  double p_ = 3.0;
};

/// First two moments of a vector-valued scenario distribution, when they
/// are known in closed form. Throws for pair-valued or unknown-moment specs.
struct ScenarioMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};
ScenarioMoments scenario_moments(const DistributionSpec& spec);

// ---- problem factories ----------------------------------------------------
// Scenario layouts: plain vector xi for mean estimation; [X; Y] for the
// regression and portfolio problems; [b; vec(A)] for the quadratic problem.

/// F(x, xi) = 1/2 |x - xi|_2^2. Hessian is the identity; ground truth
/// x* = proj(E[xi]) is attached whenever the distribution's moments are
/// known in closed form.
StochasticProblem make_mean_estimation(
    const DistributionSpec& spec,
    FeasibleSet feasible_set = FeasibleSet::all_of_space());

/// F(x, (X,Y)) = 1/2 (<X,x> - Y)^2. Ground truth for the well-specified
/// model Y = <X, coef> + W (W independent, centred): x* = coef.
StochasticProblem make_linear_regression(
    const DistributionSpec& pair_spec,
    FeasibleSet feasible_set = FeasibleSet::all_of_space());

/// F(x, (X,Y)) = (<X,x> - Y)^2 + |x|_2^2; deterministic Hessian lower
/// bound 2 Id. Ground truth for Gaussian X.
StochasticProblem make_ridge_regression(
    const DistributionSpec& pair_spec,
    FeasibleSet feasible_set = FeasibleSet::all_of_space());

/// F(x, (b,A)) = <b,x> + 1/2 <Ax,x> on all of R^d; x* = 0 for centred b.
StochasticProblem make_quadratic(const DistributionSpec& quad_spec);

/// Portfolio problem bundle: the generic evaluation surface plus the pieces
/// (loss, prices) the portfolio-specific diagnostics need.
struct PortfolioModel {
  StochasticProblem problem;
  Loss loss = Loss::exponential();
  Eigen::VectorXd prices;
};

/// F(x, (X,Y)) = loss(-Y - <X - prices, x>). Prices are kept explicit and
/// shifted internally (X <- X - prices). Ground truth is attached for the
/// exponential loss in the Bachelier model with Y = <X, coef> + W,
/// Gaussian or zero W, zero prices, and an unconstrained feasible set; the
/// optimum is x* = -coef (so that V at the optimum reduces to -W).
PortfolioModel make_portfolio(
    const DistributionSpec& pair_spec, Loss loss, Eigen::VectorXd prices,
    FeasibleSet feasible_set = FeasibleSet::all_of_space());

// ---- ground-truth / diagnostic operations ---------------------------------

/// Paper-style linear-regression diagnostics for isotropic Gaussian X:
/// sigma_bar2 = E[(<X,x*> - Y)^4]^{1/2}, the L4-L2 constant of X, and the
/// upper bounds sigma2 <= sigma_bar2 L_X^2, N_G(r) <= sigma_bar2 L_X^2 d/r^2.
struct LinRegDiagnostics {
  Action x_star;
  Eigen::MatrixXd hessian;
  double sigma_bar2 = 0.0;
  double L_X = 0.0;
  double sigma2_bound = 0.0;
  double N_G_bound = 0.0;
};
LinRegDiagnostics ground_truth_linreg(const DistributionSpec& pair_spec,
                                      double r);

/// Monte-Carlo estimate of a population constant with its standard error.
/// `diverged` is set when the empirical mean is dominated by a single draw
/// (no stabilisation) or is non-finite; `term` names the offending moment.
struct EstimateWithError {
  double value = 0.0;
  double std_error = 0.0;
  bool diverged = false;
  std::string term;
};

/// The five portfolio constants of the risk analysis, estimated on an
/// independent calibration sample at an optimum estimate:
///   sigma_bar2 = E[(l'(V)^2 / l''(V))^2]^{1/2}
///   v1 = E|V|,  v2 = E[l''(V)^6]^{1/6}
///   vK, vE: third-derivative suprema over the unit ||.||-ball, via the
///   monotone-l''' reduction when available, else random-direction maxima.
struct PortfolioDiagnostics {
  EstimateWithError sigma_bar2, v1, v2, vK, vE;
};
PortfolioDiagnostics portfolio_diagnostics(const PortfolioModel& model,
                                           const Action& x_star_estimate,
                                           const ScenarioSample& sample,
                                           const HNorm& norm,
                                           int num_directions = 32,
                                           std::uint64_t direction_seed = 17);

/// Exact empirical minimizer where a closed form exists (mean, linear and
/// ridge regression, quadratic). Constrained sets get the projected
/// unconstrained solution, flagged; singular normal equations fall back to
/// the least-norm solution, flagged.
struct ClosedFormSolution {
  Action action;
  bool projected = false;
  bool least_norm = false;
};
ClosedFormSolution exact_saa_solution(const StochasticProblem& problem,
                                      const ScenarioSample& sample);

}  // namespace momopt
