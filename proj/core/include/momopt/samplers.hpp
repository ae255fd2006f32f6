#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>

#include "momopt/problem.hpp"
#include "momopt/rng.hpp"

namespace momopt {

/// Additive noise W in pair scenarios Y = <X, coef> + W.
struct NoiseSpec {
  enum class Kind { none, gaussian, student_t };
  Kind kind = Kind::none;
  double mean = 0.0;
  double sd = 1.0;      // gaussian
  double dof = 5.0;     // student_t
  double scale = 1.0;   // student_t

  static NoiseSpec none() { return {}; }
  static NoiseSpec gaussian(double mean, double sd);
  static NoiseSpec student_t(double dof, double scale);
};

/// A seeded scenario distribution. Every draw is reproducible from
/// (seed, generator_id, count), and draw(spec, a + b) prefix-matches
/// draw(spec, a) because generation is strictly sequential.
struct DistributionSpec {
  enum class Kind {
    gaussian,
    two_point_adversarial,
    pareto,
    student_t,
    lognormal_returns,
    regression_pair,
    bachelier_pair,
    quadratic_pair,
  };

  Kind kind = Kind::gaussian;
  int dim = 1;
  std::uint64_t seed = 0;

  Eigen::VectorXd mean;  // gaussian / lognormal log-mean
  Eigen::MatrixXd cov;   // gaussian covariance / lognormal sigma_matrix

  double design_N = 0.0;  // two_point_adversarial: the (N, r) the outlier
  double design_r = 0.0;  // magnitude N*r and hit rate 1/(N*r)^2 refer to

  double alpha = 3.0;  // pareto tail index (> 2: finite variance)
  double scale = 1.0;  // pareto minimum

  double dof = 5.0;     // student_t degrees of freedom (> 2)
  double tscale = 1.0;  // student_t scale

  // pair kinds: X ~ *x_component, W ~ noise, Y = <X, coef> + W
  std::shared_ptr<DistributionSpec> x_component;
  Eigen::VectorXd coef;
  NoiseSpec noise;

  // quadratic_pair: scenario = [b ; vec(A)], b ~ N(0, cov);
  // A = base when wishart_degrees == 0, else a Wishart-style average of
  // wishart_degrees outer products with mean `base`.
  Eigen::MatrixXd base;
  int wishart_degrees = 0;

  // ---- constructors --------------------------------------------------
  static DistributionSpec gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov,
                                   std::uint64_t seed);
  static DistributionSpec standard_gaussian(int dim, std::uint64_t seed);
  static DistributionSpec two_point_adversarial(double design_N,
                                                double design_r,
                                                std::uint64_t seed);
  static DistributionSpec pareto(int dim, double alpha, double scale,
                                 std::uint64_t seed);
  static DistributionSpec student_t(int dim, double dof, double scale,
                                    std::uint64_t seed);
  static DistributionSpec lognormal_returns(Eigen::VectorXd mu,
                                            Eigen::MatrixXd sigma_matrix,
                                            std::uint64_t seed);
  static DistributionSpec regression_pair(DistributionSpec x_spec,
                                          Eigen::VectorXd coef,
                                          NoiseSpec noise, std::uint64_t seed);
  /// Bachelier pair: X zero-mean Gaussian with the given covariance,
  /// Y = <X, coef> + W.
  static DistributionSpec bachelier_pair(Eigen::MatrixXd x_cov,
                                         Eigen::VectorXd coef, NoiseSpec noise,
                                         std::uint64_t seed);
  static DistributionSpec quadratic_pair(Eigen::MatrixXd b_cov,
                                         Eigen::MatrixXd a_base,
                                         int wishart_degrees,
                                         std::uint64_t seed);

  /// Length of one flattened scenario vector.
  int payload_dim() const;

  std::string generator_id() const;

  /// Throws std::invalid_argument on out-of-domain parameters.
  void validate() const;
};

/// Draw `count` i.i.d. scenarios. Deterministic under (spec.seed, count);
/// thread-count independent (generation is single-stream sequential).
ScenarioSample draw(const DistributionSpec& spec, Eigen::Index count);

/// Exact probability that exactly one of N adversarial two-point draws is
/// nonzero: N p (1-p)^{N-1} with p = 1/(N r)^2. Requires N r^2 >= 1.
double adversarial_failure_probability(std::size_t N, double r);

/// Companion tail: probability of two or more nonzero draws among N.
double adversarial_two_or_more_probability(std::size_t N, double r);

}  // namespace momopt
