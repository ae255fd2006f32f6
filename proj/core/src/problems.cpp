#include "momopt/problems.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace momopt {

namespace {

// numerically stable softplus and logistic
double softplus(double t) {
  if (t > 30.0) return t;
  return std::log1p(std::exp(t));
}
double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double noise_second_moment(const NoiseSpec& noise) {
  switch (noise.kind) {
    case NoiseSpec::Kind::none:
      return 0.0;
    case NoiseSpec::Kind::gaussian:
      return noise.mean * noise.mean + noise.sd * noise.sd;
    case NoiseSpec::Kind::student_t:
      return noise.mean * noise.mean +
             noise.scale * noise.scale * noise.dof / (noise.dof - 2.0);
  }
  return 0.0;
}

bool noise_is_centred(const NoiseSpec& noise) {
  return noise.kind == NoiseSpec::Kind::none || noise.mean == 0.0;
}

}  // namespace

// ---- Loss ------------------------------------------------------------------

Loss Loss::exponential() { return Loss(Kind::exponential, 0.0); }

Loss Loss::softplus_power(double p) {
  if (p < 3.0) {
    throw std::invalid_argument(
        "Loss::softplus_power: need p >= 3 for three continuous derivatives");
  }
  return Loss(Kind::softplus_power, p);
}

double Loss::value(double t) const {
  if (kind_ == Kind::exponential) return std::exp(t);
  return std::pow(softplus(t), p_);
}

double Loss::d1(double t) const {
  if (kind_ == Kind::exponential) return std::exp(t);
  const double u = softplus(t);
  return p_ * std::pow(u, p_ - 1.0) * logistic(t);
}

double Loss::d2(double t) const {
  if (kind_ == Kind::exponential) return std::exp(t);
  const double u = softplus(t);
  const double s = logistic(t);
  const double g = s * (1.0 - s);
  return p_ * (p_ - 1.0) * std::pow(u, p_ - 2.0) * s * s +
         p_ * std::pow(u, p_ - 1.0) * g;
}

double Loss::d3(double t) const {
  if (kind_ == Kind::exponential) return std::exp(t);
  const double u = softplus(t);
  const double s = logistic(t);
  const double g = s * (1.0 - s);
  return p_ * (p_ - 1.0) * (p_ - 2.0) * std::pow(u, p_ - 3.0) * s * s * s +
         3.0 * p_ * (p_ - 1.0) * std::pow(u, p_ - 2.0) * s * g +
         p_ * std::pow(u, p_ - 1.0) * g * (1.0 - 2.0 * s);
}

std::string Loss::name() const {
  if (kind_ == Kind::exponential) return "exponential";
  return "softplus_power(" + std::to_string(p_) + ")";
}

// ---- scenario moments --------------------------------------------------------

ScenarioMoments scenario_moments(const DistributionSpec& spec) {
  const int d = spec.dim;
  ScenarioMoments m;
  switch (spec.kind) {
    case DistributionSpec::Kind::gaussian:
      m.mean = spec.mean;
      m.cov = spec.cov;
      return m;
    case DistributionSpec::Kind::two_point_adversarial:
      // symmetric +-Nr with hit rate 1/(Nr)^2: mean 0, variance 1
      m.mean = Eigen::VectorXd::Zero(1);
      m.cov = Eigen::MatrixXd::Identity(1, 1);
      return m;
    case DistributionSpec::Kind::pareto: {
      const double a = spec.alpha, s = spec.scale;
      const double mu = a * s / (a - 1.0);
      const double var = s * s * a / ((a - 1.0) * (a - 1.0) * (a - 2.0));
      m.mean = Eigen::VectorXd::Constant(d, mu);
      m.cov = var * Eigen::MatrixXd::Identity(d, d);
      return m;
    }
    case DistributionSpec::Kind::student_t: {
      const double var =
          spec.tscale * spec.tscale * spec.dof / (spec.dof - 2.0);
      m.mean = Eigen::VectorXd::Zero(d);
      m.cov = var * Eigen::MatrixXd::Identity(d, d);
      return m;
    }
    case DistributionSpec::Kind::lognormal_returns: {
      m.mean.resize(d);
      m.cov.resize(d, d);
      for (int i = 0; i < d; ++i) {
        m.mean[i] = std::exp(spec.mean[i] + 0.5 * spec.cov(i, i));
      }
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
          m.cov(i, j) = m.mean[i] * m.mean[j] * std::expm1(spec.cov(i, j));
        }
      }
      return m;
    }
    default:
      throw std::invalid_argument(
          "scenario_moments: moments unknown for this distribution kind");
  }
}

// ---- mean estimation ---------------------------------------------------------

StochasticProblem make_mean_estimation(const DistributionSpec& spec,
                                       FeasibleSet feasible_set) {
  const int d = spec.payload_dim();
  StochasticProblem p;
  p.dimension = d;
  p.feasible_set = std::move(feasible_set);
  p.name = "mean_estimation";
  p.closed_form = StochasticProblem::ClosedForm::mean;
  p.c_H = 1.0;
  p.objective = [](const Action& x, const Scenario& xi) {
    return 0.5 * (x - xi).squaredNorm();
  };
  p.gradient = [](const Action& x, const Scenario& xi) {
    return Eigen::VectorXd(x - xi);
  };
  p.hessian = [d](const Action&, const Scenario&) {
    return Eigen::MatrixXd(Eigen::MatrixXd::Identity(d, d));
  };

  try {
    const ScenarioMoments m = scenario_moments(spec);
    GroundTruth gt;
    gt.x_star = p.feasible_set.project(m.mean);
    gt.hessian = Eigen::MatrixXd::Identity(d, d);
    gt.grad_cov = m.cov;
    const double tr = m.cov.trace();
    const Eigen::VectorXd mu = m.mean;
    gt.objective = [mu, tr](const Action& x) {
      return 0.5 * ((x - mu).squaredNorm() + tr);
    };
    gt.f_star = gt.objective(gt.x_star);
    p.ground_truth = std::move(gt);
  } catch (const std::invalid_argument&) {
    // moments unknown; problem stays usable without ground truth
  }
  return p;
}

// ---- linear regression ---------------------------------------------------------

namespace {

void require_pair(const DistributionSpec& spec, const char* who) {
  if (spec.kind != DistributionSpec::Kind::regression_pair &&
      spec.kind != DistributionSpec::Kind::bachelier_pair) {
    throw std::invalid_argument(std::string(who) +
                                ": needs a (X, Y) pair distribution");
  }
}

}  // namespace

StochasticProblem make_linear_regression(const DistributionSpec& pair_spec,
                                         FeasibleSet feasible_set) {
  require_pair(pair_spec, "make_linear_regression");
  const int d = pair_spec.dim;
  StochasticProblem p;
  p.dimension = d;
  p.feasible_set = std::move(feasible_set);
  p.name = "linear_regression";
  p.closed_form = StochasticProblem::ClosedForm::linear_regression;
  p.c_H = 1.0;
  p.objective = [d](const Action& x, const Scenario& xi) {
    const double res = xi.head(d).dot(x) - xi[d];
    return 0.5 * res * res;
  };
  p.gradient = [d](const Action& x, const Scenario& xi) {
    const double res = xi.head(d).dot(x) - xi[d];
    return Eigen::VectorXd(res * xi.head(d));
  };
  p.hessian = [d](const Action&, const Scenario& xi) {
    return Eigen::MatrixXd(xi.head(d) * xi.head(d).transpose());
  };

  // well-specified Y = <X, coef> + W with centred W: x* = coef
  if (noise_is_centred(pair_spec.noise)) {
    try {
      const ScenarioMoments mx = scenario_moments(*pair_spec.x_component);
      if (p.feasible_set.contains(pair_spec.coef)) {
        const Eigen::MatrixXd second =
            mx.cov + mx.mean * mx.mean.transpose();  // E[X X^T]
        const double w2 = noise_second_moment(pair_spec.noise);
        GroundTruth gt;
        gt.x_star = pair_spec.coef;
        gt.hessian = second;
        gt.grad_cov = w2 * second;
        const Eigen::VectorXd coef = pair_spec.coef;
        gt.objective = [second, coef, w2](const Action& x) {
          const Eigen::VectorXd delta = x - coef;
          return 0.5 * (delta.dot(second * delta) + w2);
        };
        gt.f_star = 0.5 * w2;
        p.ground_truth = std::move(gt);
      }
    } catch (const std::invalid_argument&) {
    }
  }
  return p;
}

LinRegDiagnostics ground_truth_linreg(const DistributionSpec& pair_spec,
                                      double r) {
  require_pair(pair_spec, "ground_truth_linreg");
  if (r <= 0.0) {
    throw std::invalid_argument("ground_truth_linreg: r must be > 0");
  }
  const auto& xs = *pair_spec.x_component;
  if (xs.kind != DistributionSpec::Kind::gaussian) {
    throw std::invalid_argument(
        "ground_truth_linreg: closed-form bounds need Gaussian X");
  }
  const int d = pair_spec.dim;
  if (xs.mean.norm() != 0.0 ||
      !xs.cov.isApprox(Eigen::MatrixXd::Identity(d, d), 1e-12)) {
    throw std::invalid_argument(
        "ground_truth_linreg: X is not centred isotropic");
  }

  // sigma_bar2 = sqrt(E[W^4])
  double sigma_bar2 = 0.0;
  const auto& noise = pair_spec.noise;
  switch (noise.kind) {
    case NoiseSpec::Kind::none:
      sigma_bar2 = 0.0;
      break;
    case NoiseSpec::Kind::gaussian:
      if (noise.mean != 0.0) {
        throw std::invalid_argument("ground_truth_linreg: W must be centred");
      }
      sigma_bar2 = std::sqrt(3.0) * noise.sd * noise.sd;
      break;
    case NoiseSpec::Kind::student_t: {
      if (noise.mean != 0.0) {
        throw std::invalid_argument("ground_truth_linreg: W must be centred");
      }
      const double nu = noise.dof;
      if (nu <= 4.0) {
        throw std::invalid_argument(
            "ground_truth_linreg: E[W^4] infinite for dof <= 4");
      }
      sigma_bar2 = noise.scale * noise.scale *
                   std::sqrt(3.0 * nu * nu / ((nu - 2.0) * (nu - 4.0)));
      break;
    }
  }

  LinRegDiagnostics out;
  out.x_star = pair_spec.coef;
  out.hessian = Eigen::MatrixXd::Identity(d, d);
  out.sigma_bar2 = sigma_bar2;
  out.L_X = std::pow(3.0, 0.25);  // Gaussian L4-L2 constant
  out.sigma2_bound = sigma_bar2 * out.L_X * out.L_X;
  out.N_G_bound = out.sigma2_bound * d / (r * r);
  return out;
}

// ---- ridge regression ----------------------------------------------------------

StochasticProblem make_ridge_regression(const DistributionSpec& pair_spec,
                                        FeasibleSet feasible_set) {
  require_pair(pair_spec, "make_ridge_regression");
  const int d = pair_spec.dim;
  StochasticProblem p;
  p.dimension = d;
  p.feasible_set = std::move(feasible_set);
  p.name = "ridge_regression";
  p.closed_form = StochasticProblem::ClosedForm::ridge;
  p.c_H = 1.0;
  p.objective = [d](const Action& x, const Scenario& xi) {
    const double res = xi.head(d).dot(x) - xi[d];
    return res * res + x.squaredNorm();
  };
  p.gradient = [d](const Action& x, const Scenario& xi) {
    const double res = xi.head(d).dot(x) - xi[d];
    return Eigen::VectorXd(2.0 * res * xi.head(d) + 2.0 * x);
  };
  p.hessian = [d](const Action&, const Scenario& xi) {
    return Eigen::MatrixXd(2.0 * xi.head(d) * xi.head(d).transpose() +
                           2.0 * Eigen::MatrixXd::Identity(d, d));
  };

  // closed-form ground truth for centred Gaussian X (Isserlis moments)
  const auto& xs = *pair_spec.x_component;
  const bool gaussian_centred_x =
      xs.kind == DistributionSpec::Kind::gaussian && xs.mean.norm() == 0.0;
  const bool noise_ok = noise_is_centred(pair_spec.noise) &&
                        pair_spec.noise.kind != NoiseSpec::Kind::student_t;
  if (gaussian_centred_x && noise_ok) {
    const Eigen::MatrixXd sigma = xs.cov;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
    const Eigen::VectorXd coef = pair_spec.coef;
    const Eigen::VectorXd x_star = (sigma + id).ldlt().solve(sigma * coef);
    if (p.feasible_set.contains(x_star)) {
      const Eigen::VectorXd a = x_star - coef;
      const double w2 = noise_second_moment(pair_spec.noise);
      GroundTruth gt;
      gt.x_star = x_star;
      gt.hessian = 2.0 * sigma + 2.0 * id;
      const Eigen::VectorXd sa = sigma * a;
      gt.grad_cov =
          4.0 * ((a.dot(sa) + w2) * sigma + sa * sa.transpose());
      gt.objective = [sigma, coef, w2](const Action& x) {
        const Eigen::VectorXd delta = x - coef;
        return delta.dot(sigma * delta) + w2 + x.squaredNorm();
      };
      gt.f_star = gt.objective(x_star);
      p.ground_truth = std::move(gt);
    }
  }
  return p;
}

// ---- quadratic ----------------------------------------------------------------

StochasticProblem make_quadratic(const DistributionSpec& quad_spec) {
  if (quad_spec.kind != DistributionSpec::Kind::quadratic_pair) {
    throw std::invalid_argument("make_quadratic: needs a quadratic_pair spec");
  }
  const int d = quad_spec.dim;
  StochasticProblem p;
  p.dimension = d;
  p.feasible_set = FeasibleSet::all_of_space();
  p.name = "quadratic";
  p.closed_form = StochasticProblem::ClosedForm::quadratic;
  p.c_H = 1.0;

  auto mat_of = [d](const Scenario& xi) {
    return Eigen::Map<const Eigen::MatrixXd>(xi.data() + d, d, d);
  };
  p.objective = [d, mat_of](const Action& x, const Scenario& xi) {
    return xi.head(d).dot(x) + 0.5 * x.dot(mat_of(xi) * x);
  };
  p.gradient = [d, mat_of](const Action& x, const Scenario& xi) {
    return Eigen::VectorXd(xi.head(d) + mat_of(xi) * x);
  };
  p.hessian = [mat_of](const Action&, const Scenario& xi) {
    return Eigen::MatrixXd(mat_of(xi));
  };

  GroundTruth gt;
  gt.x_star = Eigen::VectorXd::Zero(d);
  gt.hessian = quad_spec.base;
  gt.grad_cov = quad_spec.cov;
  const Eigen::MatrixXd base = quad_spec.base;
  gt.objective = [base](const Action& x) { return 0.5 * x.dot(base * x); };
  gt.f_star = 0.0;
  p.ground_truth = std::move(gt);
  return p;
}

// ---- portfolio ------------------------------------------------------------------

PortfolioModel make_portfolio(const DistributionSpec& pair_spec, Loss loss,
                              Eigen::VectorXd prices,
                              FeasibleSet feasible_set) {
  require_pair(pair_spec, "make_portfolio");
  const int d = pair_spec.dim;
  if (prices.size() == 0) prices = Eigen::VectorXd::Zero(d);
  if (prices.size() != d) {
    throw std::invalid_argument("make_portfolio: prices dimension mismatch");
  }

  PortfolioModel model;
  model.loss = loss;
  model.prices = prices;

  StochasticProblem& p = model.problem;
  p.dimension = d;
  p.feasible_set = std::move(feasible_set);
  p.name = "portfolio(" + loss.name() + ")";
  p.closed_form = StochasticProblem::ClosedForm::none;

  const Eigen::VectorXd pi = prices;
  p.objective = [d, loss, pi](const Action& x, const Scenario& xi) {
    const double v = -xi[d] - (xi.head(d) - pi).dot(x);
    return loss.value(v);
  };
  p.gradient = [d, loss, pi](const Action& x, const Scenario& xi) {
    const Eigen::VectorXd xs = xi.head(d) - pi;
    const double v = -xi[d] - xs.dot(x);
    return Eigen::VectorXd(-loss.d1(v) * xs);
  };
  p.hessian = [d, loss, pi](const Action& x, const Scenario& xi) {
    const Eigen::VectorXd xs = xi.head(d) - pi;
    const double v = -xi[d] - xs.dot(x);
    return Eigen::MatrixXd(loss.d2(v) * xs * xs.transpose());
  };

  // Exponential loss in the Bachelier model with linear Y: the optimum is
  // x* = -coef (then V at the optimum is -W, independent of X) and
  // f(x) = E[exp(-W)] exp((x + coef)^T Sigma (x + coef) / 2).
  const bool exp_loss = loss.kind() == Loss::Kind::exponential;
  const bool bachelier =
      pair_spec.kind == DistributionSpec::Kind::bachelier_pair;
  const bool gaussian_or_zero_w =
      pair_spec.noise.kind != NoiseSpec::Kind::student_t;
  const bool unconstrained =
      p.feasible_set.kind() == FeasibleSet::Kind::all_of_space;
  if (exp_loss && bachelier && gaussian_or_zero_w && unconstrained &&
      prices.norm() == 0.0) {
    double c1 = 1.0, c2 = 1.0;  // E[exp(-W)], E[exp(-2W)]
    if (pair_spec.noise.kind == NoiseSpec::Kind::gaussian) {
      const double m = pair_spec.noise.mean, s = pair_spec.noise.sd;
      c1 = std::exp(-m + 0.5 * s * s);
      c2 = std::exp(-2.0 * m + 2.0 * s * s);
    }
    const Eigen::MatrixXd sigma = pair_spec.x_component->cov;
    const Eigen::VectorXd coef = pair_spec.coef;
    GroundTruth gt;
    gt.x_star = -coef;
    gt.hessian = c1 * sigma;
    gt.grad_cov = c2 * sigma;
    gt.objective = [c1, sigma, coef](const Action& x) {
      const Eigen::VectorXd t = x + coef;
      return c1 * std::exp(0.5 * t.dot(sigma * t));
    };
    gt.f_star = c1;
    p.ground_truth = std::move(gt);
  }
  return model;
}

// ---- portfolio diagnostics --------------------------------------------------------

namespace {

/// (mean of g)^pow with a delta-method standard error and a dominance test:
/// when one draw carries most of the mass the mean has not stabilised.
EstimateWithError power_mean_estimate(const Eigen::VectorXd& g, double pow,
                                      std::string term) {
  EstimateWithError e;
  e.term = std::move(term);
  const double M = static_cast<double>(g.size());
  const double mean = g.mean();
  const double sd = M > 1 ? std::sqrt((g.array() - mean).square().sum() / (M - 1.0))
                          : 0.0;
  e.value = std::pow(mean, pow);
  e.std_error = mean > 0.0
                    ? std::abs(pow) * std::pow(mean, pow - 1.0) * sd / std::sqrt(M)
                    : 0.0;
  const double max_term = g.maxCoeff();
  const double total = g.sum();
  e.diverged = !std::isfinite(e.value) ||
               (g.size() >= 16 && total > 0.0 && max_term > 0.5 * total);
  return e;
}

}  // namespace

PortfolioDiagnostics portfolio_diagnostics(const PortfolioModel& model,
                                           const Action& x_star_estimate,
                                           const ScenarioSample& sample,
                                           const HNorm& norm,
                                           int num_directions,
                                           std::uint64_t direction_seed) {
  const int d = model.problem.dimension;
  const Eigen::Index M = sample.size();
  if (M == 0) {
    throw std::invalid_argument("portfolio_diagnostics: empty sample");
  }
  const Loss& loss = model.loss;

  Eigen::VectorXd v(M), dual(M);
  Eigen::MatrixXd xs(d, M);  // price-shifted X columns
  for (Eigen::Index i = 0; i < M; ++i) {
    const Scenario xi = sample.scenario(i);
    xs.col(i) = xi.head(d) - model.prices;
    v[i] = -xi[d] - xs.col(i).dot(x_star_estimate);
    dual[i] = norm.dual_norm(xs.col(i));
  }

  PortfolioDiagnostics out;

  Eigen::VectorXd g(M);
  for (Eigen::Index i = 0; i < M; ++i) {
    const double l1 = loss.d1(v[i]);
    g[i] = std::pow(l1 * l1 / loss.d2(v[i]), 2.0);
  }
  out.sigma_bar2 = power_mean_estimate(g, 0.5, "E[(l'(V)^2/l''(V))^2]");

  out.v1 = power_mean_estimate(v.cwiseAbs(), 1.0, "E|V|");

  for (Eigen::Index i = 0; i < M; ++i) g[i] = std::pow(loss.d2(v[i]), 6.0);
  out.v2 = power_mean_estimate(g, 1.0 / 6.0, "E[l''(V)^6]");

  // unit directions of the ||.||-ball for the supremum estimates
  const int K = std::max(1, num_directions);
  Rng rng(direction_seed);
  std::vector<Eigen::VectorXd> dirs;
  dirs.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    Eigen::VectorXd z(d);
    for (int i = 0; i < d; ++i) z[i] = rng.normal();
    const double nz = norm.norm(z);
    dirs.push_back(nz > 0.0 ? (z / nz).eval() : z);
  }

  if (loss.third_derivative_monotone()) {
    // sup over the unit ball of l'''(V_x) = l'''(V + ||X||_*)
    for (Eigen::Index i = 0; i < M; ++i) {
      g[i] = std::pow(loss.d3(v[i] + dual[i]), 2.0);
    }
    out.vK = power_mean_estimate(g, 0.5, "E[sup l'''(V_x)^2]");

    EstimateWithError best;
    for (const auto& dir : dirs) {
      for (Eigen::Index i = 0; i < M; ++i) {
        g[i] = std::pow(loss.d3(v[i] + std::abs(xs.col(i).dot(dir))), 2.0);
      }
      auto est = power_mean_estimate(g, 0.5, "sup_x E[sup_t l'''(V)^2]");
      if (est.value >= best.value || est.diverged) best = est;
      if (best.diverged) break;
    }
    out.vE = best;
  } else {
    // random-direction maxima with a t-grid along each segment
    const int T = 9;
    for (Eigen::Index i = 0; i < M; ++i) {
      double worst = 0.0;
      for (const auto& dir : dirs) {
        const double step = xs.col(i).dot(dir);
        // V over the ball spans [v - |step|, v + |step|]; scan it
        for (int t = -(T - 1); t < T; ++t) {
          const double tt = static_cast<double>(t) / (T - 1);
          worst = std::max(worst, std::pow(loss.d3(v[i] - tt * step), 2.0));
        }
      }
      g[i] = worst;
    }
    out.vK = power_mean_estimate(g, 0.5, "E[sup l'''(V_x)^2]");

    EstimateWithError best;
    for (const auto& dir : dirs) {
      for (Eigen::Index i = 0; i < M; ++i) {
        const double step = xs.col(i).dot(dir);
        double worst = 0.0;
        for (int t = 0; t < T; ++t) {
          const double tt = static_cast<double>(t) / (T - 1);
          for (int s = -1; s <= 1; s += 2) {
            worst = std::max(worst,
                             std::pow(loss.d3(v[i] - s * tt * step), 2.0));
          }
        }
        g[i] = worst;
      }
      auto est = power_mean_estimate(g, 0.5, "sup_x E[sup_t l'''(V)^2]");
      if (est.value >= best.value || est.diverged) best = est;
      if (best.diverged) break;
    }
    out.vE = best;
  }
  return out;
}

// ---- exact SAA solutions -----------------------------------------------------------

ClosedFormSolution exact_saa_solution(const StochasticProblem& problem,
                                      const ScenarioSample& sample) {
  const Eigen::Index N = sample.size();
  if (N == 0) {
    throw std::invalid_argument("exact_saa_solution: empty sample");
  }
  const int d = problem.dimension;

  auto solve_normal_equations = [&](const Eigen::MatrixXd& M,
                                    const Eigen::VectorXd& v,
                                    ClosedFormSolution& out) {
    // rank deficiency must be detected directly: normal equations are
    // always consistent, so a residual test alone cannot catch it
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
    bool degenerate = ldlt.info() != Eigen::Success;
    if (!degenerate) {
      const Eigen::VectorXd D = ldlt.vectorD();
      const double dmax = D.cwiseAbs().maxCoeff();
      degenerate = dmax <= 0.0 || D.minCoeff() < 1e-12 * dmax;
    }
    Eigen::VectorXd x;
    if (!degenerate) {
      x = ldlt.solve(v);
      degenerate =
          !x.allFinite() || (M * x - v).norm() > 1e-8 * std::max(1.0, v.norm());
    }
    if (degenerate) {
      x = M.completeOrthogonalDecomposition().solve(v);
      out.least_norm = true;
    }
    out.action = x;
  };

  ClosedFormSolution out;
  switch (problem.closed_form) {
    case StochasticProblem::ClosedForm::mean:
      out.action = sample.scenarios.rowwise().mean();
      break;
    case StochasticProblem::ClosedForm::linear_regression: {
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d, d);
      Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
      for (Eigen::Index i = 0; i < N; ++i) {
        const auto x_i = sample.scenarios.col(i).head(d);
        M.noalias() += x_i * x_i.transpose();
        v.noalias() += sample.scenarios.col(i)[d] * x_i;
      }
      solve_normal_equations(M, v, out);
      break;
    }
    case StochasticProblem::ClosedForm::ridge: {
      Eigen::MatrixXd M =
          static_cast<double>(N) * Eigen::MatrixXd::Identity(d, d);
      Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
      for (Eigen::Index i = 0; i < N; ++i) {
        const auto x_i = sample.scenarios.col(i).head(d);
        M.noalias() += x_i * x_i.transpose();
        v.noalias() += sample.scenarios.col(i)[d] * x_i;
      }
      solve_normal_equations(M, v, out);
      break;
    }
    case StochasticProblem::ClosedForm::quadratic: {
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, d);
      Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
      for (Eigen::Index i = 0; i < N; ++i) {
        b += sample.scenarios.col(i).head(d);
        A += Eigen::Map<const Eigen::MatrixXd>(
            sample.scenarios.col(i).data() + d, d, d);
      }
      A /= static_cast<double>(N);
      b /= static_cast<double>(N);
      solve_normal_equations(A, -b, out);
      break;
    }
    case StochasticProblem::ClosedForm::none:
      throw std::invalid_argument(
          "exact_saa_solution: no closed form for problem '" + problem.name +
          "'");
  }

  if (problem.feasible_set.kind() != FeasibleSet::Kind::all_of_space &&
      !problem.feasible_set.contains(out.action)) {
    out.action = problem.feasible_set.project(out.action);
    out.projected = true;
  }
  return out;
}

}  // namespace momopt
