#include "momopt/samplers.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace momopt {

namespace {

/// Symmetric PSD square root; tolerates semi-definite covariances
/// (deterministic components) that a Cholesky factorization would reject.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& cov) {
  if (!cov.isApprox(cov.transpose(), 1e-10)) {
    throw std::invalid_argument("covariance must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, cov.norm())) {
    throw std::invalid_argument("covariance must be positive semi-definite");
  }
  return es.eigenvectors() *
         es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

double draw_noise(const NoiseSpec& noise, Rng& rng) {
  switch (noise.kind) {
    case NoiseSpec::Kind::none:
      return 0.0;
    case NoiseSpec::Kind::gaussian:
      return noise.mean + noise.sd * rng.normal();
    case NoiseSpec::Kind::student_t:
      return noise.mean + noise.scale * rng.student_t(noise.dof);
  }
  return 0.0;
}

void draw_vector_into(const DistributionSpec& spec,
                      const Eigen::MatrixXd& sqrt_cov, Rng& rng,
                      Eigen::Ref<Eigen::VectorXd> out) {
  const int d = spec.dim;
  switch (spec.kind) {
    case DistributionSpec::Kind::gaussian: {
      Eigen::VectorXd z(d);
      for (int i = 0; i < d; ++i) z[i] = rng.normal();
      out = spec.mean + sqrt_cov * z;
      return;
    }
    case DistributionSpec::Kind::two_point_adversarial: {
      const double nr = spec.design_N * spec.design_r;
      const double p = 1.0 / (nr * nr);
      const double u = rng.uniform01();
      out[0] = (u <= 0.5 * p) ? nr : (u <= p ? -nr : 0.0);
      return;
    }
    case DistributionSpec::Kind::pareto: {
      for (int i = 0; i < d; ++i) out[i] = rng.pareto(spec.alpha, spec.scale);
      return;
    }
    case DistributionSpec::Kind::student_t: {
      for (int i = 0; i < d; ++i)
        out[i] = spec.tscale * rng.student_t(spec.dof);
      return;
    }
    case DistributionSpec::Kind::lognormal_returns: {
      Eigen::VectorXd z(d);
      for (int i = 0; i < d; ++i) z[i] = rng.normal();
      out = (spec.mean + sqrt_cov * z).array().exp();
      return;
    }
    default:
      throw std::logic_error("draw_vector_into: not a vector-valued kind");
  }
}

}  // namespace

NoiseSpec NoiseSpec::gaussian(double mean, double sd) {
  if (sd < 0.0) throw std::invalid_argument("NoiseSpec: sd must be >= 0");
  NoiseSpec n;
  n.kind = Kind::gaussian;
  n.mean = mean;
  n.sd = sd;
  return n;
}

NoiseSpec NoiseSpec::student_t(double dof, double scale) {
  if (dof <= 2.0) {
    throw std::invalid_argument("NoiseSpec: student_t needs dof > 2");
  }
  if (scale < 0.0) throw std::invalid_argument("NoiseSpec: scale must be >= 0");
  NoiseSpec n;
  n.kind = Kind::student_t;
  n.dof = dof;
  n.scale = scale;
  return n;
}

DistributionSpec DistributionSpec::gaussian(Eigen::VectorXd mean,
                                            Eigen::MatrixXd cov,
                                            std::uint64_t seed) {
  DistributionSpec s;
  s.kind = Kind::gaussian;
  s.dim = static_cast<int>(mean.size());
  s.mean = std::move(mean);
  s.cov = std::move(cov);
  s.seed = seed;
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::standard_gaussian(int dim,
                                                     std::uint64_t seed) {
  return gaussian(Eigen::VectorXd::Zero(dim),
                  Eigen::MatrixXd::Identity(dim, dim), seed);
}

DistributionSpec DistributionSpec::two_point_adversarial(double design_N,
                                                         double design_r,
                                                         std::uint64_t seed) {
  DistributionSpec s;
  s.kind = Kind::two_point_adversarial;
  s.dim = 1;
  s.design_N = design_N;
  s.design_r = design_r;
  s.seed = seed;
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::pareto(int dim, double alpha, double scale,
                                          std::uint64_t seed) {
  DistributionSpec s;
  s.kind = Kind::pareto;
  s.dim = dim;
  s.alpha = alpha;
  s.scale = scale;
  s.seed = seed;
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::student_t(int dim, double dof, double scale,
                                             std::uint64_t seed) {
  DistributionSpec s;
  s.kind = Kind::student_t;
  s.dim = dim;
  s.dof = dof;
  s.tscale = scale;
  s.seed = seed;
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::lognormal_returns(
    Eigen::VectorXd mu, Eigen::MatrixXd sigma_matrix, std::uint64_t seed) {
  DistributionSpec s;
  s.kind = Kind::lognormal_returns;
  s.dim = static_cast<int>(mu.size());
  s.mean = std::move(mu);
  s.cov = std::move(sigma_matrix);
  s.seed = seed;
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::regression_pair(DistributionSpec x_spec,
                                                   Eigen::VectorXd coef,
                                                   NoiseSpec noise,
                                                   std::uint64_t seed) {
  DistributionSpec s;
  s.kind = Kind::regression_pair;
  s.dim = x_spec.dim;
  s.x_component = std::make_shared<DistributionSpec>(std::move(x_spec));
  s.coef = std::move(coef);
  s.noise = noise;
  s.seed = seed;
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::bachelier_pair(Eigen::MatrixXd x_cov,
                                                  Eigen::VectorXd coef,
                                                  NoiseSpec noise,
                                                  std::uint64_t seed) {
  const int d = static_cast<int>(x_cov.rows());
  DistributionSpec s;
  s.kind = Kind::bachelier_pair;
  s.dim = d;
  s.x_component = std::make_shared<DistributionSpec>(
      gaussian(Eigen::VectorXd::Zero(d), std::move(x_cov), 0));
  s.coef = std::move(coef);
  s.noise = noise;
  s.seed = seed;
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::quadratic_pair(Eigen::MatrixXd b_cov,
                                                  Eigen::MatrixXd a_base,
                                                  int wishart_degrees,
                                                  std::uint64_t seed) {
  DistributionSpec s;
  s.kind = Kind::quadratic_pair;
  s.dim = static_cast<int>(a_base.rows());
  s.cov = std::move(b_cov);
  s.base = std::move(a_base);
  s.wishart_degrees = wishart_degrees;
  s.seed = seed;
  s.validate();
  return s;
}

int DistributionSpec::payload_dim() const {
  switch (kind) {
    case Kind::regression_pair:
    case Kind::bachelier_pair:
      return dim + 1;
    case Kind::quadratic_pair:
      return dim + dim * dim;
    default:
      return dim;
  }
}

std::string DistributionSpec::generator_id() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::gaussian:
      os << "gaussian(d=" << dim << ")";
      break;
    case Kind::two_point_adversarial:
      os << "two_point(N=" << design_N << ",r=" << design_r << ")";
      break;
    case Kind::pareto:
      os << "pareto(d=" << dim << ",alpha=" << alpha << ",scale=" << scale
         << ")";
      break;
    case Kind::student_t:
      os << "student_t(d=" << dim << ",dof=" << dof << ")";
      break;
    case Kind::lognormal_returns:
      os << "lognormal(d=" << dim << ")";
      break;
    case Kind::regression_pair:
      os << "regression_pair(d=" << dim << ")";
      break;
    case Kind::bachelier_pair:
      os << "bachelier_pair(d=" << dim << ")";
      break;
    case Kind::quadratic_pair:
      os << "quadratic_pair(d=" << dim << ",wishart=" << wishart_degrees
         << ")";
      break;
  }
  return os.str();
}

void DistributionSpec::validate() const {
  if (dim < 1) throw std::invalid_argument("DistributionSpec: dim must be >= 1");
  switch (kind) {
    case Kind::gaussian:
    case Kind::lognormal_returns:
      if (mean.size() != dim || cov.rows() != dim || cov.cols() != dim) {
        throw std::invalid_argument("DistributionSpec: mean/cov shape mismatch");
      }
      psd_sqrt(cov);  // throws if not symmetric PSD
      break;
    case Kind::two_point_adversarial:
      if (design_N * design_r * design_r < 1.0) {
        throw std::invalid_argument(
            "two_point_adversarial: requires N * r^2 >= 1");
      }
      break;
    case Kind::pareto:
      // finite variance is relied on throughout; alpha <= 2 has none
      if (alpha <= 2.0) {
        throw std::invalid_argument("pareto: alpha must be > 2");
      }
      if (scale <= 0.0) throw std::invalid_argument("pareto: scale must be > 0");
      break;
    case Kind::student_t:
      if (dof <= 2.0) throw std::invalid_argument("student_t: dof must be > 2");
      if (tscale <= 0.0) {
        throw std::invalid_argument("student_t: scale must be > 0");
      }
      break;
    case Kind::regression_pair:
    case Kind::bachelier_pair: {
      if (!x_component) {
        throw std::invalid_argument("pair spec: missing X component");
      }
      x_component->validate();
      if (x_component->payload_dim() != dim) {
        throw std::invalid_argument("pair spec: X component must be vector-valued");
      }
      if (coef.size() != dim) {
        throw std::invalid_argument("pair spec: coef dimension mismatch");
      }
      if (kind == Kind::bachelier_pair) {
        if (x_component->kind != Kind::gaussian ||
            x_component->mean.norm() != 0.0) {
          throw std::invalid_argument(
              "bachelier_pair: X must be zero-mean Gaussian");
        }
      }
      break;
    }
    case Kind::quadratic_pair:
      if (cov.rows() != dim || cov.cols() != dim || base.rows() != dim ||
          base.cols() != dim) {
        throw std::invalid_argument("quadratic_pair: shape mismatch");
      }
      if (wishart_degrees < 0) {
        throw std::invalid_argument("quadratic_pair: wishart_degrees < 0");
      }
      psd_sqrt(cov);
      psd_sqrt(base);
      break;
  }
}

ScenarioSample draw(const DistributionSpec& spec, Eigen::Index count) {
  if (count < 1) throw std::invalid_argument("draw: count must be >= 1");
  spec.validate();

  ScenarioSample sample;
  sample.seed = spec.seed;
  sample.generator_id = spec.generator_id();
  sample.scenarios.resize(spec.payload_dim(), count);

  Rng rng(spec.seed);

  switch (spec.kind) {
    case DistributionSpec::Kind::gaussian:
    case DistributionSpec::Kind::two_point_adversarial:
    case DistributionSpec::Kind::pareto:
    case DistributionSpec::Kind::student_t:
    case DistributionSpec::Kind::lognormal_returns: {
      Eigen::MatrixXd sqrt_cov;
      if (spec.cov.size() > 0) sqrt_cov = psd_sqrt(spec.cov);
      for (Eigen::Index i = 0; i < count; ++i) {
        draw_vector_into(spec, sqrt_cov, rng, sample.scenarios.col(i));
      }
      break;
    }
    case DistributionSpec::Kind::regression_pair:
    case DistributionSpec::Kind::bachelier_pair: {
      const auto& xs = *spec.x_component;
      Eigen::MatrixXd sqrt_cov;
      if (xs.cov.size() > 0) sqrt_cov = psd_sqrt(xs.cov);
      Eigen::VectorXd x(spec.dim);
      for (Eigen::Index i = 0; i < count; ++i) {
        draw_vector_into(xs, sqrt_cov, rng, x);
        const double w = draw_noise(spec.noise, rng);
        sample.scenarios.col(i).head(spec.dim) = x;
        sample.scenarios.col(i)[spec.dim] = spec.coef.dot(x) + w;
      }
      break;
    }
    case DistributionSpec::Kind::quadratic_pair: {
      const int d = spec.dim;
      const Eigen::MatrixXd sqrt_b = psd_sqrt(spec.cov);
      const Eigen::MatrixXd sqrt_a = psd_sqrt(spec.base);
      Eigen::VectorXd z(d);
      for (Eigen::Index i = 0; i < count; ++i) {
        for (int j = 0; j < d; ++j) z[j] = rng.normal();
        sample.scenarios.col(i).head(d) = sqrt_b * z;
        Eigen::MatrixXd A;
        if (spec.wishart_degrees == 0) {
          A = spec.base;
        } else {
          A = Eigen::MatrixXd::Zero(d, d);
          for (int k = 0; k < spec.wishart_degrees; ++k) {
            for (int j = 0; j < d; ++j) z[j] = rng.normal();
            const Eigen::VectorXd v = sqrt_a * z;
            A += v * v.transpose();
          }
          A /= static_cast<double>(spec.wishart_degrees);
        }
        sample.scenarios.col(i).tail(d * d) =
            Eigen::Map<const Eigen::VectorXd>(A.data(), d * d);
      }
      break;
    }
  }
  return sample;
}

double adversarial_failure_probability(std::size_t N, double r) {
  const double n = static_cast<double>(N);
  if (n * r * r < 1.0) {
    throw std::invalid_argument(
        "adversarial_failure_probability: requires N * r^2 >= 1");
  }
  const double p = 1.0 / (n * r * n * r);
  return n * p * std::pow(1.0 - p, n - 1.0);
}

double adversarial_two_or_more_probability(std::size_t N, double r) {
  const double n = static_cast<double>(N);
  if (n * r * r < 1.0) {
    throw std::invalid_argument(
        "adversarial_two_or_more_probability: requires N * r^2 >= 1");
  }
  const double p = 1.0 / (n * r * n * r);
  return 1.0 - std::pow(1.0 - p, n) - n * p * std::pow(1.0 - p, n - 1.0);
}

}  // namespace momopt
