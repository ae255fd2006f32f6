#include "momopt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "momopt/core.hpp"
#include "momopt/saa.hpp"
#include "momopt/stats.hpp"

namespace momopt {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const char* to_string(Method m) {
  switch (m) {
    case Method::saa:
      return "saa";
    case Method::mom_tournament:
      return "mom_tournament";
    case Method::mom_scalar:
      return "mom_scalar";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "saa") return Method::saa;
  if (name == "mom_tournament") return Method::mom_tournament;
  if (name == "mom_scalar") return Method::mom_scalar;
  throw std::invalid_argument("config: unknown method '" + name + "'");
}

// ---- config parsing --------------------------------------------------------

namespace {

Eigen::VectorXd parse_vector(const json& j, int dim, const char* field) {
  if (j.is_number()) {
    return Eigen::VectorXd::Constant(dim, j.get<double>());
  }
  if (j.is_array()) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    if (dim > 0 && v.size() != dim) {
      throw std::invalid_argument(std::string("config: ") + field +
                                  " has wrong length");
    }
    return v;
  }
  throw std::invalid_argument(std::string("config: ") + field +
                              " must be a number or array");
}

Eigen::MatrixXd parse_matrix(const json& j, int dim, const char* field) {
  if (j.is_string() && j.get<std::string>() == "identity") {
    return Eigen::MatrixXd::Identity(dim, dim);
  }
  if (j.is_number()) {
    return j.get<double>() * Eigen::MatrixXd::Identity(dim, dim);
  }
  if (j.is_array() && !j.empty() && j[0].is_number()) {
    Eigen::VectorXd diag = parse_vector(j, dim, field);
    return diag.asDiagonal();
  }
  if (j.is_array() && !j.empty() && j[0].is_array()) {
    const Eigen::Index n = static_cast<Eigen::Index>(j.size());
    Eigen::MatrixXd M(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto& row = j[static_cast<std::size_t>(r)];
      if (static_cast<Eigen::Index>(row.size()) != n) {
        throw std::invalid_argument(std::string("config: ") + field +
                                    " must be square");
      }
      for (Eigen::Index c = 0; c < n; ++c) {
        M(r, c) = row[static_cast<std::size_t>(c)].get<double>();
      }
    }
    if (dim > 0 && n != dim) {
      throw std::invalid_argument(std::string("config: ") + field +
                                  " has wrong size");
    }
    return M;
  }
  throw std::invalid_argument(std::string("config: ") + field +
                              " must be 'identity', a number, or an array");
}

NoiseSpec parse_noise(const json& j) {
  if (j.is_null()) return NoiseSpec::none();
  const std::string kind = j.value("kind", "gaussian");
  if (kind == "none") return NoiseSpec::none();
  if (kind == "gaussian") {
    return NoiseSpec::gaussian(j.value("mean", 0.0), j.at("sd").get<double>());
  }
  if (kind == "student_t") {
    return NoiseSpec::student_t(j.at("dof").get<double>(),
                                j.value("scale", 1.0));
  }
  throw std::invalid_argument("config: unknown noise kind '" + kind + "'");
}

DistributionSpec parse_distribution(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "gaussian") {
    const int dim = j.value("dim", 0) > 0
                        ? j.at("dim").get<int>()
                        : static_cast<int>(j.at("mean").size());
    Eigen::VectorXd mean = j.contains("mean")
                               ? parse_vector(j.at("mean"), dim, "mean")
                               : Eigen::VectorXd::Zero(dim);
    Eigen::MatrixXd cov = j.contains("cov")
                              ? parse_matrix(j.at("cov"), dim, "cov")
                              : Eigen::MatrixXd::Identity(dim, dim);
    return DistributionSpec::gaussian(std::move(mean), std::move(cov), 0);
  }
  if (kind == "two_point_adversarial") {
    return DistributionSpec::two_point_adversarial(
        j.at("design_N").get<double>(), j.at("design_r").get<double>(), 0);
  }
  if (kind == "pareto") {
    return DistributionSpec::pareto(j.value("dim", 1),
                                    j.at("alpha").get<double>(),
                                    j.value("scale", 1.0), 0);
  }
  if (kind == "student_t") {
    return DistributionSpec::student_t(j.value("dim", 1),
                                       j.at("dof").get<double>(),
                                       j.value("scale", 1.0), 0);
  }
  if (kind == "lognormal_returns") {
    const int dim = j.value("dim", 0) > 0
                        ? j.at("dim").get<int>()
                        : static_cast<int>(j.at("mu").size());
    return DistributionSpec::lognormal_returns(
        parse_vector(j.at("mu"), dim, "mu"),
        parse_matrix(j.at("sigma"), dim, "sigma"), 0);
  }
  if (kind == "regression_pair") {
    DistributionSpec x = parse_distribution(j.at("x"));
    Eigen::VectorXd coef = parse_vector(j.at("coef"), x.dim, "coef");
    return DistributionSpec::regression_pair(std::move(x), std::move(coef),
                                             parse_noise(j.value("noise", json())), 0);
  }
  if (kind == "bachelier_pair") {
    Eigen::VectorXd coef = parse_vector(j.at("coef"), 0, "coef");
    const int dim = static_cast<int>(coef.size());
    Eigen::MatrixXd x_cov = j.contains("x_cov")
                                ? parse_matrix(j.at("x_cov"), dim, "x_cov")
                                : Eigen::MatrixXd::Identity(dim, dim);
    return DistributionSpec::bachelier_pair(std::move(x_cov), std::move(coef),
                                            parse_noise(j.value("noise", json())), 0);
  }
  if (kind == "quadratic_pair") {
    const Eigen::MatrixXd a_base = parse_matrix(j.at("a_base"), 0, "a_base");
    const int dim = static_cast<int>(a_base.rows());
    return DistributionSpec::quadratic_pair(
        parse_matrix(j.value("b_cov", json("identity")), dim, "b_cov"), a_base,
        j.value("wishart_degrees", 0), 0);
  }
  throw std::invalid_argument("config: unknown distribution kind '" + kind +
                              "'");
}

FeasibleSet parse_feasible(const json& j, int dim) {
  if (j.is_null()) return FeasibleSet::all_of_space();
  const std::string kind = j.value("kind", "all");
  if (kind == "all" || kind == "all_of_space") return FeasibleSet::all_of_space();
  if (kind == "nonneg_orthant") return FeasibleSet::nonneg_orthant();
  if (kind == "box") {
    auto parse_bound = [&](const json& b, double fallback) {
      Eigen::VectorXd v = Eigen::VectorXd::Constant(dim, fallback);
      if (b.is_array()) {
        for (std::size_t i = 0; i < b.size(); ++i) {
          v[static_cast<Eigen::Index>(i)] =
              b[i].is_null() ? fallback : b[i].get<double>();
        }
      } else if (b.is_number()) {
        v.setConstant(b.get<double>());
      }
      return v;
    };
    const double inf = std::numeric_limits<double>::infinity();
    return FeasibleSet::box(parse_bound(j.value("lower", json()), -inf),
                            parse_bound(j.value("upper", json()), inf));
  }
  if (kind == "halfspaces") {
    std::vector<std::pair<Eigen::VectorXd, double>> hs;
    for (const auto& c : j.at("constraints")) {
      hs.emplace_back(parse_vector(c.at("a"), dim, "a"),
                      c.at("b").get<double>());
    }
    return FeasibleSet::halfspace_intersection(std::move(hs));
  }
  throw std::invalid_argument("config: unknown feasible-set kind '" + kind +
                              "'");
}

Loss parse_loss(const json& j) {
  if (j.is_null() || (j.is_string() && j.get<std::string>() == "exponential")) {
    return Loss::exponential();
  }
  if (j.is_object() && j.value("kind", "") == "softplus_power") {
    return Loss::softplus_power(j.at("p").get<double>());
  }
  if (j.is_string()) {
    throw std::invalid_argument("config: unknown loss '" +
                                j.get<std::string>() + "'");
  }
  throw std::invalid_argument("config: malformed loss");
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") +
                                e.what());
  }

  ExperimentConfig cfg;
  try {
    const json& pj = j.at("problem");
    cfg.problem_kind = pj.at("kind").get<std::string>();
    cfg.distribution = parse_distribution(j.at("distribution"));
    const int action_dim = cfg.problem_kind == "mean_estimation"
                               ? cfg.distribution.payload_dim()
                               : cfg.distribution.dim;
    cfg.feasible_set = parse_feasible(pj.value("feasible", json()), action_dim);
    if (cfg.problem_kind == "portfolio") {
      cfg.loss = parse_loss(pj.value("loss", json()));
      cfg.prices = pj.contains("prices")
                       ? parse_vector(pj.at("prices"), cfg.distribution.dim,
                                      "prices")
                       : Eigen::VectorXd::Zero(cfg.distribution.dim);
    }

    for (const auto& m : j.at("methods")) {
      cfg.methods.push_back(method_from_string(m.get<std::string>()));
    }
    for (const auto& n : j.at("N_grid")) {
      cfg.N_grid.push_back(n.get<Eigen::Index>());
    }
    for (const auto& r : j.at("r_grid")) cfg.r_grid.push_back(r.get<double>());
    cfg.trials = j.at("trials").get<int>();
    cfg.seed = j.value("seed", 0ULL);
    cfg.out_path = j.value("out", "");
    cfg.format = j.value("format", "csv");
    cfg.theta = j.value("theta", 0.1);
    if (j.contains("sigma2") && !j.at("sigma2").is_null()) {
      cfg.sigma2_override = j.at("sigma2").get<double>();
    }
    if (j.contains("c_H") && !j.at("c_H").is_null()) {
      cfg.c_H_override = j.at("c_H").get<double>();
    }
    cfg.split_fraction = j.value("split_fraction", 0.5);
    cfg.pool_blocks = j.value("pool_blocks", 2);
    cfg.threads = j.value("threads", 1);
    cfg.eval_sample_factor = j.value("eval_sample_factor", 10);
    cfg.timing = j.value("timing", "none");
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str());
}

void ExperimentConfig::validate() const {
  static const char* kinds[] = {"mean_estimation", "linear_regression",
                                "ridge_regression", "quadratic", "portfolio"};
  bool known = false;
  for (const char* k : kinds) known = known || problem_kind == k;
  if (!known) {
    throw std::invalid_argument("config: unknown problem kind '" +
                                problem_kind + "'");
  }
  if (methods.empty()) {
    throw std::invalid_argument("config: method list is empty");
  }
  if (N_grid.empty()) throw std::invalid_argument("config: N grid is empty");
  if (r_grid.empty()) throw std::invalid_argument("config: r grid is empty");
  for (auto n : N_grid) {
    if (n < 2) throw std::invalid_argument("config: N grid entries must be >= 2");
  }
  for (auto r : r_grid) {
    if (r <= 0.0) throw std::invalid_argument("config: r grid entries must be > 0");
  }
  if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (format != "csv" && format != "json") {
    throw std::invalid_argument("config: format must be 'csv' or 'json'");
  }
  if (timing != "none" && timing != "wall") {
    throw std::invalid_argument("config: timing must be 'none' or 'wall'");
  }
  if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
  if (theta <= 0.0 || theta >= 1.0) {
    throw std::invalid_argument("config: theta must be in (0,1)");
  }
  if (split_fraction <= 0.0 || split_fraction >= 1.0) {
    throw std::invalid_argument("config: split_fraction must be in (0,1)");
  }
  if (pool_blocks < 1) {
    throw std::invalid_argument("config: pool_blocks must be >= 1");
  }
  for (Method m : methods) {
    if (m == Method::mom_scalar &&
        (problem_kind != "mean_estimation" ||
         distribution.payload_dim() != 1)) {
      throw std::invalid_argument(
          "config: mom_scalar requires one-dimensional mean estimation");
    }
  }
  if (problem_kind == "linear_regression" || problem_kind == "ridge_regression" ||
      problem_kind == "portfolio") {
    if (distribution.kind != DistributionSpec::Kind::regression_pair &&
        distribution.kind != DistributionSpec::Kind::bachelier_pair) {
      throw std::invalid_argument(
          "config: this problem kind needs a pair distribution");
    }
  }
  if (problem_kind == "quadratic" &&
      distribution.kind != DistributionSpec::Kind::quadratic_pair) {
    throw std::invalid_argument(
        "config: quadratic problem needs a quadratic_pair distribution");
  }
}

// ---- experiment execution ----------------------------------------------------

namespace {

struct ProblemBundle {
  StochasticProblem problem;
  std::optional<PortfolioModel> portfolio;
};

ProblemBundle build_problem(const ExperimentConfig& cfg) {
  ProblemBundle b;
  if (cfg.problem_kind == "mean_estimation") {
    b.problem = make_mean_estimation(cfg.distribution, cfg.feasible_set);
  } else if (cfg.problem_kind == "linear_regression") {
    b.problem = make_linear_regression(cfg.distribution, cfg.feasible_set);
  } else if (cfg.problem_kind == "ridge_regression") {
    b.problem = make_ridge_regression(cfg.distribution, cfg.feasible_set);
  } else if (cfg.problem_kind == "quadratic") {
    b.problem = make_quadratic(cfg.distribution);
  } else {
    b.portfolio = make_portfolio(cfg.distribution, cfg.loss, cfg.prices,
                                 cfg.feasible_set);
    b.problem = b.portfolio->problem;
  }
  return b;
}

struct ResolvedParams {
  double sigma2 = 1.0;
  double c_H = 1.0;
  HNorm norm = HNorm::identity(1);
  ParameterTier sigma2_tier = ParameterTier::exact;
  ParameterTier c_H_tier = ParameterTier::exact;
  ParameterTier norm_tier = ParameterTier::exact;
};

/// Three-tier parameter provider: exact from ground truth, user override,
/// or empirical from an independent calibration sample at an SAA pilot.
ResolvedParams resolve_parameters(const ExperimentConfig& cfg,
                                  const ProblemBundle& bundle, double r,
                                  std::uint64_t trial_seed,
                                  Eigen::Index calibration_size) {
  const StochasticProblem& problem = bundle.problem;
  ResolvedParams out;

  std::optional<ScenarioSample> calibration;
  std::optional<Action> pilot;
  auto ensure_calibration = [&]() {
    if (calibration.has_value()) return;
    DistributionSpec cal_spec = cfg.distribution;
    cal_spec.seed = split_seed(trial_seed, 0xCA11ULL);
    calibration = draw(cal_spec, calibration_size);
    pilot = saa_minimize(problem, *calibration).x;
  };

  if (problem.ground_truth.has_value()) {
    out.norm = HNorm::from_matrix(problem.ground_truth->hessian);
    out.norm_tier = ParameterTier::exact;
  } else {
    ensure_calibration();
    out.norm = estimate_hessian_norm(problem, *pilot, *calibration);
    out.norm_tier = ParameterTier::empirical;
  }

  if (cfg.sigma2_override.has_value()) {
    out.sigma2 = *cfg.sigma2_override;
    out.sigma2_tier = ParameterTier::user_supplied;
  } else if (problem.ground_truth.has_value()) {
    out.sigma2 = compute_diagnostics(problem, r).sigma2;
    out.sigma2_tier = ParameterTier::exact;
  } else {
    ensure_calibration();
    // empirical gradient covariance at the pilot, whitened by the norm
    const int d = problem.dimension;
    const Eigen::Index M = calibration->size();
    Eigen::MatrixXd grads(d, M);
    for (Eigen::Index i = 0; i < M; ++i) {
      grads.col(i) = problem.gradient(*pilot, calibration->scenario(i));
    }
    const Eigen::VectorXd mean = grads.rowwise().mean();
    grads.colwise() -= mean;
    const Eigen::MatrixXd G =
        grads * grads.transpose() / static_cast<double>(M > 1 ? M - 1 : 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.norm.whiten(G));
    out.sigma2 = std::max(es.eigenvalues().maxCoeff(), 1e-12);
    out.sigma2_tier = ParameterTier::empirical;
  }

  if (cfg.c_H_override.has_value()) {
    out.c_H = *cfg.c_H_override;
    out.c_H_tier = ParameterTier::user_supplied;
  } else if (problem.c_H.has_value()) {
    out.c_H = *problem.c_H;
    out.c_H_tier = ParameterTier::exact;
  } else if (bundle.portfolio.has_value()) {
    ensure_calibration();
    const auto diag = portfolio_diagnostics(*bundle.portfolio, *pilot,
                                            *calibration, out.norm);
    out.c_H = diag.vE.diverged ? 1.0 : std::max(1.0, diag.vE.value);
    out.c_H_tier = ParameterTier::empirical;
  } else {
    out.c_H = 1.0;
    out.c_H_tier = ParameterTier::empirical;
  }
  return out;
}

/// Shared evaluation reference for problems without ground truth: a large
/// independent sample and a high-accuracy SAA minimizer on it.
struct EvalReference {
  ScenarioSample sample;
  Action x_ref;
};

double gap_against_reference(const StochasticProblem& problem,
                             const EvalReference& ref, const Action& x,
                             double* std_error) {
  const Eigen::Index M = ref.sample.size();
  double mean = 0.0, m2 = 0.0;
  for (Eigen::Index i = 0; i < M; ++i) {
    const Scenario xi = ref.sample.scenario(i);
    const double delta = problem.objective(x, xi) - problem.objective(ref.x_ref, xi);
    const double d1 = delta - mean;
    mean += d1 / static_cast<double>(i + 1);
    m2 += d1 * (delta - mean);
  }
  if (std_error != nullptr) {
    *std_error = M > 1 ? std::sqrt(m2 / static_cast<double>(M - 1) /
                                   static_cast<double>(M))
                       : 0.0;
  }
  return mean;
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& config) {
  config.validate();
  const ProblemBundle bundle = build_problem(config);
  const StochasticProblem& problem = bundle.problem;
  const bool has_gt = problem.ground_truth.has_value();

  std::optional<EvalReference> eval_ref;
  if (!has_gt || !problem.ground_truth->objective) {
    Eigen::Index max_n = 0;
    for (auto n : config.N_grid) max_n = std::max(max_n, n);
    DistributionSpec eval_spec = config.distribution;
    eval_spec.seed = split_seed(config.seed, 0xE7A1ULL);
    EvalReference ref;
    ref.sample = draw(eval_spec, config.eval_sample_factor * max_n);
    ref.x_ref = saa_minimize(problem, ref.sample).x;
    eval_ref = std::move(ref);
  }

  const std::size_t n_methods = config.methods.size();
  const std::size_t n_N = config.N_grid.size();
  const std::size_t n_r = config.r_grid.size();
  const std::size_t n_cells = n_methods * n_N * n_r;
  const std::size_t total =
      n_cells * static_cast<std::size_t>(config.trials);

  ResultTable table;
  table.trial_results.resize(total);

  auto run_one = [&](std::size_t flat) {
    const std::size_t cell = flat / static_cast<std::size_t>(config.trials);
    const int t = static_cast<int>(flat % static_cast<std::size_t>(config.trials));
    const std::size_t ri = cell % n_r;
    const std::size_t ni = (cell / n_r) % n_N;
    const std::size_t mi = cell / (n_r * n_N);

    TrialResult& res = table.trial_results[flat];
    res.method = config.methods[mi];
    res.N = config.N_grid[ni];
    res.r = config.r_grid[ri];
    res.trial_index = t;

    const auto t0 = std::chrono::steady_clock::now();
    try {
      const std::uint64_t trial_seed = split_seed(config.seed, flat);
      DistributionSpec spec = config.distribution;
      spec.seed = trial_seed;
      const ScenarioSample sample = draw(spec, res.N);

      const ResolvedParams params = resolve_parameters(
          config, bundle, res.r, trial_seed, res.N);

      Action x_hat;
      switch (res.method) {
        case Method::saa:
          x_hat = saa_minimize(problem, sample).x;
          break;
        case Method::mom_scalar: {
          const Eigen::VectorXd values = sample.scenarios.row(0).transpose();
          const std::size_t n = choose_block_count(
              static_cast<std::size_t>(res.N), res.r, params.sigma2,
              config.theta);
          x_hat = Eigen::VectorXd::Constant(1, median_of_means(values, n));
          break;
        }
        case Method::mom_tournament: {
          TournamentConfig tc;
          tc.r = res.r;
          tc.theta = config.theta;
          tc.sigma2 = params.sigma2;
          tc.c_H = std::max(1.0, params.c_H);
          tc.norm = params.norm;
          tc.split_fraction = config.split_fraction;
          tc.candidate_policy =
              CandidatePolicy::blockwise_saa(config.pool_blocks);
          tc.sigma2_tier = params.sigma2_tier;
          tc.c_H_tier = params.c_H_tier;
          tc.norm_tier = params.norm_tier;
          const TournamentReport report =
              run_tournament(problem, sample, tc);
          x_hat = report.selected;
          res.winners_fallback = report.winners_fallback;
          res.champions_fallback = report.champions_fallback;
          break;
        }
      }

      if (has_gt) {
        res.estimation_error =
            params.norm.distance(x_hat, problem.ground_truth->x_star);
      } else {
        res.estimation_error = std::numeric_limits<double>::quiet_NaN();
      }
      if (has_gt && problem.ground_truth->objective) {
        res.prediction_gap = problem.ground_truth->objective(x_hat) -
                             problem.ground_truth->f_star;
        res.gap_std_error = 0.0;
      } else {
        res.prediction_gap = gap_against_reference(problem, *eval_ref, x_hat,
                                                   &res.gap_std_error);
      }
    } catch (const std::exception& e) {
      res.errored = true;
      res.error = e.what();
      res.estimation_error = std::numeric_limits<double>::quiet_NaN();
      res.prediction_gap = std::numeric_limits<double>::quiet_NaN();
    }
    const auto t1 = std::chrono::steady_clock::now();
    res.wall_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
  };

  if (config.threads <= 1) {
    for (std::size_t flat = 0; flat < total; ++flat) run_one(flat);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const int T = std::min<int>(config.threads,
                                static_cast<int>(std::max<std::size_t>(1, total)));
    workers.reserve(static_cast<std::size_t>(T));
    for (int w = 0; w < T; ++w) {
      workers.emplace_back([&]() {
        for (;;) {
          const std::size_t flat = next.fetch_add(1);
          if (flat >= total) return;
          run_one(flat);
        }
      });
    }
    for (auto& w : workers) w.join();
  }

  // aggregate in grid order (method-major, then N, then r)
  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    const std::size_t ri = cell % n_r;
    const std::size_t ni = (cell / n_r) % n_N;
    const std::size_t mi = cell / (n_r * n_N);

    CellAggregate agg;
    agg.method = config.methods[mi];
    agg.N = config.N_grid[ni];
    agg.r = config.r_grid[ri];
    agg.trials = config.trials;

    std::vector<double> errs, gaps, gap_ses;
    long failures = 0, with_error_metric = 0;
    double wall = 0.0;
    for (int t = 0; t < config.trials; ++t) {
      const TrialResult& res =
          table.trial_results[cell * static_cast<std::size_t>(config.trials) +
                              static_cast<std::size_t>(t)];
      wall += res.wall_ms;
      if (res.errored) continue;
      if (std::isfinite(res.estimation_error)) {
        errs.push_back(res.estimation_error);
        ++with_error_metric;
        if (res.estimation_error >= agg.r) ++failures;
      }
      if (std::isfinite(res.prediction_gap)) {
        gaps.push_back(res.prediction_gap);
        gap_ses.push_back(res.gap_std_error);
      }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (with_error_metric > 0) {
      agg.fail_freq = static_cast<double>(failures) / with_error_metric;
      const auto [lo, hi] = wilson_interval(failures, with_error_metric, 0.99);
      agg.fail_ci_lo = lo;
      agg.fail_ci_hi = hi;
      agg.median_err = quantile(errs, 0.5);
      agg.q90_err = quantile(errs, 0.9);
    } else {
      agg.fail_freq = agg.fail_ci_lo = agg.fail_ci_hi = nan;
      agg.median_err = agg.q90_err = nan;
    }
    if (!gaps.empty()) {
      agg.median_gap = quantile(gaps, 0.5);
      agg.median_gap_se = quantile(gap_ses, 0.5);
    } else {
      agg.median_gap = agg.median_gap_se = nan;
    }
    agg.runtime_ms =
        config.timing == "wall" ? static_cast<long long>(wall) : 0;
    table.cells.push_back(std::move(agg));
  }
  return table;
}

// ---- emit ---------------------------------------------------------------------

namespace {

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string render(const ResultTable& table, const std::string& format) {
  if (format == "csv") {
    std::string out =
        "method,N,r,trials,fail_freq,fail_ci_lo,fail_ci_hi,median_err,"
        "q90_err,median_gap,runtime_ms\n";
    for (const auto& c : table.cells) {
      out += to_string(c.method);
      out += ',';
      out += std::to_string(c.N);
      out += ',';
      out += fmt_double(c.r);
      out += ',';
      out += std::to_string(c.trials);
      out += ',';
      out += fmt_double(c.fail_freq);
      out += ',';
      out += fmt_double(c.fail_ci_lo);
      out += ',';
      out += fmt_double(c.fail_ci_hi);
      out += ',';
      out += fmt_double(c.median_err);
      out += ',';
      out += fmt_double(c.q90_err);
      out += ',';
      out += fmt_double(c.median_gap);
      out += ',';
      out += std::to_string(c.runtime_ms);
      out += '\n';
    }
    return out;
  }
  if (format == "json") {
    ordered_json j;
    j["schema_version"] = 1;
    j["columns"] = {"method",      "N",         "r",          "trials",
                    "fail_freq",   "fail_ci_lo", "fail_ci_hi", "median_err",
                    "q90_err",     "median_gap", "runtime_ms"};
    ordered_json rows = ordered_json::array();
    for (const auto& c : table.cells) {
      ordered_json row;
      row["method"] = to_string(c.method);
      row["N"] = c.N;
      row["r"] = c.r;
      row["trials"] = c.trials;
      row["fail_freq"] = c.fail_freq;
      row["fail_ci_lo"] = c.fail_ci_lo;
      row["fail_ci_hi"] = c.fail_ci_hi;
      row["median_err"] = c.median_err;
      row["q90_err"] = c.q90_err;
      row["median_gap"] = c.median_gap;
      row["runtime_ms"] = c.runtime_ms;
      row["median_gap_se"] = c.median_gap_se;
      rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    return j.dump(2) + "\n";
  }
  throw std::invalid_argument("render: format must be 'csv' or 'json'");
}

void emit(const ResultTable& table, const std::string& format,
          const std::string& path) {
  if (table.cells.empty()) {
    throw std::invalid_argument("emit: empty result table");
  }
  const std::string bytes = render(table, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("emit: cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("emit: write to '" + path + "' failed");
}

}  // namespace momopt
