#include "momopt/tournament.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "momopt/rng.hpp"

namespace momopt {

namespace {

/// Per-candidate, per-block empirical objective means; rows are pool
/// members, columns are blocks. All tournament verdicts are read off this
/// matrix.
Eigen::MatrixXd block_objective_table(const StochasticProblem& problem,
                                      const ScenarioSample& sample,
                                      const BlockPartition& partition,
                                      const std::vector<Action>& pool) {
  Eigen::MatrixXd table(static_cast<Eigen::Index>(pool.size()),
                        static_cast<Eigen::Index>(partition.n));
  for (std::size_t c = 0; c < pool.size(); ++c) {
    for (std::size_t j = 0; j < partition.n; ++j) {
      double sum = 0.0;
      for (std::size_t i = partition.begin(j); i < partition.end(j); ++i) {
        sum += problem.objective(pool[c],
                                 sample.scenario(static_cast<Eigen::Index>(i)));
      }
      table(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) =
          sum / static_cast<double>(partition.block_size);
    }
  }
  return table;
}

MatchRecord match_from_rows(const Eigen::MatrixXd& table, int xi, int yi,
                            double slack, bool strict) {
  MatchRecord rec;
  rec.x_index = xi;
  rec.y_index = yi;
  rec.n = static_cast<int>(table.cols());
  for (Eigen::Index j = 0; j < table.cols(); ++j) {
    const double fx = table(xi, j);
    const double fy = table(yi, j);
    const bool beat = strict ? (fx < fy) : (fx <= fy + slack);
    if (beat) ++rec.blocks_won;
  }
  rec.won = 2 * rec.blocks_won > rec.n;
  return rec;
}

struct Phase1Result {
  BlockPartition partition;
  std::vector<MatchRecord> matches;
  std::vector<int> champions;
};

Phase1Result phase1_eval(const StochasticProblem& problem,
                         const ScenarioSample& sample,
                         const TournamentConfig& config,
                         const std::vector<Action>& pool) {
  if (pool.empty()) {
    throw std::invalid_argument("tournament: empty candidate pool");
  }
  const std::size_t N = static_cast<std::size_t>(sample.size());
  const std::size_t n =
      choose_block_count(N, config.r, config.sigma2, config.theta);
  Phase1Result res;
  res.partition = make_partition(N, n);
  const Eigen::MatrixXd table =
      block_objective_table(problem, sample, res.partition, pool);

  const int P = static_cast<int>(pool.size());
  std::vector<bool> is_champion(static_cast<std::size_t>(P), true);
  for (int i = 0; i < P; ++i) {
    for (int k = 0; k < P; ++k) {
      if (i == k) continue;
      if (config.norm.distance(pool[static_cast<std::size_t>(i)],
                               pool[static_cast<std::size_t>(k)]) < config.r) {
        continue;  // too close; no match required
      }
      MatchRecord rec = match_from_rows(table, i, k, 0.0, /*strict=*/true);
      res.matches.push_back(rec);
      if (!rec.won) is_champion[static_cast<std::size_t>(i)] = false;
    }
  }
  for (int i = 0; i < P; ++i) {
    if (is_champion[static_cast<std::size_t>(i)]) res.champions.push_back(i);
  }
  return res;
}

}  // namespace

CandidatePolicy CandidatePolicy::user_pool(std::vector<Action> actions) {
  CandidatePolicy p;
  p.kind = Kind::user_pool;
  p.pool = std::move(actions);
  return p;
}

CandidatePolicy CandidatePolicy::blockwise_saa(int count) {
  if (count < 1) {
    throw std::invalid_argument("blockwise_saa: count must be >= 1");
  }
  CandidatePolicy p;
  p.kind = Kind::blockwise_saa;
  p.count = count;
  return p;
}

CandidatePolicy CandidatePolicy::saa_plus_perturbations(int count,
                                                        double scale) {
  if (count < 0 || scale <= 0.0) {
    throw std::invalid_argument("saa_plus_perturbations: invalid parameters");
  }
  CandidatePolicy p;
  p.kind = Kind::saa_plus_perturbations;
  p.count = count;
  p.scale = scale;
  return p;
}

void TournamentConfig::validate(int dimension) const {
  if (r <= 0.0) throw std::invalid_argument("TournamentConfig: r must be > 0");
  if (theta <= 0.0 || theta >= 1.0) {
    throw std::invalid_argument("TournamentConfig: theta must be in (0,1)");
  }
  if (sigma2 <= 0.0) {
    throw std::invalid_argument("TournamentConfig: sigma2 must be > 0");
  }
  if (c_H < 1.0) {
    throw std::invalid_argument("TournamentConfig: c_H must be >= 1");
  }
  if (split_fraction <= 0.0 || split_fraction >= 1.0) {
    throw std::invalid_argument(
        "TournamentConfig: split_fraction must be in (0,1)");
  }
  if (norm.dimension() != dimension) {
    throw std::invalid_argument("TournamentConfig: norm dimension mismatch");
  }
}

double block_objective(const StochasticProblem& problem,
                       const ScenarioSample& sample,
                       const BlockPartition& partition, const Action& x,
                       std::size_t j) {
  if (j >= partition.n) {
    throw std::out_of_range("block_objective: block index out of range");
  }
  if (static_cast<std::size_t>(sample.size()) < partition.covered()) {
    throw std::invalid_argument("block_objective: sample shorter than partition");
  }
  double sum = 0.0;
  for (std::size_t i = partition.begin(j); i < partition.end(j); ++i) {
    sum += problem.objective(x, sample.scenario(static_cast<Eigen::Index>(i)));
  }
  return sum / static_cast<double>(partition.block_size);
}

bool defeats_on_block(const StochasticProblem& problem,
                      const ScenarioSample& sample,
                      const BlockPartition& partition, const Action& x,
                      const Action& y, std::size_t j) {
  return block_objective(problem, sample, partition, x, j) <
         block_objective(problem, sample, partition, y, j);
}

MatchRecord wins_match(const StochasticProblem& problem,
                       const ScenarioSample& sample,
                       const BlockPartition& partition, const Action& x,
                       const Action& y) {
  MatchRecord rec;
  rec.n = static_cast<int>(partition.n);
  for (std::size_t j = 0; j < partition.n; ++j) {
    if (defeats_on_block(problem, sample, partition, x, y, j)) {
      ++rec.blocks_won;
    }
  }
  rec.won = 2 * rec.blocks_won > rec.n;
  return rec;
}

MatchRecord wins_home_match(const StochasticProblem& problem,
                            const ScenarioSample& sample2,
                            const BlockPartition& partition2, const Action& x,
                            const Action& y, double c_H, double r) {
  const double slack = c_H * r * r / 4.0;
  MatchRecord rec;
  rec.n = static_cast<int>(partition2.n);
  for (std::size_t j = 0; j < partition2.n; ++j) {
    const double fx = block_objective(problem, sample2, partition2, x, j);
    const double fy = block_objective(problem, sample2, partition2, y, j);
    if (fx <= fy + slack) ++rec.blocks_won;
  }
  rec.won = 2 * rec.blocks_won > rec.n;
  return rec;
}

std::vector<int> champion_set(const StochasticProblem& problem,
                              const ScenarioSample& sample,
                              const TournamentConfig& config,
                              const std::vector<Action>& pool) {
  config.validate(problem.dimension);
  return phase1_eval(problem, sample, config, pool).champions;
}

CandidateSet generate_candidates(const StochasticProblem& problem,
                                 const ScenarioSample& sample,
                                 const CandidatePolicy& policy,
                                 const TournamentConfig& config) {
  if (sample.size() == 0) {
    throw std::invalid_argument("generate_candidates: empty sample");
  }
  CandidateSet out;

  if (policy.kind == CandidatePolicy::Kind::user_pool) {
    if (policy.pool.empty()) {
      throw std::invalid_argument("generate_candidates: user pool is empty");
    }
    for (std::size_t i = 0; i < policy.pool.size(); ++i) {
      if (!problem.feasible_set.contains(policy.pool[i])) {
        throw std::invalid_argument(
            "generate_candidates: user pool candidate " + std::to_string(i) +
            " is infeasible");
      }
    }
    out.actions = policy.pool;
    return out;
  }

  std::vector<Action> raw;
  auto try_saa = [&](const ScenarioSample& sub, const std::string& label) {
    const SaaResult res = saa_minimize(problem, sub, policy.saa_options);
    if (!res.converged) {
      out.warnings.push_back("candidate dropped: SAA on " + label +
                             " did not converge (projected gradient " +
                             std::to_string(res.projected_gradient_norm) +
                             ")");
      return;
    }
    raw.push_back(problem.feasible_set.project(res.x));
  };

  // the full-sample solution first, so deduplication keeps it
  try_saa(sample, "full sample");

  if (policy.kind == CandidatePolicy::Kind::blockwise_saa) {
    const auto part = make_partition(static_cast<std::size_t>(sample.size()),
                                     static_cast<std::size_t>(policy.count));
    for (std::size_t j = 0; j < part.n; ++j) {
      try_saa(sample.slice(static_cast<Eigen::Index>(part.begin(j)),
                           static_cast<Eigen::Index>(part.block_size)),
              "sub-sample " + std::to_string(j));
    }
  } else {  // saa_plus_perturbations
    if (!raw.empty()) {
      const Action base = raw.front();
      Rng rng(split_seed(sample.seed, 0x70657274ULL));  // "pert"
      for (int k = 0; k < policy.count; ++k) {
        Eigen::VectorXd z(problem.dimension);
        for (int i = 0; i < problem.dimension; ++i) z[i] = rng.normal();
        raw.push_back(
            problem.feasible_set.project(base + policy.scale * z));
      }
    }
  }

  // deduplicate at r/10 in the tournament norm
  const double tol = config.r / 10.0;
  for (const auto& cand : raw) {
    bool dup = false;
    for (const auto& kept : out.actions) {
      if (config.norm.distance(cand, kept) <= tol) {
        dup = true;
        break;
      }
    }
    if (!dup) out.actions.push_back(cand);
  }
  if (out.actions.empty()) {
    throw std::runtime_error(
        "generate_candidates: no candidate survived (all SAA solves failed)");
  }
  return out;
}

TournamentReport run_tournament(const StochasticProblem& problem,
                                const ScenarioSample& sample,
                                const TournamentConfig& config) {
  config.validate(problem.dimension);
  const Eigen::Index N = sample.size();
  if (N < 2) {
    throw std::invalid_argument("run_tournament: need at least two scenarios");
  }
  const Eigen::Index N1 = std::max<Eigen::Index>(
      1, std::min<Eigen::Index>(
             N - 1, static_cast<Eigen::Index>(
                        std::floor(config.split_fraction *
                                   static_cast<double>(N)))));
  const ScenarioSample s1 = sample.slice(0, N1);
  const ScenarioSample s2 = sample.slice(N1, N - N1);

  TournamentReport report;
  report.r = config.r;
  report.theta = config.theta;
  report.sigma2 = config.sigma2;
  report.c_H = config.c_H;
  report.sigma2_tier = to_string(config.sigma2_tier);
  report.c_H_tier = to_string(config.c_H_tier);
  report.norm_tier = to_string(config.norm_tier);

  CandidateSet candidates =
      generate_candidates(problem, s1, config.candidate_policy, config);
  report.pool = candidates.actions;
  report.warnings = std::move(candidates.warnings);

  // phase 1: champions on the first split
  Phase1Result p1 = phase1_eval(problem, s1, config, report.pool);
  report.phase1_partition = {p1.partition.n, p1.partition.block_size,
                             p1.partition.discarded};
  report.phase1_matches = std::move(p1.matches);
  report.champions = std::move(p1.champions);

  if (report.champions.empty()) {
    report.champions_fallback = true;
    report.selected = saa_minimize(problem, sample).x;
    report.selected_index = -1;
    report.warnings.push_back(
        "champion set empty; fell back to full-sample SAA");
    return report;
  }

  // phase 2: home matches among champions on the fresh split
  const std::size_t N2 = static_cast<std::size_t>(s2.size());
  const std::size_t n2 =
      choose_block_count(N2, config.r, config.sigma2, config.theta);
  const BlockPartition part2 = make_partition(N2, n2);
  report.phase2_partition = {part2.n, part2.block_size, part2.discarded};

  std::vector<Action> champ_actions;
  champ_actions.reserve(report.champions.size());
  for (int idx : report.champions) {
    champ_actions.push_back(report.pool[static_cast<std::size_t>(idx)]);
  }
  const Eigen::MatrixXd table2 =
      block_objective_table(problem, s2, part2, champ_actions);
  const double slack = config.c_H * config.r * config.r / 4.0;

  const int C = static_cast<int>(report.champions.size());
  std::vector<bool> is_winner(static_cast<std::size_t>(C), true);
  for (int a = 0; a < C; ++a) {
    for (int b = 0; b < C; ++b) {
      if (a == b) continue;
      MatchRecord rec = match_from_rows(table2, a, b, slack, /*strict=*/false);
      rec.x_index = report.champions[static_cast<std::size_t>(a)];
      rec.y_index = report.champions[static_cast<std::size_t>(b)];
      report.phase2_matches.push_back(rec);
      if (!rec.won) is_winner[static_cast<std::size_t>(a)] = false;
    }
  }
  for (int a = 0; a < C; ++a) {
    if (is_winner[static_cast<std::size_t>(a)]) {
      report.winners.push_back(report.champions[static_cast<std::size_t>(a)]);
    }
  }

  std::vector<int> effective = report.winners;
  if (effective.empty()) {
    report.winners_fallback = true;
    effective = report.champions;
    report.warnings.push_back("winner set empty; fell back to champions");
  }

  // selection: smallest phase-2 median of block means, ties to lowest index
  int best = effective.front();
  double best_mom = std::numeric_limits<double>::infinity();
  for (int idx : effective) {
    const auto pos = std::find(report.champions.begin(),
                               report.champions.end(), idx) -
                     report.champions.begin();
    const double mom = median(table2.row(pos).transpose());
    if (mom < best_mom) {
      best_mom = mom;
      best = idx;
    }
  }
  report.selected_index = best;
  report.selected = report.pool[static_cast<std::size_t>(best)];
  return report;
}

std::string TournamentReport::to_json_string(int indent) const {
  using json = nlohmann::ordered_json;
  auto vec_to_json = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  auto matches_to_json = [](const std::vector<MatchRecord>& ms) {
    json arr = json::array();
    for (const auto& m : ms) {
      arr.push_back({{"x", m.x_index},
                     {"y", m.y_index},
                     {"blocks_won", m.blocks_won},
                     {"n", m.n},
                     {"won", m.won}});
    }
    return arr;
  };
  auto partition_to_json = [](const PartitionMeta& p) {
    return json{{"n", p.n}, {"m", p.m}, {"discarded", p.discarded}};
  };

  json j;
  j["schema_version"] = 1;
  json pool_arr = json::array();
  for (const auto& a : pool) pool_arr.push_back(vec_to_json(a));
  j["pool"] = std::move(pool_arr);
  j["phase1"] = {{"partition", partition_to_json(phase1_partition)},
                 {"matches", matches_to_json(phase1_matches)}};
  j["champions"] = champions;
  j["phase2"] = {{"partition", partition_to_json(phase2_partition)},
                 {"matches", matches_to_json(phase2_matches)}};
  j["winners"] = winners;
  j["selected_index"] = selected_index;
  j["selected"] = selected.size() > 0 ? json(vec_to_json(selected)) : json();
  j["fallback"] = {{"winners_empty", winners_fallback},
                   {"champions_empty", champions_fallback}};
  j["parameters"] = {{"r", r},
                     {"theta", theta},
                     {"sigma2", sigma2},
                     {"c_H", c_H},
                     {"sigma2_tier", sigma2_tier},
                     {"c_H_tier", c_H_tier},
                     {"norm_tier", norm_tier}};
  j["warnings"] = warnings;
  return j.dump(indent);
}

}  // namespace momopt
