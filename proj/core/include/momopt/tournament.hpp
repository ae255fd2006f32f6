#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "momopt/core.hpp"
#include "momopt/hnorm.hpp"
#include "momopt/mom.hpp"
#include "momopt/problem.hpp"
#include "momopt/saa.hpp"

namespace momopt {

/// How the finite candidate pool is produced. The procedure's guarantees
/// are pairwise, so restricting the continuous feasible set to a generated
/// pool preserves them against every pool member.
struct CandidatePolicy {
  enum class Kind { user_pool, blockwise_saa, saa_plus_perturbations };

  Kind kind = Kind::blockwise_saa;
  std::vector<Action> pool;  // user_pool
  int count = 4;             // sub-samples / perturbations
  double scale = 0.1;        // perturbation scale
  SolverOptions saa_options;

  static CandidatePolicy user_pool(std::vector<Action> actions);
  static CandidatePolicy blockwise_saa(int count);
  static CandidatePolicy saa_plus_perturbations(int count, double scale);
};

struct TournamentConfig {
  double r = 0.0;        // target accuracy in ||.|| units
  double theta = 0.1;    // block-count tuning parameter in (0,1)
  double sigma2 = 0.0;   // variance proxy
  double c_H = 1.0;      // curvature constant, >= 1
  HNorm norm = HNorm::identity(1);
  CandidatePolicy candidate_policy;
  double split_fraction = 0.5;  // share of the sample used by phase 1

  // provenance of the parameters, recorded in every report
  ParameterTier sigma2_tier = ParameterTier::user_supplied;
  ParameterTier c_H_tier = ParameterTier::user_supplied;
  ParameterTier norm_tier = ParameterTier::user_supplied;

  void validate(int dimension) const;
};

struct MatchRecord {
  int x_index = -1;
  int y_index = -1;
  int blocks_won = 0;
  int n = 0;
  bool won = false;  // blocks_won > n/2, strictly
};

struct PartitionMeta {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t discarded = 0;
};

struct TournamentReport {
  std::vector<Action> pool;
  std::vector<MatchRecord> phase1_matches;
  std::vector<int> champions;
  std::vector<MatchRecord> phase2_matches;
  std::vector<int> winners;
  Action selected;
  int selected_index = -1;
  PartitionMeta phase1_partition, phase2_partition;

  // set when a high-probability event failed at this sample size
  bool winners_fallback = false;    // winners empty -> champions used
  bool champions_fallback = false;  // champions empty -> full-sample SAA

  double r = 0.0, theta = 0.0, sigma2 = 0.0, c_H = 0.0;
  std::string sigma2_tier, c_H_tier, norm_tier;
  std::vector<std::string> warnings;

  /// Stable JSON rendering (schema_version 1); byte-identical for
  /// identical reports.
  std::string to_json_string(int indent = 2) const;
};

/// Mean of F(x, xi_i) over block j of the partition.
double block_objective(const StochasticProblem& problem,
                       const ScenarioSample& sample,
                       const BlockPartition& partition, const Action& x,
                       std::size_t j);

/// x defeats y on block j iff the block objective of x is strictly smaller.
bool defeats_on_block(const StochasticProblem& problem,
                      const ScenarioSample& sample,
                      const BlockPartition& partition, const Action& x,
                      const Action& y, std::size_t j);

/// x wins the match iff it defeats y on strictly more than n/2 blocks.
MatchRecord wins_match(const StochasticProblem& problem,
                       const ScenarioSample& sample,
                       const BlockPartition& partition, const Action& x,
                       const Action& y);

/// Home match with additive slack c_H r^2 / 4 and non-strict comparison;
/// sample2 must be independent of the sample that selected the champions.
MatchRecord wins_home_match(const StochasticProblem& problem,
                            const ScenarioSample& sample2,
                            const BlockPartition& partition2, const Action& x,
                            const Action& y, double c_H, double r);

/// Indices of pool members that win their match against every other member
/// at ||.||-distance >= r. Members with no such competitor are champions
/// vacuously.
std::vector<int> champion_set(const StochasticProblem& problem,
                              const ScenarioSample& sample,
                              const TournamentConfig& config,
                              const std::vector<Action>& pool);

struct CandidateSet {
  std::vector<Action> actions;
  std::vector<std::string> warnings;  // dropped candidates, projections
};

/// Resolve a candidate policy into a concrete pool. Blockwise SAA solves on
/// `count` disjoint sub-samples plus the full sample (full-sample candidate
/// first), projects into the feasible set, and deduplicates at tolerance
/// r/10 in config.norm. Non-converged solves are dropped with a warning,
/// never silently.
CandidateSet generate_candidates(const StochasticProblem& problem,
                                 const ScenarioSample& sample,
                                 const CandidatePolicy& policy,
                                 const TournamentConfig& config);

/// The two-phase tournament: champions on the first split, home matches on
/// the second, winner with the smallest phase-2 median-of-block-means
/// objective selected (ties broken by lowest pool index). Empty winner or
/// champion sets fall back (to champions, then to full-sample SAA) with
/// explicit report flags.
TournamentReport run_tournament(const StochasticProblem& problem,
                                const ScenarioSample& sample,
                                const TournamentConfig& config);

}  // namespace momopt
