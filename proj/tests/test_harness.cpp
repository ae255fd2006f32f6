#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "momopt/harness.hpp"

using namespace momopt;

namespace {

const char* kScalarConfig = R"({
  "problem": {"kind": "mean_estimation"},
  "distribution": {"kind": "gaussian", "dim": 1},
  "methods": ["saa", "mom_scalar"],
  "N_grid": [64, 128],
  "r_grid": [0.5],
  "trials": 40,
  "seed": 7,
  "format": "csv"
})";

ExperimentConfig scalar_config() {
  return ExperimentConfig::from_json_string(kScalarConfig);
}

}  // namespace

TEST_CASE("config parsing fills the documented fields") {
  const auto cfg = scalar_config();
  CHECK(cfg.problem_kind == "mean_estimation");
  CHECK(cfg.methods.size() == 2);
  CHECK(cfg.methods[0] == Method::saa);
  CHECK(cfg.methods[1] == Method::mom_scalar);
  CHECK(cfg.N_grid == std::vector<Eigen::Index>{64, 128});
  CHECK(cfg.r_grid == std::vector<double>{0.5});
  CHECK(cfg.trials == 40);
  CHECK(cfg.seed == 7);
  CHECK(cfg.theta == 0.1);
  CHECK(cfg.timing == "none");
}

TEST_CASE("config validation names the offending field") {
  auto check_message = [](const std::string& json, const char* needle) {
    try {
      ExperimentConfig::from_json_string(json);
      FAIL("expected a config error for ", needle);
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  check_message(R"({"problem": {"kind": "mean_estimation"},
                    "distribution": {"kind": "gaussian", "dim": 1},
                    "methods": [], "N_grid": [64], "r_grid": [0.5],
                    "trials": 1})",
                "method list");
  check_message(R"({"problem": {"kind": "mean_estimation"},
                    "distribution": {"kind": "gaussian", "dim": 1},
                    "methods": ["saa"], "N_grid": [], "r_grid": [0.5],
                    "trials": 1})",
                "N grid");
  check_message(R"({"problem": {"kind": "mean_estimation"},
                    "distribution": {"kind": "gaussian", "dim": 1},
                    "methods": ["saa"], "N_grid": [64], "r_grid": [],
                    "trials": 1})",
                "r grid");
  check_message(R"({"problem": {"kind": "mean_estimation"},
                    "distribution": {"kind": "gaussian", "dim": 1},
                    "methods": ["saa"], "N_grid": [64], "r_grid": [0.5],
                    "trials": 0})",
                "trials");
  check_message(R"({"problem": {"kind": "mean_estimation"},
                    "distribution": {"kind": "gaussian", "dim": 2},
                    "methods": ["mom_scalar"], "N_grid": [64],
                    "r_grid": [0.5], "trials": 1})",
                "mom_scalar");
  check_message(R"({"problem": {"kind": "unknown_kind"},
                    "distribution": {"kind": "gaussian", "dim": 1},
                    "methods": ["saa"], "N_grid": [64], "r_grid": [0.5],
                    "trials": 1})",
                "problem kind");
  check_message("{not json", "invalid JSON");
}

TEST_CASE("run_experiment produces cells in fixed grid order") {
  auto cfg = ExperimentConfig::from_json_string(R"({
    "problem": {"kind": "mean_estimation"},
    "distribution": {"kind": "gaussian", "dim": 1},
    "methods": ["saa", "mom_scalar"],
    "N_grid": [64, 128],
    "r_grid": [0.3, 0.5],
    "trials": 5,
    "seed": 3
  })");
  const auto table = run_experiment(cfg);
  REQUIRE(table.cells.size() == 8);
  // method-major, then N, then r
  int idx = 0;
  for (Method m : {Method::saa, Method::mom_scalar}) {
    for (Eigen::Index n : {64, 128}) {
      for (double r : {0.3, 0.5}) {
        CHECK(table.cells[idx].method == m);
        CHECK(table.cells[idx].N == n);
        CHECK(table.cells[idx].r == r);
        ++idx;
      }
    }
  }
  CHECK(table.trial_results.size() == 8 * 5);
  for (const auto& t : table.trial_results) CHECK_FALSE(t.errored);
}

TEST_CASE("identical config and seed render byte-identical artifacts") {
  const auto cfg = scalar_config();
  const auto t1 = run_experiment(cfg);
  const auto t2 = run_experiment(cfg);
  CHECK(render(t1, "csv") == render(t2, "csv"));
  CHECK(render(t1, "json") == render(t2, "json"));

  auto threaded = cfg;
  threaded.threads = 4;
  const auto t3 = run_experiment(threaded);
  CHECK(render(t1, "csv") == render(t3, "csv"));
  CHECK(render(t1, "json") == render(t3, "json"));
}

TEST_CASE("csv header and row shape are stable") {
  auto cfg = scalar_config();
  cfg.N_grid = {64};
  cfg.methods = {Method::saa};
  cfg.trials = 3;
  const auto table = run_experiment(cfg);
  const std::string csv = render(table, "csv");
  std::istringstream lines(csv);
  std::string header, row, extra;
  std::getline(lines, header);
  CHECK(header ==
        "method,N,r,trials,fail_freq,fail_ci_lo,fail_ci_hi,median_err,"
        "q90_err,median_gap,runtime_ms");
  REQUIRE(std::getline(lines, row));
  CHECK_FALSE(std::getline(lines, extra));  // exactly one data row

  // the row round-trips through a reader
  std::istringstream cells(row);
  std::string field;
  std::vector<std::string> fields;
  while (std::getline(cells, field, ',')) fields.push_back(field);
  REQUIRE(fields.size() == 11);
  CHECK(fields[0] == "saa");
  CHECK(std::stoll(fields[1]) == 64);
  CHECK(std::stod(fields[2]) == doctest::Approx(0.5));
  CHECK(std::stoi(fields[3]) == 3);
  for (std::size_t i = 4; i < 10; ++i) CHECK(std::isfinite(std::stod(fields[i])));
  CHECK(std::stoll(fields[10]) == 0);  // timing "none" pins runtime to zero
}

TEST_CASE("json artifact mirrors the columns with a schema version") {
  auto cfg = scalar_config();
  cfg.trials = 3;
  const auto table = run_experiment(cfg);
  const std::string js = render(table, "json");
  CHECK(js.find("\"schema_version\": 1") != std::string::npos);
  for (const char* col :
       {"\"method\"", "\"N\"", "\"r\"", "\"trials\"", "\"fail_freq\"",
        "\"fail_ci_lo\"", "\"fail_ci_hi\"", "\"median_err\"", "\"q90_err\"",
        "\"median_gap\"", "\"runtime_ms\"", "\"median_gap_se\""}) {
    CHECK(js.find(col) != std::string::npos);
  }
}

TEST_CASE("emit writes files and reports io errors") {
  auto cfg = scalar_config();
  cfg.trials = 2;
  cfg.N_grid = {64};
  cfg.methods = {Method::saa};
  const auto table = run_experiment(cfg);
  const std::string path = "harness_emit_test.csv";
  emit(table, "csv", path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == render(table, "csv"));
  in.close();
  std::remove(path.c_str());

  CHECK_THROWS_AS(emit(table, "csv", "no-such-dir-momopt/out.csv"), IoError);
  ResultTable empty;
  CHECK_THROWS_AS(emit(empty, "csv", "x.csv"), std::invalid_argument);
}

TEST_CASE("failure frequency decays with N on the Gaussian mean problem") {
  auto cfg = ExperimentConfig::from_json_string(R"({
    "problem": {"kind": "mean_estimation"},
    "distribution": {"kind": "gaussian", "dim": 2},
    "methods": ["saa"],
    "N_grid": [16, 64, 256],
    "r_grid": [0.4],
    "trials": 300,
    "seed": 21
  })");
  const auto table = run_experiment(cfg);
  REQUIRE(table.cells.size() == 3);
  // statistical monotonicity: each larger-N frequency must not exceed the
  // smaller-N one beyond confidence-interval overlap
  for (int i = 1; i < 3; ++i) {
    CHECK(table.cells[i].fail_ci_lo <= table.cells[i - 1].fail_ci_hi);
  }
  CHECK(table.cells[2].fail_freq < table.cells[0].fail_freq);
}

TEST_CASE("tournament median error shrinks at the CLT rate on Gaussian mean") {
  auto cfg = ExperimentConfig::from_json_string(R"({
    "problem": {"kind": "mean_estimation"},
    "distribution": {"kind": "gaussian", "dim": 4},
    "methods": ["mom_tournament"],
    "N_grid": [250, 1000, 4000],
    "r_grid": [0.18],
    "trials": 60,
    "seed": 5,
    "pool_blocks": 2
  })");
  const auto table = run_experiment(cfg);
  REQUIRE(table.cells.size() == 3);
  const double m250 = table.cells[0].median_err;
  const double m1000 = table.cells[1].median_err;
  const double m4000 = table.cells[2].median_err;
  // ~2x shrink per 4x N, with Monte-Carlo slack
  CHECK(m250 / m1000 > 1.4);
  CHECK(m250 / m1000 < 3.0);
  CHECK(m1000 / m4000 > 1.4);
  CHECK(m1000 / m4000 < 3.0);
}

TEST_CASE("problems without ground truth use the evaluation-sample gap") {
  auto cfg = ExperimentConfig::from_json_string(R"({
    "problem": {"kind": "portfolio",
                "loss": {"kind": "softplus_power", "p": 3},
                "prices": [0, 0]},
    "distribution": {"kind": "bachelier_pair", "coef": [0.2, -0.1],
                     "noise": {"kind": "gaussian", "sd": 0.2}},
    "methods": ["saa"],
    "N_grid": [200],
    "r_grid": [0.5],
    "trials": 4,
    "seed": 9,
    "eval_sample_factor": 5
  })");
  const auto table = run_experiment(cfg);
  REQUIRE(table.cells.size() == 1);
  for (const auto& t : table.trial_results) {
    CHECK_FALSE(t.errored);
    CHECK(std::isnan(t.estimation_error));  // no ground truth
    CHECK(std::isfinite(t.prediction_gap));
    CHECK(t.gap_std_error > 0.0);
  }
  CHECK(std::isnan(table.cells[0].fail_freq));
  CHECK(std::isfinite(table.cells[0].median_gap));
  CHECK(table.cells[0].median_gap_se > 0.0);
  // the SAA reference gap is near zero from above at these sizes
  CHECK(table.cells[0].median_gap > -1e-3);
}

TEST_CASE("wall timing fills runtime_ms when requested") {
  auto cfg = scalar_config();
  cfg.trials = 5;
  cfg.N_grid = {128};
  cfg.methods = {Method::saa};
  cfg.timing = "wall";
  const auto table = run_experiment(cfg);
  CHECK(table.cells[0].runtime_ms >= 0);
  for (const auto& t : table.trial_results) CHECK(t.wall_ms >= 0.0);
}
