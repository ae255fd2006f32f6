// momopt CLI: seeded Monte-Carlo experiments comparing SAA with
// median-of-means procedures over (N, r) grids.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "momopt/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

std::optional<std::string> env_var(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

void apply_overrides(momopt::ExperimentConfig& cfg,
                     const std::optional<std::uint64_t>& seed_flag,
                     const std::optional<int>& trials_flag,
                     const std::optional<std::string>& out_flag,
                     const std::optional<std::string>& format_flag,
                     const std::optional<int>& threads_flag) {
  // precedence: config < environment < command line
  if (auto e = env_var("MOMOPT_SEED")) cfg.seed = std::stoull(*e);
  if (auto e = env_var("MOMOPT_THREADS")) cfg.threads = std::stoi(*e);
  if (seed_flag) cfg.seed = *seed_flag;
  if (trials_flag) cfg.trials = *trials_flag;
  if (out_flag) cfg.out_path = *out_flag;
  if (format_flag) cfg.format = *format_flag;
  if (threads_flag) cfg.threads = *threads_flag;
}

int cmd_run(const std::string& config_path,
            const std::optional<std::uint64_t>& seed,
            const std::optional<int>& trials,
            const std::optional<std::string>& out,
            const std::optional<std::string>& format,
            const std::optional<int>& threads) {
  auto cfg = momopt::ExperimentConfig::from_json_file(config_path);
  apply_overrides(cfg, seed, trials, out, format, threads);
  cfg.validate();
  if (cfg.out_path.empty()) {
    throw std::invalid_argument("config: no output path (set \"out\" or --out)");
  }

  const momopt::ResultTable table = momopt::run_experiment(cfg);
  momopt::emit(table, cfg.format, cfg.out_path);

  long errored = 0;
  for (const auto& t : table.trial_results) errored += t.errored ? 1 : 0;
  std::cout << "wrote " << table.cells.size() << " cells ("
            << table.trial_results.size() << " trials, " << errored
            << " errored) to " << cfg.out_path << "\n";
  return kExitOk;
}

int cmd_validate(const std::string& config_path) {
  auto cfg = momopt::ExperimentConfig::from_json_file(config_path);
  cfg.validate();
  std::cout << "config ok: problem=" << cfg.problem_kind
            << " methods=" << cfg.methods.size()
            << " cells=" << cfg.methods.size() * cfg.N_grid.size() *
                                cfg.r_grid.size()
            << " trials=" << cfg.trials << "\n";
  return kExitOk;
}

int cmd_list_problems() {
  std::cout << "problems:\n"
            << "  mean_estimation    F(x,xi) = |x - xi|^2 / 2\n"
            << "  linear_regression  F(x,(X,Y)) = (<X,x> - Y)^2 / 2\n"
            << "  ridge_regression   F(x,(X,Y)) = (<X,x> - Y)^2 + |x|^2\n"
            << "  quadratic          F(x,(b,A)) = <b,x> + <Ax,x>/2\n"
            << "  portfolio          F(x,(X,Y)) = loss(-Y - <X - prices, x>)\n"
            << "methods: saa, mom_tournament, mom_scalar\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"median-of-means tournament experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<int> threads;

  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "JSON config file")->required();
  run->add_option("--seed", seed, "root seed override");
  run->add_option("--trials", trials, "trials per cell override");
  run->add_option("--out", out, "output path override");
  run->add_option("--format", format, "csv or json");
  run->add_option("--threads", threads, "worker thread count");

  auto* validate = app.add_subcommand("validate", "check a config file");
  validate->add_option("config", config_path, "JSON config file")->required();

  app.add_subcommand("list-problems", "list built-in problems and methods");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (app.got_subcommand("run")) {
      return cmd_run(config_path, seed, trials, out, format, threads);
    }
    if (app.got_subcommand("validate")) {
      return cmd_validate(config_path);
    }
    return cmd_list_problems();
  } catch (const momopt::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
