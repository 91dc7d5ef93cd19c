// visr: train, inspect and query VISR agents on the gridworld.
//
// Exit codes: 0 ok, 2 usage/config error, 3 numerical failure.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "visr.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

/// --seed, else $VISR_SEED, else `fallback`.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv("VISR_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw visr::ConfigError(std::string("VISR_SEED is not an unsigned integer: ") + env);
    }
  }
  return fallback;
}

int parse_goal(const std::string& text, const visr::GridWorld& env) {
  const auto comma = text.find(',');
  int row = 0;
  int col = 0;
  try {
    if (comma == std::string::npos) throw std::invalid_argument("missing comma");
    std::size_t used = 0;
    row = std::stoi(text.substr(0, comma), &used);
    col = std::stoi(text.substr(comma + 1), &used);
  } catch (const std::exception&) {
    throw visr::ConfigError("goal must be given as ROW,COL, got '" + text + "'");
  }
  if (row < 0 || row >= env.config().height || col < 0 || col >= env.config().width)
    throw visr::ConfigError("goal cell " + text + " is outside the grid");
  return env.state_index(row, col);
}

Eigen::VectorXd parse_vector(const std::string& text) {
  std::vector<double> xs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      xs.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw visr::ConfigError("cannot parse vector component '" + item + "'");
    }
  }
  return Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

visr::GridConfig grid_from_checkpoint(const nlohmann::json& ckpt, const visr::VisrAgent& agent) {
  visr::GridConfig grid;
  if (ckpt.contains("extra") && ckpt["extra"].contains("train_config"))
    grid = ckpt["extra"]["train_config"].get<visr::TrainConfig>().grid;
  grid.episode_length = agent.config().rollout_length;
  if (grid.width * grid.height != agent.num_states()) throw visr::ConfigError("checkpoint grid does not match phi input size");
  return grid;
}

struct LoadedAgent {
  nlohmann::json json;
  visr::VisrAgent agent;
  visr::GridWorld env;
};

LoadedAgent load(const std::string& path) {
  if (!fs::exists(path)) throw visr::ConfigError("checkpoint " + path + " does not exist");
  nlohmann::json j = visr::read_json_file(path);
  visr::VisrAgent agent = visr::agent_from_checkpoint_json(j);
  visr::GridWorld env(grid_from_checkpoint(j, agent));
  return {std::move(j), std::move(agent), std::move(env)};
}

void write_dumps(const std::vector<visr::GridDump>& dumps, const std::string& out_dir) {
  fs::create_directories(out_dir);
  for (const auto& d : dumps) visr::write_text_file((fs::path(out_dir) / visr::dump_filename(d)).string(), visr::grid_csv(d));
  std::cout << "wrote " << dumps.size() << " grids to " << out_dir << '\n';
}

struct TrainArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> budget;
  bool gpi = false;
  bool rf_ablation = false;
};

int cmd_train(const TrainArgs& a) {
  if (!fs::exists(a.config)) throw visr::ConfigError("config file " + a.config + " does not exist");
  visr::TrainConfig config = visr::read_json_file(a.config).get<visr::TrainConfig>();
  config.seed = resolve_seed(a.seed, config.seed);
  if (a.budget) config.budget = *a.budget;
  if (a.gpi) config.agent.gpi_training = true;
  if (a.rf_ablation) config.agent.rf_ablation = true;
  config.validate();

  fs::create_directories(a.out);
  const fs::path out(a.out);
  const std::string metrics_path = (out / "metrics.csv").string();
  visr::write_text_file(metrics_path, std::string(visr::kMetricsHeader) + "\n");
  visr::write_text_file((out / "config.json").string(), nlohmann::json(config).dump(2) + "\n");

  std::size_t flushed = 0;
  auto flush_metrics = [&](const visr::TrainState& state) {
    std::vector<visr::MetricsRow> fresh(state.metrics.begin() + static_cast<std::ptrdiff_t>(flushed), state.metrics.end());
    if (!fresh.empty()) visr::append_metrics_csv(metrics_path, fresh);
    flushed = state.metrics.size();
  };

  visr::TrainHooks hooks;
  hooks.on_rollout = [&](const visr::TrainState& state, std::int64_t rollouts) {
    if (config.checkpoint_every > 0 && rollouts % config.checkpoint_every == 0) {
      flush_metrics(state);
      visr::save_train_checkpoint((out / ("checkpoint_" + std::to_string(rollouts) + ".json")).string(), state, config);
    }
  };
  const visr::TrainState state = visr::train(config, hooks);
  flush_metrics(state);
  visr::save_train_checkpoint((out / "checkpoint.json").string(), state, config);
  std::cout << "trained " << state.rollouts << " rollouts, " << state.update_count << " updates; checkpoint "
            << (out / "checkpoint.json").string() << '\n';
  return kExitOk;
}

struct InferArgs {
  std::string ckpt;
  std::string out = "report.json";
  std::vector<std::string> goals;
  int n_tasks = 20;
  std::string method = "both";
  std::optional<std::uint64_t> seed;
  int probes = 50;
  int episodes = 30;
  bool gpi = true;
  std::optional<double> kappa;
};

int cmd_infer(const InferArgs& a) {
  const visr::InferenceMethod method = visr::inference_method_from_string(a.method);
  LoadedAgent loaded = load(a.ckpt);
  if (a.kappa) loaded.agent.set_gpi(loaded.agent.config().gpi_policies, *a.kappa);
  visr::ExperimentConfig config;
  for (const auto& g : a.goals) config.goals.push_back(parse_goal(g, loaded.env));
  config.n_tasks = a.n_tasks;
  config.method = method;
  config.seed = resolve_seed(a.seed, 0);
  config.probe_episodes = a.probes;
  config.eval_episodes = a.episodes;
  config.use_gpi = a.gpi;
  const visr::ExperimentReport report = visr::two_phase_experiment(loaded.agent, loaded.env, config);
  visr::write_text_file(a.out, visr::report_json(report).dump(2) + "\n");
  fs::path csv = fs::path(a.out);
  csv.replace_extension(".csv");
  visr::write_text_file(csv.string(), visr::report_csv(report));
  std::cout << "ols_win_rate=" << report.ols_win_rate() << " both_beat_random_rate=" << report.both_beat_random_rate()
            << "; report " << a.out << '\n';
  return kExitOk;
}

struct EvaluateArgs {
  std::string ckpt;
  std::string goal;
  std::string w;
  int episodes = 30;
  std::optional<std::uint64_t> seed;
  bool gpi = true;
  std::optional<double> kappa;
};

int cmd_evaluate(const EvaluateArgs& a) {
  LoadedAgent loaded = load(a.ckpt);
  if (a.kappa) loaded.agent.set_gpi(loaded.agent.config().gpi_policies, *a.kappa);
  const int goal = parse_goal(a.goal, loaded.env);
  const Eigen::VectorXd w = visr::UnitVector::normalized(parse_vector(a.w)).vec();
  if (w.size() != loaded.agent.d()) throw visr::ConfigError("--w must have " + std::to_string(loaded.agent.d()) + " components");
  visr::Rng rng = visr::make_rng(resolve_seed(a.seed, 0));
  const double ret = visr::evaluate_policy(loaded.agent, loaded.env, visr::goal_reward(goal), w, a.episodes, a.gpi, rng);
  std::cout << nlohmann::json{{"goal_cell", {loaded.env.row_of(goal), loaded.env.col_of(goal)}},
                              {"mean_return", ret},
                              {"episodes", a.episodes},
                              {"gpi", a.gpi}}
                   .dump()
            << '\n';
  return kExitOk;
}

int cmd_inspect(const std::string& ckpt) {
  const LoadedAgent loaded = load(ckpt);
  nlohmann::json j{{"version", loaded.json.at("version")},
                   {"config", loaded.agent.config()},
                   {"num_states", loaded.agent.num_states()},
                   {"num_actions", loaded.agent.num_actions()},
                   {"phi_layer_dims", loaded.agent.phi().layer_dims()},
                   {"psi_layer_dims", loaded.agent.psi().layer_dims()},
                   {"phi_adam_step", loaded.agent.phi_optimizer().step},
                   {"psi_adam_step", loaded.agent.psi_optimizer().step}};
  if (loaded.json.contains("extra")) {
    const auto& extra = loaded.json["extra"];
    if (extra.contains("update_count")) j["update_count"] = extra["update_count"];
    if (extra.contains("rollouts")) j["rollouts"] = extra["rollouts"];
  }
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VISR: variational intrinsic successor features on a gridworld"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Unsupervised training; writes checkpoints and metrics.csv");
  train->add_option("--config", train_args.config, "JSON training config")->required();
  train->add_option("--out", train_args.out, "Output directory")->required();
  train->add_option("--seed", train_args.seed, "Seed (default: $VISR_SEED, then the config's seed)");
  train->add_option("--budget", train_args.budget, "Number of rollouts");
  train->add_flag("--gpi", train_args.gpi, "Act with GPI during training");
  train->add_flag("--rf-ablation", train_args.rf_ablation, "Freeze phi at initialization");

  std::string ckpt;
  std::string out_dir;
  int n = 49;
  int k = 10;
  std::optional<std::uint64_t> dump_seed;

  auto* dump_features = app.add_subcommand("dump-features", "Write one grid per phi component");
  dump_features->add_option("--ckpt", ckpt, "Agent checkpoint")->required();
  dump_features->add_option("--out", out_dir, "Output directory")->required();

  auto* dump_rewards = app.add_subcommand("dump-rewards", "Write phi^T w grids for uniformly sampled w");
  dump_rewards->add_option("--ckpt", ckpt, "Agent checkpoint")->required();
  dump_rewards->add_option("--out", out_dir, "Output directory")->required();
  dump_rewards->add_option("--n", n, "Number of reward functions")->check(CLI::PositiveNumber);
  dump_rewards->add_option("--seed", dump_seed, "Seed");

  auto* dump_values = app.add_subcommand("dump-values", "Write GPI value grids for uniformly sampled w");
  dump_values->add_option("--ckpt", ckpt, "Agent checkpoint")->required();
  dump_values->add_option("--out", out_dir, "Output directory")->required();
  dump_values->add_option("--n", n, "Number of tasks")->check(CLI::PositiveNumber);
  dump_values->add_option("--k", k, "Extra uniformly sampled policies per task")->check(CLI::NonNegativeNumber);
  dump_values->add_option("--seed", dump_seed, "Seed");

  InferArgs infer_args;
  auto* infer = app.add_subcommand("infer", "Two-phase task inference on goal-cell tasks");
  infer->add_option("--ckpt", infer_args.ckpt, "Agent checkpoint")->required();
  infer->add_option("--out", infer_args.out, "JSON report path (CSV summary written alongside)");
  infer->add_option("--goal", infer_args.goals, "Goal cell ROW,COL (repeatable)");
  infer->add_option("--n", infer_args.n_tasks, "Random goal tasks when no --goal is given")->check(CLI::PositiveNumber);
  infer->add_option("--method", infer_args.method, "ols, search or both")
      ->check(CLI::IsMember({"ols", "search", "both"}));
  infer->add_option("--seed", infer_args.seed, "Seed");
  infer->add_option("--probes", infer_args.probes, "Probe episodes per task")->check(CLI::PositiveNumber);
  infer->add_option("--episodes", infer_args.episodes, "Evaluation episodes")->check(CLI::PositiveNumber);
  infer->add_flag("--gpi,!--no-gpi", infer_args.gpi, "Act with GPI (default on)");
  infer->add_option("--kappa", infer_args.kappa, "VMF concentration for GPI policies");

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "Mean goal-task return of the policy for a given w");
  evaluate->add_option("--ckpt", eval_args.ckpt, "Agent checkpoint")->required();
  evaluate->add_option("--goal", eval_args.goal, "Goal cell ROW,COL")->required();
  evaluate->add_option("--w", eval_args.w, "Task vector, comma separated (normalized)")->required();
  evaluate->add_option("--episodes", eval_args.episodes, "Episodes")->check(CLI::PositiveNumber);
  evaluate->add_option("--seed", eval_args.seed, "Seed");
  evaluate->add_flag("--gpi,!--no-gpi", eval_args.gpi, "Act with GPI (default on)");
  evaluate->add_option("--kappa", eval_args.kappa, "VMF concentration for GPI policies");

  auto* inspect = app.add_subcommand("inspect", "Print a checkpoint summary");
  inspect->add_option("--ckpt", ckpt, "Agent checkpoint")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (train->parsed()) return cmd_train(train_args);
    if (dump_features->parsed()) {
      const LoadedAgent l = load(ckpt);
      write_dumps(visr::feature_dumps(l.agent, l.env), out_dir);
    } else if (dump_rewards->parsed()) {
      const LoadedAgent l = load(ckpt);
      write_dumps(visr::reward_dumps(l.agent, l.env, n, resolve_seed(dump_seed, 0)), out_dir);
    } else if (dump_values->parsed()) {
      const LoadedAgent l = load(ckpt);
      write_dumps(visr::value_dumps(l.agent, l.env, n, k, resolve_seed(dump_seed, 0)), out_dir);
    } else if (infer->parsed()) {
      return cmd_infer(infer_args);
    } else if (evaluate->parsed()) {
      return cmd_evaluate(eval_args);
    } else if (inspect->parsed()) {
      return cmd_inspect(ckpt);
    }
    return kExitOk;
  } catch (const visr::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
