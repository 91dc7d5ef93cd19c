#pragma once

// Reward-phase task inference: least-squares regression of rewards onto
// phi (r ~ phi^T w), the random-search alternative over probe episodes, the
// two-phase experiment comparing them, and a checker for the variational
// lower bound on -H(z|s).

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "visr/agent.hpp"
#include "visr/env.hpp"
#include "visr/error.hpp"
#include "visr/geometry.hpp"
#include "visr/io.hpp"
#include "visr/rng.hpp"

namespace visr {

/// Raised when the regression solution has (near) zero norm, e.g. all rewards are zero.
class TaskUnidentifiable : public NumericalError {
 public:
  explicit TaskUnidentifiable(const std::string& what) : NumericalError(what) {}
};

/// Capacity-bounded FIFO of (phi(s_t), r_t) rows.
class RewardDataset {
 public:
  explicit RewardDataset(std::size_t capacity = 100000) : capacity_(capacity) {
    if (capacity_ == 0) throw InvalidArgument("dataset capacity must be positive");
  }

  void add(const Eigen::VectorXd& features, double reward) {
    detail::require_unit(features, "features");
    if (!rows_.empty() && features.size() != rows_.front().features.size())
      throw DimensionError("feature dimension changed");
    if (!std::isfinite(reward)) throw InvalidArgument("reward must be finite");
    if (rows_.size() == capacity_) rows_.pop_front();
    rows_.push_back({features, reward});
  }

  std::size_t size() const { return rows_.size(); }
  std::size_t capacity() const { return capacity_; }
  int dim() const { return rows_.empty() ? 0 : static_cast<int>(rows_.front().features.size()); }

  Eigen::MatrixXd feature_matrix() const {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows_.size()), dim());
    for (std::size_t i = 0; i < rows_.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = rows_[i].features.transpose();
    return x;
  }

  Eigen::VectorXd rewards() const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(rows_.size()));
    for (std::size_t i = 0; i < rows_.size(); ++i) r(static_cast<Eigen::Index>(i)) = rows_[i].reward;
    return r;
  }

 private:
  struct Row {
    Eigen::VectorXd features;
    double reward;
  };
  std::size_t capacity_;
  std::deque<Row> rows_;
};

struct TaskEstimate {
  Eigen::VectorXd w_base;
  Eigen::VectorXd raw_solution;
  std::optional<double> residual_mse;
  bool ridge_fallback = false;
};

inline constexpr double kRidgeLambda = 1e-6;
inline constexpr double kMinSolutionNorm = 1e-10;

/// argmin_w sum (phi^T w - r)^2, normalized to unit length. Falls back to ridge
/// (lambda = 1e-6) when the feature matrix has rank < d, unless `allow_ridge` is false.
inline TaskEstimate infer_task_ols(const RewardDataset& data, bool allow_ridge = true) {
  if (data.size() == 0) throw InvalidArgument("no reward data to regress on");
  const Eigen::MatrixXd x = data.feature_matrix();
  const Eigen::VectorXd r = data.rewards();
  const int d = data.dim();

  TaskEstimate est;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() == d) {
    est.raw_solution = qr.solve(r);
  } else {
    if (!allow_ridge)
      throw NumericalError("feature matrix is rank deficient (rank " + std::to_string(qr.rank()) + " < " +
                           std::to_string(d) + ")");
    std::clog << "warning: reward regression is rank deficient (rank " << qr.rank() << " < " << d
              << "); using ridge lambda=" << kRidgeLambda << '\n';
    const Eigen::MatrixXd gram = x.transpose() * x + kRidgeLambda * Eigen::MatrixXd::Identity(d, d);
    est.raw_solution = gram.ldlt().solve(x.transpose() * r);
    est.ridge_fallback = true;
  }
  const double norm = est.raw_solution.norm();
  if (!(norm > kMinSolutionNorm)) throw TaskUnidentifiable("task unidentifiable: regression solution has zero norm");
  est.w_base = est.raw_solution / norm;
  est.residual_mse = (x * est.raw_solution - r).squaredNorm() / static_cast<double>(data.size());
  return est;
}

/// Extrinsic reward of a transition.
using RewardFn = std::function<double(const Transition&)>;

/// 1 when the transition starts in `goal`, else 0 (occupancy of the goal cell at step t).
inline RewardFn goal_reward(int goal) {
  return [goal](const Transition& t) { return t.state == goal ? 1.0 : 0.0; };
}

/// Runs one episode conditioned on w, labelling transitions with reward_fn.
inline std::vector<Transition> run_episode(const VisrAgent& agent, GridWorld& env, const RewardFn& reward_fn,
                                           const Eigen::VectorXd& w, bool use_gpi, Rng& rng) {
  std::vector<Transition> out;
  env.reset(rng);
  while (!env.done()) {
    const Eigen::VectorXd obs = env.observation();
    const int a = use_gpi ? act_gpi(agent, obs, w, rng) : act_epsilon_greedy(agent, obs, w, rng);
    Transition t = env.step(a);
    t.extrinsic_reward = reward_fn(t);
    out.push_back(t);
  }
  return out;
}

struct ProbeEpisode {
  Eigen::VectorXd w;
  std::vector<Transition> transitions;
  double episode_return = 0.0;
};

/// Probe episodes, each conditioned on a fresh uniformly sampled task vector.
inline std::vector<ProbeEpisode> collect_probes(const VisrAgent& agent, GridWorld& env, const RewardFn& reward_fn,
                                                int n_probe, bool use_gpi, Rng& rng) {
  if (n_probe < 1) throw InvalidArgument("n_probe must be >= 1");
  std::vector<ProbeEpisode> probes;
  for (int i = 0; i < n_probe; ++i) {
    ProbeEpisode p;
    p.w = sample_uniform_sphere(agent.d(), rng).vec();
    p.transitions = run_episode(agent, env, reward_fn, p.w, use_gpi, rng);
    for (const auto& t : p.transitions) p.episode_return += t.extrinsic_reward;
    probes.push_back(std::move(p));
  }
  return probes;
}

/// Task vector of the highest-return probe (first one on ties).
inline TaskEstimate select_best_probe(const std::vector<ProbeEpisode>& probes) {
  if (probes.empty()) throw InvalidArgument("no probe episodes");
  std::size_t best = 0;
  for (std::size_t i = 1; i < probes.size(); ++i)
    if (probes[i].episode_return > probes[best].episode_return) best = i;
  return {probes[best].w, probes[best].w, std::nullopt, false};
}

inline TaskEstimate infer_task_random_search(const VisrAgent& agent, GridWorld& env, const RewardFn& reward_fn,
                                             int n_probe, bool use_gpi, Rng& rng) {
  return select_best_probe(collect_probes(agent, env, reward_fn, n_probe, use_gpi, rng));
}

/// Regression rows (phi(s_t), r_t) for every probe step.
inline RewardDataset dataset_from_probes(const VisrAgent& agent, const std::vector<ProbeEpisode>& probes,
                                         std::size_t capacity = 100000) {
  RewardDataset data(capacity);
  const Eigen::MatrixXd phis = phi_all_states(agent);
  for (const auto& p : probes)
    for (const auto& t : p.transitions) data.add(phis.col(t.state), t.extrinsic_reward);
  return data;
}

/// FNV-1a over the probe data (w bytes, states, actions, rewards).
inline std::uint64_t probe_data_hash(const std::vector<ProbeEpisode>& probes) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& p : probes) {
    mix(p.w.data(), sizeof(double) * static_cast<std::size_t>(p.w.size()));
    for (const auto& t : p.transitions) {
      mix(&t.state, sizeof t.state);
      mix(&t.action, sizeof t.action);
      mix(&t.next_state, sizeof t.next_state);
      mix(&t.extrinsic_reward, sizeof t.extrinsic_reward);
    }
  }
  return h;
}

/// Mean extrinsic return over `episodes` episodes acting on w (epsilon from the agent config).
inline double evaluate_policy(const VisrAgent& agent, GridWorld& env, const RewardFn& reward_fn,
                              const Eigen::VectorXd& w, int episodes, bool use_gpi, Rng& rng) {
  if (episodes < 1) throw InvalidArgument("episodes must be >= 1");
  double total = 0.0;
  for (int e = 0; e < episodes; ++e)
    for (const auto& t : run_episode(agent, env, reward_fn, w, use_gpi, rng)) total += t.extrinsic_reward;
  return total / episodes;
}

/// Mean return of the uniform-random policy.
inline double evaluate_random_policy(GridWorld& env, const RewardFn& reward_fn, int episodes, Rng& rng) {
  if (episodes < 1) throw InvalidArgument("episodes must be >= 1");
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    env.reset(rng);
    while (!env.done()) total += reward_fn(env.step(uniform_int(rng, 0, env.num_actions() - 1)));
  }
  return total / episodes;
}

enum class InferenceMethod { ols, search, both };

inline InferenceMethod inference_method_from_string(const std::string& s) {
  if (s == "ols") return InferenceMethod::ols;
  if (s == "search") return InferenceMethod::search;
  if (s == "both") return InferenceMethod::both;
  throw ConfigError("unknown inference method '" + s + "' (expected ols, search or both)");
}

struct ExperimentConfig {
  int n_tasks = 20;
  std::vector<int> goals;  // explicit goal cells; random when empty
  int probe_episodes = 50;
  int eval_episodes = 30;
  bool use_gpi = true;
  InferenceMethod method = InferenceMethod::both;
  std::uint64_t seed = 0;
  std::size_t dataset_capacity = 100000;
};

struct TaskReport {
  int task_id = 0;
  int goal_state = 0;
  int goal_row = 0;
  int goal_col = 0;
  std::optional<double> ols_return;
  std::optional<double> search_return;
  double random_return = 0.0;
  std::optional<double> residual_mse;
  int probe_steps = 0;
  std::uint64_t data_hash = 0;
  std::optional<Eigen::VectorXd> ols_w;
  std::optional<Eigen::VectorXd> search_w;
  bool ols_unidentifiable = false;
  bool ridge_fallback = false;
};

struct ExperimentReport {
  std::vector<TaskReport> tasks;

  /// Fraction of tasks with ols_return >= search_return.
  double ols_win_rate() const {
    if (tasks.empty()) return 0.0;
    int wins = 0;
    for (const auto& t : tasks)
      if (t.ols_return && t.search_return && *t.ols_return >= *t.search_return) ++wins;
    return static_cast<double>(wins) / static_cast<double>(tasks.size());
  }

  /// Fraction of tasks where both inferred policies strictly beat the random policy.
  double both_beat_random_rate() const {
    if (tasks.empty()) return 0.0;
    int n = 0;
    for (const auto& t : tasks)
      if (t.ols_return && t.search_return && *t.ols_return > t.random_return && *t.search_return > t.random_return) ++n;
    return static_cast<double>(n) / static_cast<double>(tasks.size());
  }
};

/// Per task: one shared set of probe episodes feeds both the regression and the
/// search; both inferred task vectors are then evaluated with the same evaluation
/// random stream, alongside the uniform-random policy.
inline ExperimentReport two_phase_experiment(const VisrAgent& agent, GridWorld& env, const ExperimentConfig& config) {
  if (config.n_tasks < 1 && config.goals.empty()) throw InvalidArgument("no tasks requested");
  std::vector<int> goals = config.goals;
  Rng task_rng = fork_rng(config.seed, 0);
  if (goals.empty())
    for (int i = 0; i < config.n_tasks; ++i) goals.push_back(uniform_int(task_rng, 0, env.num_states() - 1));
  for (int g : goals)
    if (g < 0 || g >= env.num_states()) throw InvalidArgument("goal cell out of range");

  ExperimentReport report;
  for (std::size_t i = 0; i < goals.size(); ++i) {
    const auto task = static_cast<std::uint64_t>(i);
    const RewardFn reward = goal_reward(goals[i]);
    TaskReport tr;
    tr.task_id = static_cast<int>(i);
    tr.goal_state = goals[i];
    tr.goal_row = env.row_of(goals[i]);
    tr.goal_col = env.col_of(goals[i]);

    Rng probe_rng = fork_rng(config.seed, 1 + 4 * task);
    const auto probes = collect_probes(agent, env, reward, config.probe_episodes, config.use_gpi, probe_rng);
    tr.data_hash = probe_data_hash(probes);
    for (const auto& p : probes) tr.probe_steps += static_cast<int>(p.transitions.size());

    const bool want_ols = config.method != InferenceMethod::search;
    const bool want_search = config.method != InferenceMethod::ols;
    const TaskEstimate searched = select_best_probe(probes);
    if (want_ols) {
      try {
        const TaskEstimate est = infer_task_ols(dataset_from_probes(agent, probes, config.dataset_capacity));
        tr.ols_w = est.w_base;
        tr.residual_mse = est.residual_mse;
        tr.ridge_fallback = est.ridge_fallback;
      } catch (const TaskUnidentifiable&) {
        // No reward signal in the probes: fall back to the search's tie-break choice.
        tr.ols_unidentifiable = true;
        tr.ols_w = searched.w_base;
      }
      Rng eval_rng = fork_rng(config.seed, 2 + 4 * task);
      tr.ols_return = evaluate_policy(agent, env, reward, *tr.ols_w, config.eval_episodes, config.use_gpi, eval_rng);
    }
    if (want_search) {
      tr.search_w = searched.w_base;
      Rng eval_rng = fork_rng(config.seed, 2 + 4 * task);
      tr.search_return =
          evaluate_policy(agent, env, reward, *tr.search_w, config.eval_episodes, config.use_gpi, eval_rng);
    }
    Rng random_rng = fork_rng(config.seed, 3 + 4 * task);
    tr.random_return = evaluate_random_policy(env, reward, config.eval_episodes, random_rng);
    report.tasks.push_back(std::move(tr));
  }
  return report;
}

namespace detail {

inline nlohmann::json optional_json(const std::optional<double>& x) {
  return x ? nlohmann::json(*x) : nlohmann::json(nullptr);
}

inline std::string hex64(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace detail

inline nlohmann::json report_json(const ExperimentReport& report) {
  nlohmann::json tasks = nlohmann::json::array();
  for (const auto& t : report.tasks) {
    nlohmann::json j{{"task_id", t.task_id},
                     {"goal_cell", {t.goal_row, t.goal_col}},
                     {"ols_return", detail::optional_json(t.ols_return)},
                     {"search_return", detail::optional_json(t.search_return)},
                     {"random_return", t.random_return},
                     {"residual_mse", detail::optional_json(t.residual_mse)},
                     {"probe_steps", t.probe_steps},
                     {"probe_data_hash", detail::hex64(t.data_hash)},
                     {"ols_unidentifiable", t.ols_unidentifiable},
                     {"ridge_fallback", t.ridge_fallback}};
    if (t.ols_w) j["ols_w"] = std::vector<double>(t.ols_w->data(), t.ols_w->data() + t.ols_w->size());
    if (t.search_w) j["search_w"] = std::vector<double>(t.search_w->data(), t.search_w->data() + t.search_w->size());
    tasks.push_back(std::move(j));
  }
  return {{"tasks", tasks},
          {"summary", {{"n_tasks", report.tasks.size()},
                       {"ols_win_rate", report.ols_win_rate()},
                       {"both_beat_random_rate", report.both_beat_random_rate()}}}};
}

inline std::string report_csv(const ExperimentReport& report) {
  auto opt = [](const std::optional<double>& x) { return x ? format_double(*x) : std::string(); };
  std::ostringstream os;
  os << "task_id,goal_row,goal_col,ols_return,search_return,random_return,residual_mse,probe_steps\n";
  for (const auto& t : report.tasks)
    os << t.task_id << ',' << t.goal_row << ',' << t.goal_col << ',' << opt(t.ols_return) << ','
       << opt(t.search_return) << ',' << format_double(t.random_return) << ',' << opt(t.residual_mse) << ','
       << t.probe_steps << '\n';
  return os.str();
}

struct MiBound {
  double lhs = 0.0;  // -H(z|s)
  double rhs = 0.0;  // sum p(s,z) log q(z|s)
  double gap = 0.0;  // lhs - rhs
};

/// joint(s, z) = p(s, z); conditional(s, z) = q(z | s).
inline MiBound mi_bound_check(const Eigen::MatrixXd& joint, const Eigen::MatrixXd& conditional) {
  if (joint.rows() != conditional.rows() || joint.cols() != conditional.cols())
    throw DimensionError("joint and conditional tables differ in shape");
  if (joint.size() == 0) throw InvalidArgument("empty probability table");
  if (joint.minCoeff() < 0.0 || std::abs(joint.sum() - 1.0) > 1e-9)
    throw InvalidArgument("joint table must be a probability distribution");
  if (!(conditional.minCoeff() > 0.0) || (conditional.rowwise().sum().array() - 1.0).abs().maxCoeff() > 1e-9)
    throw InvalidArgument("each q(.|s) must be strictly positive and sum to one");

  MiBound b;
  for (Eigen::Index s = 0; s < joint.rows(); ++s) {
    const double ps = joint.row(s).sum();
    if (ps <= 0.0) continue;
    for (Eigen::Index z = 0; z < joint.cols(); ++z) {
      const double p = joint(s, z);
      if (p <= 0.0) continue;
      b.lhs += p * std::log(p / ps);
      b.rhs += p * std::log(conditional(s, z));
    }
  }
  b.gap = b.lhs - b.rhs;
  return b;
}

}  // namespace visr
