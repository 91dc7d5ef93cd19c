#pragma once

// Unsupervised VISR training: sample a task vector per rollout, act under
// Q = psi^T w, and regress psi onto phi-cumulants while phi learns to predict
// w from the visited states.

#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "visr/agent.hpp"
#include "visr/env.hpp"
#include "visr/error.hpp"
#include "visr/geometry.hpp"
#include "visr/nn.hpp"
#include "visr/rng.hpp"

namespace visr {

struct TrainConfig {
  VisrConfig agent;
  GridConfig grid;
  std::int64_t budget = 50000;  // rollouts
  std::uint64_t seed = 0;
  int replay_size = 4000;
  int updates_per_rollout = 10;
  int metrics_every = 100;      // updates
  std::int64_t checkpoint_every = 0;  // rollouts; 0 writes only the final checkpoint

  void validate() const {
    agent.validate();
    if (grid.width < 1 || grid.height < 1 || grid.episode_length < 1) throw ConfigError("invalid grid");
    if (grid.episode_length != agent.rollout_length)
      throw ConfigError("grid episode_length must equal rollout_length");
    if (budget < 1) throw ConfigError("budget must be >= 1");
    if (replay_size < agent.batch_size) throw ConfigError("replay_size must be >= batch_size");
    if (updates_per_rollout < 1) throw ConfigError("updates_per_rollout must be >= 1");
    if (metrics_every < 1) throw ConfigError("metrics_every must be >= 1");
    if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
  }
};

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"agent", c.agent},
                     {"grid", {{"width", c.grid.width}, {"height", c.grid.height}, {"episode_length", c.grid.episode_length}}},
                     {"budget", c.budget},
                     {"seed", c.seed},
                     {"replay_size", c.replay_size},
                     {"updates_per_rollout", c.updates_per_rollout},
                     {"metrics_every", c.metrics_every},
                     {"checkpoint_every", c.checkpoint_every}};
}

/// Missing keys keep their defaults; unknown keys are an error. `grid.episode_length`
/// follows `agent.rollout_length` unless given explicitly.
inline void from_json(const nlohmann::json& j, TrainConfig& c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  bool explicit_episode_length = false;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "agent") {
        from_json(value, c.agent);
      } else if (key == "grid") {
        for (const auto& [gk, gv] : value.items()) {
          if (gk == "width") c.grid.width = gv.get<int>();
          else if (gk == "height") c.grid.height = gv.get<int>();
          else if (gk == "episode_length") {
            c.grid.episode_length = gv.get<int>();
            explicit_episode_length = true;
          } else throw ConfigError("unknown grid config key '" + gk + "'");
        }
      } else if (key == "budget") c.budget = value.get<std::int64_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "replay_size") c.replay_size = value.get<int>();
      else if (key == "updates_per_rollout") c.updates_per_rollout = value.get<int>();
      else if (key == "metrics_every") c.metrics_every = value.get<int>();
      else if (key == "checkpoint_every") c.checkpoint_every = value.get<std::int64_t>();
      else throw ConfigError("unknown config key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("bad value for '" + key + "': " + e.what());
    }
  }
  if (!explicit_episode_length) c.grid.episode_length = c.agent.rollout_length;
}

inline TrainConfig load_train_config(const std::string& path) {
  TrainConfig c = read_json_file(path).get<TrainConfig>();
  c.validate();
  return c;
}

struct Rollout {
  Eigen::VectorXd w;
  std::vector<Transition> transitions;
};

/// FIFO window of transitions tagged with their rollout's task vector.
class ReplayBuffer {
 public:
  struct Entry {
    Transition transition;
    Eigen::VectorXd w;
    std::int64_t rollout_id;
  };

  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw InvalidArgument("replay capacity must be positive");
  }

  void add(const Rollout& rollout, std::int64_t rollout_id) {
    for (const auto& t : rollout.transitions) {
      if (entries_.size() == capacity_) entries_.pop_front();
      entries_.push_back({t, rollout.w, rollout_id});
    }
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }

  /// n-step sample starting at entry i, truncated at episode end or the buffer tail.
  TdSample n_step_sample(std::size_t i, int n) const {
    const Entry& first = entries_[i];
    TdSample s{first.transition.state, first.transition.action, first.w, {}, 0, true};
    std::size_t j = i;
    for (int k = 0; k < n; ++k) {
      const Transition& t = entries_[j].transition;
      s.cumulant_states.push_back(t.state);
      s.bootstrap_state = t.next_state;
      if (t.done) {
        s.bootstrap = false;
        s.truncated = t.truncated;
        break;
      }
      if (k + 1 < n) {
        if (j + 1 >= entries_.size() || entries_[j + 1].rollout_id != first.rollout_id) break;
        ++j;
      }
    }
    return s;
  }

  std::vector<TdSample> sample(int batch_size, int n_step, Rng& rng) const {
    if (entries_.empty()) throw InvalidArgument("sampling from an empty replay buffer");
    std::vector<TdSample> batch;
    batch.reserve(static_cast<std::size_t>(batch_size));
    for (int b = 0; b < batch_size; ++b) {
      const auto i = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(entries_.size()) - 1));
      batch.push_back(n_step_sample(i, n_step));
    }
    return batch;
  }

 private:
  std::size_t capacity_;
  std::deque<Entry> entries_;
};

struct MetricsRow {
  std::int64_t update = 0;
  double loss_phi = 0.0;
  double loss_psi = 0.0;
  double mean_intrinsic_reward = 0.0;
};

struct TrainState {
  VisrAgent agent;
  Rng rng;
  ReplayBuffer replay;
  std::int64_t update_count = 0;
  std::int64_t rollouts = 0;
  std::vector<MetricsRow> metrics;
  int metrics_every = 100;

  // Window accumulators for the next metrics row.
  double window_loss_phi = 0.0;
  double window_loss_psi = 0.0;
  std::int64_t window_updates = 0;
  double window_reward = 0.0;
  std::int64_t window_reward_steps = 0;
  double last_mean_reward = 0.0;

  TrainState(VisrAgent a, Rng r, std::size_t replay_capacity, int metrics_cadence)
      : agent(std::move(a)), rng(std::move(r)), replay(replay_capacity), metrics_every(metrics_cadence) {}
};

inline TrainState make_train_state(const TrainConfig& config) {
  config.validate();
  Rng rng = make_rng(config.seed);
  const GridWorld probe(config.grid);
  VisrAgent agent(config.agent, probe.num_states(), probe.num_actions(), rng);
  return TrainState(std::move(agent), std::move(rng), static_cast<std::size_t>(config.replay_size),
                    config.metrics_every);
}

/// One rollout under a fresh uniformly sampled task vector.
inline Rollout collect_rollout(const VisrAgent& agent, GridWorld& env, Rng& rng) {
  if (env.episode_length() != agent.config().rollout_length)
    throw InvalidArgument("environment episode length differs from rollout_length");
  Rollout r{sample_uniform_sphere(agent.d(), rng).vec(), {}};
  r.transitions.reserve(static_cast<std::size_t>(agent.config().rollout_length));
  env.reset(rng);
  while (!env.done()) {
    const Eigen::VectorXd obs = env.observation();
    const int action =
        agent.config().gpi_training ? act_gpi(agent, obs, r.w, rng) : act_epsilon_greedy(agent, obs, r.w, rng);
    r.transitions.push_back(env.step(action));
  }
  return r;
}

inline Rollout collect_rollout(TrainState& state, GridWorld& env) { return collect_rollout(state.agent, env, state.rng); }

/// Mean phi(s_t)^T w over a rollout.
inline double mean_intrinsic_reward(const VisrAgent& agent, const Rollout& rollout) {
  std::vector<int> states;
  for (const auto& t : rollout.transitions) states.push_back(t.state);
  const Eigen::MatrixXd phis = phi_batch(agent, states);
  return (rollout.w.transpose() * phis).mean();
}

struct StepResult {
  double loss_phi = 0.0;
  double loss_psi = 0.0;
};

inline void record_rollout_reward(TrainState& state, double mean_reward, std::int64_t steps) {
  state.window_reward += mean_reward * static_cast<double>(steps);
  state.window_reward_steps += steps;
}

/// One Adam step on psi (TD loss) and, unless rf_ablation, on phi (VMF NLL).
inline StepResult train_step(TrainState& state, const std::vector<TdSample>& batch) {
  if (batch.empty()) throw InvalidArgument("train_step on an empty batch");
  VisrAgent& agent = state.agent;

  const LossAndGrad psi_part = td_loss(agent, batch);
  std::vector<int> states;
  Eigen::MatrixXd ws(agent.d(), static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    states.push_back(batch[i].state);
    ws.col(static_cast<Eigen::Index>(i)) = batch[i].w;
  }
  const LossAndGrad phi_part = phi_loss(agent, states, ws);

  if (!std::isfinite(psi_part.loss) || !std::isfinite(phi_part.loss) || !psi_part.grads.all_finite() ||
      !phi_part.grads.all_finite())
    throw NumericalError("non-finite loss or gradient at update " + std::to_string(state.update_count + 1));

  nn::adam_step(agent.psi(), agent.psi_optimizer(), psi_part.grads);
  if (!agent.config().rf_ablation) nn::adam_step(agent.phi(), agent.phi_optimizer(), phi_part.grads);

  state.update_count += 1;
  if (state.update_count % agent.config().target_update_period == 0) agent.refresh_target();

  state.window_loss_phi += phi_part.loss;
  state.window_loss_psi += psi_part.loss;
  state.window_updates += 1;
  if (state.update_count % state.metrics_every == 0) {
    if (state.window_reward_steps > 0)
      state.last_mean_reward = state.window_reward / static_cast<double>(state.window_reward_steps);
    state.metrics.push_back({state.update_count, state.window_loss_phi / static_cast<double>(state.window_updates),
                             state.window_loss_psi / static_cast<double>(state.window_updates),
                             state.last_mean_reward});
    state.window_loss_phi = state.window_loss_psi = 0.0;
    state.window_updates = 0;
    state.window_reward = 0.0;
    state.window_reward_steps = 0;
  }
  return {phi_part.loss, psi_part.loss};
}

struct TrainHooks {
  // Called after every rollout's updates with the number of completed rollouts.
  std::function<void(const TrainState&, std::int64_t)> on_rollout;
};

/// Runs `config.budget` rollouts starting from `state`.
inline void train(TrainState& state, const TrainConfig& config, GridWorld& env, const TrainHooks& hooks = {}) {
  config.validate();
  const VisrConfig& ac = config.agent;
  for (std::int64_t e = 0; e < config.budget; ++e) {
    const Rollout rollout = collect_rollout(state, env);
    record_rollout_reward(state, mean_intrinsic_reward(state.agent, rollout),
                          static_cast<std::int64_t>(rollout.transitions.size()));
    state.replay.add(rollout, state.rollouts);
    state.rollouts += 1;
    if (state.replay.size() >= static_cast<std::size_t>(ac.batch_size)) {
      for (int u = 0; u < config.updates_per_rollout; ++u)
        train_step(state, state.replay.sample(ac.batch_size, ac.n_step, state.rng));
    }
    if (hooks.on_rollout) hooks.on_rollout(state, state.rollouts);
  }
}

inline TrainState train(const TrainConfig& config, const TrainHooks& hooks = {}) {
  TrainState state = make_train_state(config);
  GridWorld env(config.grid);
  train(state, config, env, hooks);
  return state;
}

inline constexpr const char* kMetricsHeader = "update,loss_phi,loss_psi,mean_intrinsic_reward";

inline std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream os;
  os << kMetricsHeader << '\n';
  for (const auto& r : rows)
    os << r.update << ',' << format_double(r.loss_phi) << ',' << format_double(r.loss_psi) << ','
       << format_double(r.mean_intrinsic_reward) << '\n';
  return os.str();
}

/// Appends rows to `path`, writing the header first if the file is new or empty.
inline void append_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw ConfigError("cannot open " + path);
  std::string body = metrics_csv(rows);
  if (!fresh) body.erase(0, body.find('\n') + 1);
  out << body;
}

inline void save_train_checkpoint(const std::string& path, const TrainState& state, const TrainConfig& config) {
  save_agent(path, state.agent,
             {{"update_count", state.update_count}, {"rollouts", state.rollouts}, {"train_config", config}});
}

}  // namespace visr
