#pragma once

// The VISR agent: a feature network phi (the discriminator's mean direction,
// unit-norm output) and a universal successor feature network psi(s, a, w)
// conditioned on the task vector by input concatenation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "visr/env.hpp"
#include "visr/error.hpp"
#include "visr/geometry.hpp"
#include "visr/io.hpp"
#include "visr/nn.hpp"
#include "visr/rng.hpp"

namespace visr {

struct VisrConfig {
  int d = 5;
  double gamma = 0.99;
  double epsilon = 0.05;
  int gpi_policies = 10;
  double gpi_kappa = 5.0;
  int rollout_length = 40;
  int target_update_period = 1000;
  double learning_rate = 1e-4;
  double adam_epsilon = 1e-3;
  int batch_size = 32;
  bool rf_ablation = false;
  int n_step = 1;
  bool gpi_training = false;
  bool bootstrap_truncated = true;  // bootstrap through time-limit episode ends
  std::vector<int> phi_hidden = {100, 100};
  std::vector<int> psi_hidden = {100, 100};

  void validate() const {
    if (d < 2) throw ConfigError("d must be >= 2");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
    if (gpi_policies < 0) throw ConfigError("gpi_policies must be >= 0");
    if (!(gpi_kappa >= 0.0)) throw ConfigError("gpi_kappa must be >= 0");
    if (rollout_length < 1) throw ConfigError("rollout_length must be >= 1");
    if (target_update_period < 1) throw ConfigError("target_update_period must be >= 1");
    if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
    if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be > 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (n_step < 1) throw ConfigError("n_step must be >= 1");
    for (int h : phi_hidden)
      if (h < 1) throw ConfigError("phi_hidden sizes must be positive");
    for (int h : psi_hidden)
      if (h < 1) throw ConfigError("psi_hidden sizes must be positive");
  }
};

inline void to_json(nlohmann::json& j, const VisrConfig& c) {
  j = nlohmann::json{{"d", c.d},
                     {"gamma", c.gamma},
                     {"epsilon", c.epsilon},
                     {"gpi_policies", c.gpi_policies},
                     {"gpi_kappa", c.gpi_kappa},
                     {"rollout_length", c.rollout_length},
                     {"target_update_period", c.target_update_period},
                     {"learning_rate", c.learning_rate},
                     {"adam_epsilon", c.adam_epsilon},
                     {"batch_size", c.batch_size},
                     {"rf_ablation", c.rf_ablation},
                     {"n_step", c.n_step},
                     {"gpi_training", c.gpi_training},
                     {"bootstrap_truncated", c.bootstrap_truncated},
                     {"phi_hidden", c.phi_hidden},
                     {"psi_hidden", c.psi_hidden}};
}

/// Reads known keys over the defaults; unknown keys are rejected.
inline void from_json(const nlohmann::json& j, VisrConfig& c) {
  if (!j.is_object()) throw ConfigError("agent config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "d") c.d = value.get<int>();
      else if (key == "gamma") c.gamma = value.get<double>();
      else if (key == "epsilon") c.epsilon = value.get<double>();
      else if (key == "gpi_policies") c.gpi_policies = value.get<int>();
      else if (key == "gpi_kappa") c.gpi_kappa = value.get<double>();
      else if (key == "rollout_length") c.rollout_length = value.get<int>();
      else if (key == "target_update_period") c.target_update_period = value.get<int>();
      else if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "adam_epsilon") c.adam_epsilon = value.get<double>();
      else if (key == "batch_size") c.batch_size = value.get<int>();
      else if (key == "rf_ablation") c.rf_ablation = value.get<bool>();
      else if (key == "n_step") c.n_step = value.get<int>();
      else if (key == "gpi_training") c.gpi_training = value.get<bool>();
      else if (key == "bootstrap_truncated") c.bootstrap_truncated = value.get<bool>();
      else if (key == "phi_hidden") c.phi_hidden = value.get<std::vector<int>>();
      else if (key == "psi_hidden") c.psi_hidden = value.get<std::vector<int>>();
      else throw ConfigError("unknown agent config key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("bad value for '" + key + "': " + e.what());
    }
  }
}

class VisrAgent {
 public:
  VisrAgent(VisrConfig config, int num_states, int num_actions, Rng& rng)
      : config_(validated(std::move(config))),
        num_states_(num_states),
        num_actions_(num_actions),
        phi_(make_phi(config_, num_states, rng)),
        psi_(make_psi(config_, num_states, num_actions, rng)),
        psi_target_(psi_),
        phi_opt_(nn::AdamState::for_net(phi_, config_.learning_rate, config_.adam_epsilon)),
        psi_opt_(nn::AdamState::for_net(psi_, config_.learning_rate, config_.adam_epsilon)) {}

  /// Reassembles an agent from checkpointed parts.
  VisrAgent(VisrConfig config, int num_states, int num_actions, nn::Mlp phi, nn::AdamState phi_opt, nn::Mlp psi,
            nn::AdamState psi_opt, const nn::Mlp& psi_target)
      : config_(validated(std::move(config))),
        num_states_(num_states),
        num_actions_(num_actions),
        phi_(std::move(phi)),
        psi_(std::move(psi)),
        psi_target_(psi_target),
        phi_opt_(std::move(phi_opt)),
        psi_opt_(std::move(psi_opt)) {
    if (phi_.input_dim() != num_states_ || phi_.output_dim() != config_.d ||
        phi_.head() != nn::OutputHead::l2_normalized)
      throw ConfigError("phi network does not match the agent configuration");
    if (psi_.input_dim() != num_states_ + config_.d || psi_.output_dim() != num_actions_ * config_.d)
      throw ConfigError("psi network does not match the agent configuration");
    if (psi_target.layer_dims() != psi_.layer_dims()) throw ConfigError("psi target shape differs from psi");
  }

  const VisrConfig& config() const { return config_; }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int d() const { return config_.d; }

  const nn::Mlp& phi() const { return phi_; }
  nn::Mlp& phi() { return phi_; }
  const nn::Mlp& psi() const { return psi_; }
  nn::Mlp& psi() { return psi_; }
  const nn::ParameterSnapshot& psi_target() const { return psi_target_; }
  nn::AdamState& phi_optimizer() { return phi_opt_; }
  const nn::AdamState& phi_optimizer() const { return phi_opt_; }
  nn::AdamState& psi_optimizer() { return psi_opt_; }
  const nn::AdamState& psi_optimizer() const { return psi_opt_; }

  void refresh_target() { psi_target_ = nn::snapshot(psi_); }

  /// Overrides the acting epsilon (evaluation may differ from training).
  void set_epsilon(double epsilon) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidArgument("epsilon must lie in [0, 1]");
    config_.epsilon = epsilon;
  }
  void set_gpi(int policies, double kappa) {
    if (policies < 0 || !(kappa >= 0.0)) throw InvalidArgument("invalid GPI settings");
    config_.gpi_policies = policies;
    config_.gpi_kappa = kappa;
  }

 private:
  static VisrConfig validated(VisrConfig c) {
    c.validate();
    return c;
  }
  static nn::Mlp make_phi(const VisrConfig& c, int num_states, Rng& rng) {
    std::vector<int> dims{num_states};
    dims.insert(dims.end(), c.phi_hidden.begin(), c.phi_hidden.end());
    dims.push_back(c.d);
    return nn::Mlp::random(dims, nn::OutputHead::l2_normalized, rng);
  }
  static nn::Mlp make_psi(const VisrConfig& c, int num_states, int num_actions, Rng& rng) {
    std::vector<int> dims{num_states + c.d};
    dims.insert(dims.end(), c.psi_hidden.begin(), c.psi_hidden.end());
    dims.push_back(num_actions * c.d);
    return nn::Mlp::random(dims, nn::OutputHead::linear, rng);
  }

  VisrConfig config_;
  int num_states_;
  int num_actions_;
  nn::Mlp phi_;
  nn::Mlp psi_;
  nn::ParameterSnapshot psi_target_;
  nn::AdamState phi_opt_;
  nn::AdamState psi_opt_;
};

namespace detail {

inline void check_obs(const VisrAgent& agent, const Eigen::VectorXd& obs) {
  if (obs.size() != agent.num_states())
    throw DimensionError("observation length " + std::to_string(obs.size()) + " != " +
                         std::to_string(agent.num_states()));
}

inline void check_w(const VisrAgent& agent, const Eigen::VectorXd& w) {
  if (w.size() != agent.d()) throw DimensionError("task vector has dimension " + std::to_string(w.size()));
}

// Column i is one_hot(states[i]) stacked over ws.col(i).
inline Eigen::MatrixXd psi_inputs(const VisrAgent& agent, const std::vector<int>& states, const Eigen::MatrixXd& ws) {
  const auto n = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXd in = Eigen::MatrixXd::Zero(agent.num_states() + agent.d(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    in(states[static_cast<std::size_t>(i)], i) = 1.0;
    in.col(i).tail(agent.d()) = ws.col(i);
  }
  return in;
}

inline Eigen::MatrixXd obs_inputs(const VisrAgent& agent, const std::vector<int>& states) {
  Eigen::MatrixXd in = Eigen::MatrixXd::Zero(agent.num_states(), static_cast<Eigen::Index>(states.size()));
  for (std::size_t i = 0; i < states.size(); ++i) in(states[i], static_cast<Eigen::Index>(i)) = 1.0;
  return in;
}

// Q(a) = psi_a^T w from a flat psi output of |A| blocks of length d.
inline Eigen::VectorXd q_from_output(const Eigen::VectorXd& out, const Eigen::VectorXd& w, int num_actions) {
  const auto d = w.size();
  Eigen::VectorXd q(num_actions);
  for (int a = 0; a < num_actions; ++a) q(a) = out.segment(a * d, d).dot(w);
  return q;
}

// Argmax with lowest-index tie-break.
inline int argmax(const Eigen::VectorXd& q) {
  int best = 0;
  for (Eigen::Index a = 1; a < q.size(); ++a)
    if (q(a) > q(best)) best = static_cast<int>(a);
  return best;
}

}  // namespace detail

/// phi for a batch of states, one unit column per state.
inline Eigen::MatrixXd phi_batch(const VisrAgent& agent, const std::vector<int>& states) {
  return nn::forward_batch(agent.phi(), detail::obs_inputs(agent, states));
}

/// d x S matrix of phi over every state.
inline Eigen::MatrixXd phi_all_states(const VisrAgent& agent) {
  return nn::forward_batch(agent.phi(), Eigen::MatrixXd::Identity(agent.num_states(), agent.num_states()));
}

inline Eigen::VectorXd phi_features(const VisrAgent& agent, const Eigen::VectorXd& obs) {
  detail::check_obs(agent, obs);
  return nn::forward(agent.phi(), obs);
}

/// |A| x d matrix whose row a is psi(obs, a, w).
inline Eigen::MatrixXd successor_features(const VisrAgent& agent, const Eigen::VectorXd& obs,
                                          const Eigen::VectorXd& w, bool use_target = false) {
  detail::check_obs(agent, obs);
  detail::check_w(agent, w);
  Eigen::VectorXd in(agent.num_states() + agent.d());
  in << obs, w;
  const Eigen::VectorXd out = nn::forward(use_target ? agent.psi_target().net() : agent.psi(), in);
  Eigen::MatrixXd rows(agent.num_actions(), agent.d());
  for (int a = 0; a < agent.num_actions(); ++a) rows.row(a) = out.segment(a * agent.d(), agent.d()).transpose();
  return rows;
}

/// Q(obs, a | w) = psi(obs, a, w)^T w.
inline Eigen::VectorXd q_values(const VisrAgent& agent, const Eigen::VectorXd& obs, const Eigen::VectorXd& w,
                                bool use_target = false) {
  detail::check_obs(agent, obs);
  detail::check_w(agent, w);
  Eigen::VectorXd in(agent.num_states() + agent.d());
  in << obs, w;
  const Eigen::VectorXd out = nn::forward(use_target ? agent.psi_target().net() : agent.psi(), in);
  return detail::q_from_output(out, w, agent.num_actions());
}

/// log q(w | s) up to a constant: phi(s)^T w.
inline double intrinsic_reward(const VisrAgent& agent, const Eigen::VectorXd& obs, const Eigen::VectorXd& w) {
  detail::check_w(agent, w);
  return phi_features(agent, obs).dot(w);
}

/// One TD(n) regression example. For n = 1, cumulant_states = {s_t} and the
/// bootstrap state is s_{t+1}.
struct TdSample {
  int state = 0;
  int action = 0;
  Eigen::VectorXd w;
  std::vector<int> cumulant_states;
  int bootstrap_state = 0;
  bool bootstrap = true;
  bool truncated = false;  // bootstrap cut by a time limit rather than a terminal state
};

inline TdSample td_sample(const Transition& t, const Eigen::VectorXd& w) {
  return TdSample{t.state, t.action, w, {t.state}, t.next_state, !t.done, t.done && t.truncated};
}

/// y = sum_j gamma^j phi(s_{t+j}) + gamma^n psi_target(s_{t+n}, a', w) with
/// a' = argmax_a psi(s_{t+n}, a, w)^T w under the online network. One column per sample.
/// The bootstrap term is dropped at episode end, unless that end is a time limit and
/// config().bootstrap_truncated is set.
inline Eigen::MatrixXd td_targets(const VisrAgent& agent, const std::vector<TdSample>& batch) {
  const int d = agent.d();
  const double gamma = agent.config().gamma;
  const auto n = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(d, n);

  std::vector<int> cumulant_states;
  for (const auto& s : batch) cumulant_states.insert(cumulant_states.end(), s.cumulant_states.begin(), s.cumulant_states.end());
  const Eigen::MatrixXd phis = phi_batch(agent, cumulant_states);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double discount = 1.0;
    for (std::size_t j = 0; j < batch[static_cast<std::size_t>(i)].cumulant_states.size(); ++j) {
      y.col(i) += discount * phis.col(k++);
      discount *= gamma;
    }
  }

  std::vector<int> boot_states;
  std::vector<Eigen::Index> boot_cols;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = batch[static_cast<std::size_t>(i)];
    if ((s.bootstrap || (s.truncated && agent.config().bootstrap_truncated)) && gamma > 0.0) {
      boot_states.push_back(s.bootstrap_state);
      boot_cols.push_back(i);
    }
  }
  if (boot_states.empty()) return y;

  Eigen::MatrixXd ws(d, static_cast<Eigen::Index>(boot_states.size()));
  for (std::size_t b = 0; b < boot_cols.size(); ++b) ws.col(static_cast<Eigen::Index>(b)) = batch[static_cast<std::size_t>(boot_cols[b])].w;
  const Eigen::MatrixXd in = detail::psi_inputs(agent, boot_states, ws);
  const Eigen::MatrixXd online = nn::forward_batch(agent.psi(), in);
  const Eigen::MatrixXd target = nn::forward_batch(agent.psi_target().net(), in);
  for (std::size_t b = 0; b < boot_cols.size(); ++b) {
    const auto col = static_cast<Eigen::Index>(b);
    const Eigen::VectorXd& w = ws.col(col);
    Eigen::VectorXd q(agent.num_actions());
    for (int a = 0; a < agent.num_actions(); ++a) q(a) = online.col(col).segment(a * d, d).dot(w);
    const int best = detail::argmax(q);
    const auto& sample = batch[static_cast<std::size_t>(boot_cols[b])];
    const double discount = std::pow(gamma, static_cast<double>(sample.cumulant_states.size()));
    y.col(boot_cols[b]) += discount * target.col(col).segment(best * d, d);
  }
  return y;
}

inline Eigen::VectorXd td_target(const VisrAgent& agent, const Transition& t, const Eigen::VectorXd& w) {
  detail::check_w(agent, w);
  return td_targets(agent, {td_sample(t, w)}).col(0);
}

struct LossAndGrad {
  double loss = 0.0;
  nn::Parameters grads;
};

/// Mean over the batch of ||psi(s_t, a_t, w) - y||^2 with y held fixed; gradients for psi only.
inline LossAndGrad td_loss(const VisrAgent& agent, const std::vector<TdSample>& batch, const Eigen::MatrixXd& targets) {
  if (batch.empty()) throw InvalidArgument("td_loss on an empty batch");
  const int d = agent.d();
  const auto n = static_cast<Eigen::Index>(batch.size());
  if (targets.rows() != d || targets.cols() != n) throw DimensionError("targets shape does not match batch");

  std::vector<int> states;
  Eigen::MatrixXd ws(d, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    states.push_back(batch[static_cast<std::size_t>(i)].state);
    ws.col(i) = batch[static_cast<std::size_t>(i)].w;
  }
  const nn::ForwardCache cache = nn::forward_cached(agent.psi(), detail::psi_inputs(agent, states, ws));
  Eigen::MatrixXd out_grad = Eigen::MatrixXd::Zero(cache.output.rows(), n);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int a = batch[static_cast<std::size_t>(i)].action;
    const Eigen::VectorXd err = cache.output.col(i).segment(a * d, d) - targets.col(i);
    loss += err.squaredNorm();
    out_grad.col(i).segment(a * d, d) = 2.0 * err / static_cast<double>(n);
  }
  return {loss / static_cast<double>(n), nn::backward(agent.psi(), cache, out_grad)};
}

inline LossAndGrad td_loss(const VisrAgent& agent, const std::vector<TdSample>& batch) {
  return td_loss(agent, batch, td_targets(agent, batch));
}

/// Mean VMF negative log-likelihood -phi(s)^T w over (state, w) pairs; gradients for phi.
inline LossAndGrad phi_loss(const VisrAgent& agent, const std::vector<int>& states, const Eigen::MatrixXd& ws) {
  if (states.empty()) throw InvalidArgument("phi_loss on an empty batch");
  const auto n = static_cast<Eigen::Index>(states.size());
  if (ws.rows() != agent.d() || ws.cols() != n) throw DimensionError("task vectors shape does not match batch");
  const nn::ForwardCache cache = nn::forward_cached(agent.phi(), detail::obs_inputs(agent, states));
  double loss = 0.0;
  Eigen::MatrixXd out_grad(agent.d(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const VmfLoss l = vmf_nll_loss(cache.output.col(i), ws.col(i));
    loss += l.loss;
    out_grad.col(i) = l.grad_wrt_phi / static_cast<double>(n);
  }
  return {loss / static_cast<double>(n), nn::backward(agent.phi(), cache, out_grad)};
}

/// With probability epsilon a uniform action, otherwise the lowest-index argmax.
inline int epsilon_greedy(const Eigen::VectorXd& q, double epsilon, Rng& rng) {
  if (uniform01(rng) < epsilon) return uniform_int(rng, 0, static_cast<int>(q.size()) - 1);
  return detail::argmax(q);
}

inline int act_epsilon_greedy(const VisrAgent& agent, const Eigen::VectorXd& obs, const Eigen::VectorXd& w, Rng& rng) {
  return epsilon_greedy(q_values(agent, obs, w), agent.config().epsilon, rng);
}

/// max_i psi(obs, a, w_i)^T w_base over w_0 = w_base and the given extra task vectors.
inline Eigen::VectorXd gpi_q_values(const VisrAgent& agent, const Eigen::VectorXd& obs, const Eigen::VectorXd& w_base,
                                    const std::vector<Eigen::VectorXd>& policy_ws) {
  detail::check_obs(agent, obs);
  detail::check_w(agent, w_base);
  const int d = agent.d();
  const auto k = static_cast<Eigen::Index>(policy_ws.size()) + 1;
  Eigen::MatrixXd ws(d, k);
  ws.col(0) = w_base;
  for (Eigen::Index i = 1; i < k; ++i) {
    detail::check_w(agent, policy_ws[static_cast<std::size_t>(i - 1)]);
    ws.col(i) = policy_ws[static_cast<std::size_t>(i - 1)];
  }
  // One forward pass per policy, so the i = 0 term is bit-identical to q_values.
  Eigen::VectorXd q = Eigen::VectorXd::Constant(agent.num_actions(), -std::numeric_limits<double>::infinity());
  Eigen::VectorXd in(agent.num_states() + d);
  in << obs, Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < k; ++i) {
    in.tail(d) = ws.col(i);
    q = q.cwiseMax(detail::q_from_output(nn::forward(agent.psi(), in), w_base, agent.num_actions()));
  }
  return q;
}

/// Samples config.gpi_policies task vectors from VMF(w_base, gpi_kappa), then acts
/// epsilon-greedily on the GPI Q-values (the base policy is always included).
inline int act_gpi(const VisrAgent& agent, const Eigen::VectorXd& obs, const Eigen::VectorXd& w_base, Rng& rng) {
  std::vector<Eigen::VectorXd> ws;
  if (agent.config().gpi_policies > 0) {
    const VmfParams params(UnitVector::normalized(w_base), agent.config().gpi_kappa);
    for (int i = 0; i < agent.config().gpi_policies; ++i) ws.push_back(sample_vmf(params, rng).vec());
  }
  return epsilon_greedy(gpi_q_values(agent, obs, w_base, ws), agent.config().epsilon, rng);
}

// Agent checkpoint "visr-agent-1".

inline constexpr const char* kAgentCheckpointVersion = "visr-agent-1";

inline nlohmann::json agent_checkpoint_json(const VisrAgent& agent) {
  nlohmann::json j;
  j["version"] = kAgentCheckpointVersion;
  j["config"] = agent.config();
  j["num_states"] = agent.num_states();
  j["num_actions"] = agent.num_actions();
  j["phi"] = nn::checkpoint_json(agent.phi(), agent.phi_optimizer());
  j["psi"] = nn::checkpoint_json(agent.psi(), agent.psi_optimizer());
  j["psi_target"] = nn::checkpoint_json(agent.psi_target().net(),
                                        nn::AdamState::for_net(agent.psi_target().net(), 0.0, 1.0));
  return j;
}

inline VisrAgent agent_from_checkpoint_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<std::string>() != kAgentCheckpointVersion)
      throw ConfigError("unsupported agent checkpoint version " + j.at("version").dump());
    const VisrConfig config = j.at("config").get<VisrConfig>();
    auto [phi, phi_opt] = nn::from_checkpoint_json(j.at("phi"));
    auto [psi, psi_opt] = nn::from_checkpoint_json(j.at("psi"));
    auto target = nn::from_checkpoint_json(j.at("psi_target")).first;
    return VisrAgent(config, j.at("num_states").get<int>(), j.at("num_actions").get<int>(), std::move(phi),
                     std::move(phi_opt), std::move(psi), std::move(psi_opt), target);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed agent checkpoint: ") + e.what());
  }
}

inline void save_agent(const std::string& path, const VisrAgent& agent, const nlohmann::json& extra = {}) {
  nlohmann::json j = agent_checkpoint_json(agent);
  if (!extra.is_null()) j["extra"] = extra;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out << j.dump() << '\n';
}

inline VisrAgent load_agent(const std::string& path) { return agent_from_checkpoint_json(read_json_file(path)); }

}  // namespace visr
