#pragma once

// Deterministic gridworld with one-hot observations, plus exact tabular
// oracles (policy evaluation of vector cumulants, greedy improvement, value
// iteration) over finite MDPs.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "visr/error.hpp"
#include "visr/rng.hpp"

namespace visr {

enum class Action : int { up = 0, down = 1, left = 2, right = 3 };
inline constexpr int kNumGridActions = 4;

inline Eigen::VectorXd one_hot(int index, int size) {
  if (index < 0 || index >= size) throw DimensionError("one-hot index out of range");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(size);
  v(index) = 1.0;
  return v;
}

struct Transition {
  int state = 0;
  int action = 0;
  int next_state = 0;
  double extrinsic_reward = 0.0;
  bool done = false;
  bool truncated = false;  // done because the step budget ran out, not a terminal state

  Eigen::VectorXd obs(int num_states) const { return one_hot(state, num_states); }
  Eigen::VectorXd next_obs(int num_states) const { return one_hot(next_state, num_states); }
};

/// Finite MDP dynamics: transition[a](s, s') = P(s' | s, a).
struct TabularMdp {
  int num_states = 0;
  int num_actions = 0;
  std::vector<Eigen::MatrixXd> transition;

  void validate() const {
    if (num_states <= 0 || num_actions <= 0) throw InvalidArgument("empty MDP");
    if (static_cast<int>(transition.size()) != num_actions) throw DimensionError("one matrix per action expected");
    for (const auto& p : transition) {
      if (p.rows() != num_states || p.cols() != num_states) throw DimensionError("transition matrix shape");
      if ((p.rowwise().sum().array() - 1.0).abs().maxCoeff() > 1e-9 || p.minCoeff() < 0.0)
        throw InvalidArgument("transition rows must be probability distributions");
    }
  }
};

/// Action distribution per state (rows sum to one).
class TabularPolicy {
 public:
  explicit TabularPolicy(Eigen::MatrixXd probs) : probs_(std::move(probs)) {
    if (probs_.size() == 0) throw InvalidArgument("empty policy");
    if (probs_.minCoeff() < 0.0 || (probs_.rowwise().sum().array() - 1.0).abs().maxCoeff() > 1e-9)
      throw InvalidArgument("policy rows must be probability distributions");
  }

  static TabularPolicy deterministic(const std::vector<int>& actions, int num_actions) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(actions.size()), num_actions);
    for (std::size_t s = 0; s < actions.size(); ++s) {
      if (actions[s] < 0 || actions[s] >= num_actions) throw InvalidArgument("action out of range");
      p(static_cast<Eigen::Index>(s), actions[s]) = 1.0;
    }
    return TabularPolicy(std::move(p));
  }

  static TabularPolicy uniform(int num_states, int num_actions) {
    return TabularPolicy(Eigen::MatrixXd::Constant(num_states, num_actions, 1.0 / num_actions));
  }

  int num_states() const { return static_cast<int>(probs_.rows()); }
  int num_actions() const { return static_cast<int>(probs_.cols()); }
  double prob(int s, int a) const { return probs_(s, a); }
  const Eigen::MatrixXd& probs() const { return probs_; }

  /// Most probable action, lowest index on ties.
  int action(int s) const {
    int best = 0;
    for (int a = 1; a < num_actions(); ++a)
      if (probs_(s, a) > probs_(s, best)) best = a;
    return best;
  }

 private:
  Eigen::MatrixXd probs_;
};

/// Rows indexed by s * num_actions + a; one column per cumulant component.
using ValueTable = Eigen::MatrixXd;

inline Eigen::Index sa_index(int s, int a, int num_actions) { return static_cast<Eigen::Index>(s) * num_actions + a; }

/// Vector-valued cumulant phi(s, a, s').
using Cumulant = std::function<Eigen::VectorXd(int, int, int)>;

namespace detail {

// Expected immediate cumulant per (s, a).
inline Eigen::MatrixXd expected_cumulant(const TabularMdp& mdp, const Cumulant& cumulant, int dim) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(mdp.num_states) * mdp.num_actions, dim);
  for (int s = 0; s < mdp.num_states; ++s)
    for (int a = 0; a < mdp.num_actions; ++a)
      for (int s2 = 0; s2 < mdp.num_states; ++s2) {
        const double p = mdp.transition[a](s, s2);
        if (p == 0.0) continue;
        Eigen::VectorXd c = cumulant(s, a, s2);
        if (c.size() != dim) throw DimensionError("cumulant dimension mismatch");
        r.row(sa_index(s, a, mdp.num_actions)) += p * c.transpose();
      }
  return r;
}

// (S*A) x S matrix of P(s' | s, a).
inline Eigen::MatrixXd stacked_transitions(const TabularMdp& mdp) {
  Eigen::MatrixXd p(static_cast<Eigen::Index>(mdp.num_states) * mdp.num_actions, mdp.num_states);
  for (int s = 0; s < mdp.num_states; ++s)
    for (int a = 0; a < mdp.num_actions; ++a) p.row(sa_index(s, a, mdp.num_actions)) = mdp.transition[a].row(s);
  return p;
}

// S x (S*A) matrix averaging rows with the policy.
inline Eigen::MatrixXd policy_averaging(const TabularPolicy& pi, int num_actions) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(pi.num_states(), static_cast<Eigen::Index>(pi.num_states()) * num_actions);
  for (int s = 0; s < pi.num_states(); ++s)
    for (int a = 0; a < num_actions; ++a) m(s, sa_index(s, a, num_actions)) = pi.prob(s, a);
  return m;
}

inline void check_policy(const TabularMdp& mdp, const TabularPolicy& pi) {
  if (pi.num_states() != mdp.num_states || pi.num_actions() != mdp.num_actions)
    throw DimensionError("policy does not match MDP shape");
}

}  // namespace detail

/// Max-norm Bellman residual of psi for policy pi and cumulant table r = E[phi | s, a].
inline double bellman_residual(const TabularMdp& mdp, const TabularPolicy& pi, const Eigen::MatrixXd& expected_cumulant,
                               double gamma, const ValueTable& psi) {
  const Eigen::MatrixXd p = detail::stacked_transitions(mdp);
  const Eigen::MatrixXd avg = detail::policy_averaging(pi, mdp.num_actions);
  const Eigen::MatrixXd backup = expected_cumulant + gamma * p * (avg * psi);
  return (backup - psi).cwiseAbs().maxCoeff();
}

inline constexpr double kPolicyEvaluationResidual = 1e-10;

/// Successor features of `pi`: psi(s,a) = sum_s' P(s'|s,a) [phi(s,a,s') + gamma psi(s', pi(s'))].
/// Solves the state-level linear system directly, then refines until the residual is <= 1e-10.
inline ValueTable exact_policy_evaluation(const TabularMdp& mdp, const TabularPolicy& pi, const Cumulant& cumulant,
                                          int dim, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("gamma must lie in [0, 1), got " + std::to_string(gamma));
  if (dim < 1) throw DimensionError("cumulant dimension must be >= 1");
  mdp.validate();
  detail::check_policy(mdp, pi);

  const Eigen::MatrixXd r = detail::expected_cumulant(mdp, cumulant, dim);
  const Eigen::MatrixXd p = detail::stacked_transitions(mdp);
  const Eigen::MatrixXd avg = detail::policy_averaging(pi, mdp.num_actions);

  // State values v = avg * psi satisfy (I - gamma avg P) v = avg r.
  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(mdp.num_states, mdp.num_states) - gamma * avg * p;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  Eigen::MatrixXd v = lu.solve(avg * r);
  ValueTable psi = r + gamma * p * v;

  for (int iter = 0; iter < 8; ++iter) {
    const Eigen::MatrixXd backup = r + gamma * p * (avg * psi);
    const double residual = (backup - psi).cwiseAbs().maxCoeff();
    if (residual <= kPolicyEvaluationResidual) return psi;
    // Correct the state values with one more solve against the residual.
    const Eigen::MatrixXd state_residual = avg * (backup - psi);
    v = avg * psi + lu.solve(state_residual);
    psi = r + gamma * p * v;
  }
  if (!psi.allFinite()) throw NumericalError("policy evaluation produced non-finite values");
  throw NumericalError("policy evaluation did not reach the residual tolerance");
}

/// Scalar Q-values from a vector value table: Q = table * w.
inline Eigen::VectorXd q_from_table(const ValueTable& table, const Eigen::VectorXd& w) {
  if (table.cols() != w.size()) throw DimensionError("value table width does not match w");
  return table * w;
}

/// Deterministic argmax policy over Q (rows s*A+a); ties go to the lowest action index.
inline TabularPolicy greedy_policy(const Eigen::VectorXd& q, int num_actions) {
  if (num_actions < 1 || q.size() % num_actions != 0) throw DimensionError("Q size is not a multiple of |A|");
  const int num_states = static_cast<int>(q.size() / num_actions);
  std::vector<int> actions(static_cast<std::size_t>(num_states), 0);
  for (int s = 0; s < num_states; ++s) {
    int best = 0;
    for (int a = 1; a < num_actions; ++a)
      if (q(sa_index(s, a, num_actions)) > q(sa_index(s, best, num_actions))) best = a;
    actions[static_cast<std::size_t>(s)] = best;
  }
  return TabularPolicy::deterministic(actions, num_actions);
}

inline TabularPolicy exact_greedy_policy(const ValueTable& table, const Eigen::VectorXd& w, int num_actions) {
  return greedy_policy(q_from_table(table, w), num_actions);
}

/// Generalized policy improvement: argmax_a max_i Q_i(s, a), lowest action index on ties.
inline TabularPolicy gpi_policy(const std::vector<Eigen::VectorXd>& qs, int num_actions) {
  if (qs.empty()) throw InvalidArgument("GPI needs at least one Q table");
  Eigen::VectorXd best = qs.front();
  for (const auto& q : qs) {
    if (q.size() != best.size()) throw DimensionError("Q tables differ in size");
    best = best.cwiseMax(q);
  }
  return greedy_policy(best, num_actions);
}

/// Optimal Q for scalar reward table r (rows s*A+a) by value iteration to max-norm change <= tol.
inline Eigen::VectorXd exact_value_iteration(const TabularMdp& mdp, const Eigen::VectorXd& reward, double gamma,
                                             double tol = 1e-12) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("gamma must lie in [0, 1)");
  const Eigen::MatrixXd p = detail::stacked_transitions(mdp);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(reward.size());
  for (int iter = 0; iter < 1000000; ++iter) {
    Eigen::VectorXd v(mdp.num_states);
    for (int s = 0; s < mdp.num_states; ++s)
      v(s) = q.segment(sa_index(s, 0, mdp.num_actions), mdp.num_actions).maxCoeff();
    Eigen::VectorXd next = reward + gamma * p * v;
    const double change = (next - q).cwiseAbs().maxCoeff();
    q = std::move(next);
    if (change <= tol) return q;
  }
  throw NumericalError("value iteration did not converge");
}

struct GridConfig {
  int width = 10;
  int height = 10;
  int episode_length = 40;
};

/// Deterministic bump-and-stay gridworld; episodes end only when the step budget is spent.
class GridWorld {
 public:
  explicit GridWorld(GridConfig config = {}) : config_(config) {
    if (config_.width < 1 || config_.height < 1) throw InvalidArgument("grid must be at least 1x1");
    if (config_.episode_length < 1) throw InvalidArgument("episode length must be >= 1");
  }

  const GridConfig& config() const { return config_; }
  int num_states() const { return config_.width * config_.height; }
  int num_actions() const { return kNumGridActions; }
  int episode_length() const { return config_.episode_length; }

  int state_index(int row, int col) const { return row * config_.width + col; }
  int row_of(int state) const { return state / config_.width; }
  int col_of(int state) const { return state % config_.width; }

  /// Uniform random start cell.
  int reset(Rng& rng) { return reset_to(uniform_int(rng, 0, num_states() - 1)); }

  int reset_to(int state) {
    if (state < 0 || state >= num_states()) throw InvalidArgument("start state out of range");
    state_ = state;
    steps_ = 0;
    return state_;
  }

  int state() const { return state_; }
  int row() const { return row_of(state_); }
  int col() const { return col_of(state_); }
  int steps() const { return steps_; }
  bool done() const { return steps_ >= config_.episode_length; }
  Eigen::VectorXd observation() const { return one_hot(state_, num_states()); }

  int next_state(int state, int action) const {
    int r = row_of(state);
    int c = col_of(state);
    switch (static_cast<Action>(action)) {
      case Action::up: r = std::max(r - 1, 0); break;
      case Action::down: r = std::min(r + 1, config_.height - 1); break;
      case Action::left: c = std::max(c - 1, 0); break;
      case Action::right: c = std::min(c + 1, config_.width - 1); break;
      default: throw InvalidArgument("unknown action " + std::to_string(action));
    }
    return state_index(r, c);
  }

  Transition step(int action) {
    if (done()) throw InvalidArgument("episode already finished; call reset()");
    Transition t;
    t.state = state_;
    t.action = action;
    t.next_state = next_state(state_, action);
    state_ = t.next_state;
    ++steps_;
    t.done = done();
    t.truncated = t.done;  // no terminal cells
    return t;
  }

  TabularMdp to_tabular() const {
    TabularMdp mdp;
    mdp.num_states = num_states();
    mdp.num_actions = num_actions();
    for (int a = 0; a < num_actions(); ++a) {
      Eigen::MatrixXd p = Eigen::MatrixXd::Zero(num_states(), num_states());
      for (int s = 0; s < num_states(); ++s) p(s, next_state(s, a)) = 1.0;
      mdp.transition.push_back(std::move(p));
    }
    return mdp;
  }

 private:
  GridConfig config_;
  int state_ = 0;
  int steps_ = 0;
};

}  // namespace visr
