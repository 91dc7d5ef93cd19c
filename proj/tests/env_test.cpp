#include "visr/env.hpp"

#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "visr/geometry.hpp"

namespace visr {
namespace {

constexpr int kUp = static_cast<int>(Action::up);
constexpr int kRight = static_cast<int>(Action::right);

TabularMdp random_mdp(int states, int actions, Rng& rng) {
  TabularMdp mdp;
  mdp.num_states = states;
  mdp.num_actions = actions;
  for (int a = 0; a < actions; ++a) mdp.transition.push_back(testing::random_stochastic(states, states, rng));
  return mdp;
}

// Random cumulant table, looked up by (s, a, s').
Cumulant table_cumulant(int states, int actions, int dim, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  auto table = std::make_shared<std::vector<Eigen::VectorXd>>();
  for (int i = 0; i < states * actions * states; ++i) {
    Eigen::VectorXd v(dim);
    for (int k = 0; k < dim; ++k) v(k) = g(rng);
    table->push_back(v);
  }
  return [table, states, actions](int s, int a, int s2) {
    return (*table)[static_cast<std::size_t>((s * actions + a) * states + s2)];
  };
}

TEST(GridWorldDynamics, WallBumpStays) {
  GridWorld env;
  env.reset_to(env.state_index(0, 0));
  const Transition t = env.step(kUp);
  EXPECT_EQ(t.next_state, env.state_index(0, 0));
  EXPECT_EQ(env.row(), 0);
  EXPECT_EQ(env.col(), 0);
}

TEST(GridWorldDynamics, MovesOneCell) {
  GridWorld env;
  env.reset_to(env.state_index(4, 4));
  env.step(kRight);
  EXPECT_EQ(env.row(), 4);
  EXPECT_EQ(env.col(), 5);
  env.step(static_cast<int>(Action::down));
  EXPECT_EQ(env.row(), 5);
  env.step(static_cast<int>(Action::left));
  EXPECT_EQ(env.col(), 4);
}

TEST(GridWorldDynamics, ExactlyOneDoneAtStepForty) {
  GridWorld env;
  Rng rng = make_rng(30);
  env.reset(rng);
  int dones = 0;
  for (int t = 1; t <= 40; ++t) {
    const Transition tr = env.step(uniform_int(rng, 0, 3));
    EXPECT_EQ(tr.truncated, tr.done);
    if (tr.done) {
      ++dones;
      EXPECT_EQ(t, 40);
    }
    EXPECT_GE(env.row(), 0);
    EXPECT_LT(env.row(), 10);
    EXPECT_GE(env.col(), 0);
    EXPECT_LT(env.col(), 10);
  }
  EXPECT_EQ(dones, 1);
  EXPECT_THROW(env.step(0), InvalidArgument);
}

TEST(GridWorldDynamics, ObservationsAreOneHot) {
  GridWorld env;
  Rng rng = make_rng(31);
  env.reset(rng);
  for (int t = 0; t < 40; ++t) {
    const Eigen::VectorXd o = env.observation();
    EXPECT_EQ(o.size(), 100);
    EXPECT_EQ(o.sum(), 1.0);
    EXPECT_EQ(o.maxCoeff(), 1.0);
    EXPECT_EQ(o(env.state()), 1.0);
    env.step(uniform_int(rng, 0, 3));
  }
}

TEST(GridWorldDynamics, StartStatesCoverTheGrid) {
  GridWorld env;
  Rng rng = make_rng(32);
  std::vector<int> counts(100, 0);
  for (int i = 0; i < 20000; ++i) counts[static_cast<std::size_t>(env.reset(rng))]++;
  for (int c : counts) {
    EXPECT_GT(c, 120);
    EXPECT_LT(c, 280);
  }
}

TEST(GridWorldDynamics, TabularMatchesStep) {
  GridWorld env;
  const TabularMdp mdp = env.to_tabular();
  EXPECT_NO_THROW(mdp.validate());
  for (int s = 0; s < 100; ++s)
    for (int a = 0; a < 4; ++a) {
      env.reset_to(s);
      EXPECT_EQ(mdp.transition[static_cast<std::size_t>(a)](s, env.step(a).next_state), 1.0);
    }
}

TEST(PolicyEvaluation, ZeroCumulantGivesZero) {
  Rng rng = make_rng(33);
  const TabularMdp mdp = random_mdp(6, 3, rng);
  const auto psi = exact_policy_evaluation(mdp, TabularPolicy::uniform(6, 3),
                                           [](int, int, int) { return Eigen::VectorXd::Zero(2); }, 2, 0.9);
  EXPECT_EQ(psi.cwiseAbs().maxCoeff(), 0.0);
}

TEST(PolicyEvaluation, SingleStateGeometricSeries) {
  TabularMdp mdp{1, 2, {Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1)}};
  const auto psi = exact_policy_evaluation(mdp, TabularPolicy::deterministic({1}, 2),
                                           [](int, int, int) { return Eigen::Vector2d(1.5, -2.0); }, 2, 0.99);
  EXPECT_NEAR(psi(0, 0), 150.0, 1e-9);
  EXPECT_NEAR(psi(1, 1), -200.0, 1e-9);
}

TEST(PolicyEvaluation, MatchesDirectSolveOnRandomMdps) {
  Rng rng = make_rng(34);
  for (int trial = 0; trial < 10; ++trial) {
    const TabularMdp mdp = random_mdp(10, 3, rng);
    const Eigen::MatrixXd pi = testing::random_stochastic(10, 3, rng);
    const Cumulant c = table_cumulant(10, 3, 1, rng);
    const auto psi = exact_policy_evaluation(mdp, TabularPolicy(pi), c, 1, 0.95);
    Eigen::MatrixXd r(30, 1);
    for (int s = 0; s < 10; ++s)
      for (int a = 0; a < 3; ++a) {
        double e = 0.0;
        for (int s2 = 0; s2 < 10; ++s2) e += mdp.transition[static_cast<std::size_t>(a)](s, s2) * c(s, a, s2)(0);
        r(s * 3 + a, 0) = e;
      }
    const Eigen::MatrixXd oracle = testing::state_action_solve(mdp.transition, pi, r, 0.95);
    EXPECT_LE((psi - oracle).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE(bellman_residual(mdp, TabularPolicy(pi), r, 0.95, psi), 1e-10);
  }
}

TEST(PolicyEvaluation, GridworldResidualAtHighDiscount) {
  GridWorld env;
  const TabularMdp mdp = env.to_tabular();
  Rng rng = make_rng(35);
  const Eigen::MatrixXd pi = testing::random_stochastic(100, 4, rng);
  Eigen::MatrixXd feats(100, 5);
  for (int s = 0; s < 100; ++s) feats.row(s) = sample_uniform_sphere(5, rng).vec().transpose();
  const Cumulant c = [&feats](int s, int, int) { return Eigen::VectorXd(feats.row(s).transpose()); };
  const auto psi = exact_policy_evaluation(mdp, TabularPolicy(pi), c, 5, 0.99);
  Eigen::MatrixXd r(400, 5);
  for (int s = 0; s < 100; ++s)
    for (int a = 0; a < 4; ++a) r.row(s * 4 + a) = feats.row(s);
  EXPECT_LE(bellman_residual(mdp, TabularPolicy(pi), r, 0.99, psi), 1e-10);
}

TEST(PolicyEvaluation, DiscountOutOfRangeIsAnError) {
  Rng rng = make_rng(36);
  const TabularMdp mdp = random_mdp(3, 2, rng);
  const auto zero = [](int, int, int) { return Eigen::VectorXd::Zero(1); };
  EXPECT_THROW(exact_policy_evaluation(mdp, TabularPolicy::uniform(3, 2), zero, 1, 1.0), InvalidArgument);
  EXPECT_THROW(exact_policy_evaluation(mdp, TabularPolicy::uniform(3, 2), zero, 1, -0.1), InvalidArgument);
  EXPECT_THROW(exact_policy_evaluation(mdp, TabularPolicy::uniform(4, 2), zero, 1, 0.5), DimensionError);
}

TEST(GreedyPolicy, ConstantTableTiesToActionZero) {
  const ValueTable table = ValueTable::Constant(12, 2, 0.3);
  const TabularPolicy pi = exact_greedy_policy(table, Eigen::Vector2d(0.6, 0.8), 4);
  for (int s = 0; s < 3; ++s) EXPECT_EQ(pi.action(s), 0);
}

TEST(GreedyPolicy, PicksStrictMaximum) {
  ValueTable table = ValueTable::Zero(4, 1);
  table(2, 0) = 1.0;
  EXPECT_EQ(exact_greedy_policy(table, Eigen::VectorXd::Ones(1), 4).action(0), 2);
}

TEST(GreedyPolicy, InvariantToPositiveScaling) {
  Rng rng = make_rng(37);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd q(40);
  for (int i = 0; i < 40; ++i) q(i) = g(rng);
  const TabularPolicy a = greedy_policy(q, 4);
  const TabularPolicy b = greedy_policy(7.5 * q, 4);
  EXPECT_EQ(a.probs(), b.probs());
}

TEST(GreedyPolicy, PolicyImprovementTheorem) {
  GridWorld env;
  const TabularMdp mdp = env.to_tabular();
  Rng rng = make_rng(38);
  for (int trial = 0; trial < 5; ++trial) {
    const Cumulant c = table_cumulant(100, 4, 1, rng);
    const TabularPolicy pi(testing::random_stochastic(100, 4, rng));
    const auto q = exact_policy_evaluation(mdp, pi, c, 1, 0.99);
    const TabularPolicy improved = greedy_policy(q.col(0), 4);
    const auto q2 = exact_policy_evaluation(mdp, improved, c, 1, 0.99);
    EXPECT_GE((q2 - q).minCoeff(), -1e-8);
  }
}

TEST(ValueIteration, MatchesEvaluationOfGreedyPolicy) {
  Rng rng = make_rng(39);
  const TabularMdp mdp = random_mdp(8, 3, rng);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd r(24);
  for (int i = 0; i < 24; ++i) r(i) = g(rng);
  const Eigen::VectorXd qstar = exact_value_iteration(mdp, r, 0.9);
  const TabularPolicy pi = greedy_policy(qstar, 3);
  const Eigen::VectorXd q = testing::iterate_state_action_values(mdp.transition, pi.probs(), r, 0.9);
  EXPECT_LE((q - qstar).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Policies, Validation) {
  EXPECT_THROW(TabularPolicy(Eigen::MatrixXd::Constant(2, 2, 0.7)), InvalidArgument);
  EXPECT_THROW(TabularPolicy::deterministic({0, 5}, 4), InvalidArgument);
  EXPECT_EQ(TabularPolicy::deterministic({3, 1}, 4).action(0), 3);
}

}  // namespace
}  // namespace visr
