#include "visr/agent.hpp"

#include <cmath>
#include <filesystem>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "visr/env.hpp"

namespace visr {
namespace {

VisrConfig small_config() {
  VisrConfig c;
  c.phi_hidden = {16};
  c.psi_hidden = {16};
  return c;
}

VisrAgent make_agent(VisrConfig c, std::uint64_t seed, int states = 100) {
  Rng rng = make_rng(seed);
  return VisrAgent(std::move(c), states, kNumGridActions, rng);
}

// Single linear layer with zero weights: output is the bias for every input.
void set_constant_output(nn::Mlp& net, const Eigen::VectorXd& out) {
  ASSERT_EQ(net.layer_dims().size(), 2u);
  net.params().weights[0].setZero();
  net.params().biases[0] = out;
}

std::vector<TdSample> random_batch(const VisrAgent& agent, int n, Rng& rng) {
  std::vector<TdSample> batch;
  for (int i = 0; i < n; ++i) {
    Transition t;
    t.state = uniform_int(rng, 0, agent.num_states() - 1);
    t.action = uniform_int(rng, 0, agent.num_actions() - 1);
    t.next_state = uniform_int(rng, 0, agent.num_states() - 1);
    t.done = (i % 5 == 4);
    batch.push_back(td_sample(t, sample_uniform_sphere(agent.d(), rng).vec()));
  }
  return batch;
}

TEST(Config, DefaultsAndValidation) {
  const VisrConfig c;
  EXPECT_EQ(c.d, 5);
  EXPECT_DOUBLE_EQ(c.gamma, 0.99);
  EXPECT_DOUBLE_EQ(c.epsilon, 0.05);
  EXPECT_EQ(c.gpi_policies, 10);
  EXPECT_DOUBLE_EQ(c.gpi_kappa, 5.0);
  EXPECT_EQ(c.rollout_length, 40);
  EXPECT_DOUBLE_EQ(c.learning_rate, 1e-4);
  EXPECT_DOUBLE_EQ(c.adam_epsilon, 1e-3);
  EXPECT_EQ(c.batch_size, 32);
  EXPECT_FALSE(c.rf_ablation);
  EXPECT_TRUE(c.bootstrap_truncated);
  EXPECT_NO_THROW(c.validate());

  VisrConfig bad = c;
  bad.gamma = 1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.epsilon = 1.5;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Config, JsonRoundTripAndUnknownKeys) {
  VisrConfig c = small_config();
  c.gamma = 0.9;
  c.rf_ablation = true;
  c.bootstrap_truncated = false;
  const VisrConfig back = nlohmann::json(c).get<VisrConfig>();
  EXPECT_EQ(nlohmann::json(back), nlohmann::json(c));
  EXPECT_THROW(nlohmann::json({{"gama", 0.9}}).get<VisrConfig>(), ConfigError);
  EXPECT_THROW(nlohmann::json({{"gamma", "high"}}).get<VisrConfig>(), ConfigError);
}

TEST(Agent, NetworkShapes) {
  const VisrAgent agent = make_agent(VisrConfig{}, 1);
  EXPECT_EQ(agent.phi().layer_dims(), (std::vector<int>{100, 100, 100, 5}));
  EXPECT_EQ(agent.psi().layer_dims(), (std::vector<int>{105, 100, 100, 20}));
  EXPECT_EQ(agent.phi().head(), nn::OutputHead::l2_normalized);
  EXPECT_EQ(agent.psi().head(), nn::OutputHead::linear);
  const Eigen::MatrixXd phis = phi_all_states(agent);
  for (int s = 0; s < 100; ++s) EXPECT_NEAR(phis.col(s).norm(), 1.0, 1e-9);
}

TEST(QValues, ZeroPsiGivesZero) {
  VisrConfig c = small_config();
  c.psi_hidden = {};
  VisrAgent agent = make_agent(c, 2);
  set_constant_output(agent.psi(), Eigen::VectorXd::Zero(20));
  Rng rng = make_rng(3);
  const Eigen::VectorXd q = q_values(agent, one_hot(7, 100), sample_uniform_sphere(5, rng).vec());
  EXPECT_EQ(q, Eigen::VectorXd::Zero(4));
}

TEST(QValues, PsiEqualToWGivesOne) {
  VisrConfig c = small_config();
  c.psi_hidden = {};
  VisrAgent agent = make_agent(c, 4);
  Rng rng = make_rng(5);
  const Eigen::VectorXd w = sample_uniform_sphere(5, rng).vec();
  set_constant_output(agent.psi(), w.replicate(4, 1));
  const Eigen::VectorXd q = q_values(agent, one_hot(3, 100), w);
  for (int a = 0; a < 4; ++a) EXPECT_NEAR(q(a), 1.0, 1e-12);
}

TEST(QValues, LinearInTheDotProductArgument) {
  const VisrAgent agent = make_agent(small_config(), 6);
  Rng rng = make_rng(7);
  const Eigen::VectorXd cond = sample_uniform_sphere(5, rng).vec();
  const Eigen::MatrixXd psi = successor_features(agent, one_hot(11, 100), cond);
  const Eigen::VectorXd w1 = sample_uniform_sphere(5, rng).vec();
  const Eigen::VectorXd w2 = sample_uniform_sphere(5, rng).vec();
  EXPECT_LE((psi * (0.3 * w1 - 1.7 * w2) - (0.3 * (psi * w1) - 1.7 * (psi * w2))).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((psi * cond - q_values(agent, one_hot(11, 100), cond)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(QValues, TargetFlagUsesSnapshot) {
  VisrAgent agent = make_agent(small_config(), 8);
  Rng rng = make_rng(9);
  const Eigen::VectorXd w = sample_uniform_sphere(5, rng).vec();
  const Eigen::VectorXd obs = one_hot(0, 100);
  agent.psi().params().biases.back().array() += 0.5;
  EXPECT_NE(q_values(agent, obs, w), q_values(agent, obs, w, true));
  agent.refresh_target();
  EXPECT_EQ(q_values(agent, obs, w), q_values(agent, obs, w, true));
}

TEST(QValues, DimensionMismatchIsAnError) {
  const VisrAgent agent = make_agent(small_config(), 10);
  EXPECT_THROW(q_values(agent, one_hot(0, 99), UnitVector::basis(5, 0)), DimensionError);
  EXPECT_THROW(q_values(agent, one_hot(0, 100), UnitVector::basis(4, 0)), DimensionError);
}

TEST(IntrinsicReward, Examples) {
  VisrConfig c = small_config();
  c.phi_hidden = {};
  VisrAgent agent = make_agent(c, 11);
  const Eigen::VectorXd w = UnitVector::basis(5, 2).vec();
  set_constant_output(agent.phi(), w);
  EXPECT_DOUBLE_EQ(intrinsic_reward(agent, one_hot(4, 100), w), 1.0);
  EXPECT_DOUBLE_EQ(intrinsic_reward(agent, one_hot(4, 100), UnitVector::basis(5, 0).vec()), 0.0);
}

TEST(IntrinsicReward, BoundedForAllStatesAndTasks) {
  const VisrAgent agent = make_agent(VisrConfig{}, 12);
  Rng rng = make_rng(13);
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd w = sample_uniform_sphere(5, rng).vec();
    for (int s = 0; s < 100; s += 7) {
      const double r = intrinsic_reward(agent, one_hot(s, 100), w);
      EXPECT_GE(r, -1.0 - 1e-12);
      EXPECT_LE(r, 1.0 + 1e-12);
    }
  }
}

TEST(TdTarget, DoneTransitionDoesNotBootstrap) {
  const VisrAgent agent = make_agent(small_config(), 14);
  const Transition t{3, 1, 4, 0.0, true};
  const Eigen::VectorXd w = UnitVector::basis(5, 1).vec();
  EXPECT_EQ(td_target(agent, t, w), phi_features(agent, one_hot(3, 100)));
}

TEST(TdTarget, TimeLimitBootstrapsOnlyWhenEnabled) {
  VisrConfig c = small_config();
  c.bootstrap_truncated = false;
  Transition t{3, 1, 4, 0.0, true, true};
  const Eigen::VectorXd w = UnitVector::basis(5, 2).vec();
  const VisrAgent off = make_agent(c, 44);
  EXPECT_EQ(td_target(off, t, w), phi_features(off, one_hot(3, 100)));
  c.bootstrap_truncated = true;
  const VisrAgent on = make_agent(c, 44);
  const Eigen::VectorXd y = td_target(on, t, w);
  t.done = false;
  t.truncated = false;
  EXPECT_EQ(y, td_target(on, t, w));
  EXPECT_NE(y, phi_features(on, one_hot(3, 100)));
  // A terminal (not truncated) end never bootstraps.
  t.done = true;
  EXPECT_EQ(td_target(on, t, w), phi_features(on, one_hot(3, 100)));
}

TEST(TdTarget, ZeroDiscountDoesNotBootstrap) {
  VisrConfig c = small_config();
  c.gamma = 0.0;
  const VisrAgent agent = make_agent(c, 15);
  const Transition t{3, 1, 4, 0.0, false};
  EXPECT_EQ(td_target(agent, t, UnitVector::basis(5, 4).vec()), phi_features(agent, one_hot(3, 100)));
}

TEST(TdTarget, OnlineArgmaxTargetValue) {
  VisrAgent agent = make_agent(small_config(), 16);
  Rng rng = make_rng(17);
  // Move the online network away from the target so the two disagree.
  for (auto& b : agent.psi().params().biases) b += Eigen::VectorXd::Random(b.size());
  const Eigen::VectorXd w = sample_uniform_sphere(5, rng).vec();
  const Transition t{10, 2, 11, 0.0, false};
  const Eigen::VectorXd q_online = q_values(agent, one_hot(11, 100), w);
  Eigen::Index best = 0;
  q_online.maxCoeff(&best);
  const Eigen::MatrixXd target_sf = successor_features(agent, one_hot(11, 100), w, true);
  const Eigen::VectorXd expected = phi_features(agent, one_hot(10, 100)) + 0.99 * target_sf.row(best).transpose();
  const Eigen::VectorXd y = td_target(agent, t, w);
  EXPECT_LE((y - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(y.norm(), 1.0 + 0.99 * target_sf.row(best).norm() + 1e-12);
}

TEST(TdTarget, NStepSumsDiscountedFeatures) {
  VisrConfig c = small_config();
  c.gamma = 0.9;
  const VisrAgent agent = make_agent(c, 18);
  const Eigen::VectorXd w = UnitVector::basis(5, 0).vec();
  TdSample s{5, 0, w, {5, 6, 7}, 8, true};
  const Eigen::VectorXd y = td_targets(agent, {s}).col(0);
  const Eigen::VectorXd q = q_values(agent, one_hot(8, 100), w);
  Eigen::Index best = 0;
  q.maxCoeff(&best);
  const Eigen::VectorXd expected = phi_features(agent, one_hot(5, 100)) + 0.9 * phi_features(agent, one_hot(6, 100)) +
                                   0.81 * phi_features(agent, one_hot(7, 100)) +
                                   0.729 * successor_features(agent, one_hot(8, 100), w, true).row(best).transpose();
  EXPECT_LE((y - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(TdLoss, ExactTargetGivesZeroLossAndGradient) {
  const VisrAgent agent = make_agent(small_config(), 19);
  Rng rng = make_rng(20);
  const auto batch = random_batch(agent, 8, rng);
  Eigen::MatrixXd y(5, 8);
  for (int i = 0; i < 8; ++i)
    y.col(i) = successor_features(agent, one_hot(batch[i].state, 100), batch[i].w).row(batch[i].action).transpose();
  const LossAndGrad lg = td_loss(agent, batch, y);
  EXPECT_NEAR(lg.loss, 0.0, 1e-24);
  for (double g : lg.grads.flatten()) EXPECT_NEAR(g, 0.0, 1e-12);
}

TEST(TdLoss, AnalyticScalarCase) {
  VisrConfig c = small_config();
  c.d = 2;
  c.psi_hidden = {};
  VisrAgent agent = make_agent(c, 21, 3);
  set_constant_output(agent.psi(), Eigen::VectorXd::Zero(8));
  const TdSample s{0, 1, Eigen::Vector2d(1.0, 0.0), {0}, 1, false};
  const LossAndGrad lg = td_loss(agent, {s}, Eigen::Vector2d(2.0, 0.0));
  EXPECT_DOUBLE_EQ(lg.loss, 4.0);
  // Output index of action 1, component 0.
  EXPECT_DOUBLE_EQ(lg.grads.biases[0](2), -4.0);
  EXPECT_DOUBLE_EQ(lg.grads.biases[0](0), 0.0);
}

TEST(TdLoss, GradientMatchesFiniteDifferences) {
  VisrAgent agent = make_agent(VisrConfig{}, 22);
  for (auto& b : agent.psi().params().biases) b += 0.1 * Eigen::VectorXd::Random(b.size());
  Rng rng = make_rng(23);
  const auto batch = random_batch(agent, 16, rng);
  const Eigen::MatrixXd y = td_targets(agent, batch);
  const LossAndGrad lg = td_loss(agent, batch, y);
  const auto report = testing::finite_difference_check(
      agent.psi().params(), lg.grads, [&] { return td_loss(agent, batch, y).loss; }, 30, rng);
  EXPECT_GE(report.nonzero_coordinates, 30);
  EXPECT_LE(report.max_rel_error, 1e-4);
}

TEST(TdLoss, EmptyBatchIsAnError) {
  const VisrAgent agent = make_agent(small_config(), 24);
  EXPECT_THROW(td_loss(agent, {}), InvalidArgument);
}

TEST(PhiLoss, GradientMatchesFiniteDifferences) {
  VisrAgent agent = make_agent(VisrConfig{}, 25);
  Rng rng = make_rng(26);
  std::vector<int> states;
  Eigen::MatrixXd ws(5, 16);
  for (int i = 0; i < 16; ++i) {
    states.push_back(uniform_int(rng, 0, 99));
    ws.col(i) = sample_uniform_sphere(5, rng).vec();
  }
  const LossAndGrad lg = phi_loss(agent, states, ws);
  const auto report = testing::finite_difference_check(
      agent.phi().params(), lg.grads, [&] { return phi_loss(agent, states, ws).loss; }, 30, rng);
  EXPECT_GE(report.nonzero_coordinates, 30);
  EXPECT_LE(report.max_rel_error, 1e-4);
  EXPECT_GE(lg.loss, -1.0);
  EXPECT_LE(lg.loss, 1.0);
}

TEST(EpsilonGreedy, FullyRandomIsUniform) {
  Rng rng = make_rng(27);
  const Eigen::Vector4d q(0.1, 0.9, 0.3, -0.2);
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 10000; ++i) counts[static_cast<std::size_t>(epsilon_greedy(q, 1.0, rng))]++;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - 2500.0) * (c - 2500.0) / 2500.0;
  // 99.9% quantile of chi-square with 3 degrees of freedom.
  EXPECT_LT(chi2, 16.27);
}

TEST(EpsilonGreedy, GreedyIsDeterministicArgmax) {
  Rng rng = make_rng(28);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(epsilon_greedy(Eigen::Vector4d(0.1, 0.9, 0.3, -0.2), 0.0, rng), 1);
  EXPECT_EQ(epsilon_greedy(Eigen::Vector4d(0.5, 0.5, 0.5, 0.5), 0.0, rng), 0);
}

TEST(EpsilonGreedy, NonGreedyRate) {
  VisrAgent agent = make_agent(small_config(), 29);
  Rng rng = make_rng(30);
  const Eigen::VectorXd w = UnitVector::basis(5, 3).vec();
  const Eigen::VectorXd obs = one_hot(42, 100);
  const Eigen::VectorXd q = q_values(agent, obs, w);
  Eigen::Index best = 0;
  q.maxCoeff(&best);
  int off = 0;
  for (int i = 0; i < 10000; ++i) off += act_epsilon_greedy(agent, obs, w, rng) != best;
  EXPECT_NEAR(off / 10000.0, 0.05 * 0.75, 0.01);
}

TEST(Gpi, NoExtraPoliciesMatchesEpsilonGreedy) {
  VisrAgent agent = make_agent(small_config(), 31);
  agent.set_gpi(0, 5.0);
  agent.set_epsilon(0.3);
  Rng a = make_rng(32);
  Rng b = make_rng(32);
  Rng tasks = make_rng(33);
  for (int i = 0; i < 500; ++i) {
    const Eigen::VectorXd w = sample_uniform_sphere(5, tasks).vec();
    const Eigen::VectorXd obs = one_hot(i % 100, 100);
    EXPECT_EQ(act_gpi(agent, obs, w, a), act_epsilon_greedy(agent, obs, w, b));
  }
}

TEST(Gpi, ConcentratedPoliciesMatchEpsilonGreedyStatistically) {
  VisrAgent agent = make_agent(small_config(), 34);
  agent.set_gpi(10, 1e6);
  Rng rng = make_rng(35);
  const Eigen::VectorXd w = sample_uniform_sphere(5, rng).vec();
  for (int s : {0, 37, 99}) {
    const Eigen::VectorXd obs = one_hot(s, 100);
    std::vector<double> f_gpi(4, 0.0), f_eps(4, 0.0);
    for (int i = 0; i < 10000; ++i) {
      f_gpi[static_cast<std::size_t>(act_gpi(agent, obs, w, rng))] += 1e-4;
      f_eps[static_cast<std::size_t>(act_epsilon_greedy(agent, obs, w, rng))] += 1e-4;
    }
    for (int a = 0; a < 4; ++a) EXPECT_NEAR(f_gpi[a], f_eps[a], 0.015);
  }
}

TEST(Gpi, MaxIncludesBasePolicy) {
  const VisrAgent agent = make_agent(small_config(), 36);
  Rng rng = make_rng(37);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::VectorXd w = sample_uniform_sphere(5, rng).vec();
    std::vector<Eigen::VectorXd> ws;
    const VmfParams params(UnitVector(w), 5.0);
    for (int i = 0; i < 10; ++i) ws.push_back(sample_vmf(params, rng).vec());
    const Eigen::VectorXd obs = one_hot(trial % 100, 100);
    const Eigen::VectorXd gpi = gpi_q_values(agent, obs, w, ws);
    const Eigen::VectorXd base = q_values(agent, obs, w);
    EXPECT_EQ(gpi_q_values(agent, obs, w, {}), base);
    for (int a = 0; a < 4; ++a) EXPECT_GE(gpi(a), base(a));
  }
}

// Exact tabular check: unit features per state, several policies, GPI evaluated exactly.
TEST(Gpi, TabularDominanceOverConstituents) {
  GridWorld env;
  const TabularMdp mdp = env.to_tabular();
  Rng rng = make_rng(38);
  Eigen::MatrixXd feats(100, 5);
  for (int s = 0; s < 100; ++s) feats.row(s) = sample_uniform_sphere(5, rng).vec().transpose();
  const Cumulant phi = [&feats](int s, int, int) { return Eigen::VectorXd(feats.row(s).transpose()); };
  for (int trial = 0; trial < 3; ++trial) {
    const Eigen::VectorXd w = sample_uniform_sphere(5, rng).vec();
    std::vector<Eigen::VectorXd> qs;
    for (int i = 0; i < 4; ++i) {
      const TabularPolicy pi(testing::random_stochastic(100, 4, rng));
      qs.push_back(q_from_table(exact_policy_evaluation(mdp, pi, phi, 5, 0.99), w));
    }
    const TabularPolicy gpi = gpi_policy(qs, 4);
    const Eigen::VectorXd q_gpi = q_from_table(exact_policy_evaluation(mdp, gpi, phi, 5, 0.99), w);
    for (const auto& q : qs) EXPECT_GE((q_gpi - q).minCoeff(), -1e-8);
  }
}

TEST(SuccessorFeatures, LinearRewardConsistency) {
  GridWorld env;
  const TabularMdp mdp = env.to_tabular();
  Rng rng = make_rng(39);
  const VisrAgent agent = make_agent(small_config(), 40);
  const Eigen::MatrixXd phis = phi_all_states(agent);
  const Eigen::VectorXd w_true = sample_uniform_sphere(5, rng).vec();
  const Cumulant phi = [&phis](int s, int, int) { return Eigen::VectorXd(phis.col(s)); };
  const Cumulant reward = [&phis, &w_true](int s, int, int) {
    return Eigen::VectorXd::Constant(1, phis.col(s).dot(w_true));
  };
  for (int trial = 0; trial < 3; ++trial) {
    const TabularPolicy pi(testing::random_stochastic(100, 4, rng));
    const Eigen::VectorXd q = exact_policy_evaluation(mdp, pi, reward, 1, 0.99).col(0);
    const Eigen::VectorXd sf = q_from_table(exact_policy_evaluation(mdp, pi, phi, 5, 0.99), w_true);
    EXPECT_LE((q - sf).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Checkpoint, AgentRoundTripIsBitExact) {
  VisrAgent agent = make_agent(small_config(), 41);
  agent.psi().params().biases[0](0) = 0.123456789012345678;
  const auto path = std::filesystem::temp_directory_path() / "visr_agent_test_ckpt.json";
  save_agent(path.string(), agent, {{"note", 1}});
  const VisrAgent back = load_agent(path.string());
  std::filesystem::remove(path);
  EXPECT_EQ(back.phi().params().flatten(), agent.phi().params().flatten());
  EXPECT_EQ(back.psi().params().flatten(), agent.psi().params().flatten());
  EXPECT_EQ(back.psi_target().params().flatten(), agent.psi_target().params().flatten());
  EXPECT_EQ(nlohmann::json(back.config()), nlohmann::json(agent.config()));
  EXPECT_EQ(back.num_states(), 100);
}

TEST(Checkpoint, MismatchedShapesAreRejected) {
  const VisrAgent agent = make_agent(small_config(), 42);
  nlohmann::json j = agent_checkpoint_json(agent);
  j["num_states"] = 50;
  EXPECT_THROW(agent_from_checkpoint_json(j), ConfigError);
  j = agent_checkpoint_json(agent);
  j["version"] = "visr-agent-0";
  EXPECT_THROW(agent_from_checkpoint_json(j), ConfigError);
}

}  // namespace
}  // namespace visr
