#pragma once

// Grid-shaped exports of a trained agent: phi components, sampled reward
// functions phi^T w, and GPI value estimates, as CSV matrices.

#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "visr/agent.hpp"
#include "visr/env.hpp"
#include "visr/geometry.hpp"
#include "visr/io.hpp"
#include "visr/nn.hpp"
#include "visr/rng.hpp"

namespace visr {

enum class DumpKind { phi_component, reward_fn, value_fn };

inline std::string to_string(DumpKind k) {
  switch (k) {
    case DumpKind::phi_component: return "phi_component";
    case DumpKind::reward_fn: return "reward_fn";
    case DumpKind::value_fn: return "value_fn";
  }
  return "unknown";
}

struct GridDump {
  DumpKind kind = DumpKind::phi_component;
  int index = 0;
  std::optional<Eigen::VectorXd> w;
  std::optional<std::uint64_t> seed;
  Eigen::MatrixXd grid;  // grid(r, c) belongs to state r * width + c
};

inline Eigen::MatrixXd to_grid(const Eigen::VectorXd& per_state, const GridWorld& env) {
  Eigen::MatrixXd g(env.config().height, env.config().width);
  for (int s = 0; s < env.num_states(); ++s) g(env.row_of(s), env.col_of(s)) = per_state(s);
  return g;
}

/// One grid per phi component.
inline std::vector<GridDump> feature_dumps(const VisrAgent& agent, const GridWorld& env) {
  const Eigen::MatrixXd phis = phi_all_states(agent);
  std::vector<GridDump> out;
  for (int k = 0; k < agent.d(); ++k)
    out.push_back({DumpKind::phi_component, k, std::nullopt, std::nullopt, to_grid(phis.row(k).transpose(), env)});
  return out;
}

/// phi(s)^T w for n task vectors drawn uniformly on the sphere.
inline std::vector<GridDump> reward_dumps(const VisrAgent& agent, const GridWorld& env, int n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  const Eigen::MatrixXd phis = phi_all_states(agent);
  std::vector<GridDump> out;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd w = sample_uniform_sphere(agent.d(), rng).vec();
    out.push_back({DumpKind::reward_fn, i, w, seed, to_grid(phis.transpose() * w, env)});
  }
  return out;
}

/// max_a max_i psi(s, a, w_i)^T w over w_0 = w and k_policies uniformly sampled w_i,
/// for n_tasks uniformly sampled w. The task vectors match reward_dumps for the same seed.
inline std::vector<GridDump> value_dumps(const VisrAgent& agent, const GridWorld& env, int n_tasks, int k_policies,
                                         std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<Eigen::VectorXd> tasks;
  for (int i = 0; i < n_tasks; ++i) tasks.push_back(sample_uniform_sphere(agent.d(), rng).vec());
  Rng policy_rng = fork_rng(seed, 1);
  std::vector<GridDump> out;
  for (int i = 0; i < n_tasks; ++i) {
    std::vector<Eigen::VectorXd> policies;
    for (int k = 0; k < k_policies; ++k) policies.push_back(sample_uniform_sphere(agent.d(), policy_rng).vec());
    Eigen::VectorXd v(env.num_states());
    for (int s = 0; s < env.num_states(); ++s)
      v(s) = gpi_q_values(agent, one_hot(s, env.num_states()), tasks[static_cast<std::size_t>(i)], policies).maxCoeff();
    out.push_back({DumpKind::value_fn, i, tasks[static_cast<std::size_t>(i)], seed, to_grid(v, env)});
  }
  return out;
}

/// Header comment line, then one CSV row per grid row.
inline std::string grid_csv(const GridDump& dump) {
  std::ostringstream os;
  os << "# kind=" << to_string(dump.kind) << " index=" << dump.index;
  if (dump.w) {
    os << " w=";
    for (Eigen::Index i = 0; i < dump.w->size(); ++i) os << (i ? ";" : "") << format_double((*dump.w)(i));
  }
  if (dump.seed) os << " seed=" << *dump.seed;
  os << '\n';
  for (Eigen::Index r = 0; r < dump.grid.rows(); ++r) {
    for (Eigen::Index c = 0; c < dump.grid.cols(); ++c) os << (c ? "," : "") << format_double(dump.grid(r, c));
    os << '\n';
  }
  return os.str();
}

inline std::string dump_filename(const GridDump& dump) {
  std::ostringstream os;
  os << to_string(dump.kind) << '_' << std::setw(3) << std::setfill('0') << dump.index << ".csv";
  return os.str();
}

}  // namespace visr
