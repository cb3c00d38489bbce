#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "zrl/mdp.hpp"

namespace zrl {

/// Per-(state, action) log partition values at a fixed (beta, mu).
struct ZsaTable {
    std::vector<std::vector<double>> log_z;
    double beta = 0.0;
    double mu = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;

    /// log sum_a' Z(s', a'), or the boundary value beta R(s_f) at terminals.
    double log_successor_sum(const Mdp& mdp, int s) const;
};

struct QTable {
    std::vector<std::vector<double>> q;
    double beta = 0.0;
    double residual = 0.0;
};

enum class Exploration { epsilon_greedy, boltzmann_like };
enum class AlphaSchedule { constant, visit_count, harmonic };

struct AgentConfig {
    double alpha = 0.5;
    AlphaSchedule schedule = AlphaSchedule::visit_count;
    double epsilon = 0.1;
    Exploration exploration = Exploration::epsilon_greedy;
    double beta = 1.0;
    double mu = -2.0;
    int episodes = 1000;
    /// 0 means 100 * |S|.
    int max_steps_per_episode = 0;
    /// -1 means the first non-terminal state.
    int start_state = -1;
    std::uint64_t seed = 0;
};

struct EpisodeRecord {
    double episode_return = 0.0;
    int length = 0;
    /// Sup-norm log-domain table change over the episode.
    double delta = 0.0;
    bool truncated = false;
};

struct LearningLog {
    std::vector<EpisodeRecord> episodes;
    ZsaTable table;
};

/// Exact planning fixed point of Z(s,a) = e^{beta R(s,a) + mu} sum_a' Z(s+a, a')
/// for deterministic MDPs (terminal successors use the boundary value).
ZsaTable zsa_planning_solve(const Mdp& mdp, const SolverConfig& cfg);

/// Q(s,a) by central finite difference of log Z(s,a,.) at beta +- h; the
/// residual of the Q Bellman recursion is stored for inspection.
QTable q_from_zsa(const Mdp& mdp, const SolverConfig& cfg, double h);

/// Geometric interpolation toward the one-step Bellman target; exactly
/// linear interpolation in log domain. Only entry (s, a) changes.
void z_learning_update(ZsaTable& table, const Mdp& mdp, int s, int a, double r,
                       int s_next, bool terminal, double alpha);

/// Expected-SARSA update with bootstrap weights w(a'|s') proportional to the
/// companion Zsa table. Only entry (s, a) changes.
void expected_sarsa_update(QTable& q, const ZsaTable& weights_from, const Mdp& mdp,
                           int s, int a, double r, int s_next, bool terminal,
                           double alpha);

/// Epsilon-greedy (argmax of log Z, ties to the lowest action index) or
/// Boltzmann-like sampling proportional to Z(s,a) via Gumbel-max.
int select_action(const ZsaTable& table, int s, const AgentConfig& cfg,
                  std::mt19937_64& rng);

/// Seeded episodic simulator applying z_learning_update per step.
LearningLog run_episodes(const Mdp& mdp, const AgentConfig& cfg);

/// Greedy action per non-terminal state (ties to the lowest index).
std::vector<int> greedy_policy(const Mdp& mdp, const ZsaTable& table);

}  // namespace zrl
