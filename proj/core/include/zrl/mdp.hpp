#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace zrl {

/// One weighted edge of a state-action transition.
struct Transition {
    int to = -1;
    double prob = 1.0;
    double reward = 0.0;
};

/// Finite MDP with per-state action sets, stochastic transitions,
/// deterministic per-transition rewards and terminal rewards.
///
/// States and actions carry string identifiers in the file format and are
/// mapped to dense indices internally; index order is file order.
struct Mdp {
    std::vector<std::string> state_names;
    /// action_names[s] is empty for terminal states.
    std::vector<std::vector<std::string>> action_names;
    /// outcomes[s][a]: the transition distribution of action a at state s.
    std::vector<std::vector<std::vector<Transition>>> outcomes;
    std::vector<bool> terminal;
    /// terminal_rewards[s] is meaningful only where terminal[s] is true.
    std::vector<double> terminal_rewards;
    /// Shift applied by normalize_rewards (0 if never normalized).
    double reward_shift = 0.0;

    int n_states() const { return static_cast<int>(state_names.size()); }
    int n_actions(int s) const { return static_cast<int>(action_names[s].size()); }
    bool is_terminal(int s) const { return terminal[s]; }
    double terminal_reward(int s) const { return terminal_rewards[s]; }

    int state_index(const std::string& name) const;
    int action_index(int s, const std::string& name) const;

    bool deterministic() const;
    bool has_uniform_actions() const;
    /// d: max number of actions over non-terminal states (0 if none).
    int max_actions() const;

    /// Deterministic accessors; the action must have a single unit-mass edge.
    int successor(int s, int a) const;
    double reward(int s, int a) const;

    double min_reward() const;
    double max_terminal_reward() const;
};

struct ValidationReport {
    bool is_deterministic = false;
    int d = 0;
    double r_terminal_max = 0.0;
    double mu_threshold = 0.0;  // -log(d); +inf when d == 0
    bool has_cycles = false;
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

struct SolverConfig {
    double beta = 1.0;
    double mu = -2.0;
    double gamma = 0.99;  // Boltzmann baseline only
    double tol = 1e-12;
    int max_iters = 100000;
    double damping = 1.0;
    std::uint64_t seed = 0;
};

ValidationReport validate(const Mdp& mdp);

/// Shifts every transition reward by -R_max so the maximum transition reward
/// is exactly 0. Terminal rewards are untouched; the shift is recorded.
Mdp normalize_rewards(const Mdp& mdp);

/// Seeded random test instance. Every non-terminal state gets exactly d
/// actions named a0..a{d-1} (so generated instances have uniform action
/// sets). Transition rewards are drawn in [-1, 0], terminal rewards in
/// [-1, 1]. Acyclic instances are topologically ordered with forward-only
/// transitions and a terminal last state; cyclic instances keep a forward
/// edge on action 0 so the terminal stays reachable from every state.
Mdp random_mdp(int n_states, int d, int branching, bool deterministic,
               bool acyclic, std::uint64_t seed);

/// JSON file schema I/O (see README for the schema).
Mdp load_mdp(const std::string& path);
Mdp parse_mdp(const std::string& json_text);
std::string mdp_to_json(const Mdp& mdp);
void save_mdp(const Mdp& mdp, const std::string& path);

}  // namespace zrl
