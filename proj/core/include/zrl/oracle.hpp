#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zrl/mdp.hpp"

namespace zrl {

/// One enumerated trajectory: (state, action, reward) steps ending at a
/// terminal state.
struct Trajectory {
    struct Step {
        int state;
        int action;
        double reward;
    };
    std::vector<Step> steps;
    int terminal_state = -1;
    /// Number of transitions. The terminal reward is not a step.
    int length() const { return static_cast<int>(steps.size()); }
    double energy = 0.0;          // -(sum of step rewards) - terminal reward
    double log_likelihood = 0.0;  // 0 for deterministic MDPs
};

struct OracleResult {
    double log_z = 0.0;
    /// Linear-scale bound on the truncation error; 0 when not truncated.
    double tail_bound = 0.0;
    long n_trajectories = 0;
    bool truncated = false;
};

struct NMaxResult {
    double v_star = 0.0;  // best cumulative reward (terminal reward included)
    double n_max = 0.0;   // sum of e^{mu |w|} over optimal trajectories
};

/// Hard cap on enumerated trajectories; exceeding it is an error, never
/// silent truncation.
inline constexpr long kTrajectoryCap = 10'000'000;

inline int default_max_len(const Mdp& mdp) { return 10 * mdp.n_states(); }

/// Truncated exact sum of e^{beta * (cumulative reward) + mu |w|} over all
/// trajectories from s of length <= max_len, in log domain.
OracleResult enumerate_z(const Mdp& mdp, int s, double beta, double mu, int max_len);

/// Same sum restricted to trajectories whose first step is (s, a).
OracleResult enumerate_z_sa(const Mdp& mdp, int s, int a, double beta, double mu,
                            int max_len);

/// Likelihood-weighted sum: each trajectory additionally carries e^{L(w)}
/// with L the log likelihood of its transitions. Equals enumerate_z on
/// deterministic MDPs.
OracleResult enumerate_z_stochastic(const Mdp& mdp, int s, double beta, double mu,
                                    int max_len);

/// Best cumulative reward from s and the length-weighted count of the
/// trajectories attaining it (ties resolved within 1e-12).
NMaxResult enumerate_n_max(const Mdp& mdp, int s, double mu);

/// Materializes all trajectories from s (acyclic or capped); test helper.
std::vector<Trajectory> collect_trajectories(const Mdp& mdp, int s, int max_len,
                                             long cap = kTrajectoryCap);

}  // namespace zrl
