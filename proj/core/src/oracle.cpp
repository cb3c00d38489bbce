#include "zrl/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "zrl/numerics.hpp"

namespace zrl {

namespace {

// Per-step branch count of the unweighted ensemble: every (action, edge)
// pair spawns a continuation.
int max_branching(const Mdp& mdp, bool per_action) {
    int b = 0;
    for (int s = 0; s < mdp.n_states(); ++s) {
        if (mdp.is_terminal(s)) continue;
        int count = 0;
        for (int a = 0; a < mdp.n_actions(s); ++a)
            for (const auto& t : mdp.outcomes[s][a])
                if (t.prob > 0.0) ++count;
        if (per_action) count = mdp.n_actions(s);
        b = std::max(b, count);
    }
    return b;
}

struct Frame {
    int state;
    std::size_t branch;        // next (action, edge) pair to expand
    double cum_beta_reward;    // beta * sum of step rewards so far
    double cum_log_likelihood;
};

// Shared DFS. `first_action` restricts the first step; `weighted` adds the
// trajectory log likelihood to the exponent.
OracleResult enumerate_impl(const Mdp& mdp, int s0, int first_action, double beta,
                            double mu, int max_len, bool weighted) {
    if (s0 < 0 || s0 >= mdp.n_states()) throw std::out_of_range("enumerate: bad state");
    if (max_len < 0) throw std::invalid_argument("enumerate: max_len must be >= 0");

    const ValidationReport rep = validate(mdp);
    // Branch factor of the enumerated ensemble; for the likelihood-weighted
    // sum the effective factor is d (probabilities over s' sum to 1).
    const int b = weighted ? rep.d : max_branching(mdp, /*per_action=*/false);
    const double decay = b * std::exp(mu);
    if (rep.has_cycles && decay >= 1.0)
        throw std::runtime_error(
            "enumerate: cyclic MDP with mu >= -log d; the trajectory sum diverges "
            "(requires mu < " + std::to_string(-std::log(std::max(b, 1))) + ")");

    OracleResult out;
    LogSumAccumulator acc;

    auto expand = [&](std::vector<Frame>& stack, int state, double cum_br, double cum_ll) {
        if (mdp.is_terminal(state)) {
            double term = cum_br + beta * mdp.terminal_reward(state) +
                          mu * static_cast<double>(stack.size()) + (weighted ? cum_ll : 0.0);
            acc.add(term);
            if (++out.n_trajectories > kTrajectoryCap)
                throw std::runtime_error("enumerate: trajectory cap exceeded (10^7)");
            return;
        }
        if (static_cast<int>(stack.size()) >= max_len) {
            out.truncated = true;
            return;
        }
        stack.push_back({state, 0, cum_br, cum_ll});
    };

    std::vector<Frame> stack;
    if (first_action >= 0 && (mdp.is_terminal(s0) || first_action >= mdp.n_actions(s0)))
        throw std::out_of_range("enumerate: unknown action at start state");

    expand(stack, s0, 0.0, 0.0);
    while (!stack.empty()) {
        Frame& f = stack.back();
        const bool root = stack.size() == 1 && f.state == s0;
        // Enumerate (action, edge) pairs lazily by running index.
        std::size_t idx = 0;
        int action = -1;
        const Transition* edge = nullptr;
        for (int a = 0; a < mdp.n_actions(f.state) && !edge; ++a) {
            if (root && first_action >= 0 && a != first_action) continue;
            for (const auto& t : mdp.outcomes[f.state][a]) {
                if (t.prob <= 0.0) continue;
                if (idx++ == f.branch) {
                    action = a;
                    edge = &t;
                    break;
                }
            }
        }
        if (!edge) {
            stack.pop_back();
            continue;
        }
        ++f.branch;
        expand(stack, edge->to, f.cum_beta_reward + beta * edge->reward,
               f.cum_log_likelihood + std::log(edge->prob));
        (void)action;
    }

    out.log_z = acc.value();
    if (out.truncated) {
        if (decay >= 1.0)
            throw std::runtime_error("enumerate: truncated with divergent tail (b*e^mu >= 1)");
        double k = mdp.max_terminal_reward();
        if (!std::isfinite(k)) k = 0.0;
        k = std::max(k, 0.0);
        out.tail_bound =
            std::exp(beta * k) * std::pow(decay, max_len + 1) / (1.0 - decay);
    }
    return out;
}

}  // namespace

OracleResult enumerate_z(const Mdp& mdp, int s, double beta, double mu, int max_len) {
    return enumerate_impl(mdp, s, -1, beta, mu, max_len, /*weighted=*/false);
}

OracleResult enumerate_z_sa(const Mdp& mdp, int s, int a, double beta, double mu,
                            int max_len) {
    return enumerate_impl(mdp, s, a, beta, mu, max_len, /*weighted=*/false);
}

OracleResult enumerate_z_stochastic(const Mdp& mdp, int s, double beta, double mu,
                                    int max_len) {
    return enumerate_impl(mdp, s, -1, beta, mu, max_len, /*weighted=*/true);
}

NMaxResult enumerate_n_max(const Mdp& mdp, int s, double mu) {
    const ValidationReport rep = validate(mdp);
    if (rep.has_cycles)
        throw std::runtime_error("enumerate_n_max: requires a finite trajectory ensemble "
                                 "(acyclic MDP)");
    const auto trajectories = collect_trajectories(mdp, s, mdp.n_states() + 1);
    NMaxResult out;
    bool first = true;
    for (const auto& traj : trajectories) {
        const double v = -traj.energy;  // cumulative reward, terminal included
        const double w = std::exp(mu * traj.length());
        if (first || v > out.v_star + 1e-12) {
            out.v_star = v;
            out.n_max = w;
            first = false;
        } else if (v >= out.v_star - 1e-12) {
            out.n_max += w;
            out.v_star = std::max(out.v_star, v);
        }
    }
    if (first) throw std::runtime_error("enumerate_n_max: empty trajectory ensemble");
    return out;
}

std::vector<Trajectory> collect_trajectories(const Mdp& mdp, int s, int max_len, long cap) {
    std::vector<Trajectory> result;
    Trajectory current;

    // Recursive lambda; depth is bounded by max_len.
    auto dfs = [&](auto&& self, int state) -> void {
        if (mdp.is_terminal(state)) {
            Trajectory done = current;
            done.terminal_state = state;
            double sum_r = 0.0;
            for (const auto& st : done.steps) sum_r += st.reward;
            done.energy = -sum_r - mdp.terminal_reward(state);
            if (static_cast<long>(result.size()) >= cap)
                throw std::runtime_error("collect_trajectories: cap exceeded");
            result.push_back(std::move(done));
            return;
        }
        if (current.length() >= max_len) return;
        for (int a = 0; a < mdp.n_actions(state); ++a)
            for (const auto& t : mdp.outcomes[state][a]) {
                if (t.prob <= 0.0) continue;
                current.steps.push_back({state, a, t.reward});
                current.log_likelihood += std::log(t.prob);
                self(self, t.to);
                current.log_likelihood -= std::log(t.prob);
                current.steps.pop_back();
            }
    };
    dfs(dfs, s);
    return result;
}

}  // namespace zrl
