#include "zrl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "zrl/numerics.hpp"

namespace zrl {

int Mdp::state_index(const std::string& name) const {
    for (int i = 0; i < n_states(); ++i)
        if (state_names[i] == name) return i;
    throw std::out_of_range("unknown state: " + name);
}

int Mdp::action_index(int s, const std::string& name) const {
    for (int a = 0; a < n_actions(s); ++a)
        if (action_names[s][a] == name) return a;
    throw std::out_of_range("unknown action '" + name + "' at state " + state_names[s]);
}

bool Mdp::deterministic() const {
    for (int s = 0; s < n_states(); ++s)
        for (const auto& edges : outcomes[s])
            if (edges.size() != 1 || edges[0].prob != 1.0) return false;
    return true;
}

bool Mdp::has_uniform_actions() const {
    const std::vector<std::string>* ref = nullptr;
    for (int s = 0; s < n_states(); ++s) {
        if (terminal[s]) continue;
        if (!ref)
            ref = &action_names[s];
        else if (action_names[s] != *ref)
            return false;
    }
    return true;
}

int Mdp::max_actions() const {
    int d = 0;
    for (int s = 0; s < n_states(); ++s)
        if (!terminal[s]) d = std::max(d, n_actions(s));
    return d;
}

int Mdp::successor(int s, int a) const {
    const auto& edges = outcomes[s][a];
    if (edges.size() != 1)
        throw std::logic_error("successor() requires a deterministic action");
    return edges[0].to;
}

double Mdp::reward(int s, int a) const {
    const auto& edges = outcomes[s][a];
    if (edges.size() != 1)
        throw std::logic_error("reward() requires a deterministic action");
    return edges[0].reward;
}

double Mdp::min_reward() const {
    double lo = 0.0;
    for (int s = 0; s < n_states(); ++s) {
        if (terminal[s]) {
            lo = std::min(lo, terminal_rewards[s]);
            continue;
        }
        for (const auto& edges : outcomes[s])
            for (const auto& t : edges) lo = std::min(lo, t.reward);
    }
    return lo;
}

double Mdp::max_terminal_reward() const {
    double hi = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < n_states(); ++s)
        if (terminal[s]) hi = std::max(hi, terminal_rewards[s]);
    return hi;
}

namespace {

bool detect_cycles(const Mdp& mdp) {
    // Iterative three-color DFS over the one-step reachability graph.
    const int n = mdp.n_states();
    std::vector<int> color(n, 0);  // 0 white, 1 gray, 2 black
    for (int root = 0; root < n; ++root) {
        if (color[root] != 0) continue;
        std::vector<std::pair<int, int>> stack{{root, 0}};
        color[root] = 1;
        while (!stack.empty()) {
            auto& [s, branch] = stack.back();
            // Flatten (action, edge) pairs into one successor sequence.
            int idx = 0;
            int next = -1;
            for (int a = 0; a < mdp.n_actions(s) && next < 0; ++a)
                for (const auto& t : mdp.outcomes[s][a]) {
                    if (t.prob <= 0.0) continue;
                    if (idx++ == branch) {
                        next = t.to;
                        break;
                    }
                }
            if (next < 0) {
                color[s] = 2;
                stack.pop_back();
                continue;
            }
            ++branch;
            if (color[next] == 1) return true;
            if (color[next] == 0) {
                color[next] = 1;
                stack.emplace_back(next, 0);
            }
        }
    }
    return false;
}

}  // namespace

ValidationReport validate(const Mdp& mdp) {
    ValidationReport rep;
    rep.is_deterministic = mdp.deterministic();
    rep.d = mdp.max_actions();
    rep.mu_threshold = rep.d > 0 ? -std::log(static_cast<double>(rep.d))
                                 : std::numeric_limits<double>::infinity();
    rep.has_cycles = detect_cycles(mdp);
    rep.r_terminal_max = mdp.max_terminal_reward();
    if (rep.r_terminal_max == -std::numeric_limits<double>::infinity())
        rep.r_terminal_max = 0.0;

    for (int s = 0; s < mdp.n_states(); ++s) {
        const std::string& name = mdp.state_names[s];
        if (mdp.is_terminal(s)) {
            if (mdp.n_actions(s) > 0)
                rep.violations.push_back("terminal state " + name + " has outgoing transitions");
            continue;
        }
        if (mdp.n_actions(s) == 0)
            rep.violations.push_back("non-terminal state " + name + " has no actions");
        for (int a = 0; a < mdp.n_actions(s); ++a) {
            double psum = 0.0;
            for (const auto& t : mdp.outcomes[s][a]) {
                if (t.prob < 0.0)
                    rep.violations.push_back("negative probability at (" + name + ", " +
                                             mdp.action_names[s][a] + ")");
                if (t.reward > 0.0)
                    rep.violations.push_back("positive transition reward at (" + name + ", " +
                                             mdp.action_names[s][a] + ")");
                if (t.to < 0 || t.to >= mdp.n_states())
                    rep.violations.push_back("dangling successor at (" + name + ", " +
                                             mdp.action_names[s][a] + ")");
                psum += t.prob;
            }
            if (std::abs(psum - 1.0) > 1e-12)
                rep.violations.push_back("probabilities at (" + name + ", " +
                                         mdp.action_names[s][a] + ") sum to " +
                                         std::to_string(psum));
        }
    }
    return rep;
}

Mdp normalize_rewards(const Mdp& mdp) {
    double r_max = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < mdp.n_states(); ++s)
        for (const auto& edges : mdp.outcomes[s])
            for (const auto& t : edges) {
                if (!std::isfinite(t.reward))
                    throw std::invalid_argument("normalize_rewards: non-finite reward");
                r_max = std::max(r_max, t.reward);
            }
    Mdp out = mdp;
    if (r_max == -std::numeric_limits<double>::infinity()) return out;  // no transitions
    for (auto& per_state : out.outcomes)
        for (auto& edges : per_state)
            for (auto& t : edges) t.reward -= r_max;
    out.reward_shift = mdp.reward_shift + r_max;
    return out;
}

Mdp random_mdp(int n_states, int d, int branching, bool deterministic,
               bool acyclic, std::uint64_t seed) {
    if (n_states < 2) throw std::invalid_argument("random_mdp: n_states must be >= 2");
    if (d < 1) throw std::invalid_argument("random_mdp: d must be >= 1");
    if (branching < 1) throw std::invalid_argument("random_mdp: branching must be >= 1");

    std::mt19937_64 rng(seed);
    Mdp mdp;
    mdp.state_names.resize(n_states);
    mdp.action_names.resize(n_states);
    mdp.outcomes.resize(n_states);
    mdp.terminal.assign(n_states, false);
    mdp.terminal_rewards.assign(n_states, 0.0);

    for (int s = 0; s < n_states; ++s) mdp.state_names[s] = "S" + std::to_string(s);

    mdp.terminal[n_states - 1] = true;
    mdp.terminal_rewards[n_states - 1] = 2.0 * uniform_double(rng) - 1.0;

    for (int s = 0; s < n_states - 1; ++s) {
        const int b_eff = deterministic ? 1
                          : acyclic     ? std::min(branching, n_states - 1 - s)
                                        : std::min(branching, n_states);
        for (int a = 0; a < d; ++a) {
            mdp.action_names[s].push_back("a" + std::to_string(a));
            std::vector<Transition> edges;
            // Draw b_eff distinct successors forward of s (acyclic) or anywhere.
            std::vector<int> pool;
            if (acyclic)
                for (int j = s + 1; j < n_states; ++j) pool.push_back(j);
            else
                for (int j = 0; j < n_states; ++j) pool.push_back(j);
            // Cyclic instances keep a forward edge on action 0 so every state
            // reaches the terminal and the partition values stay positive.
            if (!acyclic && a == 0) {
                Transition t;
                t.to = s + 1;
                t.reward = -uniform_double(rng);
                edges.push_back(t);
                pool.erase(pool.begin() + (s + 1));
            }
            for (int k = static_cast<int>(edges.size()); k < b_eff; ++k) {
                std::size_t pick = uniform_index(rng, pool.size());
                Transition t;
                t.to = pool[pick];
                pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
                t.reward = -uniform_double(rng);
                edges.push_back(t);
            }
            if (edges.size() == 1) {
                edges[0].prob = 1.0;
            } else {
                double total = 0.0;
                std::vector<double> w(edges.size());
                for (auto& x : w) {
                    x = uniform_double(rng) + 1e-3;
                    total += x;
                }
                for (std::size_t k = 0; k < edges.size(); ++k) edges[k].prob = w[k] / total;
            }
            mdp.outcomes[s].push_back(std::move(edges));
        }
    }
    return mdp;
}

}  // namespace zrl
