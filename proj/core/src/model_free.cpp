#include "zrl/model_free.hpp"

#include <cmath>
#include <stdexcept>

#include "zrl/numerics.hpp"

namespace zrl {

namespace {

void check_pair(const ZsaTable& table, int s, int a, const char* who) {
    if (s < 0 || s >= static_cast<int>(table.log_z.size()) || a < 0 ||
        a >= static_cast<int>(table.log_z[s].size()))
        throw std::out_of_range(std::string(who) + ": unknown (state, action) pair");
}

}  // namespace

double ZsaTable::log_successor_sum(const Mdp& mdp, int s) const {
    if (mdp.is_terminal(s)) return beta * mdp.terminal_reward(s);
    return log_sum_exp(log_z[s]);
}

ZsaTable zsa_planning_solve(const Mdp& mdp, const SolverConfig& cfg) {
    if (!mdp.deterministic())
        throw std::invalid_argument("zsa_planning_solve: requires a deterministic MDP");
    const int n = mdp.n_states();
    ZsaTable z;
    z.beta = cfg.beta;
    z.mu = cfg.mu;
    z.log_z.resize(n);
    const double floor = cfg.beta * mdp.min_reward() * n;
    for (int s = 0; s < n; ++s) z.log_z[s].assign(mdp.n_actions(s), floor);

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        double delta = 0.0;
        auto next = z.log_z;
        for (int s = 0; s < n; ++s)
            for (int a = 0; a < mdp.n_actions(s); ++a) {
                const int sp = mdp.successor(s, a);
                const double target =
                    cfg.beta * mdp.reward(s, a) + cfg.mu + z.log_successor_sum(mdp, sp);
                delta = std::max(delta, std::abs(target - z.log_z[s][a]));
                next[s][a] = target;
            }
        z.log_z = std::move(next);
        z.iterations = iter + 1;
        if (delta < cfg.tol) {
            z.converged = true;
            break;
        }
    }
    double res = 0.0;
    for (int s = 0; s < n; ++s)
        for (int a = 0; a < mdp.n_actions(s); ++a) {
            const int sp = mdp.successor(s, a);
            res = std::max(res, std::abs(z.log_z[s][a] - cfg.beta * mdp.reward(s, a) -
                                         cfg.mu - z.log_successor_sum(mdp, sp)));
        }
    z.residual = res;
    return z;
}

QTable q_from_zsa(const Mdp& mdp, const SolverConfig& cfg, double h) {
    SolverConfig c = cfg;
    c.beta = cfg.beta + h;
    const ZsaTable zp = zsa_planning_solve(mdp, c);
    c.beta = cfg.beta - h;
    const ZsaTable zm = zsa_planning_solve(mdp, c);
    if (!zp.converged || !zm.converged)
        throw std::runtime_error("q_from_zsa: planning solve did not converge");

    QTable q;
    q.beta = cfg.beta;
    q.q.resize(mdp.n_states());
    for (int s = 0; s < mdp.n_states(); ++s) {
        q.q[s].resize(mdp.n_actions(s));
        for (int a = 0; a < mdp.n_actions(s); ++a)
            q.q[s][a] = (zp.log_z[s][a] - zm.log_z[s][a]) / (2.0 * h);
    }

    // Residual of Q(s,a) = R(s,a) + sum_a' pi(a'|s+a) Q(s+a,a') with
    // pi taken from the central Zsa solve.
    c.beta = cfg.beta;
    const ZsaTable z0 = zsa_planning_solve(mdp, c);
    double res = 0.0;
    for (int s = 0; s < mdp.n_states(); ++s)
        for (int a = 0; a < mdp.n_actions(s); ++a) {
            const int sp = mdp.successor(s, a);
            double target = mdp.reward(s, a);
            if (mdp.is_terminal(sp)) {
                target += mdp.terminal_reward(sp);
            } else {
                const double norm = log_sum_exp(z0.log_z[sp]);
                for (int ap = 0; ap < mdp.n_actions(sp); ++ap)
                    target += std::exp(z0.log_z[sp][ap] - norm) * q.q[sp][ap];
            }
            res = std::max(res, std::abs(q.q[s][a] - target));
        }
    q.residual = res;
    return q;
}

void z_learning_update(ZsaTable& table, const Mdp& mdp, int s, int a, double r,
                       int s_next, bool terminal, double alpha) {
    check_pair(table, s, a, "z_learning_update");
    const double boot = terminal ? table.beta * mdp.terminal_reward(s_next)
                                 : log_sum_exp(table.log_z[s_next]);
    const double target = table.beta * r + table.mu + boot;
    table.log_z[s][a] = (1.0 - alpha) * table.log_z[s][a] + alpha * target;
}

void expected_sarsa_update(QTable& q, const ZsaTable& weights_from, const Mdp& mdp,
                           int s, int a, double r, int s_next, bool terminal,
                           double alpha) {
    check_pair(weights_from, s, a, "expected_sarsa_update");
    double target = r;
    if (terminal) {
        target += mdp.terminal_reward(s_next);
    } else {
        const double norm = log_sum_exp(weights_from.log_z[s_next]);
        for (std::size_t ap = 0; ap < weights_from.log_z[s_next].size(); ++ap)
            target += std::exp(weights_from.log_z[s_next][ap] - norm) * q.q[s_next][ap];
    }
    q.q[s][a] = (1.0 - alpha) * q.q[s][a] + alpha * target;
}

int select_action(const ZsaTable& table, int s, const AgentConfig& cfg,
                  std::mt19937_64& rng) {
    const auto& row = table.log_z[s];
    if (row.empty()) throw std::invalid_argument("select_action: terminal state");
    const int na = static_cast<int>(row.size());

    if (cfg.exploration == Exploration::epsilon_greedy) {
        if (uniform_double(rng) < cfg.epsilon)
            return static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(na)));
        int best = 0;
        for (int a = 1; a < na; ++a)
            if (row[a] > row[best]) best = a;
        return best;
    }

    // Boltzmann-like: sample proportional to Z(s,a) by Gumbel-max.
    int best = 0;
    double best_score = neg_inf;
    for (int a = 0; a < na; ++a) {
        const double score = row[a] + gumbel_draw(rng);
        if (score > best_score) {
            best_score = score;
            best = a;
        }
    }
    return best;
}

std::vector<int> greedy_policy(const Mdp& mdp, const ZsaTable& table) {
    std::vector<int> out(mdp.n_states(), -1);
    for (int s = 0; s < mdp.n_states(); ++s) {
        if (mdp.is_terminal(s)) continue;
        int best = 0;
        for (int a = 1; a < mdp.n_actions(s); ++a)
            if (table.log_z[s][a] > table.log_z[s][best]) best = a;
        out[s] = best;
    }
    return out;
}

LearningLog run_episodes(const Mdp& mdp, const AgentConfig& cfg) {
    const ValidationReport rep = validate(mdp);
    if (!rep.ok()) throw std::invalid_argument("run_episodes: invalid MDP");
    if (cfg.alpha <= 0.0 || cfg.alpha > 1.0)
        throw std::invalid_argument("run_episodes: alpha must be in (0, 1]");
    if (cfg.epsilon < 0.0 || cfg.epsilon > 1.0)
        throw std::invalid_argument("run_episodes: epsilon must be in [0, 1]");

    const int n = mdp.n_states();
    int start = cfg.start_state;
    if (start < 0)
        for (int s = 0; s < n && start < 0; ++s)
            if (!mdp.is_terminal(s)) start = s;
    if (start < 0 || mdp.is_terminal(start))
        throw std::invalid_argument("run_episodes: no usable start state");

    LearningLog log;
    log.table.beta = cfg.beta;
    log.table.mu = cfg.mu;
    log.table.log_z.resize(n);
    for (int s = 0; s < n; ++s) log.table.log_z[s].assign(mdp.n_actions(s), 0.0);

    std::vector<std::vector<long>> visits(n);
    for (int s = 0; s < n; ++s) visits[s].assign(mdp.n_actions(s), 0);

    std::mt19937_64 rng(cfg.seed);
    const int step_cap =
        cfg.max_steps_per_episode > 0 ? cfg.max_steps_per_episode : 100 * n;

    for (int ep = 0; ep < cfg.episodes; ++ep) {
        EpisodeRecord rec;
        int s = start;
        for (int step = 0; step < step_cap; ++step) {
            const int a = select_action(log.table, s, cfg, rng);
            // Sample s' ~ P(.|s,a).
            const auto& edges = mdp.outcomes[s][a];
            int sp = edges.back().to;
            double r = edges.back().reward;
            double u = uniform_double(rng);
            for (const auto& t : edges) {
                if (u < t.prob) {
                    sp = t.to;
                    r = t.reward;
                    break;
                }
                u -= t.prob;
            }

            ++visits[s][a];
            double alpha = cfg.alpha;
            switch (cfg.schedule) {
                case AlphaSchedule::constant: break;
                case AlphaSchedule::visit_count:
                    alpha = 1.0 / static_cast<double>(visits[s][a]);
                    break;
                case AlphaSchedule::harmonic:
                    alpha = cfg.alpha / (1.0 + static_cast<double>(ep));
                    break;
            }

            const double before = log.table.log_z[s][a];
            z_learning_update(log.table, mdp, s, a, r, sp, mdp.is_terminal(sp), alpha);
            rec.delta = std::max(rec.delta, std::abs(log.table.log_z[s][a] - before));
            rec.episode_return += r;
            ++rec.length;
            if (mdp.is_terminal(sp)) {
                rec.episode_return += mdp.terminal_reward(sp);
                break;
            }
            s = sp;
            if (step == step_cap - 1) rec.truncated = true;
        }
        log.episodes.push_back(rec);
    }
    return log;
}

}  // namespace zrl
