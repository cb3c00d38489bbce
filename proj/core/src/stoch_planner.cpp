#include "zrl/stoch_planner.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <cmath>
#include <random>
#include <stdexcept>

#include "zrl/numerics.hpp"

namespace zrl {

namespace {

void require_uniform_actions(const Mdp& mdp, const char* who) {
    if (!mdp.has_uniform_actions())
        throw std::invalid_argument(
            std::string(who) +
            ": the belief-space construction assumes identical action sets at "
            "every non-terminal state");
}

int first_nonterminal(const Mdp& mdp) {
    for (int s = 0; s < mdp.n_states(); ++s)
        if (!mdp.is_terminal(s)) return s;
    return -1;
}

double naive_residual(const Mdp& mdp, const ZTable& z) {
    double res = 0.0;
    for (int s = 0; s < mdp.n_states(); ++s) {
        if (mdp.is_terminal(s)) continue;
        LogSumAccumulator acc;
        for (int a = 0; a < mdp.n_actions(s); ++a)
            for (const auto& t : mdp.outcomes[s][a]) {
                if (t.prob <= 0.0) continue;
                acc.add(std::log(t.prob) + z.beta * t.reward + z.mu + z.log_z[t.to]);
            }
        res = std::max(res, std::abs(z.log_z[s] - acc.value()));
    }
    return res;
}

double variational_residual(const Mdp& mdp, const ZTable& z) {
    double res = 0.0;
    for (int s = 0; s < mdp.n_states(); ++s) {
        if (mdp.is_terminal(s)) continue;
        LogSumAccumulator acc;
        for (int a = 0; a < mdp.n_actions(s); ++a) {
            double exponent = z.mu;
            for (const auto& t : mdp.outcomes[s][a]) {
                if (t.prob <= 0.0) continue;
                exponent += t.prob * (z.beta * t.reward + z.log_z[t.to]);
            }
            acc.add(exponent);
        }
        res = std::max(res, std::abs(z.log_z[s] - acc.value()));
    }
    return res;
}

ZTable boundary_table(const Mdp& mdp, const SolverConfig& cfg) {
    ZTable z;
    z.beta = cfg.beta;
    z.mu = cfg.mu;
    z.log_z.assign(mdp.n_states(), cfg.beta * mdp.min_reward() * mdp.n_states());
    for (int s = 0; s < mdp.n_states(); ++s)
        if (mdp.is_terminal(s)) z.log_z[s] = cfg.beta * mdp.terminal_reward(s);
    return z;
}

}  // namespace

std::pair<BeliefState, double> belief_step(const Mdp& mdp, const BeliefState& rho, int a) {
    require_uniform_actions(mdp, "belief_step");
    const int n = mdp.n_states();
    if (static_cast<int>(rho.rho.size()) != n)
        throw std::invalid_argument("belief_step: belief dimension mismatch");
    BeliefState next;
    next.rho.assign(n, 0.0);
    double r_tilde = 0.0;
    for (int s = 0; s < n; ++s) {
        const double mass = rho.rho[s];
        if (mass <= 0.0) continue;
        if (mdp.is_terminal(s)) {
            next.rho[s] += mass;  // absorbing
            continue;
        }
        if (a < 0 || a >= mdp.n_actions(s))
            throw std::out_of_range("belief_step: unknown action");
        for (const auto& t : mdp.outcomes[s][a]) {
            next.rho[t.to] += mass * t.prob;
            r_tilde += mass * t.prob * t.reward;
        }
    }
    return {std::move(next), r_tilde};
}

double log_z_theta(const VariationalParams& params, const BeliefState& rho) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rho.rho.size(); ++i) acc += rho.rho[i] * params.log_theta[i];
    return acc;
}

ZTable naive_avg_bellman_solve(const Mdp& mdp, const SolverConfig& cfg) {
    ZTable z = boundary_table(mdp, cfg);
    const int n = mdp.n_states();
    std::vector<double> next = z.log_z;
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        double delta = 0.0;
        for (int s = 0; s < n; ++s) {
            if (mdp.is_terminal(s)) continue;
            LogSumAccumulator acc;
            for (int a = 0; a < mdp.n_actions(s); ++a)
                for (const auto& t : mdp.outcomes[s][a]) {
                    if (t.prob <= 0.0) continue;
                    acc.add(std::log(t.prob) + cfg.beta * t.reward + cfg.mu + z.log_z[t.to]);
                }
            next[s] = (1.0 - cfg.damping) * z.log_z[s] + cfg.damping * acc.value();
            delta = std::max(delta, std::abs(next[s] - z.log_z[s]));
        }
        z.log_z = next;
        z.sweep_deltas.push_back(delta);
        z.iterations = iter + 1;
        if (delta < cfg.tol) {
            z.converged = true;
            break;
        }
    }
    z.residual = naive_residual(mdp, z);
    return z;
}

NaiveDiagnostic naive_value_diagnostic(const Mdp& mdp, const ZTable& z) {
    if (!z.converged)
        throw std::invalid_argument("naive_value_diagnostic: Z table has not converged");
    const int n = mdp.n_states();
    NaiveDiagnostic out;
    out.warning =
        "diagnostic only: weights condition on the landing state s' and do not "
        "form a realistic policy";
    out.weights.resize(n);
    for (int s = 0; s < n; ++s) {
        out.weights[s].resize(mdp.n_actions(s));
        if (mdp.is_terminal(s)) continue;
        for (int a = 0; a < mdp.n_actions(s); ++a) {
            out.weights[s][a].resize(mdp.outcomes[s][a].size(), 0.0);
            for (std::size_t k = 0; k < mdp.outcomes[s][a].size(); ++k) {
                const auto& t = mdp.outcomes[s][a][k];
                if (t.prob <= 0.0) continue;
                out.weights[s][a][k] = std::exp(std::log(t.prob) + z.beta * t.reward +
                                                z.mu + z.log_z[t.to] - z.log_z[s]);
            }
        }
    }

    // Solve the weighted value recursion V(s) = sum w (R + V(s')).
    std::vector<int> nonterminal;
    std::vector<int> reduced_index(n, -1);
    for (int s = 0; s < n; ++s)
        if (!mdp.is_terminal(s)) {
            reduced_index[s] = static_cast<int>(nonterminal.size());
            nonterminal.push_back(s);
        }
    out.v.assign(n, 0.0);
    for (int s = 0; s < n; ++s)
        if (mdp.is_terminal(s)) out.v[s] = mdp.terminal_reward(s);
    const int m = static_cast<int>(nonterminal.size());
    if (m > 0) {
        std::vector<Eigen::Triplet<double>> triplets;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
        for (int i = 0; i < m; ++i) {
            const int s = nonterminal[i];
            triplets.emplace_back(i, i, 1.0);
            for (int a = 0; a < mdp.n_actions(s); ++a)
                for (std::size_t k = 0; k < mdp.outcomes[s][a].size(); ++k) {
                    const auto& t = mdp.outcomes[s][a][k];
                    const double w = out.weights[s][a][k];
                    rhs[i] += w * t.reward;
                    if (mdp.is_terminal(t.to))
                        rhs[i] += w * mdp.terminal_reward(t.to);
                    else
                        triplets.emplace_back(i, reduced_index[t.to], -w);
                }
        }
        Eigen::SparseMatrix<double> system(m, m);
        system.setFromTriplets(triplets.begin(), triplets.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(system);
        if (lu.info() != Eigen::Success)
            throw std::runtime_error("naive_value_diagnostic: value system is singular");
        Eigen::VectorXd sol = lu.solve(rhs);
        for (int i = 0; i < m; ++i) out.v[nonterminal[i]] = sol[i];
    }

    for (int s = 0; s < n; ++s) {
        if (mdp.is_terminal(s)) continue;
        double rhs = 0.0;
        for (int a = 0; a < mdp.n_actions(s); ++a)
            for (std::size_t k = 0; k < mdp.outcomes[s][a].size(); ++k) {
                const auto& t = mdp.outcomes[s][a][k];
                rhs += out.weights[s][a][k] * (t.reward + out.v[t.to]);
            }
        out.residual = std::max(out.residual, std::abs(out.v[s] - rhs));
    }
    return out;
}

ZTable variational_fixed_point(const Mdp& mdp, const SolverConfig& cfg) {
    require_uniform_actions(mdp, "variational_fixed_point");
    ZTable z = boundary_table(mdp, cfg);
    const int n = mdp.n_states();
    std::vector<double> next = z.log_z;
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        double delta = 0.0;
        for (int s = 0; s < n; ++s) {
            if (mdp.is_terminal(s)) continue;
            LogSumAccumulator acc;
            for (int a = 0; a < mdp.n_actions(s); ++a) {
                double exponent = cfg.mu;
                for (const auto& t : mdp.outcomes[s][a]) {
                    if (t.prob <= 0.0) continue;
                    exponent += t.prob * (cfg.beta * t.reward + z.log_z[t.to]);
                }
                acc.add(exponent);
            }
            next[s] = (1.0 - cfg.damping) * z.log_z[s] + cfg.damping * acc.value();
            delta = std::max(delta, std::abs(next[s] - z.log_z[s]));
        }
        z.log_z = next;
        z.sweep_deltas.push_back(delta);
        z.iterations = iter + 1;
        if (delta < cfg.tol) {
            z.converged = true;
            break;
        }
    }
    z.residual = variational_residual(mdp, z);
    return z;
}

VariationalParams make_variational_params(const Mdp& mdp, const SolverConfig& cfg,
                                          double log_theta_init) {
    VariationalParams p;
    p.beta = cfg.beta;
    p.mu = cfg.mu;
    p.log_theta.assign(mdp.n_states(), log_theta_init);
    for (int s = 0; s < mdp.n_states(); ++s)
        if (mdp.is_terminal(s)) p.log_theta[s] = cfg.beta * mdp.terminal_reward(s);
    return p;
}

namespace {

// Per-state linear-scale Bellman residual of the product family.
double state_residual(const Mdp& mdp, const VariationalParams& p, int s) {
    double lhs = std::exp(p.log_theta[s]);
    double rhs = 0.0;
    for (int a = 0; a < mdp.n_actions(s); ++a) {
        double exponent = p.mu;
        for (const auto& t : mdp.outcomes[s][a]) {
            if (t.prob <= 0.0) continue;
            exponent += t.prob * (p.beta * t.reward + p.log_theta[t.to]);
        }
        rhs += std::exp(exponent);
    }
    return lhs - rhs;
}

}  // namespace

double variational_loss(const Mdp& mdp, const VariationalParams& params) {
    double acc = 0.0;
    for (int s = 0; s < mdp.n_states(); ++s) {
        if (mdp.is_terminal(s)) continue;  // boundary pinned, residual 0
        const double f = state_residual(mdp, params, s);
        acc += f * f;
    }
    return acc / mdp.n_states();
}

double normalized_variational_loss(const Mdp& mdp, const VariationalParams& params) {
    double z_max = 0.0;
    for (int s = 0; s < mdp.n_states(); ++s)
        z_max = std::max(z_max, std::exp(params.log_theta[s]));
    if (z_max <= 0.0) return variational_loss(mdp, params);
    return variational_loss(mdp, params) / (z_max * z_max);
}

std::vector<double> variational_loss_gradient(const Mdp& mdp,
                                              const VariationalParams& p) {
    const int n = mdp.n_states();
    std::vector<double> grad(n, 0.0);
    for (int s = 0; s < n; ++s) {
        if (mdp.is_terminal(s)) continue;
        const double f = state_residual(mdp, p, s);
        // dF_s / dlog theta_s picks up the Z_theta(delta_s) term.
        grad[s] += (2.0 / n) * f * std::exp(p.log_theta[s]);
        for (int a = 0; a < mdp.n_actions(s); ++a) {
            double exponent = p.mu;
            for (const auto& t : mdp.outcomes[s][a]) {
                if (t.prob <= 0.0) continue;
                exponent += t.prob * (p.beta * t.reward + p.log_theta[t.to]);
            }
            const double term = std::exp(exponent);
            for (const auto& t : mdp.outcomes[s][a]) {
                if (t.prob <= 0.0 || mdp.is_terminal(t.to)) continue;
                grad[t.to] -= (2.0 / n) * f * term * t.prob;
            }
        }
    }
    for (int s = 0; s < n; ++s)
        if (mdp.is_terminal(s)) grad[s] = 0.0;
    return grad;
}

VariationalParams variational_gd_from(const Mdp& mdp, VariationalParams p, double lr,
                                      int iters) {
    require_uniform_actions(mdp, "variational_gd");
    double loss = variational_loss(mdp, p);
    double step = lr;
    for (int it = 0; it < iters; ++it) {
        if (loss == 0.0) break;
        const std::vector<double> grad = variational_loss_gradient(mdp, p);
        double gnorm = 0.0;
        for (double g : grad) gnorm = std::max(gnorm, std::abs(g));
        if (gnorm < 1e-300) break;

        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            VariationalParams trial = p;
            for (int s = 0; s < mdp.n_states(); ++s)
                trial.log_theta[s] -= step * grad[s];
            const double trial_loss = variational_loss(mdp, trial);
            if (trial_loss < loss) {
                p = std::move(trial);
                loss = trial_loss;
                accepted = true;
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }
        if (!accepted)
            break;  // at numerical stationarity; final loss reported below
    }
    p.loss = loss;
    return p;
}

VariationalParams variational_gd(const Mdp& mdp, const SolverConfig& cfg, double lr,
                                 int iters) {
    VariationalParams init = make_variational_params(
        mdp, cfg, cfg.beta * mdp.min_reward() * mdp.n_states() / 2.0);
    return variational_gd_from(mdp, std::move(init), lr, iters);
}

PolicyTable variational_policy(const Mdp& mdp, const ZTable& z) {
    if (!z.converged)
        throw std::invalid_argument("variational_policy: Z table has not converged");
    PolicyTable out;
    out.pi.resize(mdp.n_states());
    for (int s = 0; s < mdp.n_states(); ++s) {
        if (mdp.is_terminal(s)) continue;
        const int na = mdp.n_actions(s);
        std::vector<double> logits(na);
        for (int a = 0; a < na; ++a) {
            double exponent = z.mu;
            for (const auto& t : mdp.outcomes[s][a]) {
                if (t.prob <= 0.0) continue;
                exponent += t.prob * (z.beta * t.reward + z.log_z[t.to]);
            }
            logits[a] = exponent;
        }
        const double norm = log_sum_exp(logits);
        out.pi[s].resize(na);
        for (int a = 0; a < na; ++a) out.pi[s][a] = std::exp(logits[a] - norm);
    }
    return out;
}

double log_belief_bellman_apply(const Mdp& mdp, const VariationalParams& candidate,
                                const BeliefState& rho) {
    require_uniform_actions(mdp, "log_belief_bellman_apply");
    const int s0 = first_nonterminal(mdp);
    if (s0 < 0) throw std::invalid_argument("log_belief_bellman_apply: no actions");
    LogSumAccumulator acc;
    for (int a = 0; a < mdp.n_actions(s0); ++a) {
        auto [next, r_tilde] = belief_step(mdp, rho, a);
        acc.add(candidate.beta * r_tilde + candidate.mu + log_z_theta(candidate, next));
    }
    return acc.value();
}

double belief_contraction_check(const Mdp& mdp, const SolverConfig& cfg, int n_rho,
                                std::uint64_t seed) {
    require_uniform_actions(mdp, "belief_contraction_check");
    const int s0 = first_nonterminal(mdp);
    if (s0 < 0) return 0.0;
    const int n = mdp.n_states();
    std::mt19937_64 rng(seed);
    double max_ratio = 0.0;
    for (int trial = 0; trial < n_rho; ++trial) {
        VariationalParams x1 = make_variational_params(mdp, cfg, 0.0);
        VariationalParams x2 = x1;
        for (int s = 0; s < n; ++s) {
            if (mdp.is_terminal(s)) continue;  // boundary agreement
            x1.log_theta[s] = -3.0 * uniform_double(rng);
            x2.log_theta[s] = -3.0 * uniform_double(rng);
        }
        BeliefState rho{simplex_draw(rng, static_cast<std::size_t>(n))};

        const double num = std::abs(std::exp(log_belief_bellman_apply(mdp, x1, rho)) -
                                    std::exp(log_belief_bellman_apply(mdp, x2, rho)));
        // Sup-norm of the candidate difference over the belief and its
        // one-step images; the contraction bound is stated against the sup
        // over the whole simplex, which these points lower-bound.
        double den = std::abs(std::exp(log_z_theta(x1, rho)) -
                              std::exp(log_z_theta(x2, rho)));
        for (int a = 0; a < mdp.n_actions(s0); ++a) {
            auto [next, r_tilde] = belief_step(mdp, rho, a);
            (void)r_tilde;
            den = std::max(den, std::abs(std::exp(log_z_theta(x1, next)) -
                                         std::exp(log_z_theta(x2, next))));
        }
        if (den > 0.0) max_ratio = std::max(max_ratio, num / den);
    }
    return max_ratio;
}

}  // namespace zrl
