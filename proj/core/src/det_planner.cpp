#include "zrl/det_planner.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <stdexcept>

#include "zrl/numerics.hpp"

namespace zrl {

namespace {

void require_deterministic(const Mdp& mdp, const char* who) {
    if (!mdp.deterministic())
        throw std::invalid_argument(std::string(who) +
                                    ": stochastic MDP; use the stoch_planner solvers");
}

double initial_log_z(const Mdp& mdp, double beta) {
    // Any positive initialization below the fixed point works (contraction);
    // a floor proportional to the worst cumulative reward keeps beta sweeps
    // from starting absurdly far away.
    return beta * mdp.min_reward() * mdp.n_states();
}

}  // namespace

TransitionOperator build_transition_operator(const Mdp& mdp, double beta, double mu) {
    require_deterministic(mdp, "build_transition_operator");
    const int n = mdp.n_states();
    std::vector<Eigen::Triplet<double>> triplets;
    for (int s = 0; s < n; ++s) {
        if (mdp.is_terminal(s)) {
            triplets.emplace_back(s, s, 1.0);
            continue;
        }
        for (int a = 0; a < mdp.n_actions(s); ++a)
            triplets.emplace_back(s, mdp.successor(s, a),
                                  std::exp(beta * mdp.reward(s, a) + mu));
    }
    TransitionOperator op;
    op.beta = beta;
    op.mu = mu;
    op.c.resize(n, n);
    op.c.setFromTriplets(triplets.begin(), triplets.end());  // duplicates sum
    return op;
}

double bellman_residual(const Mdp& mdp, const ZTable& z) {
    double res = 0.0;
    for (int s = 0; s < mdp.n_states(); ++s) {
        if (mdp.is_terminal(s)) continue;
        LogSumAccumulator acc;
        for (int a = 0; a < mdp.n_actions(s); ++a) {
            double term = z.mu;
            for (const auto& t : mdp.outcomes[s][a]) {
                if (t.prob <= 0.0) continue;
                // Deterministic residual; stochastic tables use their own.
                term += z.beta * t.reward + z.log_z[t.to];
            }
            acc.add(term);
        }
        res = std::max(res, std::abs(z.log_z[s] - acc.value()));
    }
    return res;
}

ZTable z_power_iteration(const Mdp& mdp, const SolverConfig& cfg) {
    require_deterministic(mdp, "z_power_iteration");
    const int n = mdp.n_states();
    ZTable z;
    z.beta = cfg.beta;
    z.mu = cfg.mu;
    z.log_z.assign(n, initial_log_z(mdp, cfg.beta));
    for (int s = 0; s < n; ++s)
        if (mdp.is_terminal(s)) z.log_z[s] = cfg.beta * mdp.terminal_reward(s);

    std::vector<double> next = z.log_z;
    std::vector<double> terms;
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        double delta = 0.0;
        for (int s = 0; s < n; ++s) {
            if (mdp.is_terminal(s)) continue;
            terms.clear();
            for (int a = 0; a < mdp.n_actions(s); ++a)
                terms.push_back(cfg.beta * mdp.reward(s, a) + cfg.mu +
                                z.log_z[mdp.successor(s, a)]);
            next[s] = log_sum_exp(terms);
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
    z.residual = bellman_residual(mdp, z);
    return z;
}

ZTable z_linear_solve(const Mdp& mdp, const SolverConfig& cfg) {
    require_deterministic(mdp, "z_linear_solve");
    const int n = mdp.n_states();
    std::vector<int> nonterminal;
    std::vector<int> reduced_index(n, -1);
    for (int s = 0; s < n; ++s)
        if (!mdp.is_terminal(s)) {
            reduced_index[s] = static_cast<int>(nonterminal.size());
            nonterminal.push_back(s);
        }

    ZTable z;
    z.beta = cfg.beta;
    z.mu = cfg.mu;
    z.log_z.assign(n, 0.0);
    z.converged = true;
    for (int s = 0; s < n; ++s)
        if (mdp.is_terminal(s)) z.log_z[s] = cfg.beta * mdp.terminal_reward(s);
    const int m = static_cast<int>(nonterminal.size());
    if (m == 0) {
        z.residual = 0.0;
        return z;  // boundary values only
    }

    // (I - C_NN) z_N = C_NT z_T, assembled directly from the per-action form.
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) {
        const int s = nonterminal[i];
        triplets.emplace_back(i, i, 1.0);
        for (int a = 0; a < mdp.n_actions(s); ++a) {
            const int sp = mdp.successor(s, a);
            const double c = std::exp(cfg.beta * mdp.reward(s, a) + cfg.mu);
            if (mdp.is_terminal(sp))
                rhs[i] += c * std::exp(cfg.beta * mdp.terminal_reward(sp));
            else
                triplets.emplace_back(i, reduced_index[sp], -c);
        }
    }
    Eigen::SparseMatrix<double> system(m, m);
    system.setFromTriplets(triplets.begin(), triplets.end());

    // Row equilibration: scale each row by its max absolute entry.
    Eigen::VectorXd row_scale = Eigen::VectorXd::Ones(m);
    {
        Eigen::SparseMatrix<double, Eigen::RowMajor> rows = system;
        for (int i = 0; i < m; ++i) {
            double hi = 0.0;
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rows, i);
                 it; ++it)
                hi = std::max(hi, std::abs(it.value()));
            if (hi > 0.0) row_scale[i] = 1.0 / hi;
        }
    }
    system = row_scale.asDiagonal() * system;
    rhs = row_scale.asDiagonal() * rhs;

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(system);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("z_linear_solve: reduced system is singular "
                                 "(d e^mu >= 1 or structural defect)");
    Eigen::VectorXd sol = lu.solve(rhs);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("z_linear_solve: back substitution failed");
    for (int i = 0; i < m; ++i) {
        if (!(sol[i] > 0.0))
            throw std::runtime_error("z_linear_solve: non-positive solution component at " +
                                     mdp.state_names[nonterminal[i]]);
        z.log_z[nonterminal[i]] = std::log(sol[i]);
    }
    z.residual = bellman_residual(mdp, z);
    return z;
}

PolicyTable policy_from_z(const Mdp& mdp, const ZTable& z) {
    PolicyTable out;
    out.pi.resize(mdp.n_states());
    for (int s = 0; s < mdp.n_states(); ++s) {
        if (mdp.is_terminal(s)) continue;
        const int na = mdp.n_actions(s);
        std::vector<double> logits(na);
        for (int a = 0; a < na; ++a)
            logits[a] = z.beta * mdp.reward(s, a) + z.mu + z.log_z[mdp.successor(s, a)];
        const double norm = log_sum_exp(logits);
        out.pi[s].resize(na);
        for (int a = 0; a < na; ++a) out.pi[s][a] = std::exp(logits[a] - norm);
    }
    return out;
}

VTable value_from_z(const Mdp& mdp, const ZTable& z, ValueMethod method,
                    const SolverConfig& cfg) {
    if (!z.converged || z.residual > 10 * std::max(cfg.tol, 1e-12) + 1e-9)
        throw std::invalid_argument("value_from_z: Z table has not converged");
    VTable out;
    out.beta = z.beta;
    out.method = method;
    const int n = mdp.n_states();
    out.v.assign(n, 0.0);
    for (int s = 0; s < n; ++s)
        if (mdp.is_terminal(s)) out.v[s] = mdp.terminal_reward(s);

    if (method == ValueMethod::finite_difference) {
        const double h = 1e-4 * std::max(1.0, z.beta);
        SolverConfig c = cfg;
        c.mu = z.mu;
        c.beta = z.beta + h;
        ZTable zp = z_power_iteration(mdp, c);
        c.beta = z.beta - h;
        ZTable zm = z_power_iteration(mdp, c);
        if (!zp.converged || !zm.converged)
            throw std::runtime_error("value_from_z: finite-difference re-solve failed");
        for (int s = 0; s < n; ++s)
            if (!mdp.is_terminal(s)) out.v[s] = (zp.log_z[s] - zm.log_z[s]) / (2.0 * h);
        return out;
    }

    // Linear system V(s) = sum_a pi(a|s) [R(s,a) + V(s+a)] on non-terminal
    // states, with the already normalized policy weights.
    const PolicyTable pi = policy_from_z(mdp, z);
    std::vector<int> nonterminal;
    std::vector<int> reduced_index(n, -1);
    for (int s = 0; s < n; ++s)
        if (!mdp.is_terminal(s)) {
            reduced_index[s] = static_cast<int>(nonterminal.size());
            nonterminal.push_back(s);
        }
    const int m = static_cast<int>(nonterminal.size());
    if (m == 0) return out;

    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) {
        const int s = nonterminal[i];
        triplets.emplace_back(i, i, 1.0);
        for (int a = 0; a < mdp.n_actions(s); ++a) {
            const int sp = mdp.successor(s, a);
            const double w = pi.pi[s][a];
            rhs[i] += w * mdp.reward(s, a);
            if (mdp.is_terminal(sp))
                rhs[i] += w * mdp.terminal_reward(sp);
            else
                triplets.emplace_back(i, reduced_index[sp], -w);
        }
    }
    Eigen::SparseMatrix<double> system(m, m);
    system.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(system);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("value_from_z: value system is singular");
    Eigen::VectorXd sol = lu.solve(rhs);
    for (int i = 0; i < m; ++i) out.v[nonterminal[i]] = sol[i];
    return out;
}

BoltzmannResult boltzmann_baseline(const Mdp& mdp, const SolverConfig& cfg) {
    require_deterministic(mdp, "boltzmann_baseline");
    if (cfg.gamma < 0.0 || cfg.gamma >= 1.0)
        throw std::invalid_argument("boltzmann_baseline: gamma must be in [0, 1)");
    const int n = mdp.n_states();
    BoltzmannResult out;
    out.v.beta = cfg.beta;
    out.v.v.assign(n, 0.0);
    for (int s = 0; s < n; ++s)
        if (mdp.is_terminal(s)) out.v.v[s] = mdp.terminal_reward(s);

    std::vector<double> logits;
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        double delta = 0.0;
        std::vector<double> next = out.v.v;
        for (int s = 0; s < n; ++s) {
            if (mdp.is_terminal(s)) continue;
            const int na = mdp.n_actions(s);
            logits.assign(na, 0.0);
            double target = 0.0;
            for (int a = 0; a < na; ++a)
                logits[a] = cfg.beta * (mdp.reward(s, a) +
                                        cfg.gamma * out.v.v[mdp.successor(s, a)]);
            const double norm = log_sum_exp(logits);
            for (int a = 0; a < na; ++a)
                target += std::exp(logits[a] - norm) *
                          (mdp.reward(s, a) + cfg.gamma * out.v.v[mdp.successor(s, a)]);
            next[s] = (1.0 - cfg.damping) * out.v.v[s] + cfg.damping * target;
            delta = std::max(delta, std::abs(next[s] - out.v.v[s]));
        }
        out.v.v = next;
        out.iterations = iter + 1;
        out.residual = delta;
        if (delta < cfg.tol) {
            out.converged = true;
            break;
        }
    }

    out.pi.pi.resize(n);
    for (int s = 0; s < n; ++s) {
        if (mdp.is_terminal(s)) continue;
        const int na = mdp.n_actions(s);
        logits.assign(na, 0.0);
        for (int a = 0; a < na; ++a)
            logits[a] = cfg.beta *
                        (mdp.reward(s, a) + cfg.gamma * out.v.v[mdp.successor(s, a)]);
        const double norm = log_sum_exp(logits);
        out.pi.pi[s].resize(na);
        for (int a = 0; a < na; ++a) out.pi.pi[s][a] = std::exp(logits[a] - norm);
    }
    return out;
}

double contraction_check(const Mdp& mdp, const SolverConfig& cfg, int trials,
                         std::uint64_t seed) {
    require_deterministic(mdp, "contraction_check");
    const int n = mdp.n_states();
    bool any_nonterminal = false;
    for (int s = 0; s < n; ++s)
        if (!mdp.is_terminal(s)) any_nonterminal = true;
    if (!any_nonterminal) return 0.0;

    const TransitionOperator op = build_transition_operator(mdp, cfg.beta, cfg.mu);
    std::mt19937_64 rng(seed);
    double max_ratio = 0.0;
    for (int t = 0; t < trials; ++t) {
        Eigen::VectorXd x1(n), x2(n);
        for (int s = 0; s < n; ++s) {
            if (mdp.is_terminal(s)) {
                x1[s] = x2[s] = std::exp(cfg.beta * mdp.terminal_reward(s));
            } else {
                x1[s] = uniform_double(rng) + 1e-6;
                x2[s] = uniform_double(rng) + 1e-6;
            }
        }
        Eigen::VectorXd y1 = op.c * x1;
        Eigen::VectorXd y2 = op.c * x2;
        double num = 0.0, den = 0.0;
        for (int s = 0; s < n; ++s) {
            if (mdp.is_terminal(s)) continue;
            num = std::max(num, std::abs(y1[s] - y2[s]));
            den = std::max(den, std::abs(x1[s] - x2[s]));
        }
        if (den > 0.0) max_ratio = std::max(max_ratio, num / den);
    }
    return max_ratio;
}

}  // namespace zrl
