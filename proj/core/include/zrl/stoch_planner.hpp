#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "zrl/det_planner.hpp"
#include "zrl/mdp.hpp"

namespace zrl {

/// Probability distribution over the states of the original MDP.
struct BeliefState {
    std::vector<double> rho;
};

/// Parameters of the product family Z_theta(rho) = prod_i theta_i^{rho_i},
/// stored in log domain. Terminal coordinates are pinned to beta R(f_i).
struct VariationalParams {
    std::vector<double> log_theta;
    double beta = 0.0;
    double mu = 0.0;
    double loss = 0.0;
};

/// Diagnostic output of the averaged-Bellman value recursion. The weights
/// depend on the landing state s' and therefore do not form a realistic
/// policy; they are reported for inspection only.
struct NaiveDiagnostic {
    /// weights[s][a][k] aligned with mdp.outcomes[s][a][k].
    std::vector<std::vector<std::vector<double>>> weights;
    std::vector<double> v;
    double residual = 0.0;
    std::string warning;
};

/// One step of the belief MDP: rho' = P_a^T rho and the expected transition
/// reward. Requires uniform action sets.
std::pair<BeliefState, double> belief_step(const Mdp& mdp, const BeliefState& rho, int a);

/// log Z_theta(rho) = sum_i rho_i log theta_i.
double log_z_theta(const VariationalParams& params, const BeliefState& rho);

/// Fixed point of the averaged Bellman equation
/// Z(s) = sum_{a,s'} P(s'|s,a) e^{beta R(s,a,s') + mu} Z(s').
ZTable naive_avg_bellman_solve(const Mdp& mdp, const SolverConfig& cfg);

NaiveDiagnostic naive_value_diagnostic(const Mdp& mdp, const ZTable& z);

/// Damped fixed point of the geometric-mean Bellman equation
/// Z(s) = sum_a prod_{s'} [e^{beta R + mu} Z(s')]^{P(s'|s,a)}.
ZTable variational_fixed_point(const Mdp& mdp, const SolverConfig& cfg);

/// Squared Bellman residual of the product family, averaged over Dirac
/// beliefs, in linear scale.
double variational_loss(const Mdp& mdp, const VariationalParams& params);

/// Loss divided by max_s Z_theta(delta_s)^2, for comparability across beta.
double normalized_variational_loss(const Mdp& mdp, const VariationalParams& params);

/// Analytic gradient of the loss with respect to log theta; zero at terminal
/// coordinates (pinned boundary).
std::vector<double> variational_loss_gradient(const Mdp& mdp,
                                              const VariationalParams& params);

/// Gradient descent on the loss with backtracking line search, starting from
/// a seeded random interior point (or the boundary-consistent init).
VariationalParams variational_gd(const Mdp& mdp, const SolverConfig& cfg, double lr,
                                 int iters);
VariationalParams variational_gd_from(const Mdp& mdp, VariationalParams init, double lr,
                                      int iters);

/// Boundary-pinned params with the given non-terminal initialization.
VariationalParams make_variational_params(const Mdp& mdp, const SolverConfig& cfg,
                                          double log_theta_init);

/// Realistic policy of the variational solution:
/// log pi(a|s) ~ sum_{s'} P(s'|s,a) [beta R(s,a,s') + mu + log Z(s')].
PolicyTable variational_policy(const Mdp& mdp, const ZTable& z);

/// One application of the belief Bellman operator to a product-family
/// candidate, in log domain:
/// log sum_a exp(beta R(rho,a) + mu + log X(P_a^T rho)).
/// Mass on terminal states is absorbing and contributes no reward.
double log_belief_bellman_apply(const Mdp& mdp, const VariationalParams& candidate,
                                const BeliefState& rho);

/// Sampled sup-norm contraction ratio of the belief Bellman operator over
/// random simplex points and random product-family candidate pairs.
double belief_contraction_check(const Mdp& mdp, const SolverConfig& cfg, int n_rho,
                                std::uint64_t seed);

}  // namespace zrl
