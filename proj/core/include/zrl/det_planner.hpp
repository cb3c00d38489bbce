#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <vector>

#include "zrl/mdp.hpp"

namespace zrl {

/// Per-state log partition values at a fixed (beta, mu).
struct ZTable {
    std::vector<double> log_z;
    double beta = 0.0;
    double mu = 0.0;
    /// Sup-norm Bellman residual in log domain.
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    /// Sup-norm change per sweep (power iteration only).
    std::vector<double> sweep_deltas;
};

/// Sparse matrix form of the linear Z Bellman operator: entry (s, s') is
/// e^{beta R(s->s') + mu} summed over actions taking s to s', plus a unit
/// diagonal entry for each terminal state.
struct TransitionOperator {
    Eigen::SparseMatrix<double, Eigen::RowMajor> c;
    double beta = 0.0;
    double mu = 0.0;
};

enum class ValueMethod { finite_difference, linear_system };

struct VTable {
    std::vector<double> v;
    double beta = 0.0;
    ValueMethod method = ValueMethod::linear_system;
};

/// Per-state action distribution; pi[s] is empty for terminal states.
struct PolicyTable {
    std::vector<std::vector<double>> pi;
};

struct BoltzmannResult {
    VTable v;
    PolicyTable pi;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

TransitionOperator build_transition_operator(const Mdp& mdp, double beta, double mu);

/// Log-domain power iteration on the Z Bellman fixed point. Terminal states
/// are pinned to beta * R(s_f).
ZTable z_power_iteration(const Mdp& mdp, const SolverConfig& cfg);

/// Direct linear solve of the reduced system (I - C_NN) z_N = C_NT z_T in
/// linear scale. Reliable for moderate beta only (entries ~ e^{beta R}).
ZTable z_linear_solve(const Mdp& mdp, const SolverConfig& cfg);

VTable value_from_z(const Mdp& mdp, const ZTable& z, ValueMethod method,
                    const SolverConfig& cfg);

/// pi(a|s) = Z(s+a) e^{beta R(s,a) + mu} / Z(s), computed in log domain.
PolicyTable policy_from_z(const Mdp& mdp, const ZTable& z);

/// Damped softmax-weighted value iteration with discount gamma; comparison
/// baseline only.
BoltzmannResult boltzmann_baseline(const Mdp& mdp, const SolverConfig& cfg);

/// Empirical sup-norm contraction ratio of X -> C(beta) X over random table
/// pairs with matched boundary values. Bounded by d e^{mu}.
double contraction_check(const Mdp& mdp, const SolverConfig& cfg, int trials,
                         std::uint64_t seed);

/// Sup-norm log-domain Bellman residual of a candidate table.
double bellman_residual(const Mdp& mdp, const ZTable& z);

}  // namespace zrl
