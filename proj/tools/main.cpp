// Command-line front end: loads MDP files, dispatches solvers, learners and
// the enumeration oracle, and emits machine-readable result tables.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zrl/det_planner.hpp"
#include "zrl/mdp.hpp"
#include "zrl/model_free.hpp"
#include "zrl/oracle.hpp"
#include "zrl/stoch_planner.hpp"
#include "zrl/table_io.hpp"

namespace {

using namespace zrl;

struct OutputSpec {
    std::string path;  // empty = stdout
    std::string format = "csv";
};

void add_output_flags(CLI::App* cmd, OutputSpec& out) {
    cmd->add_option("--out", out.path, "Output file (default: stdout)");
    cmd->add_option("--format", out.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));
}

void emit(const ResultTable& table, const OutputSpec& out) {
    const TableFormat fmt =
        out.format == "json" ? TableFormat::json : TableFormat::csv;
    if (out.path.empty())
        std::cout << (fmt == TableFormat::csv ? to_csv(table) : to_json(table));
    else
        emit_table(table, fmt, out.path);
}

void add_solver_flags(CLI::App* cmd, SolverConfig& cfg) {
    cmd->add_option("--beta", cfg.beta, "Inverse temperature")->check(CLI::NonNegativeNumber);
    cmd->add_option("--mu", cfg.mu, "Chemical potential (length penalty)");
    cmd->add_option("--gamma", cfg.gamma, "Discount (Boltzmann baseline only)");
    cmd->add_option("--tol", cfg.tol, "Convergence tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--max-iters", cfg.max_iters)->check(CLI::PositiveNumber);
    cmd->add_option("--damping", cfg.damping)->check(CLI::Range(1e-9, 1.0));
    cmd->add_option("--seed", cfg.seed);
}

Mdp load_validated(const std::string& path) {
    Mdp mdp = load_mdp(path);
    const ValidationReport rep = validate(mdp);
    if (!rep.ok()) {
        std::string msg = "invalid MDP '" + path + "':";
        for (const auto& v : rep.violations) msg += "\n  " + v;
        throw std::runtime_error(msg);
    }
    return mdp;
}

ResultTable log_z_table(const Mdp& mdp, const ZTable& z) {
    ResultTable t;
    t.columns = {"state", "log_z"};
    for (int s = 0; s < mdp.n_states(); ++s)
        t.add_row({mdp.state_names[s], format_number(z.log_z[s])});
    return t;
}

ResultTable policy_table(const Mdp& mdp, const PolicyTable& pi) {
    ResultTable t;
    t.columns = {"state", "action", "prob"};
    for (int s = 0; s < mdp.n_states(); ++s)
        for (int a = 0; a < mdp.n_actions(s); ++a)
            t.add_row({mdp.state_names[s], mdp.action_names[s][a],
                       format_number(pi.pi[s][a])});
    return t;
}

ZTable solve_det(const Mdp& mdp, const SolverConfig& cfg, const std::string& method) {
    ZTable z = method == "linear" ? z_linear_solve(mdp, cfg) : z_power_iteration(mdp, cfg);
    if (!z.converged)
        throw std::runtime_error("solver did not converge (residual " +
                                 format_number(z.residual) + ")");
    return z;
}

int run(int argc, char** argv) {
    CLI::App app{"Trajectory-ensemble partition functions for finite MDPs"};
    app.require_subcommand(1);

    std::string input;
    SolverConfig cfg;
    OutputSpec out;

    // validate
    auto* c_validate = app.add_subcommand("validate", "Report MDP assumptions");
    c_validate->add_option("mdp", input)->required();

    // oracle
    auto* c_oracle = app.add_subcommand("oracle", "Brute-force trajectory enumeration");
    std::string o_state, o_action;
    int o_max_len = -1;
    bool o_likelihood = false, o_nmax = false;
    c_oracle->add_option("mdp", input)->required();
    c_oracle->add_option("--state", o_state)->required();
    c_oracle->add_option("--action", o_action, "Restrict to Omega(s, a)");
    c_oracle->add_option("--max-len", o_max_len, "Trajectory length cap (default 10|S|)");
    c_oracle->add_flag("--likelihood", o_likelihood,
                       "Weight trajectories by e^{L(w)} (stochastic ensemble)");
    c_oracle->add_flag("--nmax", o_nmax, "Report v* and the optimal-trajectory count");
    add_solver_flags(c_oracle, cfg);
    add_output_flags(c_oracle, out);

    // plan-det
    auto* c_plan = app.add_subcommand("plan-det", "Solve the linear Z Bellman equation");
    std::string method = "power";
    c_plan->add_option("mdp", input)->required();
    c_plan->add_option("--method", method)->check(CLI::IsMember({"power", "linear"}));
    add_solver_flags(c_plan, cfg);
    add_output_flags(c_plan, out);

    // value
    auto* c_value = app.add_subcommand("value", "Value function from log Z");
    std::string v_method = "linear";
    c_value->add_option("mdp", input)->required();
    c_value->add_option("--method", v_method)->check(CLI::IsMember({"fd", "linear"}));
    add_solver_flags(c_value, cfg);
    add_output_flags(c_value, out);

    // policy
    auto* c_policy = app.add_subcommand("policy", "Entropy-aware policy from log Z");
    c_policy->add_option("mdp", input)->required();
    add_solver_flags(c_policy, cfg);
    add_output_flags(c_policy, out);

    // baseline-boltzmann
    auto* c_base = app.add_subcommand("baseline-boltzmann",
                                      "Boltzmann-policy value iteration baseline");
    c_base->add_option("mdp", input)->required();
    add_solver_flags(c_base, cfg);
    add_output_flags(c_base, out);

    // check-contraction
    auto* c_contr = app.add_subcommand("check-contraction",
                                       "Empirical sup-norm contraction ratio");
    int trials = 100;
    bool belief = false;
    c_contr->add_option("mdp", input)->required();
    c_contr->add_option("--trials", trials)->check(CLI::PositiveNumber);
    c_contr->add_flag("--belief", belief, "Check the belief-space operator");
    add_solver_flags(c_contr, cfg);
    add_output_flags(c_contr, out);

    // plan-stoch
    auto* c_stoch = app.add_subcommand("plan-stoch", "Stochastic-MDP solvers");
    std::string s_method = "variational-fp";
    double lr = 0.5;
    int gd_iters = 20000;
    c_stoch->add_option("mdp", input)->required();
    c_stoch->add_option("--method", s_method)
        ->check(CLI::IsMember({"naive", "variational-fp", "variational-gd"}));
    c_stoch->add_option("--lr", lr, "Initial GD step size");
    c_stoch->add_option("--iters", gd_iters, "GD iteration cap");
    add_solver_flags(c_stoch, cfg);
    add_output_flags(c_stoch, out);

    // learn
    auto* c_learn = app.add_subcommand("learn", "Model-free geometric Z-learning");
    AgentConfig agent;
    std::string exploration = "epsilon-greedy", schedule = "visit-count", start;
    c_learn->add_option("mdp", input)->required();
    c_learn->add_option("--alpha", agent.alpha)->check(CLI::Range(1e-12, 1.0));
    c_learn->add_option("--epsilon", agent.epsilon)->check(CLI::Range(0.0, 1.0));
    c_learn->add_option("--episodes", agent.episodes)->check(CLI::NonNegativeNumber);
    c_learn->add_option("--beta", agent.beta)->check(CLI::NonNegativeNumber);
    c_learn->add_option("--mu", agent.mu);
    c_learn->add_option("--seed", agent.seed);
    c_learn->add_option("--start", start, "Start state (default: first non-terminal)");
    c_learn->add_option("--max-steps", agent.max_steps_per_episode);
    c_learn->add_option("--exploration", exploration)
        ->check(CLI::IsMember({"epsilon-greedy", "boltzmann"}));
    c_learn->add_option("--schedule", schedule)
        ->check(CLI::IsMember({"constant", "visit-count", "harmonic"}));
    add_output_flags(c_learn, out);

    // sweep-beta
    auto* c_sweep = app.add_subcommand("sweep-beta", "Policy rows across beta values");
    std::string betas_csv = "0,1,5,50";
    c_sweep->add_option("mdp", input)->required();
    c_sweep->add_option("--betas", betas_csv, "Comma-separated beta list");
    add_solver_flags(c_sweep, cfg);
    add_output_flags(c_sweep, out);

    // gen-random
    auto* c_gen = app.add_subcommand("gen-random", "Generate a seeded random MDP");
    int g_n = 6, g_d = 2, g_branching = 1;
    bool g_det = false, g_acyclic = false;
    std::uint64_t g_seed = 0;
    c_gen->add_option("--n-states", g_n)->check(CLI::Range(2, 1000000));
    c_gen->add_option("--d", g_d)->check(CLI::PositiveNumber);
    c_gen->add_option("--branching", g_branching)->check(CLI::PositiveNumber);
    c_gen->add_flag("--deterministic", g_det);
    c_gen->add_flag("--acyclic", g_acyclic);
    c_gen->add_option("--seed", g_seed);
    c_gen->add_option("--out", out.path, "Output MDP file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    if (*c_validate) {
        const Mdp mdp = load_mdp(input);
        const ValidationReport rep = validate(mdp);
        std::cout << "is_deterministic = " << (rep.is_deterministic ? "true" : "false")
                  << "\nd = " << rep.d << "\nmu_threshold = " << format_number(rep.mu_threshold)
                  << "\nr_terminal_max = " << format_number(rep.r_terminal_max)
                  << "\nhas_cycles = " << (rep.has_cycles ? "true" : "false") << "\n";
        if (!rep.ok()) {
            for (const auto& v : rep.violations) std::cerr << "violation: " << v << "\n";
            return 2;
        }
        return 0;
    }

    if (*c_oracle) {
        const Mdp mdp = load_validated(input);
        const int s = mdp.state_index(o_state);
        const int max_len = o_max_len >= 0 ? o_max_len : default_max_len(mdp);
        ResultTable t;
        if (o_nmax) {
            const NMaxResult r = enumerate_n_max(mdp, s, cfg.mu);
            t.columns = {"state", "v_star", "n_max"};
            t.add_row({o_state, format_number(r.v_star), format_number(r.n_max)});
        } else {
            OracleResult r;
            if (!o_action.empty())
                r = enumerate_z_sa(mdp, s, mdp.action_index(s, o_action), cfg.beta, cfg.mu,
                                   max_len);
            else if (o_likelihood)
                r = enumerate_z_stochastic(mdp, s, cfg.beta, cfg.mu, max_len);
            else
                r = enumerate_z(mdp, s, cfg.beta, cfg.mu, max_len);
            t.columns = {"state", "log_z", "tail_bound", "n_trajectories", "truncated"};
            t.add_row({o_state, format_number(r.log_z), format_number(r.tail_bound),
                       std::to_string(r.n_trajectories), r.truncated ? "true" : "false"});
        }
        emit(t, out);
        return 0;
    }

    if (*c_plan) {
        const Mdp mdp = load_validated(input);
        emit(log_z_table(mdp, solve_det(mdp, cfg, method)), out);
        return 0;
    }

    if (*c_value) {
        const Mdp mdp = load_validated(input);
        const ZTable z = solve_det(mdp, cfg, "power");
        const VTable v = value_from_z(mdp, z,
                                      v_method == "fd" ? ValueMethod::finite_difference
                                                       : ValueMethod::linear_system,
                                      cfg);
        ResultTable t;
        t.columns = {"state", "v"};
        for (int s = 0; s < mdp.n_states(); ++s)
            t.add_row({mdp.state_names[s], format_number(v.v[s])});
        emit(t, out);
        return 0;
    }

    if (*c_policy) {
        const Mdp mdp = load_validated(input);
        emit(policy_table(mdp, policy_from_z(mdp, solve_det(mdp, cfg, "power"))), out);
        return 0;
    }

    if (*c_base) {
        const Mdp mdp = load_validated(input);
        const BoltzmannResult r = boltzmann_baseline(mdp, cfg);
        if (!r.converged) throw std::runtime_error("baseline did not converge");
        ResultTable t;
        t.columns = {"state", "action", "prob", "v"};
        for (int s = 0; s < mdp.n_states(); ++s)
            for (int a = 0; a < mdp.n_actions(s); ++a)
                t.add_row({mdp.state_names[s], mdp.action_names[s][a],
                           format_number(r.pi.pi[s][a]), format_number(r.v.v[s])});
        emit(t, out);
        return 0;
    }

    if (*c_contr) {
        const Mdp mdp = load_validated(input);
        const double ratio = belief
                                 ? belief_contraction_check(mdp, cfg, trials, cfg.seed)
                                 : contraction_check(mdp, cfg, trials, cfg.seed);
        const double bound = mdp.max_actions() * std::exp(cfg.mu);
        ResultTable t;
        t.columns = {"max_ratio", "bound"};
        t.add_row({format_number(ratio), format_number(bound)});
        emit(t, out);
        return 0;
    }

    if (*c_stoch) {
        const Mdp mdp = load_validated(input);
        ZTable z;
        if (s_method == "naive") {
            z = naive_avg_bellman_solve(mdp, cfg);
        } else if (s_method == "variational-fp") {
            z = variational_fixed_point(mdp, cfg);
        } else {
            const VariationalParams p = variational_gd(mdp, cfg, lr, gd_iters);
            z.beta = cfg.beta;
            z.mu = cfg.mu;
            z.log_z = p.log_theta;
            z.converged = true;
            std::cerr << "normalized loss = "
                      << format_number(normalized_variational_loss(mdp, p)) << "\n";
        }
        if (s_method != "variational-gd" && !z.converged)
            throw std::runtime_error("solver did not converge (residual " +
                                     format_number(z.residual) + ")");
        emit(log_z_table(mdp, z), out);
        return 0;
    }

    if (*c_learn) {
        const Mdp mdp = load_validated(input);
        agent.exploration = exploration == "boltzmann" ? Exploration::boltzmann_like
                                                       : Exploration::epsilon_greedy;
        agent.schedule = schedule == "constant"  ? AlphaSchedule::constant
                         : schedule == "harmonic" ? AlphaSchedule::harmonic
                                                  : AlphaSchedule::visit_count;
        if (!start.empty()) agent.start_state = mdp.state_index(start);
        const LearningLog log = run_episodes(mdp, agent);
        ResultTable t;
        t.columns = {"episode", "return", "length", "delta"};
        for (std::size_t i = 0; i < log.episodes.size(); ++i) {
            const auto& e = log.episodes[i];
            t.add_row({std::to_string(i), format_number(e.episode_return),
                       std::to_string(e.length), format_number(e.delta)});
        }
        emit(t, out);
        return 0;
    }

    if (*c_sweep) {
        const Mdp mdp = load_validated(input);
        std::vector<double> betas;
        std::stringstream ss(betas_csv);
        std::string item;
        while (std::getline(ss, item, ',')) betas.push_back(std::stod(item));
        ResultTable t;
        t.columns = {"beta", "state", "action", "prob"};
        for (double beta : betas) {
            SolverConfig c = cfg;
            c.beta = beta;
            const PolicyTable pi = policy_from_z(mdp, solve_det(mdp, c, "power"));
            for (int s = 0; s < mdp.n_states(); ++s)
                for (int a = 0; a < mdp.n_actions(s); ++a)
                    t.add_row({format_number(beta), mdp.state_names[s],
                               mdp.action_names[s][a], format_number(pi.pi[s][a])});
        }
        emit(t, out);
        return 0;
    }

    if (*c_gen) {
        const Mdp mdp = random_mdp(g_n, g_d, g_branching, g_det, g_acyclic, g_seed);
        if (out.path.empty())
            std::cout << mdp_to_json(mdp);
        else
            write_atomic(out.path, mdp_to_json(mdp));
        return 0;
    }

    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
