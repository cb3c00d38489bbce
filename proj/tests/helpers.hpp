#pragma once

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "zrl/mdp.hpp"

namespace zrl::test {

inline std::string tree_path() { return ZRL_DATA_DIR "/tree.json"; }

inline Mdp tree_mdp() { return load_mdp(tree_path()); }

/// s0 -> s1 -> terminal chain: one action per state, reward -1 per step,
/// terminal reward 0.
inline Mdp chain_mdp() {
    Mdp m;
    m.state_names = {"s0", "s1", "t"};
    m.action_names = {{"go"}, {"go"}, {}};
    m.outcomes.resize(3);
    m.outcomes[0] = {{{1, 1.0, -1.0}}};
    m.outcomes[1] = {{{2, 1.0, -1.0}}};
    m.terminal = {false, false, true};
    m.terminal_rewards = {0.0, 0.0, 0.0};
    return m;
}

/// Two states, one action: terminal with probability p, self-loop otherwise;
/// all rewards zero. Z(s) = p e^mu / (1 - (1-p) e^mu).
inline Mdp geometric_mdp(double p) {
    Mdp m;
    m.state_names = {"s", "t"};
    m.action_names = {{"go"}, {}};
    m.outcomes.resize(2);
    m.outcomes[0] = {{{1, p, 0.0}, {0, 1.0 - p, 0.0}}};
    m.terminal = {false, true};
    m.terminal_rewards = {0.0, 0.0};
    return m;
}

/// Deterministic cyclic fixture: "stay" self-loops, "exit" terminates; all
/// rewards zero. Z(s) = e^mu / (1 - e^mu).
inline Mdp loop_mdp() {
    Mdp m;
    m.state_names = {"s", "t"};
    m.action_names = {{"stay", "exit"}, {}};
    m.outcomes.resize(2);
    m.outcomes[0] = {{{0, 1.0, 0.0}}, {{1, 1.0, 0.0}}};
    m.terminal = {false, true};
    m.terminal_rewards = {0.0, 0.0};
    return m;
}

/// One decision state with a risky action (small chance of a large terminal
/// bonus) and a safe action. Uniform actions hold trivially.
inline Mdp risky_bet_mdp() {
    Mdp m;
    m.state_names = {"s", "win", "lose"};
    m.action_names = {{"risk", "safe"}, {}, {}};
    m.outcomes.resize(3);
    m.outcomes[0] = {
        {{1, 0.01, 0.0}, {2, 0.99, 0.0}},  // risk
        {{2, 1.0, 0.0}},                   // safe
    };
    m.terminal = {false, true, true};
    m.terminal_rewards = {0.0, 10.0, 0.0};
    return m;
}

/// Deterministic width x height gridworld. Actions up/down/left/right; moves
/// off the grid stay in place. Step reward -0.04; the goal cell is terminal
/// with reward 1.
inline Mdp gridworld_mdp(int width = 4, int height = 4, int goal_x = 3, int goal_y = 2) {
    Mdp m;
    const int n = width * height;
    auto idx = [width](int x, int y) { return y * width + x; };
    const int goal = idx(goal_x, goal_y);
    m.state_names.resize(n);
    m.action_names.resize(n);
    m.outcomes.resize(n);
    m.terminal.assign(n, false);
    m.terminal_rewards.assign(n, 0.0);
    m.terminal[goal] = true;
    m.terminal_rewards[goal] = 1.0;
    const int dx[4] = {0, 0, -1, 1};
    const int dy[4] = {-1, 1, 0, 0};
    const char* names[4] = {"up", "down", "left", "right"};
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const int s = idx(x, y);
            m.state_names[s] = "c" + std::to_string(x) + "_" + std::to_string(y);
            if (s == goal) continue;
            for (int a = 0; a < 4; ++a) {
                int nx = x + dx[a], ny = y + dy[a];
                if (nx < 0 || nx >= width || ny < 0 || ny >= height) {
                    nx = x;
                    ny = y;
                }
                m.action_names[s].push_back(names[a]);
                m.outcomes[s].push_back({{idx(nx, ny), 1.0, -0.04}});
            }
        }
    return m;
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Runs the CLI binary with the given arguments.
inline CliResult run_cli(const std::string& args) {
    static int counter = 0;
    const std::string stem = std::string("/tmp/zrl_cli_") + std::to_string(counter++);
    const std::string cmd = std::string(ZRL_CLI_PATH) + " " + args + " > " + stem +
                            ".out 2> " + stem + ".err";
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(stem + ".out");
    r.err = slurp(stem + ".err");
    return r;
}

}  // namespace zrl::test
