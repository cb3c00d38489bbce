#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "zrl/mdp.hpp"
#include "zrl/oracle.hpp"

using namespace zrl;
using namespace zrl::test;

TEST_CASE("validate: Figure-1 style decision tree") {
    const Mdp m = tree_mdp();
    const ValidationReport rep = validate(m);
    CHECK(rep.ok());
    CHECK(rep.is_deterministic);
    CHECK(rep.d == 3);
    CHECK(rep.mu_threshold == doctest::Approx(-std::log(3.0)).epsilon(1e-12));
    CHECK_FALSE(rep.has_cycles);
    CHECK(rep.r_terminal_max == 1.0);
}

TEST_CASE("validate: degenerate single-terminal MDP") {
    Mdp m;
    m.state_names = {"t"};
    m.action_names = {{}};
    m.outcomes.resize(1);
    m.terminal = {true};
    m.terminal_rewards = {0.5};
    const ValidationReport rep = validate(m);
    CHECK(rep.ok());
    CHECK(rep.d == 0);
    CHECK(std::isinf(rep.mu_threshold));
}

TEST_CASE("validate: invariant breaches are reported, not thrown") {
    Mdp m = chain_mdp();
    m.outcomes[0][0][0].reward = 0.5;
    const ValidationReport rep = validate(m);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.violations[0].find("positive transition reward") != std::string::npos);

    SUBCASE("bad probability sum") {
        m.outcomes[0][0][0].prob = 0.5;
        CHECK(validate(m).violations.size() == 2);
    }
    SUBCASE("terminal with outgoing transitions") {
        m.terminal[0] = true;
        bool found = false;
        for (const auto& v : validate(m).violations)
            found = found || v.find("terminal state") != std::string::npos;
        CHECK(found);
    }
}

TEST_CASE("validate detects cycles") {
    CHECK(validate(geometric_mdp(0.3)).has_cycles);
    CHECK_FALSE(validate(chain_mdp()).has_cycles);
    CHECK(validate(gridworld_mdp()).has_cycles);  // wall bumps self-loop
}

TEST_CASE("normalize_rewards shifts the max transition reward to zero") {
    Mdp m = chain_mdp();
    m.outcomes[0][0][0].reward = -1.0;
    m.outcomes[1][0][0].reward = 2.0;
    Mdp extra = m;
    extra.outcomes[0].push_back({{2, 1.0, 0.0}});
    extra.action_names[0].push_back("jump");

    const Mdp norm = normalize_rewards(extra);
    CHECK(norm.reward_shift == 2.0);
    CHECK(norm.outcomes[0][0][0].reward == -3.0);
    CHECK(norm.outcomes[1][0][0].reward == 0.0);
    CHECK(norm.outcomes[0][1][0].reward == -2.0);
    CHECK(validate(norm).ok());
}

TEST_CASE("normalize_rewards is the identity when max is already zero") {
    const Mdp m = tree_mdp();  // all transition rewards 0
    const Mdp norm = normalize_rewards(m);
    CHECK(norm.reward_shift == 0.0);
    for (int s = 0; s < m.n_states(); ++s)
        for (int a = 0; a < m.n_actions(s); ++a)
            CHECK(norm.outcomes[s][a][0].reward == m.outcomes[s][a][0].reward);
}

TEST_CASE("validate(normalize_rewards(m)) never reports positive rewards") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Mdp m = random_mdp(6, 2, 2, false, true, seed);
        // Inject positive rewards, then normalize.
        m.outcomes[0][0][0].reward = 1.0 + static_cast<double>(seed);
        const ValidationReport rep = validate(normalize_rewards(m));
        for (const auto& v : rep.violations)
            CHECK(v.find("positive transition reward") == std::string::npos);
    }
}

TEST_CASE("random_mdp is a pure function of its arguments") {
    const Mdp a = random_mdp(6, 2, 1, true, true, 42);
    const Mdp b = random_mdp(6, 2, 1, true, true, 42);
    CHECK(mdp_to_json(a) == mdp_to_json(b));
    const Mdp c = random_mdp(6, 2, 1, true, true, 43);
    CHECK(mdp_to_json(a) != mdp_to_json(c));
}

TEST_CASE("random_mdp: minimal instance is a single chain") {
    const Mdp m = random_mdp(2, 1, 1, true, true, 7);
    CHECK(m.n_states() == 2);
    CHECK_FALSE(m.is_terminal(0));
    CHECK(m.is_terminal(1));
    CHECK(m.n_actions(0) == 1);
    CHECK(m.successor(0, 0) == 1);
    CHECK(validate(m).ok());
}

TEST_CASE("random_mdp: stochastic acyclic instance") {
    const Mdp m = random_mdp(8, 3, 2, false, true, 1);
    const ValidationReport rep = validate(m);
    CHECK(rep.ok());
    CHECK_FALSE(rep.is_deterministic);
    CHECK_FALSE(rep.has_cycles);
    CHECK(m.has_uniform_actions());
}

TEST_CASE("random_mdp rejects impossible parameter sets") {
    CHECK_THROWS_AS(random_mdp(1, 1, 1, true, true, 0), std::invalid_argument);
    CHECK_THROWS_AS(random_mdp(4, 0, 1, true, true, 0), std::invalid_argument);
    CHECK_THROWS_AS(random_mdp(4, 1, 0, true, true, 0), std::invalid_argument);
}

TEST_CASE("generated acyclic instances have finite trajectory ensembles") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const Mdp m = random_mdp(7, 2, 2, false, true, seed);
        // Exhaustive enumeration terminates untruncated at length |S|.
        for (int s = 0; s < m.n_states(); ++s) {
            if (m.is_terminal(s)) continue;
            const OracleResult r = enumerate_z(m, s, 0.0, -1.0, m.n_states());
            CHECK_FALSE(r.truncated);
            CHECK(r.n_trajectories >= 1);
        }
    }
}

TEST_CASE("json round trip preserves the instance") {
    const Mdp m = random_mdp(7, 3, 2, false, true, 5);
    const Mdp back = parse_mdp(mdp_to_json(m));
    CHECK(mdp_to_json(back) == mdp_to_json(m));
    CHECK(back.n_states() == m.n_states());
    for (int s = 0; s < m.n_states(); ++s)
        for (int a = 0; a < m.n_actions(s); ++a)
            for (std::size_t k = 0; k < m.outcomes[s][a].size(); ++k) {
                CHECK(back.outcomes[s][a][k].prob == m.outcomes[s][a][k].prob);
                CHECK(back.outcomes[s][a][k].reward == m.outcomes[s][a][k].reward);
            }
}

TEST_CASE("schema violations are rejected on load") {
    CHECK_THROWS(parse_mdp("{}"));
    CHECK_THROWS(parse_mdp(R"({"states":["A","B"],"terminal":{"B":0.0},
        "transitions":[{"from":"A","action":"x",
        "to":[{"state":"B","prob":0.5,"reward":0.0}]}]})"));
}

TEST_CASE("has_uniform_actions distinguishes the tree from generated MDPs") {
    CHECK_FALSE(tree_mdp().has_uniform_actions());
    CHECK(random_mdp(5, 2, 1, true, true, 0).has_uniform_actions());
    CHECK(gridworld_mdp().has_uniform_actions());
}
