#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "zrl/mdp.hpp"

namespace zrl {

namespace {

Mdp from_json(const nlohmann::json& j) {
    Mdp mdp;
    if (!j.contains("states") || !j["states"].is_array())
        throw std::runtime_error("mdp schema: missing 'states' array");
    for (const auto& s : j["states"]) mdp.state_names.push_back(s.get<std::string>());
    const int n = mdp.n_states();
    mdp.action_names.resize(n);
    mdp.outcomes.resize(n);
    mdp.terminal.assign(n, false);
    mdp.terminal_rewards.assign(n, 0.0);

    if (j.contains("terminal"))
        for (auto it = j["terminal"].begin(); it != j["terminal"].end(); ++it) {
            int s = mdp.state_index(it.key());
            mdp.terminal[s] = true;
            mdp.terminal_rewards[s] = it.value().get<double>();
        }

    for (const auto& tr : j.value("transitions", nlohmann::json::array())) {
        int s = mdp.state_index(tr.at("from").get<std::string>());
        std::string action = tr.at("action").get<std::string>();
        for (const auto& existing : mdp.action_names[s])
            if (existing == action)
                throw std::runtime_error("mdp schema: duplicate (from, action) block at " +
                                         mdp.state_names[s] + "/" + action);
        mdp.action_names[s].push_back(action);
        std::vector<Transition> edges;
        double psum = 0.0;
        for (const auto& e : tr.at("to")) {
            Transition t;
            t.to = mdp.state_index(e.at("state").get<std::string>());
            t.prob = e.at("prob").get<double>();
            t.reward = e.value("reward", 0.0);
            psum += t.prob;
            edges.push_back(t);
        }
        if (std::abs(psum - 1.0) > 1e-9)
            throw std::runtime_error("mdp schema: probabilities at (" + mdp.state_names[s] +
                                     ", " + action + ") sum to " + std::to_string(psum));
        mdp.outcomes[s].push_back(std::move(edges));
    }
    return mdp;
}

}  // namespace

Mdp parse_mdp(const std::string& json_text) {
    return from_json(nlohmann::json::parse(json_text));
}

Mdp load_mdp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open MDP file: " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

std::string mdp_to_json(const Mdp& mdp) {
    nlohmann::json j;
    j["states"] = mdp.state_names;
    nlohmann::json term = nlohmann::json::object();
    for (int s = 0; s < mdp.n_states(); ++s)
        if (mdp.is_terminal(s)) term[mdp.state_names[s]] = mdp.terminal_rewards[s];
    j["terminal"] = term;
    nlohmann::json transitions = nlohmann::json::array();
    for (int s = 0; s < mdp.n_states(); ++s)
        for (int a = 0; a < mdp.n_actions(s); ++a) {
            nlohmann::json tr;
            tr["from"] = mdp.state_names[s];
            tr["action"] = mdp.action_names[s][a];
            nlohmann::json to = nlohmann::json::array();
            for (const auto& t : mdp.outcomes[s][a])
                to.push_back({{"state", mdp.state_names[t.to]},
                              {"prob", t.prob},
                              {"reward", t.reward}});
            tr["to"] = to;
            transitions.push_back(tr);
        }
    j["transitions"] = transitions;
    return j.dump(2) + "\n";
}

void save_mdp(const Mdp& mdp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write MDP file: " + path);
    out << mdp_to_json(mdp);
}

}  // namespace zrl
