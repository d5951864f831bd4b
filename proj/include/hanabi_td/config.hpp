#pragma once

// Agent specs and experiment configuration, with their JSON form.
//
// Agent spec strings (CLI): [tabular:|deep:]<name> or "random", where <name>
// is one of q-learning, sarsa, sarsa-1, sarsa-2, sarsa-8, expected-sarsa.
//
// Config file (JSON), every section and key optional:
//   {
//     "experiment": {"games": 1000, "seed": 42, "out": "runs/demo"},
//     "agent_a": {"class": "tabular", "algorithm": "expected-sarsa", "alpha": 0.1,
//                 "gamma": 0.9, "epsilon": {"schedule": "harmonic", "epsilon0": 0.3,
//                 "tau": 1000}, "expected_form": "uniform_mean"},
//     "agent_b": {"class": "deep", "algorithm": "q-learning", "lr": 0.01,
//                 "hidden_layers": 4, "hidden_width": 64, "head": "softmax",
//                 "reward_bounds": [-5, 8], "checkpoint": "a.hnn",
//                 "adam": {"beta1": 0.9, "beta2": 0.999, "epsilon": 1e-7,
//                          "momentum": 0.99}},
//     "weights": {"play_safe_lives": 1.0, ...},
//     "ablation": {"layers": [1,2,3,4], "lrs": [0.001,0.01,0.1,0.5], "games": 100,
//                  "pairs": ["expected-sarsa:q-learning"]}
//   }

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hanabi_td/deep.hpp"
#include "hanabi_td/reward.hpp"
#include "hanabi_td/tabular.hpp"

namespace hanabi {

using json = nlohmann::json;

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class AgentClass : std::uint8_t { tabular, deep, random };

inline std::string_view to_string(AgentClass c) {
  switch (c) {
    case AgentClass::tabular: return "tabular";
    case AgentClass::deep: return "deep";
    case AgentClass::random: return "random";
  }
  return "unknown";
}

/// Agents that take part in tournaments, in report order.
inline const std::vector<std::string>& roster() {
  static const std::vector<std::string> names{"q-learning", "sarsa",   "sarsa-1",
                                              "sarsa-2",    "sarsa-8", "expected-sarsa"};
  return names;
}

inline std::pair<Algorithm, int> algorithm_for(std::string_view name) {
  if (name == "q-learning") return {Algorithm::q_learning, 1};
  if (name == "sarsa") return {Algorithm::sarsa, 1};
  if (name == "sarsa-1") return {Algorithm::n_step_sarsa, 1};
  if (name == "sarsa-2") return {Algorithm::n_step_sarsa, 2};
  if (name == "sarsa-8") return {Algorithm::n_step_sarsa, 8};
  if (name == "expected-sarsa") return {Algorithm::expected_sarsa, 1};
  throw ConfigError("unknown agent '" + std::string(name) + "'");
}

struct AgentSpec {
  AgentClass cls = AgentClass::tabular;
  std::string name = "q-learning";
  AgentConfig tabular;
  DeepAgentConfig deep;
  /// Deep agents only: start from this network instead of a fresh one.
  std::optional<std::string> checkpoint;

  static AgentSpec make(AgentClass cls, const std::string& name) {
    AgentSpec s;
    s.cls = cls;
    s.name = name;
    if (cls == AgentClass::random) return s;
    const auto [alg, n] = algorithm_for(name);
    s.tabular = AgentConfig::defaults(alg, n);
    s.deep = DeepAgentConfig::defaults(alg, n);
    return s;
  }

  void validate() const {
    if (cls == AgentClass::tabular) tabular.validate();
    if (cls == AgentClass::deep) deep.validate();
  }
};

inline AgentSpec parse_agent_spec(std::string_view text) {
  AgentClass cls = AgentClass::tabular;
  std::string_view name = text;
  if (const auto colon = text.find(':'); colon != std::string_view::npos) {
    const auto prefix = text.substr(0, colon);
    name = text.substr(colon + 1);
    if (prefix == "tabular") {
      cls = AgentClass::tabular;
    } else if (prefix == "deep") {
      cls = AgentClass::deep;
    } else {
      throw ConfigError("unknown agent class '" + std::string(prefix) + "'");
    }
  }
  if (name == "random") return AgentSpec::make(AgentClass::random, "random");
  return AgentSpec::make(cls, std::string(name));
}

struct AblationConfig {
  std::vector<int> layers{1, 2, 3, 4};
  std::vector<double> lrs{0.001, 0.01, 0.1, 0.5};
  int games = 100;
  std::vector<std::string> pairs{"expected-sarsa:q-learning"};
};

struct ExperimentConfig {
  AgentSpec agent_a = AgentSpec::make(AgentClass::tabular, "expected-sarsa");
  AgentSpec agent_b = AgentSpec::make(AgentClass::tabular, "expected-sarsa");
  int games = 1000;
  std::uint64_t seed = 42;
  RewardWeights weights;
  std::string out_dir = "out";
  AblationConfig ablation;

  void validate() const {
    if (games < 1) throw ConfigError("games must be >= 1");
    agent_a.validate();
    agent_b.validate();
    weights.validate();
  }
};

// ---- JSON -----------------------------------------------------------------

namespace detail {

template <class T>
void read_if(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

inline void reject_unknown(const json& j, std::initializer_list<std::string_view> known,
                           std::string_view where) {
  for (const auto& [k, _] : j.items()) {
    bool ok = false;
    for (auto name : known) ok = ok || name == k;
    if (!ok) throw ConfigError("unknown key '" + k + "' in " + std::string(where));
  }
}

inline json schedule_to_json(const EpsilonSchedule& s) {
  if (s.kind == EpsilonSchedule::Kind::constant) {
    return {{"schedule", "constant"}, {"epsilon0", s.epsilon0}};
  }
  return {{"schedule", "harmonic"}, {"epsilon0", s.epsilon0}, {"tau", s.tau}};
}

inline EpsilonSchedule schedule_from_json(const json& j, EpsilonSchedule s) {
  if (j.is_number()) return EpsilonSchedule::constant(j.get<double>());
  reject_unknown(j, {"schedule", "epsilon0", "tau"}, "epsilon");
  if (auto it = j.find("schedule"); it != j.end()) {
    const auto kind = it->get<std::string>();
    if (kind == "constant") {
      s.kind = EpsilonSchedule::Kind::constant;
    } else if (kind == "harmonic") {
      s.kind = EpsilonSchedule::Kind::harmonic_decay;
    } else {
      throw ConfigError("unknown epsilon schedule '" + kind + "'");
    }
  }
  read_if(j, "epsilon0", s.epsilon0);
  read_if(j, "tau", s.tau);
  return s;
}

inline std::string_view form_name(ExpectedForm f) {
  return f == ExpectedForm::uniform_mean ? "uniform_mean" : "policy_weighted";
}

inline ExpectedForm form_from_name(const std::string& s) {
  if (s == "uniform_mean") return ExpectedForm::uniform_mean;
  if (s == "policy_weighted") return ExpectedForm::policy_weighted;
  throw ConfigError("unknown expected_form '" + s + "'");
}

}  // namespace detail

inline json to_json(const RewardWeights& w) {
  json j = json::object();
  for (int i = 0; i < kNumReasons; ++i) j[std::string(kReasonNames[i])] = w.w[i];
  return j;
}

/// Accepts either the bare 12-entry object or one wrapped as {"weights": {...}}.
/// Missing entries keep their value in `base`.
inline RewardWeights weights_from_json(const json& j, RewardWeights base = {}) {
  const json& body = j.contains("weights") ? j.at("weights") : j;
  if (!body.is_object()) throw ConfigError("weights must be an object");
  for (const auto& [k, v] : body.items()) {
    int idx = -1;
    for (int i = 0; i < kNumReasons; ++i) {
      if (kReasonNames[i] == k) idx = i;
    }
    if (idx < 0) throw ConfigError("unknown reward weight '" + k + "'");
    if (!v.is_number()) throw ConfigError("reward weight '" + k + "' is not a number");
    base.w[idx] = v.get<double>();
  }
  base.validate();
  return base;
}

inline json to_json(const AgentSpec& s) {
  json j{{"class", to_string(s.cls)}, {"algorithm", s.name}};
  if (s.cls == AgentClass::tabular) {
    j["alpha"] = s.tabular.alpha;
    j["gamma"] = s.tabular.gamma;
    j["n"] = s.tabular.n;
    j["epsilon"] = detail::schedule_to_json(s.tabular.epsilon);
    j["expected_form"] = detail::form_name(s.tabular.expected_form);
  } else if (s.cls == AgentClass::deep) {
    const auto& d = s.deep;
    j["lr"] = d.lr;
    j["gamma"] = d.gamma;
    j["n"] = d.n;
    j["hidden_layers"] = d.hidden_count;
    j["hidden_width"] = d.hidden_width;
    j["head"] = d.head == OutputHead::softmax ? "softmax" : "linear";
    j["epsilon"] = detail::schedule_to_json(d.epsilon);
    j["expected_form"] = detail::form_name(d.expected_form);
    if (d.reward_bounds) j["reward_bounds"] = {d.reward_bounds->min, d.reward_bounds->max};
    j["adam"] = {{"beta1", d.beta1}, {"beta2", d.beta2}, {"epsilon", d.adam_eps},
                 {"momentum", d.momentum}};
    if (s.checkpoint) j["checkpoint"] = *s.checkpoint;
  }
  return j;
}

inline AgentSpec agent_from_json(const json& j) {
  detail::reject_unknown(j,
                         {"class", "algorithm", "alpha", "gamma", "n", "epsilon",
                          "expected_form", "lr", "hidden_layers", "hidden_width", "head",
                          "reward_bounds", "adam", "checkpoint"},
                         "agent");
  AgentClass cls = AgentClass::tabular;
  if (auto it = j.find("class"); it != j.end()) {
    const auto c = it->get<std::string>();
    if (c == "tabular") {
      cls = AgentClass::tabular;
    } else if (c == "deep") {
      cls = AgentClass::deep;
    } else if (c == "random") {
      cls = AgentClass::random;
    } else {
      throw ConfigError("unknown agent class '" + c + "'");
    }
  }
  std::string name = cls == AgentClass::random ? "random" : j.value("algorithm", "q-learning");
  if (name == "random") cls = AgentClass::random;
  AgentSpec s = AgentSpec::make(cls, name);
  if (cls == AgentClass::tabular) {
    auto& t = s.tabular;
    detail::read_if(j, "alpha", t.alpha);
    detail::read_if(j, "gamma", t.gamma);
    if (j.contains("epsilon")) t.epsilon = detail::schedule_from_json(j["epsilon"], t.epsilon);
    if (j.contains("expected_form")) {
      t.expected_form = detail::form_from_name(j["expected_form"].get<std::string>());
    }
  } else if (cls == AgentClass::deep) {
    auto& d = s.deep;
    detail::read_if(j, "lr", d.lr);
    detail::read_if(j, "gamma", d.gamma);
    detail::read_if(j, "hidden_layers", d.hidden_count);
    detail::read_if(j, "hidden_width", d.hidden_width);
    if (j.contains("epsilon")) d.epsilon = detail::schedule_from_json(j["epsilon"], d.epsilon);
    if (j.contains("expected_form")) {
      d.expected_form = detail::form_from_name(j["expected_form"].get<std::string>());
    }
    if (auto it = j.find("head"); it != j.end()) {
      const auto h = it->get<std::string>();
      if (h == "softmax") {
        d.head = OutputHead::softmax;
      } else if (h == "linear") {
        d.head = OutputHead::linear;
      } else {
        throw ConfigError("unknown head '" + h + "'");
      }
    }
    if (auto it = j.find("reward_bounds"); it != j.end()) {
      const auto b = it->get<std::vector<double>>();
      if (b.size() != 2) throw ConfigError("reward_bounds needs [min, max]");
      d.reward_bounds = RewardBounds{b[0], b[1]};
    }
    if (auto it = j.find("adam"); it != j.end()) {
      detail::reject_unknown(*it, {"beta1", "beta2", "epsilon", "momentum"}, "adam");
      detail::read_if(*it, "beta1", d.beta1);
      detail::read_if(*it, "beta2", d.beta2);
      detail::read_if(*it, "epsilon", d.adam_eps);
      detail::read_if(*it, "momentum", d.momentum);
    }
    if (auto it = j.find("checkpoint"); it != j.end()) s.checkpoint = it->get<std::string>();
  }
  if (j.contains("n") && s.cls != AgentClass::random) {
    const int n = j["n"].get<int>();
    if (n != s.tabular.n) {
      throw ConfigError("agent '" + name + "' has n=" + std::to_string(s.tabular.n) +
                        "; choose the agent name (sarsa-1/2/8) to set n");
    }
  }
  s.validate();
  return s;
}

inline json to_json(const ExperimentConfig& c) {
  json abl{{"layers", c.ablation.layers},
           {"lrs", c.ablation.lrs},
           {"games", c.ablation.games},
           {"pairs", c.ablation.pairs}};
  return {{"experiment", {{"games", c.games}, {"seed", c.seed}, {"out", c.out_dir}}},
          {"agent_a", to_json(c.agent_a)},
          {"agent_b", to_json(c.agent_b)},
          {"weights", to_json(c.weights)},
          {"ablation", abl}};
}

inline ExperimentConfig config_from_json(const json& j, ExperimentConfig c = {}) {
  detail::reject_unknown(j, {"experiment", "agent_a", "agent_b", "weights", "ablation"},
                         "config");
  if (auto it = j.find("experiment"); it != j.end()) {
    detail::reject_unknown(*it, {"games", "seed", "out"}, "experiment");
    detail::read_if(*it, "games", c.games);
    detail::read_if(*it, "seed", c.seed);
    detail::read_if(*it, "out", c.out_dir);
  }
  if (j.contains("agent_a")) c.agent_a = agent_from_json(j["agent_a"]);
  if (j.contains("agent_b")) c.agent_b = agent_from_json(j["agent_b"]);
  if (j.contains("weights")) c.weights = weights_from_json(j["weights"], c.weights);
  if (auto it = j.find("ablation"); it != j.end()) {
    detail::reject_unknown(*it, {"layers", "lrs", "games", "pairs"}, "ablation");
    detail::read_if(*it, "layers", c.ablation.layers);
    detail::read_if(*it, "lrs", c.ablation.lrs);
    detail::read_if(*it, "games", c.ablation.games);
    detail::read_if(*it, "pairs", c.ablation.pairs);
  }
  c.validate();
  return c;
}

inline json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace hanabi
