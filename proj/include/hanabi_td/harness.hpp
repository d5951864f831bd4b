#pragma once

// Match loop and experiment drivers: single matchups, all-pairs tournaments,
// the layer x learning-rate ablation grid, and paired run comparison.
//
// Seeding: game g of any matchup deals from derive_seed(seed, 0, g); the
// agents in seats 0 and 1 draw from derive_seed(seed, 1, 0) and
// derive_seed(seed, 2, 0). Every matchup under one master seed therefore
// sees the same sequence of deals.

#include <algorithm>
#include <array>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "hanabi_td/agents.hpp"
#include "hanabi_td/config.hpp"
#include "hanabi_td/reward.hpp"
#include "hanabi_td/stats.hpp"

namespace hanabi {

inline std::unique_ptr<Agent> make_agent(const AgentSpec& spec, const RewardWeights& weights,
                                         std::uint64_t seed) {
  spec.validate();
  switch (spec.cls) {
    case AgentClass::random: return std::make_unique<RandomAgent>(seed);
    case AgentClass::tabular: return std::make_unique<TabularAgent>(spec.tabular, seed);
    case AgentClass::deep: {
      std::optional<Network> initial;
      if (spec.checkpoint) initial = load_checkpoint(*spec.checkpoint);
      return std::make_unique<DeepAgent>(spec.deep, weights, seed, std::move(initial));
    }
  }
  throw ConfigError("unknown agent class");
}

inline std::string matchup_id(const AgentSpec& a, const AgentSpec& b) {
  return a.name + ":" + b.name;
}

/// Plays one game; both agents keep learning state afterwards.
inline GameRecord play_game(Agent& seat0, Agent& seat1, std::uint64_t game_seed,
                            const RewardWeights& weights, std::string matchup, int game) {
  std::array<Agent*, kNumPlayers> agents{&seat0, &seat1};
  GameRecord rec;
  rec.matchup = std::move(matchup);
  rec.game = game;
  rec.seed = game_seed;

  GameState state = new_game(game_seed);
  while (state.terminal == Terminal::ongoing) {
    const int seat = state.current_player;
    const RewardMatrix rewards = compute_reward_matrix(state, weights);
    const Move move = agents[seat]->act(state, seat);
    agents[seat]->observe_reward(reward_for(rewards, move));
    apply_move_in_place(state, move);

    auto& st = rec.seats[seat];
    ++st.turns;
    switch (move.kind()) {
      case MoveKind::play: ++st.plays; break;
      case MoveKind::discard: ++st.discards; break;
      case MoveKind::hint_color: ++st.hints_color; break;
      case MoveKind::hint_rank: ++st.hints_rank; break;
    }
  }
  for (Agent* a : agents) a->end_game();
  rec.score = score(state);
  rec.terminal = state.terminal;
  return rec;
}

struct MatchupResult {
  std::vector<GameRecord> records;
  std::unique_ptr<Agent> seat0;
  std::unique_ptr<Agent> seat1;
};

inline MatchupResult play_matchup(const AgentSpec& a, const AgentSpec& b, int games,
                                  std::uint64_t seed, const RewardWeights& weights,
                                  const std::string& id) {
  if (games < 1) throw ConfigError("games must be >= 1");
  MatchupResult out;
  out.seat0 = make_agent(a, weights, derive_seed(seed, seed_stream::kSeat0, 0));
  out.seat1 = make_agent(b, weights, derive_seed(seed, seed_stream::kSeat1, 0));
  out.records.reserve(static_cast<std::size_t>(games));
  for (int g = 0; g < games; ++g) {
    out.records.push_back(play_game(*out.seat0, *out.seat1,
                                    derive_seed(seed, seed_stream::kGames,
                                                static_cast<std::uint64_t>(g)),
                                    weights, id, g));
  }
  return out;
}

inline std::vector<GameRecord> run_matchup(const ExperimentConfig& cfg) {
  cfg.validate();
  return play_matchup(cfg.agent_a, cfg.agent_b, cfg.games, cfg.seed, cfg.weights,
                      matchup_id(cfg.agent_a, cfg.agent_b))
      .records;
}

using ProgressFn = std::function<void(const MatchSummary&)>;

struct TournamentResult {
  std::vector<GameRecord> records;
  std::vector<MatchSummary> summaries;
};

/// Every ordered pair from the roster (seat order matters), same deals for
/// every pair, default hyperparameters.
inline TournamentResult run_tournament(AgentClass cls, int games, std::uint64_t seed,
                                       const RewardWeights& weights,
                                       const std::vector<std::string>& names = roster(),
                                       const ProgressFn& progress = {}) {
  if (cls == AgentClass::random) throw ConfigError("tournaments are tabular or deep");
  TournamentResult out;
  for (const auto& first : names) {
    for (const auto& second : names) {
      const AgentSpec a = AgentSpec::make(cls, first);
      const AgentSpec b = AgentSpec::make(cls, second);
      auto res = play_matchup(a, b, games, seed, weights, matchup_id(a, b));
      out.summaries.push_back(aggregate(res.records));
      if (progress) progress(out.summaries.back());
      out.records.insert(out.records.end(), std::make_move_iterator(res.records.begin()),
                         std::make_move_iterator(res.records.end()));
    }
  }
  return out;
}

struct AblationCell {
  std::string pair;
  int layers = 0;
  double lr = 0.0;
  int games = 0;
  double score_mean = 0.0;
  double score_stddev = 0.0;
};

struct AblationResult {
  std::vector<AblationCell> cells;
  std::size_t best = 0;  // index of the highest mean; earliest cell wins ties
  std::vector<GameRecord> records;
  std::vector<MatchSummary> summaries;
  std::vector<std::string> warnings;
};

inline std::string ablation_cell_id(const std::string& pair, int layers, double lr) {
  std::ostringstream os;
  os << pair << "@L" << layers << "-lr" << lr;
  return os.str();
}

/// Deep agents only. Pairs are "a:b" roster names.
inline AblationResult run_ablation(const AblationConfig& grid, std::uint64_t seed,
                                   const RewardWeights& weights,
                                   const ProgressFn& progress = {}) {
  if (grid.layers.empty() || grid.lrs.empty() || grid.pairs.empty()) {
    throw ConfigError("ablation grid is empty");
  }
  if (grid.games < 1) throw ConfigError("ablation needs games >= 1 per cell");
  AblationResult out;
  for (double lr : grid.lrs) {
    if (!(lr >= 0.001 && lr <= 0.5)) {
      std::ostringstream os;
      os << "learning rate " << lr << " lies outside the studied range [0.001, 0.5]";
      out.warnings.push_back(os.str());
    }
  }
  for (const auto& pair : grid.pairs) {
    const auto colon = pair.find(':');
    if (colon == std::string::npos) throw ConfigError("ablation pair must be 'a:b': " + pair);
    for (int layers : grid.layers) {
      for (double lr : grid.lrs) {
        AgentSpec a = AgentSpec::make(AgentClass::deep, pair.substr(0, colon));
        AgentSpec b = AgentSpec::make(AgentClass::deep, pair.substr(colon + 1));
        for (AgentSpec* s : {&a, &b}) {
          s->deep.hidden_count = layers;
          s->deep.lr = lr;
        }
        const std::string id = ablation_cell_id(pair, layers, lr);
        auto res = play_matchup(a, b, grid.games, seed, weights, id);
        const MatchSummary sum = aggregate(res.records);
        out.cells.push_back({pair, layers, lr, grid.games, sum.score_mean, sum.score_stddev});
        out.summaries.push_back(sum);
        if (progress) progress(sum);
        out.records.insert(out.records.end(), std::make_move_iterator(res.records.begin()),
                           std::make_move_iterator(res.records.end()));
      }
    }
  }
  for (std::size_t i = 1; i < out.cells.size(); ++i) {
    if (out.cells[i].score_mean > out.cells[out.best].score_mean) out.best = i;
  }
  return out;
}

inline json to_json(const AblationResult& r) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"pair", c.pair},
                     {"layers", c.layers},
                     {"lr", c.lr},
                     {"games", c.games},
                     {"score_mean", c.score_mean},
                     {"score_stddev", c.score_stddev}});
  }
  return {{"cells", cells}, {"best", r.best}, {"best_cell", cells.at(r.best)},
          {"warnings", r.warnings}};
}

struct ComparisonResult {
  std::vector<std::string> matchups;
  std::vector<double> mean_a;
  std::vector<double> mean_b;
  int improvements = 0;  // matchups where B's mean is strictly higher
  double improvement_fraction = 0.0;
  WilcoxonResult test;
};

/// Pairs mean scores by matchup id; both runs must cover the same matchups.
inline ComparisonResult compare_runs(std::span<const MatchSummary> a,
                                     std::span<const MatchSummary> b) {
  if (a.empty()) throw std::invalid_argument("compare: no matchups");
  if (a.size() != b.size()) throw std::invalid_argument("compare: runs cover different matchups");
  ComparisonResult out;
  for (const auto& sa : a) {
    const auto it = std::find_if(b.begin(), b.end(),
                                 [&](const MatchSummary& s) { return s.matchup == sa.matchup; });
    if (it == b.end()) {
      throw std::invalid_argument("compare: matchup '" + sa.matchup + "' missing from B");
    }
    out.matchups.push_back(sa.matchup);
    out.mean_a.push_back(sa.score_mean);
    out.mean_b.push_back(it->score_mean);
    if (it->score_mean > sa.score_mean) ++out.improvements;
  }
  out.improvement_fraction =
      static_cast<double>(out.improvements) / static_cast<double>(out.matchups.size());
  out.test = wilcoxon_signed_rank(out.mean_b, out.mean_a);
  return out;
}

inline json to_json(const ComparisonResult& r) {
  return {{"pairs", r.matchups.size()},
          {"improvements", r.improvements},
          {"improvement_fraction", r.improvement_fraction},
          {"wilcoxon",
           {{"n_effective", r.test.n_effective},
            {"w_statistic", r.test.w_statistic},
            {"w_plus", r.test.w_plus},
            {"w_minus", r.test.w_minus},
            {"p_value", r.test.p_value},
            {"method", to_string(r.test.method)}}},
          {"matchups", r.matchups},
          {"mean_a", r.mean_a},
          {"mean_b", r.mean_b}};
}

}  // namespace hanabi
