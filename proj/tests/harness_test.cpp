#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hanabi_td/harness.hpp"
#include "hanabi_td/report.hpp"

namespace hanabi {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hanabi_td_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

ExperimentConfig small_config(int games, std::uint64_t seed) {
  ExperimentConfig c;
  c.agent_a = parse_agent_spec("expected-sarsa");
  c.agent_b = parse_agent_spec("sarsa-2");
  c.games = games;
  c.seed = seed;
  return c;
}

void check_record(const GameRecord& r) {
  EXPECT_GE(r.score, 0);
  EXPECT_LE(r.score, 25);
  EXPECT_NE(r.terminal, Terminal::ongoing);
  for (const auto& s : r.seats) {
    EXPECT_EQ(s.plays + s.discards + s.hints_color + s.hints_rank, s.turns);
  }
  // Seat 0 moves first, so it is never behind.
  EXPECT_GE(r.seats[0].turns, r.seats[1].turns);
  EXPECT_LE(r.seats[0].turns - r.seats[1].turns, 1);
}

TEST(RunMatchup, SingleGame) {
  const auto records = run_matchup(small_config(1, 7));
  ASSERT_EQ(records.size(), 1u);
  check_record(records[0]);
  EXPECT_EQ(records[0].matchup, "expected-sarsa:sarsa-2");
  EXPECT_EQ(records[0].seed, derive_seed(7, seed_stream::kGames, 0));
}

TEST(RunMatchup, Deterministic) {
  const auto a = run_matchup(small_config(50, 3));
  const auto b = run_matchup(small_config(50, 3));
  EXPECT_EQ(a, b);
  const auto c = run_matchup(small_config(50, 4));
  EXPECT_NE(a, c);
}

TEST(RunMatchup, ScoreMatchesReplayedGame) {
  // Random agents are stateless across games, so each game can be replayed alone.
  ExperimentConfig c = small_config(20, 5);
  c.agent_a = parse_agent_spec("random");
  c.agent_b = parse_agent_spec("random");
  const auto records = run_matchup(c);
  RandomAgent a(derive_seed(5, seed_stream::kSeat0, 0));
  RandomAgent b(derive_seed(5, seed_stream::kSeat1, 0));
  for (const auto& r : records) {
    check_record(r);
    GameState s = new_game(r.seed);
    std::array<Agent*, 2> seats{&a, &b};
    while (s.terminal == Terminal::ongoing) {
      apply_move_in_place(s, seats[s.current_player]->act(s, s.current_player));
    }
    EXPECT_EQ(score(s), r.score);
    EXPECT_EQ(s.terminal, r.terminal);
  }
}

TEST(RunMatchup, RejectsInvalidSpecBeforePlaying) {
  ExperimentConfig c = small_config(10, 1);
  c.agent_a.tabular.alpha = 0.0;
  EXPECT_THROW(run_matchup(c), std::invalid_argument);
  c = small_config(0, 1);
  EXPECT_THROW(run_matchup(c), ConfigError);
}

// Learned play against the uniform-random policy dealt the same games.
TEST(RunMatchup, LearnersBeatRandomBaseline) {
  const auto learned = run_matchup(small_config(1000, 42));
  ExperimentConfig rc = small_config(1000, 42);
  rc.agent_a = parse_agent_spec("random");
  rc.agent_b = parse_agent_spec("random");
  const auto baseline = run_matchup(rc);
  EXPECT_GT(aggregate(learned).score_mean, aggregate(baseline).score_mean);
}

TEST(Tournament, AllOrderedPairs) {
  const auto res = run_tournament(AgentClass::tabular, 2, 1, RewardWeights{});
  ASSERT_EQ(res.summaries.size(), 36u);
  EXPECT_EQ(res.records.size(), 72u);
  std::set<std::string> ids;
  for (const auto& s : res.summaries) {
    ids.insert(s.matchup);
    EXPECT_GE(s.score_mean, 0.0);
    EXPECT_LE(s.score_mean, 25.0);
  }
  EXPECT_EQ(ids.size(), 36u);
  EXPECT_TRUE(ids.count("expected-sarsa:sarsa-2"));
  EXPECT_TRUE(ids.count("sarsa-2:expected-sarsa"));
  EXPECT_TRUE(ids.count("q-learning:q-learning"));
  EXPECT_THROW(run_tournament(AgentClass::random, 1, 1, RewardWeights{}), ConfigError);
}

TEST(Ablation, SmokeGrid) {
  AblationConfig grid;
  grid.games = 1;
  const auto res = run_ablation(grid, 3, RewardWeights{});
  ASSERT_EQ(res.cells.size(), 16u);
  EXPECT_TRUE(res.warnings.empty());
  for (const auto& c : res.cells) EXPECT_LE(c.score_mean, res.cells[res.best].score_mean);
  for (std::size_t i = 0; i < res.best; ++i) {
    EXPECT_LT(res.cells[i].score_mean, res.cells[res.best].score_mean);
  }
  EXPECT_EQ(res.summaries[0].matchup, "expected-sarsa:q-learning@L1-lr0.001");
  const json j = to_json(res);
  EXPECT_EQ(j["cells"].size(), 16u);
  EXPECT_EQ(j["best_cell"], j["cells"][res.best]);
}

TEST(Ablation, WarnsOutsideStudiedRange) {
  AblationConfig grid;
  grid.layers = {1};
  grid.lrs = {0.7};
  grid.games = 1;
  const auto res = run_ablation(grid, 3, RewardWeights{});
  ASSERT_EQ(res.warnings.size(), 1u);
  EXPECT_EQ(res.cells.size(), 1u);
  grid.pairs = {"no-colon"};
  EXPECT_THROW(run_ablation(grid, 3, RewardWeights{}), ConfigError);
}

MatchSummary summary(const std::string& id, double mean) {
  MatchSummary s;
  s.matchup = id;
  s.games = 10;
  s.score_mean = mean;
  return s;
}

TEST(CompareRuns, IdenticalRuns) {
  std::vector<MatchSummary> a;
  for (int i = 0; i < 6; ++i) a.push_back(summary("m" + std::to_string(i), i * 0.5));
  const auto r = compare_runs(a, a);
  EXPECT_EQ(r.improvements, 0);
  EXPECT_EQ(r.test.p_value, 1.0);
}

TEST(CompareRuns, DominatedPairs) {
  std::vector<MatchSummary> a, b;
  for (int i = 0; i < 6; ++i) {
    a.push_back(summary("m" + std::to_string(i), i * 0.5));
    b.push_back(summary("m" + std::to_string(5 - i), (5 - i) * 0.5 + 1.0 + i));
  }
  const auto r = compare_runs(a, b);
  EXPECT_EQ(r.improvements, 6);
  EXPECT_EQ(r.improvement_fraction, 1.0);
  EXPECT_EQ(r.test.p_value, 0.03125);
  const std::vector<double> da{r.mean_b}, db{r.mean_a};
  EXPECT_EQ(r.test.p_value, wilcoxon_signed_rank(da, db).p_value);
}

TEST(CompareRuns, RejectsMismatchedKeys) {
  std::vector<MatchSummary> a, b;
  for (int i = 0; i < 6; ++i) {
    a.push_back(summary("m" + std::to_string(i), 1.0));
    b.push_back(summary("n" + std::to_string(i), 1.0));
  }
  EXPECT_THROW(compare_runs(a, b), std::invalid_argument);
  b.pop_back();
  EXPECT_THROW(compare_runs(a, b), std::invalid_argument);
  EXPECT_THROW(compare_runs(std::vector<MatchSummary>{}, std::vector<MatchSummary>{}),
               std::invalid_argument);
}

TEST(Reports, CsvHasOneRowPerGame) {
  const auto records = run_matchup(small_config(25, 2));
  std::ostringstream os;
  write_games_csv(records, os);
  const std::string csv = os.str();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 26);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kCsvHeader);
}

TEST(Reports, SummaryJsonRoundTrips) {
  const auto dir = scratch_dir("roundtrip");
  const auto records = run_matchup(small_config(20, 2));
  const std::vector<MatchSummary> sums{aggregate(records)};
  RunManifest m;
  m.command = "test";
  m.config = to_json(small_config(20, 2));
  m.started = utc_timestamp();
  emit_reports(records, sums, m, dir);
  const json doc = read_json_file((dir / "summary.json").string());
  EXPECT_EQ(summaries_from_json(doc), sums);
  EXPECT_EQ(manifest_from_json(doc.at("manifest")), m);
  EXPECT_EQ(m.prng, kPrngName);
  EXPECT_EQ(config_from_json(m.config).agent_b.name, "sarsa-2");
}

TEST(Reports, GoldenTwoGameCsv) {
  const auto records = run_matchup(small_config(2, 20240601));
  std::ostringstream os;
  write_games_csv(records, os);
  const fs::path golden = fs::path(HANABI_GOLDEN_DIR) / "simulate_two_games.csv";
  if (std::getenv("HANABI_UPDATE_GOLDEN")) {
    std::ofstream(golden, std::ios::binary) << os.str();
  }
  ASSERT_TRUE(fs::exists(golden)) << golden;
  EXPECT_EQ(os.str(), slurp(golden));
}

TEST(Reports, UnwritablePathNamesThePath) {
  const auto dir = scratch_dir("unwritable");
  const fs::path blocker = dir / "file";
  std::ofstream(blocker) << "x";
  const auto records = run_matchup(small_config(1, 1));
  RunManifest m;
  try {
    emit_reports(records, std::vector<MatchSummary>{aggregate(records)}, m, blocker / "out");
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find((blocker / "out").string()), std::string::npos);
  }
}

TEST(Config, AgentSpecStrings) {
  EXPECT_EQ(parse_agent_spec("sarsa-8").tabular.n, 8);
  EXPECT_EQ(parse_agent_spec("sarsa-8").tabular.algorithm, Algorithm::n_step_sarsa);
  EXPECT_EQ(parse_agent_spec("deep:q-learning").cls, AgentClass::deep);
  EXPECT_EQ(parse_agent_spec("tabular:sarsa").cls, AgentClass::tabular);
  EXPECT_EQ(parse_agent_spec("random").cls, AgentClass::random);
  EXPECT_THROW(parse_agent_spec("sarsa-3"), ConfigError);
  EXPECT_THROW(parse_agent_spec("fancy:sarsa"), ConfigError);
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c = small_config(12, 99);
  c.agent_b = parse_agent_spec("deep:expected-sarsa");
  c.agent_b.deep.lr = 0.1;
  c.agent_b.deep.reward_bounds = RewardBounds{-2, 3};
  c.weights.w[4] = -2.5;
  c.ablation.layers = {2, 3};
  const ExperimentConfig back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(back.weights, c.weights);
  EXPECT_EQ(back.agent_b.deep.reward_bounds, c.agent_b.deep.reward_bounds);
}

TEST(Config, ParseErrors) {
  EXPECT_THROW(config_from_json(json{{"bogus", 1}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"experiment", {{"games", 0}}}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"weights", {{"not_a_reason", 1.0}}}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"weights", {{"discard_dead", "high"}}}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"agent_a", {{"class", "quantum"}}}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"agent_a", {{"algorithm", "sarsa-2"}, {"n", 8}}}}),
               ConfigError);
  EXPECT_THROW(
      config_from_json(json{{"agent_a", {{"class", "deep"}, {"hidden_layers", 7}}}}),
      std::invalid_argument);
  EXPECT_THROW(read_json_file("/nonexistent/config.json"), ConfigError);
}

TEST(Config, WeightsFileForms) {
  const RewardWeights bare = weights_from_json(json{{"discard_dead", 4.0}});
  EXPECT_EQ(bare[Reason::discard_dead], 4.0);
  EXPECT_EQ(bare[Reason::play_singled_playable], 5.0);
  const RewardWeights wrapped = weights_from_json(json{{"weights", {{"discard_dead", 4.0}}}});
  EXPECT_EQ(bare, wrapped);
}

}  // namespace
}  // namespace hanabi
