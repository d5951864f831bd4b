// hanabi_lab: train and evaluate TD agents in self-play.
//
//   hanabi_lab simulate   --agent-a <spec> --agent-b <spec> --games N --seed S --out DIR
//   hanabi_lab tournament --class tabular|deep --games N --seed S --out DIR
//   hanabi_lab ablate     --layers 1,2,3,4 --lr 0.001,0.01,0.1,0.5 --games 100 --seed S --out DIR
//   hanabi_lab compare    --a FILE --b FILE
//
// Global options: --config FILE (full JSON config), --weights FILE (reward
// weights). Command-line flags override the config file.

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hanabi_td/hanabi_td.hpp"

namespace {

using namespace hanabi;

void print_summary(const MatchSummary& s) {
  std::cout << std::left << std::setw(36) << s.matchup << std::right << std::fixed
            << std::setprecision(3) << " games " << std::setw(5) << s.games << "  score "
            << std::setw(7) << s.score_mean << " +- " << std::setw(6) << s.score_stddev
            << "  turns " << std::setw(6) << s.combined.turns << "  plays " << std::setw(6)
            << s.combined.plays << "  discards " << std::setw(6) << s.combined.discards
            << "  hints " << std::setw(6) << s.combined.hints << '\n';
  std::cout.unsetf(std::ios::fixed);
}

struct Options {
  std::string config_path;
  std::string weights_path;
  // simulate
  std::string agent_a;
  std::string agent_b;
  std::optional<int> games;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool save_checkpoints = false;
  // tournament
  std::string cls = "tabular";
  // ablate
  std::vector<int> layers;
  std::vector<double> lrs;
  std::vector<std::string> pairs;
  // compare
  std::string file_a;
  std::string file_b;
};

ExperimentConfig load_config(const Options& o) {
  ExperimentConfig cfg;
  if (!o.config_path.empty()) cfg = config_from_json(read_json_file(o.config_path));
  if (!o.weights_path.empty()) cfg.weights = weights_from_json(read_json_file(o.weights_path));
  if (o.games) cfg.games = *o.games;
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out_dir = *o.out;
  return cfg;
}

std::string command_line(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

int run_simulate(const Options& o, const std::string& cmd) {
  ExperimentConfig cfg = load_config(o);
  if (!o.agent_a.empty()) cfg.agent_a = parse_agent_spec(o.agent_a);
  if (!o.agent_b.empty()) cfg.agent_b = parse_agent_spec(o.agent_b);
  cfg.validate();

  RunManifest manifest;
  manifest.command = cmd;
  manifest.config = to_json(cfg);
  manifest.started = utc_timestamp();

  auto res = play_matchup(cfg.agent_a, cfg.agent_b, cfg.games, cfg.seed, cfg.weights,
                          matchup_id(cfg.agent_a, cfg.agent_b));
  const std::vector<MatchSummary> summaries{aggregate(res.records)};
  print_summary(summaries.front());

  json extra = json::object();
  if (o.save_checkpoints) {
    std::filesystem::create_directories(cfg.out_dir);
    json saved = json::array();
    const std::array<const Agent*, 2> seats{res.seat0.get(), res.seat1.get()};
    for (int i = 0; i < 2; ++i) {
      if (const auto* deep = dynamic_cast<const DeepAgent*>(seats[i])) {
        const auto path = (std::filesystem::path(cfg.out_dir) /
                           ("seat" + std::to_string(i) + ".hnn")).string();
        save_checkpoint(deep->network(), path);
        saved.push_back(path);
      }
    }
    extra["checkpoints"] = saved;
  }
  emit_reports(res.records, summaries, manifest, cfg.out_dir, extra);
  std::cout << "wrote " << cfg.out_dir << "/games.csv and summary.json\n";
  return 0;
}

int run_tournament_cmd(const Options& o, const std::string& cmd) {
  ExperimentConfig cfg = load_config(o);
  AgentClass cls;
  if (o.cls == "tabular") {
    cls = AgentClass::tabular;
  } else if (o.cls == "deep") {
    cls = AgentClass::deep;
  } else {
    throw ConfigError("--class must be tabular or deep");
  }
  RunManifest manifest;
  manifest.command = cmd;
  manifest.config = to_json(cfg);
  manifest.config["tournament"] = {{"class", o.cls}, {"roster", roster()}};
  manifest.started = utc_timestamp();

  auto res = run_tournament(cls, cfg.games, cfg.seed, cfg.weights, roster(), print_summary);
  emit_reports(res.records, res.summaries, manifest, cfg.out_dir);
  std::cout << "wrote " << res.summaries.size() << " matchups to " << cfg.out_dir << '\n';
  return 0;
}

int run_ablate(const Options& o, const std::string& cmd) {
  ExperimentConfig cfg = load_config(o);
  if (!o.layers.empty()) cfg.ablation.layers = o.layers;
  if (!o.lrs.empty()) cfg.ablation.lrs = o.lrs;
  if (!o.pairs.empty()) cfg.ablation.pairs = o.pairs;
  if (o.games) cfg.ablation.games = *o.games;

  RunManifest manifest;
  manifest.command = cmd;
  manifest.config = to_json(cfg);
  manifest.started = utc_timestamp();

  auto res = run_ablation(cfg.ablation, cfg.seed, cfg.weights, print_summary);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
  const auto& best = res.cells.at(res.best);
  std::cout << "best cell: " << best.pair << " layers=" << best.layers << " lr=" << best.lr
            << " mean score " << best.score_mean << '\n';
  emit_reports(res.records, res.summaries, manifest, cfg.out_dir,
               json{{"ablation", to_json(res)}});
  return 0;
}

int run_compare(const Options& o) {
  const auto a = summaries_from_json(read_json_file(o.file_a));
  const auto b = summaries_from_json(read_json_file(o.file_b));
  const ComparisonResult r = compare_runs(a, b);
  std::cout << to_json(r).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hanabi TD self-play laboratory"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--weights", o.weights_path, "JSON reward weights")->check(CLI::ExistingFile);

  auto* sim = app.add_subcommand("simulate", "play one matchup");
  sim->add_option("--agent-a", o.agent_a, "seat 0 agent, e.g. expected-sarsa or deep:q-learning");
  sim->add_option("--agent-b", o.agent_b, "seat 1 agent");
  sim->add_option("--games", o.games, "games to play");
  sim->add_option("--seed", o.seed, "master seed");
  sim->add_option("--out", o.out, "output directory");
  sim->add_flag("--save-checkpoints", o.save_checkpoints, "write deep agents' networks");

  auto* tour = app.add_subcommand("tournament", "all ordered pairs of the roster");
  tour->add_option("--class", o.cls, "tabular or deep")
      ->check(CLI::IsMember({"tabular", "deep"}));
  tour->add_option("--games", o.games, "games per matchup");
  tour->add_option("--seed", o.seed, "master seed");
  tour->add_option("--out", o.out, "output directory");

  auto* abl = app.add_subcommand("ablate", "deep hidden-layer x learning-rate grid");
  abl->add_option("--layers", o.layers, "hidden layer counts")->delimiter(',');
  abl->add_option("--lr", o.lrs, "learning rates")->delimiter(',');
  abl->add_option("--pairs", o.pairs, "agent pairs a:b")->delimiter(',');
  abl->add_option("--games", o.games, "games per cell");
  abl->add_option("--seed", o.seed, "master seed");
  abl->add_option("--out", o.out, "output directory");

  auto* cmp = app.add_subcommand("compare", "paired comparison of two runs' summaries");
  cmp->add_option("--a", o.file_a, "baseline summary.json")->required()->check(CLI::ExistingFile);
  cmp->add_option("--b", o.file_b, "candidate summary.json")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  const std::string cmd = command_line(argc, argv);
  try {
    if (*sim) return run_simulate(o, cmd);
    if (*tour) return run_tournament_cmd(o, cmd);
    if (*abl) return run_ablate(o, cmd);
    if (*cmp) return run_compare(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
