// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "../test_util.hpp"
#include "CLI11.hpp"
#include "hanabi_td/hanabi_td.hpp"

namespace hanabi {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Check {
  bool ok = true;
  std::ostringstream detail;
  void expect(bool cond, const std::string& what) {
    if (!cond && ok) detail << what << "; ";
    ok = ok && cond;
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---- engine ----

Check engine_invariants() {
  Check c;
  const auto t0 = Clock::now();
  const auto full = testing::full_census();
  Rng rng(derive_seed(42, 0, 0));
  for (int game = 0; game < 10000 && c.ok; ++game) {
    GameState s = new_game(rng.next());
    std::array<int, 2> turns{};
    std::array<int, 2> played{}, discarded{}, hinted{};
    int last_score = 0;
    std::array<std::uint8_t, 5> last_stacks = s.stacks;
    while (s.terminal == Terminal::ongoing && c.ok) {
      const MoveSet legal = legal_moves(s);
      const int p = s.current_player;
      const Move m = legal.nth(static_cast<int>(rng.below(legal.size())));
      apply_move_in_place(s, m);
      ++turns[p];
      if (m.is_hint()) {
        ++hinted[p];
      } else if (m.kind() == MoveKind::play) {
        ++played[p];
      } else {
        ++discarded[p];
      }
      c.expect(testing::card_census(s) == full, "card conservation");
      c.expect(s.hint_tokens >= 0 && s.hint_tokens <= 13, "hint token bounds");
      c.expect(s.lives >= 0 && s.lives <= 3, "life bounds");
      for (int k = 0; k < 5; ++k) c.expect(s.stacks[k] >= last_stacks[k], "stack monotonicity");
      c.expect(score(s) >= last_score, "score monotonicity");
      last_stacks = s.stacks;
      last_score = score(s);
    }
    for (int p = 0; p < 2; ++p) {
      c.expect(played[p] + discarded[p] + hinted[p] == turns[p], "seat accounting");
    }
    c.expect(turns[0] - turns[1] == 0 || turns[0] - turns[1] == 1, "seat alternation");
  }
  // Harness records must satisfy the same per-seat identity.
  RandomAgent a(1), b(2);
  for (int game = 0; game < 1000; ++game) {
    const GameRecord r = play_game(a, b, derive_seed(42, 0, game), RewardWeights{}, "r:r", game);
    for (const auto& st : r.seats) {
      c.expect(st.plays + st.discards + st.hints_color + st.hints_rank == st.turns,
               "record accounting");
    }
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 60.0, "runtime over 60 s");
  c.detail << "10000 games in " << secs << " s";
  return c;
}

// ---- tabular updates ----

TableKey key_of(int tag) {
  TableKey k;
  k.stacks[0] = static_cast<std::uint8_t>(tag % 6);
  k.stacks[1] = static_cast<std::uint8_t>(tag / 6 % 6);
  k.lives = static_cast<std::uint8_t>(tag / 36 % 4);
  return k;
}

MoveSet moves(std::initializer_list<int> ids) {
  MoveSet s;
  for (int i : ids) s.insert(Move::from_index(i));
  return s;
}

Check td_suite() {
  Check c;
  const TableKey s = key_of(1), next = key_of(2);
  const Move a0 = Move::from_index(0);
  auto near = [&](double got, double want, const std::string& what) {
    c.expect(std::abs(got - want) <= 1e-12, what);
  };
  MoveSet all;
  for (int i = 0; i < kNumMoves; ++i) all.insert(Move::from_index(i));
  {
    QTable t;
    update_q_learning(t, s, a0, 1.0, NextState{next, all}, 0.1, 0.9);
    near(t.value(s, a0), 0.1, "q-learning from zero");
  }
  {
    QTable t;
    t.set(s, a0, 2.0);
    t.set(next, Move::from_index(3), 2.0);
    t.set(next, Move::from_index(4), -7.0);
    update_q_learning(t, s, a0, 1.0, NextState{next, moves({3, 4})}, 0.5, 0.9);
    near(t.value(s, a0), 2.4, "q-learning worked step");
  }
  {
    QTable t;
    update_sarsa(t, s, a0, 1.0, NextAction{next, Move::from_index(1)}, 0.1, 0.9);
    near(t.value(s, a0), 0.1, "sarsa from zero");
  }
  {
    QTable t;
    t.set(next, Move::from_index(6), 2.0);
    t.set(next, Move::from_index(7), 9.0);
    update_sarsa(t, s, a0, 0.0, NextAction{next, Move::from_index(6)}, 1.0, 0.5);
    near(t.value(s, a0), 1.0, "sarsa next action");
  }
  {
    QTable t;
    t.set(next, Move::from_index(2), 1.0);
    t.set(next, Move::from_index(9), 3.0);
    update_expected_sarsa(t, s, a0, 0.0, NextState{next, moves({2, 9})}, 1.0, 1.0,
                          ExpectedForm::uniform_mean);
    near(t.value(s, a0), 2.0, "expected sarsa mean");
  }
  {
    QTable t;
    TransitionBuffer buf(2);
    t.set(next, Move::from_index(5), 4.0);
    buf.push({s, a0, 1.0});
    buf.push({key_of(3), Move::from_index(1), 1.0});
    update_nstep_sarsa(t, buf, NextAction{next, Move::from_index(5)}, 1.0, 0.5);
    near(t.value(s, a0), 2.5, "two-step return");
  }

  // Exact equivalences on random trajectories.
  Rng rng(4242);
  QTable na, sa;
  for (int episode = 0; episode < 100; ++episode) {
    TransitionBuffer buf(1);
    const int len = 1 + static_cast<int>(rng.below(40));
    std::vector<Transition> traj;
    for (int i = 0; i < len; ++i) {
      traj.push_back({key_of(static_cast<int>(rng.below(12))),
                      Move::from_index(static_cast<int>(rng.below(20))),
                      std::floor(rng.uniform01() * 10) - 3});
    }
    for (int i = 0; i < len; ++i) {
      buf.push(traj[i]);
      std::optional<NextAction> nx;
      if (i + 1 < len) nx = NextAction{traj[i + 1].key, traj[i + 1].action};
      update_nstep_sarsa(na, buf, nx, 0.1, 0.9);
      update_sarsa(sa, traj[i].key, traj[i].action, traj[i].reward, nx, 0.1, 0.9);
    }
    c.expect(na == sa, "n=1 n-step differs from sarsa");
  }
  QTable ea, qa;
  for (int episode = 0; episode < 100; ++episode) {
    const int len = 1 + static_cast<int>(rng.below(40));
    for (int i = 0; i < len; ++i) {
      const TableKey k = key_of(static_cast<int>(rng.below(12)));
      const TableKey k2 = key_of(static_cast<int>(rng.below(12)));
      const Move m = Move::from_index(static_cast<int>(rng.below(20)));
      MoveSet legal;
      for (int j = 0; j < kNumMoves; ++j) {
        if (rng.below(2)) legal.insert(Move::from_index(j));
      }
      if (legal.empty()) legal.insert(Move::from_index(0));
      const double r = std::floor(rng.uniform01() * 10) - 3;
      std::optional<NextState> nx;
      if (i + 1 < len) nx = NextState{k2, legal};
      update_expected_sarsa(ea, k, m, r, nx, 0.1, 0.9, ExpectedForm::policy_weighted, 0.0);
      update_q_learning(qa, k, m, r, nx, 0.1, 0.9);
    }
    c.expect(ea == qa, "greedy expected sarsa differs from q-learning");
  }
  c.detail << "worked examples and 2 x 100 episode equivalences";
  return c;
}

// ---- neural ----

double loss_at(const Network& net, std::span<const double> x, std::span<const double> t) {
  return mse_loss(forward(net, x).output, t);
}

std::vector<bool> relu_pattern(const Network& net, std::span<const double> x) {
  const auto r = forward(net, x);
  std::vector<bool> p;
  for (std::size_t l = 0; l + 1 < r.cache.preactivations.size(); ++l) {
    for (double z : r.cache.preactivations[l]) p.push_back(z > 0.0);
  }
  return p;
}

Check neural_suite() {
  Check c;
  Rng rng(31415);
  auto vec = [&](std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform01();
    return v;
  };
  double worst = 0.0;
  int checked = 0;
  for (int hidden = 1; hidden <= 4; ++hidden) {
    int cases = 0;
    while (cases < 20) {
      Network net = init_network(hidden, 12, rng.next());
      for (auto& l : net.mutable_layers()) {
        for (double& b : l.bias) b = 0.2 * (rng.uniform01() - 0.5);
      }
      const auto x = vec(148);
      const auto target = vec(20);
      const LayerStack g = backward(net, forward(net, x).cache, target);
      const auto pattern = relu_pattern(net, x);
      int here = 0;
      for (std::size_t l = 0; l < net.layers().size(); ++l) {
        const std::size_t nw = net.layers()[l].weights.size();
        for (int k = 0; k < 20; ++k) {
          const std::size_t p = rng.below(nw);
          Network plus = net, minus = net;
          plus.mutable_layers()[l].weights[p] += 1e-5;
          minus.mutable_layers()[l].weights[p] -= 1e-5;
          if (relu_pattern(plus, x) != pattern || relu_pattern(minus, x) != pattern) continue;
          const double numeric = (loss_at(plus, x, target) - loss_at(minus, x, target)) / 2e-5;
          const double analytic = g[l].weights[p];
          worst = std::max(worst, std::abs(analytic - numeric) /
                                      std::max({std::abs(analytic), std::abs(numeric), 1e-6}));
          ++here;
        }
      }
      if (here == 0) continue;
      checked += here;
      ++cases;
    }
  }
  c.expect(worst < 1e-4, "gradient relative error");

  double sum_err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Network net = init_network(1 + static_cast<int>(rng.below(4)), 16, rng.next());
    const auto out = forward(net, vec(148)).output;
    sum_err = std::max(sum_err, std::abs(std::accumulate(out.begin(), out.end(), 0.0) - 1.0));
  }
  c.expect(sum_err <= 1e-9, "softmax normalization");

  {
    Network net(LayerStack{DenseLayer(1, 1)}, OutputHead::linear);
    net.mutable_layers()[0].weights[0] = 0.5;
    AdamState st(net);
    const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-7, g1 = 0.3, g2 = -0.7;
    LayerStack grads = zeros_like(net.layers());
    grads[0].weights[0] = g1;
    adam_step(net, grads, st, lr);
    double m = (1 - b1) * g1, v = (1 - b2) * g1 * g1;
    double theta = 0.5 - lr * (m / (1 - b1)) / (std::sqrt(v / (1 - b2)) + eps);
    c.expect(std::abs(net.layers()[0].weights[0] - theta) <= 1e-12, "adam step 1");
    grads[0].weights[0] = g2;
    adam_step(net, grads, st, lr);
    m = b1 * m + (1 - b1) * g2;
    v = b2 * v + (1 - b2) * g2 * g2;
    theta -= lr * (m / (1 - b1 * b1)) / (std::sqrt(v / (1 - b2 * b2)) + eps);
    c.expect(std::abs(net.layers()[0].weights[0] - theta) <= 1e-12, "adam step 2");
  }

  for (int hidden = 1; hidden <= 4; ++hidden) {
    Network net = init_network(hidden, 64, 7 + hidden);
    net.mutable_layers()[0].bias[0] = -0.0;
    net.mutable_layers()[0].bias[1] = 1e-310;
    std::stringstream ss;
    save_checkpoint(net, ss);
    const std::string first = ss.str();
    const Network back = load_checkpoint(ss);
    std::stringstream again;
    save_checkpoint(back, again);
    c.expect(again.str() == first, "checkpoint bytes differ after round trip");
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
      const auto& x = net.layers()[l].weights;
      const auto& y = back.layers()[l].weights;
      for (std::size_t i = 0; i < x.size(); ++i) {
        c.expect(std::bit_cast<std::uint64_t>(x[i]) == std::bit_cast<std::uint64_t>(y[i]),
                 "checkpoint weight bits");
      }
    }
  }
  c.detail << checked << " gradient entries, worst rel err " << worst << ", softmax sum err "
           << sum_err;
  return c;
}

// ---- learning signal ----

double mean_score(std::span<const GameRecord> rs) {
  double s = 0.0;
  for (const auto& r : rs) s += r.score;
  return s / static_cast<double>(rs.size());
}

Check learning_signal(const std::string& spec, double budget_s) {
  Check c;
  constexpr int kGames = 1000;
  constexpr std::uint64_t kSeed = 42;
  const auto t0 = Clock::now();
  ExperimentConfig cfg;
  cfg.agent_a = parse_agent_spec(spec);
  cfg.agent_b = cfg.agent_a;
  cfg.games = kGames;
  cfg.seed = kSeed;
  const auto learned = run_matchup(cfg);
  const double secs = seconds_since(t0);
  cfg.agent_a = cfg.agent_b = parse_agent_spec("random");
  const auto baseline = run_matchup(cfg);

  const std::span<const GameRecord> all(learned);
  const double first = mean_score(all.first(100));
  const double last = mean_score(all.last(100));
  const double random_mean = mean_score(baseline);
  // Reported only: random play on the same final 100 deals.
  const double random_last = mean_score(std::span<const GameRecord>(baseline).last(100));
  c.expect(last > random_mean, "final 100 not above random baseline");
  c.expect(last > first, "final 100 not above first 100");
  c.expect(secs < budget_s, "runtime over budget");
  c.detail << "first100 " << first << ", last100 " << last << ", random " << random_mean
           << " (same final deals " << random_last << "), " << secs << " s";
  return c;
}

// ---- CLI-driven criteria ----

int run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = "\"" + cli + "\" " + args + " > /dev/null";
  return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

Check ablation_grid(const std::string& cli, const fs::path& work) {
  Check c;
  const fs::path out = work / "ablation";
  fs::remove_all(out);
  const auto t0 = Clock::now();
  const int rc = run_cli(cli, "ablate --games 10 --seed 42 --out \"" + out.string() + "\"");
  const double secs = seconds_since(t0);
  c.expect(rc == 0, "ablate exited nonzero");
  c.expect(secs < 1800.0, "runtime over 30 min");
  if (!c.ok) return c;
  const json doc = read_json_file((out / "summary.json").string());
  const json& abl = doc.at("ablation");
  const json& cells = abl.at("cells");
  c.expect(cells.size() == 16, "expected 16 cells");
  std::set<std::pair<int, double>> grid;
  double best = -1.0;
  for (const auto& cell : cells) {
    grid.insert({cell.at("layers").get<int>(), cell.at("lr").get<double>()});
    const double m = cell.at("score_mean").get<double>();
    c.expect(m >= 0.0 && m <= 25.0, "cell mean out of range");
    c.expect(cell.at("games").get<int>() == 10, "cell game count");
    best = std::max(best, m);
  }
  c.expect(grid.size() == 16, "grid cells not distinct");
  c.expect(abl.at("best_cell").at("score_mean").get<double>() == best, "best cell not argmax");
  c.expect(summaries_from_json(doc).size() == 16, "summary count");
  const std::string csv = slurp(out / "games.csv");
  c.expect(std::count(csv.begin(), csv.end(), '\n') == 16 * 10 + 1, "csv row count");
  c.detail << "16 cells in " << secs << " s, best mean " << best;
  return c;
}

Check wilcoxon_suite() {
  Check c;
  const std::vector<double> a{1, 2, 3, 4, 5, 6}, zero(6, 0.0);
  const double p6 = wilcoxon_signed_rank(a, zero).p_value;
  c.expect(p6 == 0.03125, "n=6 example");
  Rng rng(2020);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> x(20), y(20);
    const double shift = 0.6 * rng.uniform01();
    for (int i = 0; i < 20; ++i) {
      x[i] = rng.uniform01() + shift;
      y[i] = rng.uniform01();
    }
    const double exact = wilcoxon_signed_rank(x, y, WilcoxonMode::force_exact).p_value;
    const double approx = wilcoxon_signed_rank(x, y, WilcoxonMode::force_normal).p_value;
    worst = std::max(worst, std::abs(exact - approx));
  }
  c.expect(worst <= 0.02, "normal approximation drift");
  c.detail << "n=6 p " << p6 << ", n=20 worst |exact-normal| " << worst;
  return c;
}

Check determinism(const std::string& cli, const fs::path& work) {
  Check c;
  std::string bytes[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path out = work / ("determinism_" + std::to_string(run));
    fs::remove_all(out);
    const int rc = run_cli(cli, "simulate --agent-a expected-sarsa --agent-b deep:q-learning "
                                "--games 30 --seed 1234 --out \"" + out.string() + "\"");
    c.expect(rc == 0, "simulate exited nonzero");
    bytes[run] = slurp(out / "games.csv");
  }
  c.expect(!bytes[0].empty(), "empty csv");
  c.expect(bytes[0] == bytes[1], "csv bytes differ");
  c.detail << bytes[0].size() << " csv bytes compared";
  return c;
}

}  // namespace
}  // namespace hanabi

int main(int argc, char** argv) {
  using namespace hanabi;
  CLI::App app{"acceptance gate"};
  std::string cli;
  std::string workdir = "acceptance_runs";
  std::vector<std::string> only;
  app.add_option("--cli", cli, "path to hanabi_lab")->required()->check(CLI::ExistingFile);
  app.add_option("--workdir", workdir, "scratch directory for CLI runs");
  app.add_option("--only", only, "run only the named criteria");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(workdir);

  const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
      {"engine-invariants", engine_invariants},
      {"td-updates", td_suite},
      {"neural-correctness", neural_suite},
      {"learning-tabular-expected-sarsa", [] { return learning_signal("expected-sarsa", 300); }},
      {"learning-deep-q-learning", [] { return learning_signal("deep:q-learning", 3600); }},
      {"ablation-grid", [&] { return ablation_grid(cli, workdir); }},
      {"wilcoxon", wilcoxon_suite},
      {"determinism", [&] { return determinism(cli, workdir); }},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    Check c;
    try {
      c = run();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail << "exception: " << e.what();
    }
    failed += !c.ok;
    std::cout << (c.ok ? "PASS " : "FAIL ") << name << " (" << c.detail.str() << ")"
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
