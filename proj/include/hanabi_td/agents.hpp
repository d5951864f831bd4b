#pragma once

// Learning agents as seen by the match loop. Per turn the loop calls
//   act(state, seat)  -> chosen move (and the update of the agent's previous
//                        transition, now that its next decision is known)
//   observe_reward(r) -> reward earned by that move
// and after the final move of a game
//   end_game()        -> terminal updates, bootstrap 0.
// Each agent only learns from its own decisions; the other seat's moves are
// part of its environment.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hanabi_td/codec.hpp"
#include "hanabi_td/deep.hpp"
#include "hanabi_td/engine.hpp"
#include "hanabi_td/tabular.hpp"

namespace hanabi {

class Agent {
 public:
  virtual ~Agent() = default;
  virtual Move act(const GameState& state, int seat) = 0;
  virtual void observe_reward(double reward) = 0;
  virtual void end_game() = 0;
  /// Decisions taken so far, across games.
  virtual std::uint64_t decisions() const = 0;
};

class RandomAgent final : public Agent {
 public:
  explicit RandomAgent(std::uint64_t seed) : rng_(seed) {}

  Move act(const GameState& state, int) override {
    const MoveSet legal = legal_moves(state);
    ++decisions_;
    return legal.nth(static_cast<int>(rng_.below(static_cast<std::uint64_t>(legal.size()))));
  }
  void observe_reward(double) override {}
  void end_game() override {}
  std::uint64_t decisions() const override { return decisions_; }

 private:
  Rng rng_;
  std::uint64_t decisions_ = 0;
};

class TabularAgent final : public Agent {
 public:
  TabularAgent(AgentConfig config, std::uint64_t seed)
      : config_(config), rng_(seed), buffer_(config.n) {
    config_.validate();
  }

  Move act(const GameState& state, int seat) override {
    const TableKey key = encode_key(state, seat);
    const MoveSet legal = legal_moves(state);
    const double eps = epsilon_at(config_.epsilon, decisions_);
    const Move action = select_action(table_, key, legal, eps, rng_);
    if (pending_) learn(NextState{key, legal}, action, eps);
    pending_ = Pending{key, action, 0.0};
    ++decisions_;
    return action;
  }

  void observe_reward(double reward) override {
    if (!pending_) return;
    pending_->reward = reward;
    if (config_.algorithm == Algorithm::n_step_sarsa) {
      buffer_.push(Transition{pending_->key, pending_->action, reward});
    }
  }

  void end_game() override {
    if (!pending_) return;
    const double eps = epsilon_at(config_.epsilon, decisions_);
    learn(std::nullopt, std::nullopt, eps);
    pending_.reset();
  }

  std::uint64_t decisions() const override { return decisions_; }
  const QTable& table() const noexcept { return table_; }
  const AgentConfig& config() const noexcept { return config_; }

 private:
  struct Pending {
    TableKey key;
    Move action;
    double reward;
  };

  void learn(const std::optional<NextState>& next, std::optional<Move> next_action,
             double eps) {
    const auto& p = *pending_;
    const double a = config_.alpha;
    const double g = config_.gamma;
    switch (config_.algorithm) {
      case Algorithm::q_learning:
        update_q_learning(table_, p.key, p.action, p.reward, next, a, g);
        break;
      case Algorithm::sarsa: {
        std::optional<NextAction> na;
        if (next) na = NextAction{next->key, *next_action};
        update_sarsa(table_, p.key, p.action, p.reward, na, a, g);
        break;
      }
      case Algorithm::expected_sarsa:
        update_expected_sarsa(table_, p.key, p.action, p.reward, next, a, g,
                              config_.expected_form, eps);
        break;
      case Algorithm::n_step_sarsa: {
        std::optional<NextAction> na;
        if (next) na = NextAction{next->key, *next_action};
        update_nstep_sarsa(table_, buffer_, na, a, g);
        break;
      }
    }
  }

  AgentConfig config_;
  Rng rng_;
  QTable table_;
  TransitionBuffer buffer_;
  std::optional<Pending> pending_;
  std::uint64_t decisions_ = 0;
};

class DeepAgent final : public Agent {
 public:
  DeepAgent(DeepAgentConfig config, const RewardWeights& weights, std::uint64_t seed,
            std::optional<Network> initial = std::nullopt)
      : config_(std::move(config)),
        bounds_(config_.reward_bounds.value_or(achievable_reward_bounds(weights))),
        rng_(seed),
        net_(initial ? std::move(*initial)
                     : init_network(config_.hidden_count, config_.hidden_width,
                                    derive_seed(seed, 0x6e6574, 0), kFeatureSize, kNumMoves,
                                    config_.head)),
        adam_(net_) {
    config_.validate();
    if (net_.input_dim() != kFeatureSize || net_.output_dim() != kNumMoves) {
      throw std::invalid_argument("network shape does not match the observation encoding");
    }
    adam_.beta1 = config_.beta1;
    adam_.beta2 = config_.beta2;
    adam_.eps = config_.adam_eps;
    adam_.momentum = config_.momentum;
  }

  Move act(const GameState& state, int seat) override {
    const FeatureVector x = encode_features(state, seat);
    const MoveSet legal = legal_moves(state);
    const double eps = epsilon_at(config_.epsilon, decisions_);
    const std::vector<double> out = forward(net_, x).output;
    const Move action = deep_select_action(out, legal, eps, rng_);
    if (pending_) learn(NextOutput{out, legal, action}, eps);
    pending_ = Pending{x, action, 0.0};
    ++decisions_;
    return action;
  }

  void observe_reward(double reward) override {
    if (!pending_) return;
    pending_->reward_norm = normalize_reward(reward, bounds_);
    if (config_.algorithm == Algorithm::n_step_sarsa) {
      window_.push_back(*pending_);
    }
  }

  void end_game() override {
    if (!pending_) return;
    learn(std::nullopt, epsilon_at(config_.epsilon, decisions_));
    pending_.reset();
  }

  std::uint64_t decisions() const override { return decisions_; }
  const Network& network() const noexcept { return net_; }
  const RewardBounds& reward_bounds() const noexcept { return bounds_; }
  double last_loss() const noexcept { return last_loss_; }

 private:
  struct Pending {
    FeatureVector x;
    Move action;
    double reward_norm;
  };

  void learn(const std::optional<NextOutput>& next, double eps) {
    if (config_.algorithm != Algorithm::n_step_sarsa) {
      const auto& p = *pending_;
      const double y = td_target(config_.algorithm, p.reward_norm, config_.gamma, next,
                                 config_.expected_form, eps);
      last_loss_ = train_step(net_, adam_, p.x, p.action, y, config_.lr);
      return;
    }
    if (next) {
      if (static_cast<int>(window_.size()) < config_.n) return;
      train_oldest(bootstrap_value(config_.algorithm, *next));
      return;
    }
    while (!window_.empty()) train_oldest(std::nullopt);
  }

  void train_oldest(std::optional<double> bootstrap) {
    std::vector<double> rewards;
    rewards.reserve(window_.size());
    for (const auto& t : window_) rewards.push_back(t.reward_norm);
    const double y = nstep_target(rewards, config_.gamma, bootstrap);
    last_loss_ = train_step(net_, adam_, window_.front().x, window_.front().action, y, config_.lr);
    window_.erase(window_.begin());
  }

  DeepAgentConfig config_;
  RewardBounds bounds_;
  Rng rng_;
  Network net_;
  AdamState adam_;
  std::optional<Pending> pending_;
  std::vector<Pending> window_;
  std::uint64_t decisions_ = 0;
  double last_loss_ = 0.0;
};

}  // namespace hanabi
