#pragma once

// TD learning with a network as the action-value function. The Softmax head
// keeps predictions in (0,1), so values are learned in normalized space:
// rewards are mapped to [0,1] and targets take the convex form
//   target = (1 - gamma) * r_norm + gamma * bootstrap,
// which stays in [0,1] whenever the bootstrap does.

#include <algorithm>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hanabi_td/neural.hpp"
#include "hanabi_td/reward.hpp"
#include "hanabi_td/tabular.hpp"

namespace hanabi {

struct DeepAgentConfig {
  Algorithm algorithm = Algorithm::q_learning;
  double lr = 0.01;
  int hidden_count = 4;
  std::size_t hidden_width = 64;
  double gamma = 0.9;
  int n = 1;
  EpsilonSchedule epsilon = EpsilonSchedule::constant(0.1);
  ExpectedForm expected_form = ExpectedForm::uniform_mean;
  /// Empty: derived from the active reward weights.
  std::optional<RewardBounds> reward_bounds;
  OutputHead head = OutputHead::softmax;
  double beta1 = 0.900;
  double beta2 = 0.999;
  double adam_eps = 1e-07;
  double momentum = 0.990;

  static DeepAgentConfig defaults(Algorithm algorithm, int n = 1) {
    DeepAgentConfig c;
    c.algorithm = algorithm;
    c.n = n;
    if (algorithm == Algorithm::expected_sarsa) {
      c.epsilon = EpsilonSchedule::harmonic(0.3, 1000.0);
    }
    return c;
  }

  /// The learning-rate interval explored by the ablation grid.
  bool lr_in_studied_range() const noexcept { return lr >= 0.001 && lr <= 0.5; }

  void validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (hidden_count < 1 || hidden_count > 4) {
      throw std::invalid_argument("hidden layer count must be in [1,4]");
    }
    if (hidden_width == 0) throw std::invalid_argument("hidden width must be positive");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0,1]");
    if (algorithm == Algorithm::n_step_sarsa && n != 1 && n != 2 && n != 8) {
      throw std::invalid_argument("n-step SARSA supports n in {1,2,8}");
    }
    if (reward_bounds && !(reward_bounds->min < reward_bounds->max)) {
      throw std::invalid_argument("reward bounds need min < max");
    }
    epsilon.validate();
  }
};

inline double normalize_reward(double r, const RewardBounds& b) {
  if (!(b.min < b.max)) throw std::invalid_argument("reward bounds need min < max");
  return std::clamp((r - b.min) / (b.max - b.min), 0.0, 1.0);
}

/// Network output at the next decision point.
struct NextOutput {
  std::span<const double> output;
  MoveSet legal;
  std::optional<Move> action;  // required by SARSA and n-step SARSA
};

inline double bootstrap_value(Algorithm algorithm, const NextOutput& next,
                              ExpectedForm form = ExpectedForm::uniform_mean,
                              double epsilon = 0.0) {
  const auto moves = next.legal.to_vector();
  switch (algorithm) {
    case Algorithm::q_learning: {
      if (moves.empty()) throw std::invalid_argument("td_target: no legal next moves");
      double best = next.output[moves.front().index()];
      for (Move m : moves) best = std::max(best, next.output[m.index()]);
      return best;
    }
    case Algorithm::sarsa:
    case Algorithm::n_step_sarsa:
      if (!next.action) throw std::invalid_argument("td_target: SARSA needs the next action");
      return next.output[next.action->index()];
    case Algorithm::expected_sarsa: {
      if (moves.empty()) throw std::invalid_argument("td_target: no legal next moves");
      double total = 0.0;
      if (form == ExpectedForm::uniform_mean) {
        for (Move m : moves) total += next.output[m.index()];
        return total / static_cast<double>(moves.size());
      }
      Move greedy = moves.front();
      for (Move m : moves) {
        if (next.output[m.index()] > next.output[greedy.index()]) greedy = m;
      }
      const double explore = epsilon / static_cast<double>(moves.size());
      for (Move m : moves) {
        total += (explore + (m == greedy ? 1.0 - epsilon : 0.0)) * next.output[m.index()];
      }
      return total;
    }
  }
  throw std::invalid_argument("unknown algorithm");
}

/// One-step target in normalized space; `next` empty on terminal transitions.
inline double td_target(Algorithm algorithm, double r_norm, double gamma,
                        const std::optional<NextOutput>& next,
                        ExpectedForm form = ExpectedForm::uniform_mean, double epsilon = 0.0) {
  if (!next) return r_norm;
  const double b = bootstrap_value(algorithm, *next, form, epsilon);
  return (1.0 - gamma) * r_norm + gamma * b;
}

/// n-step target folded right-to-left with the same convex step. Without a
/// bootstrap the episode ended after the last reward, whose target is itself.
inline double nstep_target(std::span<const double> rewards_norm, double gamma,
                           std::optional<double> bootstrap) {
  if (rewards_norm.empty()) throw std::invalid_argument("nstep_target: no rewards");
  std::size_t k = rewards_norm.size();
  double y;
  if (bootstrap) {
    y = *bootstrap;
  } else {
    y = rewards_norm[--k];
  }
  while (k-- > 0) y = (1.0 - gamma) * rewards_norm[k] + gamma * y;
  return y;
}

/// One Adam step pulling output `a` towards `target` while every other output
/// is asked to stay where it is. Returns the pre-step loss.
inline double train_step(Network& net, AdamState& adam, std::span<const double> x, Move a,
                         double target, double lr) {
  auto fwd = forward(net, x);
  std::vector<double> y = fwd.output;
  y[a.index()] = target;
  const double loss = mse_loss(fwd.output, y);
  const LayerStack grads = backward(net, fwd.cache, y);
  adam_step(net, grads, adam, lr);
  return loss;
}

inline Move masked_argmax(std::span<const double> output, MoveSet legal) {
  if (legal.empty()) throw std::invalid_argument("no legal moves");
  Move best = legal.nth(0);
  for (Move m : legal.to_vector()) {
    if (output[m.index()] > output[best.index()]) best = m;
  }
  return best;
}

inline Move deep_select_action(std::span<const double> output, MoveSet legal, double epsilon,
                               Rng& rng) {
  if (legal.empty()) throw std::invalid_argument("deep_select_action: no legal moves");
  if (rng.uniform01() < epsilon) {
    return legal.nth(static_cast<int>(rng.below(static_cast<std::uint64_t>(legal.size()))));
  }
  return masked_argmax(output, legal);
}

inline Move deep_select_action(const Network& net, std::span<const double> x, MoveSet legal,
                               double epsilon, Rng& rng) {
  if (legal.empty()) throw std::invalid_argument("deep_select_action: no legal moves");
  return deep_select_action(forward(net, x).output, legal, epsilon, rng);
}

}  // namespace hanabi
