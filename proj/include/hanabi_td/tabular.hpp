#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>

#include "hanabi_td/codec.hpp"
#include "hanabi_td/engine.hpp"
#include "hanabi_td/rng.hpp"

namespace hanabi {

enum class Algorithm : std::uint8_t { q_learning, sarsa, n_step_sarsa, expected_sarsa };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::q_learning: return "q-learning";
    case Algorithm::sarsa: return "sarsa";
    case Algorithm::n_step_sarsa: return "n-step-sarsa";
    case Algorithm::expected_sarsa: return "expected-sarsa";
  }
  return "unknown";
}

/// How Expected SARSA averages over next actions: a plain mean over the legal
/// next moves, or the expectation under the current epsilon-greedy policy.
enum class ExpectedForm : std::uint8_t { uniform_mean, policy_weighted };

struct EpsilonSchedule {
  enum class Kind : std::uint8_t { constant, harmonic_decay };
  Kind kind = Kind::constant;
  double epsilon0 = 0.1;
  double tau = 1000.0;  // harmonic_decay only

  static EpsilonSchedule constant(double eps) { return {Kind::constant, eps, 1.0}; }
  static EpsilonSchedule harmonic(double eps0, double tau) {
    return {Kind::harmonic_decay, eps0, tau};
  }

  void validate() const {
    if (!(epsilon0 >= 0.0 && epsilon0 <= 1.0)) {
      throw std::invalid_argument("epsilon must lie in [0,1]");
    }
    if (kind == Kind::harmonic_decay && !(tau > 0.0)) {
      throw std::invalid_argument("harmonic decay needs tau > 0");
    }
  }
  bool operator==(const EpsilonSchedule&) const = default;
};

/// Exploration rate after `t` decisions: epsilon0 for a constant schedule,
/// epsilon0 * tau / (tau + t) for harmonic decay.
inline double epsilon_at(const EpsilonSchedule& s, std::uint64_t t) {
  if (s.kind == EpsilonSchedule::Kind::constant) return s.epsilon0;
  return s.epsilon0 * s.tau / (s.tau + static_cast<double>(t));
}

struct AgentConfig {
  Algorithm algorithm = Algorithm::q_learning;
  double alpha = 0.1;
  double gamma = 0.9;
  int n = 1;
  EpsilonSchedule epsilon = EpsilonSchedule::constant(0.1);
  ExpectedForm expected_form = ExpectedForm::uniform_mean;

  /// Defaults per algorithm; Expected SARSA decays its exploration.
  static AgentConfig defaults(Algorithm algorithm, int n = 1) {
    AgentConfig c;
    c.algorithm = algorithm;
    c.n = n;
    if (algorithm == Algorithm::expected_sarsa) {
      c.epsilon = EpsilonSchedule::harmonic(0.3, 1000.0);
    }
    return c;
  }

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0,1]");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0,1]");
    if (algorithm == Algorithm::n_step_sarsa && n != 1 && n != 2 && n != 8) {
      throw std::invalid_argument("n-step SARSA supports n in {1,2,8}, got " + std::to_string(n));
    }
    epsilon.validate();
  }
  bool operator==(const AgentConfig&) const = default;
};

/// Sparse action-value table. Keys never visited read as all-zero rows.
class QTable {
 public:
  using Row = std::array<double, kNumMoves>;

  double value(const TableKey& key, Move a) const {
    auto it = rows_.find(key.packed());
    return it == rows_.end() ? 0.0 : it->second[a.index()];
  }

  double& at(const TableKey& key, Move a) { return rows_[key.packed()][a.index()]; }

  void set(const TableKey& key, Move a, double v) { at(key, a) = v; }

  const Row* find(const TableKey& key) const {
    auto it = rows_.find(key.packed());
    return it == rows_.end() ? nullptr : &it->second;
  }

  /// Number of distinct keys stored.
  std::size_t size() const noexcept { return rows_.size(); }

  /// Value equality; an absent row equals a row of zeros.
  friend bool operator==(const QTable& a, const QTable& b) {
    return a.covers(b) && b.covers(a);
  }

  const std::unordered_map<std::uint64_t, Row>& rows() const noexcept { return rows_; }

 private:
  bool covers(const QTable& other) const {
    static const Row kZero{};
    for (const auto& [k, row] : rows_) {
      auto it = other.rows_.find(k);
      const Row& theirs = it == other.rows_.end() ? kZero : it->second;
      for (int i = 0; i < kNumMoves; ++i) {
        if (row[i] != theirs[i]) return false;
      }
    }
    return true;
  }

  std::unordered_map<std::uint64_t, Row> rows_;
};

/// Highest-valued legal move; ties go to the lowest index.
inline Move greedy_action(const QTable& table, const TableKey& key, MoveSet legal) {
  if (legal.empty()) throw std::invalid_argument("no legal moves");
  const QTable::Row* row = table.find(key);
  Move best = legal.nth(0);
  if (!row) return best;
  double best_value = (*row)[best.index()];
  for (Move m : legal.to_vector()) {
    if ((*row)[m.index()] > best_value) {
      best_value = (*row)[m.index()];
      best = m;
    }
  }
  return best;
}

/// Epsilon-greedy selection. Always consumes one uniform draw, plus one index
/// draw when exploring.
inline Move select_action(const QTable& table, const TableKey& key, MoveSet legal,
                          double epsilon, Rng& rng) {
  if (legal.empty()) throw std::invalid_argument("select_action: no legal moves");
  if (rng.uniform01() < epsilon) {
    return legal.nth(static_cast<int>(rng.below(static_cast<std::uint64_t>(legal.size()))));
  }
  return greedy_action(table, key, legal);
}

struct NextState {
  TableKey key;
  MoveSet legal;
};

struct NextAction {
  TableKey key;
  Move action;
};

namespace detail {

inline void td_update(QTable& table, const TableKey& s, Move a, double target, double alpha) {
  if (!std::isfinite(target)) throw std::invalid_argument("non-finite TD target");
  double& q = table.at(s, a);
  q = q + alpha * (target - q);
}

}  // namespace detail

inline double max_value(const QTable& table, const TableKey& key, MoveSet legal) {
  return table.value(key, greedy_action(table, key, legal));
}

/// Bootstrap value of Expected SARSA at `key`.
inline double expected_value(const QTable& table, const TableKey& key, MoveSet legal,
                             ExpectedForm form, double epsilon) {
  if (legal.empty()) throw std::invalid_argument("expected_value: no legal moves");
  double total = 0.0;
  if (form == ExpectedForm::uniform_mean) {
    for (Move m : legal.to_vector()) total += table.value(key, m);
    return total / legal.size();
  }
  const Move greedy = greedy_action(table, key, legal);
  const double explore = epsilon / legal.size();
  for (Move m : legal.to_vector()) {
    const double p = explore + (m == greedy ? 1.0 - epsilon : 0.0);
    total += p * table.value(key, m);
  }
  return total;
}

/// Q(s,a) += alpha [r + gamma max_a' Q(s',a') - Q(s,a)]; `next` empty means
/// the episode ended and the bootstrap is 0.
inline void update_q_learning(QTable& table, const TableKey& s, Move a, double r,
                              const std::optional<NextState>& next, double alpha,
                              double gamma) {
  const double target = next ? r + gamma * max_value(table, next->key, next->legal) : r;
  detail::td_update(table, s, a, target, alpha);
}

inline void update_sarsa(QTable& table, const TableKey& s, Move a, double r,
                         const std::optional<NextAction>& next, double alpha, double gamma) {
  const double target = next ? r + gamma * table.value(next->key, next->action) : r;
  detail::td_update(table, s, a, target, alpha);
}

/// `epsilon` is only read by the policy-weighted form.
inline void update_expected_sarsa(QTable& table, const TableKey& s, Move a, double r,
                                  const std::optional<NextState>& next, double alpha,
                                  double gamma, ExpectedForm form, double epsilon = 0.0) {
  const double target =
      next ? r + gamma * expected_value(table, next->key, next->legal, form, epsilon) : r;
  detail::td_update(table, s, a, target, alpha);
}

struct Transition {
  TableKey key;
  Move action;
  double reward = 0.0;
};

/// The last n transitions awaiting their n-step return.
class TransitionBuffer {
 public:
  explicit TransitionBuffer(int n) : capacity_(n) {
    if (n < 1) throw std::invalid_argument("TransitionBuffer capacity must be >= 1");
  }

  void push(Transition t) {
    if (full()) throw std::logic_error("TransitionBuffer overflow");
    items_.push_back(t);
  }
  void pop_front() { items_.pop_front(); }
  void clear() { items_.clear(); }

  int capacity() const noexcept { return capacity_; }
  int size() const noexcept { return static_cast<int>(items_.size()); }
  bool empty() const noexcept { return items_.empty(); }
  bool full() const noexcept { return size() == capacity_; }
  const Transition& operator[](int i) const { return items_[static_cast<std::size_t>(i)]; }

 private:
  int capacity_;
  std::deque<Transition> items_;
};

namespace detail {

/// sum_{i<count} gamma^i r_i over the buffer front, plus gamma^count * tail.
inline double n_step_return(const TransitionBuffer& buf, int count, double gamma,
                            std::optional<double> tail) {
  double g = 0.0;
  double discount = 1.0;
  for (int i = 0; i < count; ++i) {
    g += discount * buf[i].reward;
    discount *= gamma;
  }
  return tail ? g + discount * *tail : g;
}

}  // namespace detail

/// With `latest` = (s_{t+n}, a_{t+n}) and a full buffer, updates the oldest
/// transition towards its n-step return and drops it. With `latest` empty the
/// episode has ended: every buffered transition is updated with its truncated
/// return (no bootstrap) and the buffer is emptied.
inline void update_nstep_sarsa(QTable& table, TransitionBuffer& buf,
                               const std::optional<NextAction>& latest, double alpha,
                               double gamma) {
  if (latest) {
    if (!buf.full()) return;
    const double g = detail::n_step_return(buf, buf.size(), gamma,
                                           table.value(latest->key, latest->action));
    detail::td_update(table, buf[0].key, buf[0].action, g, alpha);
    buf.pop_front();
    return;
  }
  while (!buf.empty()) {
    const double g = detail::n_step_return(buf, buf.size(), gamma, std::nullopt);
    detail::td_update(table, buf[0].key, buf[0].action, g, alpha);
    buf.pop_front();
  }
}

}  // namespace hanabi
