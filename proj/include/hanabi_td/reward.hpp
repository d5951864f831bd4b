#pragma once

// Reason-weighted rewards. For every one of the 20 moves we decide which of
// twelve "reasons" apply in the current position; the reward for a move is
// the sum of the weights of its applicable reasons.
//
//  1  play while lives >= 2
//  2  play while lives <= 1
//  3  play a singled-out card that is playable
//  4  hint that singles out one newly identified playable card
//  5  hint that singles out one newly identified non-playable card
//  6  discard a singled-out card that is playable
//  7  hint whose touched cards are all non-playable
//  8  hint touching at least one playable card
//  9  play a card the holder can prove playable from their knowledge
//  10 discard while below the token cap
//  11 discard a hinted card the holder can prove dead from their knowledge
//  12 discard a dead card

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string_view>

#include "hanabi_td/engine.hpp"

namespace hanabi {

inline constexpr int kNumReasons = 12;

/// Reason ids are 1-based to match the list above.
enum class Reason : std::uint8_t {
  play_safe_lives = 1,
  play_low_lives = 2,
  play_singled_playable = 3,
  hint_singles_playable = 4,
  hint_singles_unplayable = 5,
  discard_singled_playable = 6,
  hint_unplayable = 7,
  hint_playable = 8,
  play_certain = 9,
  discard_for_token = 10,
  discard_hinted_dead = 11,
  discard_dead = 12,
};

/// Config names of the twelve weights, in reason order.
inline constexpr std::array<std::string_view, kNumReasons> kReasonNames{
    "play_safe_lives",      "play_low_lives",          "play_singled_playable",
    "hint_singles_playable", "hint_singles_unplayable", "discard_singled_playable",
    "hint_unplayable",      "hint_playable",           "play_certain",
    "discard_for_token",    "discard_hinted_dead",     "discard_dead"};

class ReasonSet {
 public:
  constexpr ReasonSet() = default;
  constexpr void insert(Reason r) noexcept { bits_ |= bit(r); }
  constexpr bool contains(Reason r) const noexcept { return bits_ & bit(r); }
  constexpr bool contains(int id) const noexcept {
    return id >= 1 && id <= kNumReasons && ((bits_ >> (id - 1)) & 1u);
  }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr int size() const noexcept { return std::popcount(bits_); }
  constexpr std::uint16_t bits() const noexcept { return bits_; }
  static constexpr ReasonSet of(std::initializer_list<int> ids) {
    ReasonSet s;
    for (int id : ids) s.bits_ |= static_cast<std::uint16_t>(1u << (id - 1));
    return s;
  }
  constexpr bool operator==(const ReasonSet&) const = default;

 private:
  static constexpr std::uint16_t bit(Reason r) noexcept {
    return static_cast<std::uint16_t>(1u << (static_cast<int>(r) - 1));
  }
  std::uint16_t bits_ = 0;
};

/// Weight per reason, w[0] for reason 1. The defaults are arbitrary
/// constants that only encode a qualitative ordering.
struct RewardWeights {
  std::array<double, kNumReasons> w{+1.0, -1.0, +5.0, +3.0, -1.0, -5.0,
                                    -0.5, +1.5, +2.0, +0.5, +1.0, +1.0};

  double operator[](Reason r) const noexcept { return w[static_cast<int>(r) - 1]; }

  void validate() const {
    for (double x : w) {
      if (!std::isfinite(x)) throw std::invalid_argument("reward weight is not finite");
    }
  }
  bool operator==(const RewardWeights&) const = default;
};

struct RewardMatrix {
  std::array<std::array<double, kNumReasons>, kNumMoves> m{};

  const std::array<double, kNumReasons>& row(Move a) const { return m[a.index()]; }
  bool operator==(const RewardMatrix&) const = default;
};

namespace detail {

/// Card identities the current player cannot rule out for their own slot,
/// given its hint knowledge and the cards they can see (discards, stacks,
/// the other hand). Returns a 25-bit mask over identities.
inline std::uint32_t candidate_identities(const GameState& s, const HintKnowledge& k) {
  auto unseen = live_counts(s);
  for (const auto& slot : s.hands[s.other_player()]) --unseen[slot.card.identity()];
  std::uint32_t mask = 0;
  for (int id = 0; id < kNumIdentities; ++id) {
    const Card c = Card::from_identity(id);
    if (unseen[id] <= 0) continue;
    if (k.color && *k.color != c.color) continue;
    if (k.rank && *k.rank != c.rank) continue;
    mask |= 1u << id;
  }
  return mask;
}

template <class Pred>
bool all_candidates(const GameState& s, const HintKnowledge& k, Pred pred) {
  const std::uint32_t mask = candidate_identities(s, k);
  if (mask == 0) return false;
  for (std::uint32_t m = mask; m != 0; m &= m - 1) {
    if (!pred(Card::from_identity(std::countr_zero(m)))) return false;
  }
  return true;
}

}  // namespace detail

/// Reason 9: every identity consistent with the holder's view is playable.
inline bool provably_playable(const GameState& s, const HintKnowledge& k) {
  return detail::all_candidates(s, k, [&](Card c) { return is_playable(s, c); });
}

inline bool provably_dead(const GameState& s, const HintKnowledge& k) {
  return detail::all_candidates(s, k, [&](Card c) { return is_dead(s, c); });
}

inline ReasonSet applicable_reasons(const GameState& s, Move a) {
  ReasonSet out;
  if (illegal_reason(s, a)) return out;

  const auto& own = s.hands[s.current_player];
  switch (a.kind()) {
    case MoveKind::play: {
      const Slot& slot = own[a.slot()];
      out.insert(s.lives >= 2 ? Reason::play_safe_lives : Reason::play_low_lives);
      if (slot.knowledge.singled_out && is_playable(s, slot.card)) {
        out.insert(Reason::play_singled_playable);
      }
      if (provably_playable(s, slot.knowledge)) out.insert(Reason::play_certain);
      break;
    }
    case MoveKind::discard: {
      const Slot& slot = own[a.slot()];
      if (slot.knowledge.singled_out && is_playable(s, slot.card)) {
        out.insert(Reason::discard_singled_playable);
      }
      if (s.hint_tokens < kMaxHintTokens) out.insert(Reason::discard_for_token);
      if (slot.knowledge.any() && provably_dead(s, slot.knowledge)) {
        out.insert(Reason::discard_hinted_dead);
      }
      if (is_dead(s, slot.card)) out.insert(Reason::discard_dead);
      break;
    }
    case MoveKind::hint_color:
    case MoveKind::hint_rank: {
      const auto& theirs = s.hands[s.other_player()];
      const bool by_color = a.kind() == MoveKind::hint_color;
      int touched = 0;
      int playable = 0;
      int last = -1;
      for (std::size_t i = 0; i < theirs.size(); ++i) {
        const Card c = theirs[i].card;
        if (by_color ? c.color == a.hinted_color() : c.rank == a.hinted_rank()) {
          ++touched;
          last = static_cast<int>(i);
          if (is_playable(s, c)) ++playable;
        }
      }
      out.insert(playable > 0 ? Reason::hint_playable : Reason::hint_unplayable);
      if (touched == 1) {
        const auto& k = theirs[last].knowledge;
        const bool newly = by_color ? !k.color.has_value() : !k.rank.has_value();
        if (newly) {
          out.insert(playable == 1 ? Reason::hint_singles_playable
                                   : Reason::hint_singles_unplayable);
        }
      }
      break;
    }
  }
  return out;
}

inline RewardMatrix compute_reward_matrix(const GameState& s, const RewardWeights& w) {
  RewardMatrix rm;
  for (int a = 0; a < kNumMoves; ++a) {
    const ReasonSet reasons = applicable_reasons(s, Move::from_index(a));
    for (int r = 1; r <= kNumReasons; ++r) {
      if (reasons.contains(r)) rm.m[a][r - 1] = w.w[r - 1];
    }
  }
  return rm;
}

inline double reward_for(const RewardMatrix& rm, Move a) {
  double total = 0.0;
  for (double x : rm.m[a.index()]) total += x;
  return total;
}

struct RewardBounds {
  double min = 0.0;
  double max = 1.0;
  bool operator==(const RewardBounds&) const = default;
};

/// Smallest and largest reward a legal move can earn under `w`, found by
/// enumerating the reason combinations the predicates allow together:
///   play:    exactly one of {1,2}, optionally 3, optionally 9
///   discard: optionally 10, plus either optionally 6, or optionally 12
///            (with 11 only alongside 12)
///   hint:    {8} or {4,8}, or {7} or {5,7}
inline RewardBounds achievable_reward_bounds(const RewardWeights& w) {
  RewardBounds b{std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity()};
  auto consider = [&](std::initializer_list<int> ids) {
    double total = 0.0;
    for (int id : ids) total += w.w[id - 1];
    b.min = std::min(b.min, total);
    b.max = std::max(b.max, total);
  };
  for (int lives_reason : {1, 2}) {
    for (int mask = 0; mask < 4; ++mask) {
      double total = w.w[lives_reason - 1];
      if (mask & 1) total += w.w[2];
      if (mask & 2) total += w.w[8];
      b.min = std::min(b.min, total);
      b.max = std::max(b.max, total);
    }
  }
  for (bool token : {false, true}) {
    const double t = token ? w.w[9] : 0.0;
    for (double extra : {0.0, w.w[5], w.w[11], w.w[10] + w.w[11]}) {
      b.min = std::min(b.min, t + extra);
      b.max = std::max(b.max, t + extra);
    }
  }
  consider({8});
  consider({4, 8});
  consider({7});
  consider({5, 7});
  // Degenerate weights (e.g. all zero) would make normalization divide by 0.
  if (!(b.min < b.max)) b.max = b.min + 1.0;
  return b;
}

}  // namespace hanabi
