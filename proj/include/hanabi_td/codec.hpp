#pragma once

// Observation encoders. Both read only what `player` may see: public state,
// the other player's cards, and the hint knowledge on their own slots. The
// faces of the player's own cards are never read.

#include <array>
#include <cstdint>
#include <functional>

#include "hanabi_td/engine.hpp"

namespace hanabi {

/// Discrete observation used as a Q-table key.
struct TableKey {
  std::array<std::uint8_t, kNumColors> stacks{};  // 0..5 each
  std::uint8_t lives = 0;                         // 0..3
  std::uint8_t hint_bucket = 0;                   // tokens 0 / 1-4 / 5-8 / 9-13
  /// Per own slot: 0 none, 1 color only, 2 rank only, 3 both.
  std::array<std::uint8_t, kHandSize> slot_knowledge{};

  /// Mixed-radix packing; injective over the fields above.
  std::uint64_t packed() const noexcept {
    std::uint64_t v = 0;
    for (auto h : stacks) v = v * 6 + h;
    v = v * 4 + lives;
    v = v * 4 + hint_bucket;
    for (auto k : slot_knowledge) v = v * 4 + k;
    return v;
  }

  bool operator==(const TableKey&) const = default;
};

inline std::uint8_t hint_bucket(int tokens) noexcept {
  if (tokens <= 0) return 0;
  if (tokens <= 4) return 1;
  if (tokens <= 8) return 2;
  return 3;
}

inline std::uint8_t knowledge_code(const HintKnowledge& k) noexcept {
  return static_cast<std::uint8_t>((k.color ? 1 : 0) + (k.rank ? 2 : 0));
}

inline TableKey encode_key(const GameState& s, int player) {
  TableKey key;
  for (int c = 0; c < kNumColors; ++c) key.stacks[c] = s.stacks[c];
  key.lives = static_cast<std::uint8_t>(s.lives);
  key.hint_bucket = hint_bucket(s.hint_tokens);
  const auto& hand = s.hands.at(player);
  for (std::size_t i = 0; i < hand.size() && i < kHandSize; ++i) {
    key.slot_knowledge[i] = knowledge_code(hand[i].knowledge);
  }
  return key;
}

inline constexpr std::size_t kFeatureSize = 148;

using FeatureVector = std::array<double, kFeatureSize>;

/// Feature layout (offsets):
///   [0,5)     stack heights / 5
///   5         lives / 3
///   6         hint tokens / 13
///   7         deck remaining / 40
///   [8,68)    own 5 slots x (color one-hot 5 + unknown, rank one-hot 5 + unknown)
///   [68,123)  other 5 slots x (color one-hot 5, rank one-hot 5, empty flag)
///   [123,148) discard count per identity / copies of that identity
namespace feature_offset {
inline constexpr std::size_t kStacks = 0;
inline constexpr std::size_t kLives = 5;
inline constexpr std::size_t kTokens = 6;
inline constexpr std::size_t kDeck = 7;
inline constexpr std::size_t kOwn = 8;
inline constexpr std::size_t kOwnSlot = 12;
inline constexpr std::size_t kOther = kOwn + kHandSize * kOwnSlot;
inline constexpr std::size_t kOtherSlot = 11;
inline constexpr std::size_t kDiscards = kOther + kHandSize * kOtherSlot;
static_assert(kDiscards + kNumIdentities == kFeatureSize);
}  // namespace feature_offset

inline constexpr double kDeckNormalizer = kDeckSize - kNumPlayers * kHandSize;

inline FeatureVector encode_features(const GameState& s, int player) {
  namespace off = feature_offset;
  FeatureVector x{};
  for (int c = 0; c < kNumColors; ++c) x[off::kStacks + c] = s.stacks[c] / 5.0;
  x[off::kLives] = s.lives / static_cast<double>(kMaxLives);
  x[off::kTokens] = s.hint_tokens / static_cast<double>(kMaxHintTokens);
  x[off::kDeck] = static_cast<double>(s.deck.size()) / kDeckNormalizer;

  const auto& own = s.hands.at(player);
  for (std::size_t i = 0; i < kHandSize; ++i) {
    const std::size_t base = off::kOwn + i * off::kOwnSlot;
    if (i >= own.size()) continue;
    const auto& k = own[i].knowledge;
    x[base + (k.color ? *k.color : 5)] = 1.0;
    x[base + 6 + (k.rank ? *k.rank - 1 : 5)] = 1.0;
  }

  const auto& other = s.hands.at(1 - player);
  for (std::size_t i = 0; i < kHandSize; ++i) {
    const std::size_t base = off::kOther + i * off::kOtherSlot;
    if (i >= other.size()) {
      x[base + 10] = 1.0;
      continue;
    }
    const Card c = other[i].card;
    x[base + c.color] = 1.0;
    x[base + 5 + c.rank - 1] = 1.0;
  }

  for (Card c : s.discards) x[off::kDiscards + c.identity()] += 1.0;
  for (int id = 0; id < kNumIdentities; ++id) {
    x[off::kDiscards + id] /= kRankMultiplicity[id % kNumRanks];
  }
  return x;
}

}  // namespace hanabi

template <>
struct std::hash<hanabi::TableKey> {
  std::size_t operator()(const hanabi::TableKey& k) const noexcept {
    return std::hash<std::uint64_t>{}(k.packed());
  }
};
