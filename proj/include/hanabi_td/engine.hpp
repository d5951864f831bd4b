#pragma once

// Two-player Hanabi rules engine for the 13-token variant:
//   - 50 cards, 5 colors x ranks {1,1,1,2,2,3,3,4,4,5}
//   - 5-card hands, 3 lives, hint tokens start full at 13 and are capped there
//   - every successful play and every discard returns one hint token
//   - the game ends on the turn the deck empties (no final round), when the
//     last life is lost, or when all five stacks reach 5
//   - score is the sum of stack heights whatever the ending

#include <algorithm>
#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hanabi_td/rng.hpp"

namespace hanabi {

inline constexpr int kNumColors = 5;
inline constexpr int kNumRanks = 5;
inline constexpr int kNumPlayers = 2;
inline constexpr int kHandSize = 5;
inline constexpr int kMaxLives = 3;
inline constexpr int kMaxHintTokens = 13;
inline constexpr int kDeckSize = 50;
inline constexpr int kNumMoves = 20;
inline constexpr int kMaxScore = kNumColors * kNumRanks;
inline constexpr int kNumIdentities = kNumColors * kNumRanks;

/// Copies of each rank per color, indexed by rank - 1.
inline constexpr std::array<int, kNumRanks> kRankMultiplicity{3, 2, 2, 2, 1};

inline constexpr std::array<std::string_view, kNumColors> kColorNames{
    "red", "yellow", "green", "blue", "white"};

struct Card {
  std::uint8_t color = 0;  // 0..4
  std::uint8_t rank = 1;   // 1..5

  /// Dense identity index in [0, 25): color * 5 + rank - 1.
  constexpr int identity() const noexcept { return color * kNumRanks + rank - 1; }
  static constexpr Card from_identity(int id) noexcept {
    return Card{static_cast<std::uint8_t>(id / kNumRanks),
                static_cast<std::uint8_t>(id % kNumRanks + 1)};
  }
  constexpr bool valid() const noexcept {
    return color < kNumColors && rank >= 1 && rank <= kNumRanks;
  }

  auto operator<=>(const Card&) const = default;
};

inline std::string to_string(Card c) {
  return std::string(kColorNames.at(c.color)) + " " + std::to_string(c.rank);
}

/// What the holder has been told about one card in their own hand.
struct HintKnowledge {
  std::optional<std::uint8_t> color;
  std::optional<std::uint8_t> rank;
  /// Set when a hint touched this card and no other card in the hand.
  bool singled_out = false;

  bool any() const noexcept { return color.has_value() || rank.has_value(); }
  bool operator==(const HintKnowledge&) const = default;
};

struct Slot {
  Card card;
  HintKnowledge knowledge;
  bool operator==(const Slot&) const = default;
};

enum class Terminal : std::uint8_t {
  ongoing,
  deck_exhausted,
  lives_exhausted,
  all_stacks_complete,
};

inline std::string_view to_string(Terminal t) {
  switch (t) {
    case Terminal::ongoing: return "ongoing";
    case Terminal::deck_exhausted: return "deck_exhausted";
    case Terminal::lives_exhausted: return "lives_exhausted";
    case Terminal::all_stacks_complete: return "all_stacks_complete";
  }
  return "unknown";
}

enum class MoveKind : std::uint8_t { play, discard, hint_color, hint_rank };

inline std::string_view to_string(MoveKind k) {
  switch (k) {
    case MoveKind::play: return "play";
    case MoveKind::discard: return "discard";
    case MoveKind::hint_color: return "hint_color";
    case MoveKind::hint_rank: return "hint_rank";
  }
  return "unknown";
}

/// One of the 20 actions. Index layout:
///   0-4   play hand slot i
///   5-9   discard hand slot i-5
///   10-14 hint color i-10 to the other player
///   15-19 hint rank i-14 to the other player
class Move {
 public:
  constexpr Move() = default;

  static constexpr Move from_index(int index) {
    if (index < 0 || index >= kNumMoves) {
      throw std::out_of_range("move index " + std::to_string(index) +
                              " outside [0,19]");
    }
    return Move(static_cast<std::uint8_t>(index));
  }
  static constexpr Move play(int slot) { return from_index(slot); }
  static constexpr Move discard(int slot) { return from_index(5 + slot); }
  static constexpr Move hint_color(int color) { return from_index(10 + color); }
  static constexpr Move hint_rank(int rank) { return from_index(14 + rank); }

  constexpr int index() const noexcept { return index_; }
  constexpr MoveKind kind() const noexcept {
    return static_cast<MoveKind>(index_ / 5);
  }
  constexpr bool is_hint() const noexcept { return index_ >= 10; }
  /// Hand slot for plays and discards.
  constexpr int slot() const noexcept { return index_ % 5; }
  /// Color index for color hints.
  constexpr int hinted_color() const noexcept { return index_ - 10; }
  /// Rank (1..5) for rank hints.
  constexpr int hinted_rank() const noexcept { return index_ - 14; }

  constexpr auto operator<=>(const Move&) const = default;

 private:
  explicit constexpr Move(std::uint8_t i) : index_(i) {}
  std::uint8_t index_ = 0;
};

inline std::string to_string(Move m);

/// Set of moves as a 20-bit mask; iteration is in ascending index order.
class MoveSet {
 public:
  constexpr MoveSet() = default;
  explicit constexpr MoveSet(std::uint32_t mask) : mask_(mask & kFull) {}

  static constexpr MoveSet all() { return MoveSet(kFull); }

  constexpr void insert(Move m) noexcept { mask_ |= 1u << m.index(); }
  constexpr void erase(Move m) noexcept { mask_ &= ~(1u << m.index()); }
  constexpr bool contains(Move m) const noexcept { return (mask_ >> m.index()) & 1u; }
  constexpr bool empty() const noexcept { return mask_ == 0; }
  constexpr int size() const noexcept { return std::popcount(mask_); }
  constexpr std::uint32_t mask() const noexcept { return mask_; }

  /// The k-th member in ascending order, k < size().
  Move nth(int k) const {
    std::uint32_t m = mask_;
    for (int i = 0; i < k; ++i) m &= m - 1;
    if (m == 0) throw std::out_of_range("MoveSet::nth past end");
    return Move::from_index(std::countr_zero(m));
  }

  std::vector<Move> to_vector() const {
    std::vector<Move> out;
    for (std::uint32_t m = mask_; m != 0; m &= m - 1) {
      out.push_back(Move::from_index(std::countr_zero(m)));
    }
    return out;
  }

  constexpr bool operator==(const MoveSet&) const = default;

 private:
  static constexpr std::uint32_t kFull = (1u << kNumMoves) - 1;
  std::uint32_t mask_ = 0;
};

struct MoveOutcome {
  MoveKind kind = MoveKind::play;
  /// The played or discarded card (plays and discards only).
  std::optional<Card> card;
  bool success = false;
  bool life_lost = false;
  /// The move earns a hint token (successful play or discard), even when the
  /// pool is already at the cap.
  bool token_gained = false;
  /// Bit i set when opponent slot i matched a hint.
  std::uint8_t touched_slots = 0;
  bool drawn_replacement = false;

  bool operator==(const MoveOutcome&) const = default;
};

struct IllegalMove : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Full hidden-information position. The top of the deck is `deck.back()`.
/// Drawn cards enter the rightmost hand slot; cards to the right of a
/// vacated slot shift left, keeping their hint knowledge.
struct GameState {
  std::vector<Card> deck;
  std::array<std::vector<Slot>, kNumPlayers> hands;
  std::array<std::uint8_t, kNumColors> stacks{};
  int lives = kMaxLives;
  int hint_tokens = kMaxHintTokens;
  std::vector<Card> discards;
  int current_player = 0;
  int turn = 0;
  Terminal terminal = Terminal::ongoing;

  int other_player() const noexcept { return 1 - current_player; }
  bool operator==(const GameState&) const = default;
};

inline bool is_playable(const GameState& s, Card c) noexcept {
  return s.stacks[c.color] + 1 == c.rank;
}

/// Copies of each card identity still out of the discard pile and off the
/// stacks (i.e. in the deck or in a hand).
inline std::array<int, kNumIdentities> live_counts(const GameState& s) {
  std::array<int, kNumIdentities> counts{};
  for (int id = 0; id < kNumIdentities; ++id) {
    counts[id] = kRankMultiplicity[id % kNumRanks];
  }
  for (Card c : s.discards) --counts[c.identity()];
  for (int color = 0; color < kNumColors; ++color) {
    for (int r = 1; r <= s.stacks[color]; ++r) --counts[color * kNumRanks + r - 1];
  }
  return counts;
}

/// A card can never be played: its rank is already on the stack, or some
/// rank between the stack top and it has no copies left.
inline bool is_dead(const GameState& s, Card c) {
  if (c.rank <= s.stacks[c.color]) return true;
  int discarded[kNumRanks] = {};
  for (Card d : s.discards) {
    if (d.color == c.color) ++discarded[d.rank - 1];
  }
  for (int r = s.stacks[c.color] + 1; r < c.rank; ++r) {
    if (discarded[r - 1] >= kRankMultiplicity[r - 1]) return true;
  }
  return false;
}

inline int score(const GameState& s) noexcept {
  int total = 0;
  for (auto h : s.stacks) total += h;
  return total;
}

inline Terminal check_terminal(const GameState& s) noexcept {
  if (s.lives <= 0) return Terminal::lives_exhausted;
  if (score(s) == kMaxScore) return Terminal::all_stacks_complete;
  if (s.deck.empty()) return Terminal::deck_exhausted;
  return Terminal::ongoing;
}

/// The full 50-card deck in identity order.
inline std::vector<Card> full_deck() {
  std::vector<Card> deck;
  deck.reserve(kDeckSize);
  for (int color = 0; color < kNumColors; ++color) {
    for (int r = 1; r <= kNumRanks; ++r) {
      for (int k = 0; k < kRankMultiplicity[r - 1]; ++k) {
        deck.push_back(Card{static_cast<std::uint8_t>(color), static_cast<std::uint8_t>(r)});
      }
    }
  }
  return deck;
}

inline GameState new_game(std::uint64_t seed) {
  GameState s;
  s.deck = full_deck();
  Rng rng(seed);
  for (std::size_t i = s.deck.size() - 1; i > 0; --i) {
    std::swap(s.deck[i], s.deck[rng.below(i + 1)]);
  }
  for (auto& h : s.hands) h.reserve(kHandSize);
  for (int k = 0; k < kHandSize; ++k) {
    for (int p = 0; p < kNumPlayers; ++p) {
      s.hands[p].push_back(Slot{s.deck.back(), {}});
      s.deck.pop_back();
    }
  }
  return s;
}

/// Color or rank presence in a hand, as bit masks (bit c / bit rank-1).
struct HandFeatures {
  std::uint8_t colors = 0;
  std::uint8_t ranks = 0;
};

inline HandFeatures hand_features(const std::vector<Slot>& hand) noexcept {
  HandFeatures f;
  for (const auto& slot : hand) {
    f.colors |= static_cast<std::uint8_t>(1u << slot.card.color);
    f.ranks |= static_cast<std::uint8_t>(1u << (slot.card.rank - 1));
  }
  return f;
}

inline MoveSet legal_moves(const GameState& s) {
  if (s.terminal != Terminal::ongoing) throw IllegalMove("game over");
  MoveSet moves;
  const int hand = static_cast<int>(s.hands[s.current_player].size());
  for (int i = 0; i < hand; ++i) {
    moves.insert(Move::play(i));
    moves.insert(Move::discard(i));
  }
  if (s.hint_tokens > 0) {
    const auto f = hand_features(s.hands[s.other_player()]);
    for (int c = 0; c < kNumColors; ++c) {
      if ((f.colors >> c) & 1u) moves.insert(Move::hint_color(c));
    }
    for (int r = 1; r <= kNumRanks; ++r) {
      if ((f.ranks >> (r - 1)) & 1u) moves.insert(Move::hint_rank(r));
    }
  }
  return moves;
}

/// Why `m` is illegal in `s`, or nullopt when it is legal.
inline std::optional<std::string> illegal_reason(const GameState& s, Move m) {
  if (s.terminal != Terminal::ongoing) return "game over";
  if (!m.is_hint()) {
    if (m.slot() >= static_cast<int>(s.hands[s.current_player].size())) {
      return "bad slot " + std::to_string(m.slot());
    }
    return std::nullopt;
  }
  if (s.hint_tokens <= 0) return "no hint tokens";
  const auto f = hand_features(s.hands[s.other_player()]);
  if (m.kind() == MoveKind::hint_color) {
    if (!((f.colors >> m.hinted_color()) & 1u)) {
      return "hint target absent: color " + std::string(kColorNames[m.hinted_color()]);
    }
  } else if (!((f.ranks >> (m.hinted_rank() - 1)) & 1u)) {
    return "hint target absent: rank " + std::to_string(m.hinted_rank());
  }
  return std::nullopt;
}

namespace detail {

inline bool remove_and_draw(GameState& s, std::vector<Slot>& hand, int slot) {
  hand.erase(hand.begin() + slot);
  if (s.deck.empty()) return false;
  hand.push_back(Slot{s.deck.back(), {}});
  s.deck.pop_back();
  return true;
}

inline void gain_token(GameState& s, MoveOutcome& out) {
  if (s.hint_tokens < kMaxHintTokens) ++s.hint_tokens;
  out.token_gained = true;
}

}  // namespace detail

/// Applies `m` to `s` in place. Throws IllegalMove (state untouched) when
/// the move is not legal.
inline MoveOutcome apply_move_in_place(GameState& s, Move m) {
  if (auto why = illegal_reason(s, m)) throw IllegalMove(*why);

  MoveOutcome out;
  out.kind = m.kind();
  auto& own = s.hands[s.current_player];
  switch (m.kind()) {
    case MoveKind::play: {
      const Card c = own[m.slot()].card;
      out.card = c;
      if (is_playable(s, c)) {
        ++s.stacks[c.color];
        out.success = true;
        detail::gain_token(s, out);
      } else {
        --s.lives;
        out.life_lost = true;
        s.discards.push_back(c);
      }
      out.drawn_replacement = detail::remove_and_draw(s, own, m.slot());
      break;
    }
    case MoveKind::discard: {
      const Card c = own[m.slot()].card;
      out.card = c;
      s.discards.push_back(c);
      detail::gain_token(s, out);
      out.drawn_replacement = detail::remove_and_draw(s, own, m.slot());
      break;
    }
    case MoveKind::hint_color:
    case MoveKind::hint_rank: {
      auto& theirs = s.hands[s.other_player()];
      const bool by_color = m.kind() == MoveKind::hint_color;
      for (std::size_t i = 0; i < theirs.size(); ++i) {
        const Card c = theirs[i].card;
        if (by_color ? c.color == m.hinted_color() : c.rank == m.hinted_rank()) {
          out.touched_slots |= static_cast<std::uint8_t>(1u << i);
          if (by_color) {
            theirs[i].knowledge.color = c.color;
          } else {
            theirs[i].knowledge.rank = c.rank;
          }
        }
      }
      if (std::popcount(out.touched_slots) == 1) {
        theirs[std::countr_zero(out.touched_slots)].knowledge.singled_out = true;
      }
      --s.hint_tokens;
      break;
    }
  }
  s.current_player = s.other_player();
  ++s.turn;
  s.terminal = check_terminal(s);
  return out;
}

inline std::pair<GameState, MoveOutcome> apply_move(GameState s, Move m) {
  MoveOutcome out = apply_move_in_place(s, m);
  return {std::move(s), out};
}

inline std::string to_string(Move m) {
  switch (m.kind()) {
    case MoveKind::play: return "play " + std::to_string(m.slot());
    case MoveKind::discard: return "discard " + std::to_string(m.slot());
    case MoveKind::hint_color:
      return "hint " + std::string(kColorNames[m.hinted_color()]);
    case MoveKind::hint_rank: return "hint " + std::to_string(m.hinted_rank());
  }
  return "?";
}

}  // namespace hanabi
