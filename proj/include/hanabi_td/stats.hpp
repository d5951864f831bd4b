#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hanabi_td/engine.hpp"

namespace hanabi {

struct SeatStats {
  int turns = 0;
  int plays = 0;
  int discards = 0;
  int hints_color = 0;
  int hints_rank = 0;

  int hints() const noexcept { return hints_color + hints_rank; }
  bool operator==(const SeatStats&) const = default;
};

struct GameRecord {
  std::string matchup;
  int game = 0;
  std::uint64_t seed = 0;
  int score = 0;
  Terminal terminal = Terminal::ongoing;
  std::array<SeatStats, kNumPlayers> seats{};

  bool operator==(const GameRecord&) const = default;
};

struct SeatSummary {
  double turns = 0.0;
  double plays = 0.0;
  double discards = 0.0;
  double hints = 0.0;
  double hints_color = 0.0;
  double hints_rank = 0.0;

  bool operator==(const SeatSummary&) const = default;
};

struct MatchSummary {
  std::string matchup;
  int games = 0;
  double score_mean = 0.0;
  double score_stddev = 0.0;  // population
  std::array<SeatSummary, kNumPlayers> seats{};
  /// Both seats added together, per game.
  SeatSummary combined;
  std::map<std::string, int> terminal_counts;

  bool operator==(const MatchSummary&) const = default;
};

inline MatchSummary aggregate(std::span<const GameRecord> records) {
  if (records.empty()) throw std::invalid_argument("aggregate: no records");
  MatchSummary s;
  s.matchup = records.front().matchup;
  s.games = static_cast<int>(records.size());
  const double n = static_cast<double>(records.size());

  double sum = 0.0;
  for (const auto& r : records) {
    if (r.matchup != s.matchup) {
      throw std::invalid_argument("aggregate: mixed matchups '" + s.matchup + "' and '" +
                                  r.matchup + "'");
    }
    sum += r.score;
    ++s.terminal_counts[std::string(to_string(r.terminal))];
    for (int p = 0; p < kNumPlayers; ++p) {
      const auto& st = r.seats[p];
      auto& out = s.seats[p];
      out.turns += st.turns;
      out.plays += st.plays;
      out.discards += st.discards;
      out.hints += st.hints();
      out.hints_color += st.hints_color;
      out.hints_rank += st.hints_rank;
    }
  }
  s.score_mean = sum / n;
  double ss = 0.0;
  for (const auto& r : records) ss += (r.score - s.score_mean) * (r.score - s.score_mean);
  s.score_stddev = std::sqrt(ss / n);

  for (auto& seat : s.seats) {
    for (double* v : {&seat.turns, &seat.plays, &seat.discards, &seat.hints, &seat.hints_color,
                      &seat.hints_rank}) {
      *v /= n;
    }
  }
  s.combined.turns = s.seats[0].turns + s.seats[1].turns;
  s.combined.plays = s.seats[0].plays + s.seats[1].plays;
  s.combined.discards = s.seats[0].discards + s.seats[1].discards;
  s.combined.hints = s.seats[0].hints + s.seats[1].hints;
  s.combined.hints_color = s.seats[0].hints_color + s.seats[1].hints_color;
  s.combined.hints_rank = s.seats[0].hints_rank + s.seats[1].hints_rank;
  return s;
}

enum class WilcoxonMethod : std::uint8_t { exact, normal_approx };

inline std::string_view to_string(WilcoxonMethod m) {
  return m == WilcoxonMethod::exact ? "exact" : "normal_approx";
}

struct WilcoxonResult {
  int n_effective = 0;
  /// min(W+, W-).
  double w_statistic = 0.0;
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p_value = 1.0;  // two-sided
  WilcoxonMethod method = WilcoxonMethod::exact;
};

/// Largest sample (after dropping zero differences) that uses the exact
/// null distribution.
inline constexpr int kWilcoxonExactMax = 25;

enum class WilcoxonMode : std::uint8_t { automatic, force_exact, force_normal };

namespace detail {

/// Mid-ranks of |d|, doubled so that tied ranks stay integral.
inline std::vector<std::int64_t> doubled_midranks(const std::vector<double>& abs_d,
                                                  std::vector<int>* tie_sizes) {
  const std::size_t n = abs_d.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return abs_d[a] < abs_d[b]; });
  std::vector<std::int64_t> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && abs_d[order[j + 1]] == abs_d[order[i]]) ++j;
    // ranks i+1 .. j+1, mean doubled = (i+1) + (j+1)
    const auto twice_mid = static_cast<std::int64_t>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = twice_mid;
    if (tie_sizes) tie_sizes->push_back(static_cast<int>(j - i + 1));
    i = j + 1;
  }
  return ranks;
}

/// Number of the 2^n sign assignments giving each doubled W+ value, by
/// dynamic programming over the ranks.
inline std::vector<double> signed_rank_counts(const std::vector<std::int64_t>& ranks2) {
  std::int64_t total = 0;
  for (auto r : ranks2) total += r;
  std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
  count[0] = 1.0;
  std::int64_t reach = 0;
  for (auto r : ranks2) {
    for (std::int64_t s = reach; s >= 0; --s) {
      if (count[s] != 0.0) count[s + r] += count[s];
    }
    reach += r;
  }
  return count;
}

inline double normal_two_sided(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

}  // namespace detail

/// Paired two-sided Wilcoxon signed-rank test on d = a - b. Zero differences
/// are dropped, |d| gets mid-ranks. Exact p counts sign assignments at least
/// as extreme as observed; the normal approximation uses a continuity
/// correction and tie-corrected variance.
inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                           WilcoxonMode mode = WilcoxonMode::automatic) {
  if (a.size() != b.size()) throw std::invalid_argument("wilcoxon: samples differ in length");
  if (a.size() < 5) throw std::invalid_argument("wilcoxon: need at least 5 pairs");

  std::vector<double> abs_d;
  std::vector<bool> positive;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (!std::isfinite(d)) throw std::invalid_argument("wilcoxon: non-finite difference");
    if (d == 0.0) continue;
    abs_d.push_back(std::abs(d));
    positive.push_back(d > 0.0);
  }

  WilcoxonResult res;
  res.n_effective = static_cast<int>(abs_d.size());
  if (res.n_effective == 0) return res;

  std::vector<int> ties;
  const auto ranks2 = detail::doubled_midranks(abs_d, &ties);
  std::int64_t plus2 = 0;
  std::int64_t total2 = 0;
  for (std::size_t i = 0; i < ranks2.size(); ++i) {
    total2 += ranks2[i];
    if (positive[i]) plus2 += ranks2[i];
  }
  res.w_plus = plus2 / 2.0;
  res.w_minus = (total2 - plus2) / 2.0;
  res.w_statistic = std::min(res.w_plus, res.w_minus);

  const bool exact = mode == WilcoxonMode::force_exact ||
                     (mode == WilcoxonMode::automatic && res.n_effective <= kWilcoxonExactMax);
  if (exact) {
    if (res.n_effective > 40) throw std::invalid_argument("wilcoxon: exact test too large");
    res.method = WilcoxonMethod::exact;
    const auto counts = detail::signed_rank_counts(ranks2);
    const std::int64_t w2 = std::min(plus2, total2 - plus2);
    double extreme = 0.0;
    double all = 0.0;
    for (std::size_t s = 0; s < counts.size(); ++s) {
      all += counts[s];
      const auto s2 = static_cast<std::int64_t>(s);
      if (std::min(s2, total2 - s2) <= w2) extreme += counts[s];
    }
    res.p_value = std::clamp(extreme / all, 0.0, 1.0);
    return res;
  }

  res.method = WilcoxonMethod::normal_approx;
  const double n = res.n_effective;
  const double mean = n * (n + 1.0) / 4.0;
  double tie_term = 0.0;
  for (int t : ties) tie_term += static_cast<double>(t) * t * t - t;
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
  if (!(var > 0.0)) {
    res.p_value = 1.0;
    return res;
  }
  const double dev = std::max(std::abs(res.w_plus - mean) - 0.5, 0.0);
  res.p_value = std::clamp(detail::normal_two_sided(dev / std::sqrt(var)), 0.0, 1.0);
  return res;
}

}  // namespace hanabi
