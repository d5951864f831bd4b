#pragma once

// Report files.
//
// games.csv, one row per game, columns in this order:
//   matchup,game,seed,score,terminal,
//   seat0_turns,seat0_plays,seat0_discards,seat0_hints_color,seat0_hints_rank,
//   seat1_turns,seat1_plays,seat1_discards,seat1_hints_color,seat1_hints_rank
//
// summary.json: {"manifest": RunManifest, "summaries": [MatchSummary...]}
// plus optional experiment-specific sections ("ablation", "comparison").

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hanabi_td/config.hpp"
#include "hanabi_td/stats.hpp"

#ifndef HANABI_TD_VERSION
#define HANABI_TD_VERSION "0.0.0"
#endif

namespace hanabi {

inline constexpr std::string_view kCsvHeader =
    "matchup,game,seed,score,terminal,"
    "seat0_turns,seat0_plays,seat0_discards,seat0_hints_color,seat0_hints_rank,"
    "seat1_turns,seat1_plays,seat1_discards,seat1_hints_color,seat1_hints_rank";

inline void write_games_csv(std::span<const GameRecord> records, std::ostream& os) {
  os << kCsvHeader << '\n';
  for (const auto& r : records) {
    os << r.matchup << ',' << r.game << ',' << r.seed << ',' << r.score << ','
       << to_string(r.terminal);
    for (const auto& s : r.seats) {
      os << ',' << s.turns << ',' << s.plays << ',' << s.discards << ',' << s.hints_color << ','
         << s.hints_rank;
    }
    os << '\n';
  }
}

struct RunManifest {
  std::string command;
  json config = json::object();
  std::string code_version = HANABI_TD_VERSION;
  std::string prng = std::string(kPrngName);
  std::string started;
  std::string finished;
  std::vector<std::string> outputs;

  bool operator==(const RunManifest&) const = default;
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json to_json(const RunManifest& m) {
  return {{"command", m.command},     {"config", m.config},   {"code_version", m.code_version},
          {"prng", m.prng},           {"started", m.started}, {"finished", m.finished},
          {"outputs", m.outputs}};
}

inline RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.config = j.at("config");
  m.code_version = j.at("code_version").get<std::string>();
  m.prng = j.at("prng").get<std::string>();
  m.started = j.at("started").get<std::string>();
  m.finished = j.at("finished").get<std::string>();
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  return m;
}

inline json to_json(const SeatSummary& s) {
  return {{"turns", s.turns},       {"plays", s.plays},
          {"discards", s.discards}, {"hints", s.hints},
          {"hints_color", s.hints_color}, {"hints_rank", s.hints_rank}};
}

inline SeatSummary seat_summary_from_json(const json& j) {
  SeatSummary s;
  s.turns = j.at("turns").get<double>();
  s.plays = j.at("plays").get<double>();
  s.discards = j.at("discards").get<double>();
  s.hints = j.at("hints").get<double>();
  s.hints_color = j.at("hints_color").get<double>();
  s.hints_rank = j.at("hints_rank").get<double>();
  return s;
}

inline json to_json(const MatchSummary& s) {
  return {{"matchup", s.matchup},
          {"games", s.games},
          {"score_mean", s.score_mean},
          {"score_stddev", s.score_stddev},
          {"seats", {to_json(s.seats[0]), to_json(s.seats[1])}},
          {"combined", to_json(s.combined)},
          {"terminal_counts", s.terminal_counts}};
}

inline MatchSummary summary_from_json(const json& j) {
  MatchSummary s;
  s.matchup = j.at("matchup").get<std::string>();
  s.games = j.at("games").get<int>();
  s.score_mean = j.at("score_mean").get<double>();
  s.score_stddev = j.at("score_stddev").get<double>();
  const auto& seats = j.at("seats");
  if (seats.size() != kNumPlayers) throw ConfigError("summary needs two seats");
  s.seats[0] = seat_summary_from_json(seats[0]);
  s.seats[1] = seat_summary_from_json(seats[1]);
  s.combined = seat_summary_from_json(j.at("combined"));
  s.terminal_counts = j.at("terminal_counts").get<std::map<std::string, int>>();
  return s;
}

inline std::vector<MatchSummary> summaries_from_json(const json& j) {
  std::vector<MatchSummary> out;
  for (const auto& s : j.at("summaries")) out.push_back(summary_from_json(s));
  return out;
}

namespace detail {

inline std::ofstream open_for_write(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory " + dir.string());
  }
}

}  // namespace detail

/// Writes games.csv and summary.json into `dir` and records both in the
/// manifest. `extra` entries are merged into the summary document.
inline void emit_reports(std::span<const GameRecord> records,
                         std::span<const MatchSummary> summaries, RunManifest& manifest,
                         const std::filesystem::path& dir, const json& extra = json::object()) {
  detail::ensure_dir(dir);
  const auto csv_path = dir / "games.csv";
  const auto json_path = dir / "summary.json";
  {
    auto os = detail::open_for_write(csv_path);
    write_games_csv(records, os);
    if (!os) throw std::runtime_error("cannot write " + csv_path.string());
  }
  manifest.outputs = {csv_path.string(), json_path.string()};
  if (manifest.finished.empty()) manifest.finished = utc_timestamp();

  json doc{{"manifest", to_json(manifest)}, {"summaries", json::array()}};
  for (const auto& s : summaries) doc["summaries"].push_back(to_json(s));
  for (const auto& [k, v] : extra.items()) doc[k] = v;
  auto os = detail::open_for_write(json_path);
  os << doc.dump(2) << '\n';
  if (!os) throw std::runtime_error("cannot write " + json_path.string());
}

}  // namespace hanabi
