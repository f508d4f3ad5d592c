#pragma once

#include <array>
#include <string>
#include <vector>

#include "core/match.hpp"
#include "core/trueskill.hpp"

namespace peril {

struct TournamentConfig {
  int rounds = 49;
  uint64_t seed = 1;
  int jobs = 1;  // games within a round may play in parallel
  GameConfig game;
  TrueSkillConfig rating;
};

struct PlayerStanding {
  std::string persona_id;
  Rating rating;
  int wins = 0;
  int losses = 0;
  int draws = 0;
};

// Ratings of the two seats around one match's update, in match.players order.
struct MatchRatings {
  std::array<Rating, 2> before;
  std::array<Rating, 2> after;
};

struct TournamentResult {
  std::vector<PlayerStanding> standings;              // input profile order
  std::vector<MatchRecord> matches;                   // round-major, pairing order
  std::vector<MatchRatings> rating_trail;             // parallel to matches
  std::vector<std::vector<std::pair<int, int>>> pairings;  // per round, seat index pairs
};

// Uniform random perfect matching: a Fisher-Yates shuffle of the seats paired
// off consecutively (every matching arises from the same number of
// permutations). Error{Validation} on odd or < 2 player counts.
std::vector<std::pair<int, int>> schedule_round(int player_count, Rng& rng);

// Round-robin-free protocol: every round re-pairs all players at random, each
// pair plays one game, and every finished round applies rating updates
// sequentially in pairing order. Games inside a round are independent (played
// from derived seeds), so jobs > 1 changes wall time, never results. Draws
// are rated as synthetic losses for both sides.
TournamentResult run_tournament(const MapGraph& map,
                                const std::vector<HeuristicProfile>& profiles,
                                const TournamentConfig& config);

// Re-applies the rating pass over already-played matches; used to confirm a
// log reproduces the standings it shipped with.
std::vector<PlayerStanding> recompute_standings(const std::vector<MatchRecord>& matches,
                                                const std::vector<std::string>& persona_ids,
                                                const TrueSkillConfig& rating);

// Leaderboard rows sorted by mu descending, persona_id ascending on ties.
Json leaderboard_json(const TournamentResult& result);
void write_leaderboard(const std::string& path, const TournamentResult& result);
std::vector<PlayerStanding> load_leaderboard(const std::string& path);

}  // namespace peril
