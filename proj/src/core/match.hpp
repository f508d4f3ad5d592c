#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "core/game.hpp"
#include "core/heuristics.hpp"

namespace peril {

// Everything a finished game leaves behind. Snapshots (one after Init, one
// after every player-turn) and the move log are recorded only when asked;
// tournament logs keep records lean and rebuild replays by re-running the
// seed.
struct MatchRecord {
  std::string game_id;
  uint64_t seed = 0;
  std::string map_name;
  std::vector<std::string> players;  // persona_id per seat
  GameStatus status = GameStatus::Ongoing;
  int winner = -1;  // seat index; -1 on draw
  int64_t turns = 0;
  std::vector<Json> snapshots;
  std::vector<Json> moves;

  Json to_json() const;
  static MatchRecord from_json(const Json& doc, const std::string& origin);
};

struct PlayOptions {
  bool record_snapshots = false;
  bool record_moves = false;
  // Invoked after every applied move with the post-move state. `before` is the
  // pre-move state; combat present only for attacks.
  std::function<void(const GameState& before, const MoveCandidate& move,
                     const std::optional<CombatOutcome>& combat, const GameState& after)>
      observer;
};

// Plays one full game. One profile per seat (2..6). The whole run consumes a
// single RNG stream seeded with `seed`, so (map, profiles, config, seed)
// determines every byte of the record.
//
// Sequencing: Init alternates single placements (unoccupied first) until all
// pools are empty. Then per-turn: Reinforce places the granted units one
// decision at a time; Attack repeats until Pass is selected or no attack is
// legal; Redeploy repeats until Pass, no legal move, or one decision per
// owned region has been spent (a PASS weight of 0 never passes, so the budget
// is what guarantees the subphase ends). The draw rule fires when the next
// turn index would exceed config.turn_limit.
MatchRecord play_game(const MapGraph& map, const std::vector<HeuristicProfile>& profiles,
                      const GameConfig& config, uint64_t seed,
                      const PlayOptions& options = {});

// Writes record.snapshots as NDJSON, one board snapshot per line.
// Error{Validation} when the record carries no snapshots.
void export_replay(const MatchRecord& record, const std::string& path);

}  // namespace peril
