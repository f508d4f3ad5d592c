#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/map.hpp"
#include "core/rng.hpp"

namespace peril {

enum class Phase : uint8_t { Init, Reinforce, Attack, Redeploy };
enum class GameStatus : uint8_t { Ongoing, Won, Draw };

const char* phase_name(Phase p);

struct GameConfig {
  int players = 2;             // 2..6
  int64_t initial_units = 40;  // per player, placed during Init
  int64_t turn_limit = 250;    // a turn is one player's full sequence; 0 draws immediately
  // Attack commitment and redeploy magnitude both default to "everything but
  // one": Max commits units-1, Half commits ceil((units-1)/2).
  enum class CommitPolicy : uint8_t { Max, Half } commit_policy = CommitPolicy::Max;

  // Error{Validation} when the config cannot produce a legal game on `map`
  // (too few/many players, pools too small to occupy every region, ...).
  void validate(const MapGraph& map) const;
  int64_t commit_size(int64_t units_on_region) const;

  Json to_json() const;  // keys: players, initial_units, turn_limit, commit_policy
  static GameConfig from_json(const Json& doc, const std::string& origin);
};

struct MoveCandidate {
  enum class Kind : uint8_t { Place, Attack, Redeploy, Pass };
  Kind kind = Kind::Pass;
  int from = -1;
  int to = -1;        // Place target lives here too
  int64_t count = 0;  // attack commitment / redeploy magnitude

  static MoveCandidate place(int region) { return {Kind::Place, -1, region, 1}; }
  static MoveCandidate attack(int from, int to, int64_t committed) {
    return {Kind::Attack, from, to, committed};
  }
  static MoveCandidate redeploy(int from, int to, int64_t count) {
    return {Kind::Redeploy, from, to, count};
  }
  static MoveCandidate pass() { return {}; }

  bool operator==(const MoveCandidate& o) const = default;
  std::string describe(const MapGraph& map) const;
};

// Full game position. `owner[r] == -1` only before Init has reached r.
struct GameState {
  const MapGraph* map = nullptr;
  std::vector<int> owner;
  std::vector<int64_t> units;
  std::vector<int64_t> pools;            // per player, Init placement stock
  int64_t pending_reinforcements = 0;    // units left to place this Reinforce phase
  Phase phase = Phase::Init;
  int current_player = 0;
  int64_t turn = 0;  // 0 during Init, then 1-based per player-turn
  GameStatus status = GameStatus::Ongoing;
  int winner = -1;

  int player_count() const { return static_cast<int>(pools.size()); }
  int64_t regions_owned(int player) const;
  int64_t units_owned(int player) const;
  bool eliminated(int player) const { return regions_owned(player) == 0 && pools[static_cast<size_t>(player)] == 0; }
};

// Fresh position in Init phase: nothing owned, every pool at initial_units.
GameState initial_state(const MapGraph& map, const GameConfig& config);

// Reinforcements granted to `player` at the start of their turn:
// max(3, floor(owned_regions / 3)) plus the bonus of every zone the player
// owns completely. Error{Logic} if the player is eliminated.
int64_t reinforcement_count(const GameState& state, int player);

// Legal moves for (state.phase, state.current_player), ordered by (from, to).
//   Init/Reinforce: Place on unoccupied regions while any exist, else own regions.
//   Attack: one candidate per owned region with units >= 2 and enemy neighbor,
//           committed sized by config policy baked in by the caller via
//           `commit`; plus Pass.
//   Redeploy: owned source with units >= 2 to any other owned region reachable
//             through owned regions, moving units-1; plus Pass.
// Empty only when the phase has nothing to do (Init with empty pool,
// Reinforce with nothing pending); the driver then advances the phase.
std::vector<MoveCandidate> legal_moves(const GameState& state, const GameConfig& config);

struct CombatOutcome {
  int64_t attacker_losses = 0;
  int64_t defender_losses = 0;
  bool conquered = false;
  int64_t moved_in = 0;  // surviving committed units entering the region
};

// One dice round on already-rolled dice, highest first comparisons, defender
// wins ties. Returns {attacker_losses, defender_losses}.
std::pair<int, int> combat_round(std::vector<int> attacker_dice,
                                 std::vector<int> defender_dice);

// Full battle: attacker rolls min(3, committed) dice, defender min(2, units),
// losses applied per round, repeated until one side is exhausted. Conquest
// moves every surviving committed unit in. `roll` must return 1..6.
template <typename RollFn>
CombatOutcome resolve_combat_with(int64_t committed, int64_t defenders, RollFn&& roll) {
  if (committed < 1) fail(ErrorKind::Logic, "combat needs committed >= 1");
  if (defenders < 1) fail(ErrorKind::Logic, "combat needs defenders >= 1");
  CombatOutcome out;
  int64_t att = committed;
  int64_t def = defenders;
  while (att > 0 && def > 0) {
    std::vector<int> ad(static_cast<size_t>(std::min<int64_t>(3, att)));
    std::vector<int> dd(static_cast<size_t>(std::min<int64_t>(2, def)));
    for (int& d : ad) d = roll();
    for (int& d : dd) d = roll();
    auto [al, dl] = combat_round(std::move(ad), std::move(dd));
    att -= al;
    def -= dl;
    out.attacker_losses += al;
    out.defender_losses += dl;
  }
  out.conquered = (def == 0);
  out.moved_in = out.conquered ? att : 0;
  return out;
}

CombatOutcome resolve_combat(int64_t committed, int64_t defenders, Rng& rng);

// Performs one move on the state. Validates legality and reports the violated
// rule by name in Error{Logic}. Attack moves run combat (consuming rng) and
// flip status to Won when the mover takes the last region. No phase or player
// rotation happens here; the game driver owns sequencing. Commitment sizes are
// validated against the board (1..units-1), not against any policy, so
// hand-built moves stay expressible.
std::optional<CombatOutcome> apply_move_in_place(GameState& state,
                                                 const MoveCandidate& move, Rng& rng);

// Pure flavor of the same operation.
GameState apply_move(const GameState& state, const MoveCandidate& move, Rng& rng);

}  // namespace peril
