#include "core/game.hpp"

#include <algorithm>
#include <functional>

namespace peril {

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::Init: return "init";
    case Phase::Reinforce: return "reinforce";
    case Phase::Attack: return "attack";
    case Phase::Redeploy: return "redeploy";
  }
  return "?";
}

void GameConfig::validate(const MapGraph& map) const {
  if (players < 2 || players > 6) {
    fail(ErrorKind::Validation, "player count must be 2..6, got " + std::to_string(players));
  }
  if (initial_units < 1) fail(ErrorKind::Validation, "initial_units must be >= 1");
  if (turn_limit < 0) fail(ErrorKind::Validation, "turn_limit must be >= 0");
  int64_t total = initial_units * players;
  if (total < map.region_count()) {
    fail(ErrorKind::Validation,
         "initial pools (" + std::to_string(total) + ") cannot occupy all " +
             std::to_string(map.region_count()) + " regions of map '" + map.name() + "'");
  }
}

int64_t GameConfig::commit_size(int64_t units_on_region) const {
  int64_t spare = units_on_region - 1;
  if (spare < 1) return 0;
  if (commit_policy == CommitPolicy::Half) return (spare + 1) / 2;
  return spare;
}

Json GameConfig::to_json() const {
  return Json{{"players", players},
              {"initial_units", initial_units},
              {"turn_limit", turn_limit},
              {"commit_policy", commit_policy == CommitPolicy::Half ? "half" : "max"}};
}

GameConfig GameConfig::from_json(const Json& doc, const std::string& origin) {
  if (!doc.is_object()) fail(ErrorKind::Validation, "game config must be an object (" + origin + ")");
  GameConfig cfg;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    const Json& v = it.value();
    if (key == "commit_policy") {
      if (v == "max") cfg.commit_policy = CommitPolicy::Max;
      else if (v == "half") cfg.commit_policy = CommitPolicy::Half;
      else fail(ErrorKind::Validation, "commit_policy must be 'max' or 'half' (" + origin + ")");
      continue;
    }
    if (!v.is_number_integer()) {
      fail(ErrorKind::Validation, "game config " + key + " must be an integer (" + origin + ")");
    }
    if (key == "players") cfg.players = v.get<int>();
    else if (key == "initial_units") cfg.initial_units = v.get<int64_t>();
    else if (key == "turn_limit") cfg.turn_limit = v.get<int64_t>();
    else fail(ErrorKind::Validation, "unknown game config key '" + key + "' (" + origin + ")");
  }
  if (cfg.players < 2 || cfg.players > 6 || cfg.initial_units < 1 || cfg.turn_limit < 0) {
    fail(ErrorKind::Validation, "game config out of range (" + origin + ")");
  }
  return cfg;
}

std::string MoveCandidate::describe(const MapGraph& map) const {
  auto rid = [&](int r) { return r >= 0 && r < map.region_count() ? map.region(r).id : std::string("?"); };
  switch (kind) {
    case Kind::Place: return "place 1 on " + rid(to);
    case Kind::Attack:
      return "attack " + rid(to) + " from " + rid(from) + " committing " + std::to_string(count);
    case Kind::Redeploy:
      return "redeploy " + std::to_string(count) + " from " + rid(from) + " to " + rid(to);
    case Kind::Pass: return "pass";
  }
  return "?";
}

int64_t GameState::regions_owned(int player) const {
  int64_t n = 0;
  for (int o : owner) n += (o == player);
  return n;
}

int64_t GameState::units_owned(int player) const {
  int64_t n = 0;
  for (size_t r = 0; r < owner.size(); ++r) {
    if (owner[r] == player) n += units[r];
  }
  return n;
}

GameState initial_state(const MapGraph& map, const GameConfig& config) {
  config.validate(map);
  GameState s;
  s.map = &map;
  s.owner.assign(static_cast<size_t>(map.region_count()), -1);
  s.units.assign(static_cast<size_t>(map.region_count()), 0);
  s.pools.assign(static_cast<size_t>(config.players), config.initial_units);
  s.phase = Phase::Init;
  s.current_player = 0;
  s.turn = 0;
  return s;
}

int64_t reinforcement_count(const GameState& state, int player) {
  int64_t owned = state.regions_owned(player);
  if (owned == 0) {
    fail(ErrorKind::Logic, "reinforcement_count for eliminated player " + std::to_string(player));
  }
  int64_t count = std::max<int64_t>(3, owned / 3);
  const MapGraph& map = *state.map;
  for (int z = 0; z < map.zone_count(); ++z) {
    const Zone& zone = map.zone(z);
    bool full = true;
    for (int r : zone.members) {
      if (state.owner[static_cast<size_t>(r)] != player) {
        full = false;
        break;
      }
    }
    if (full) count += zone.bonus;
  }
  return count;
}

namespace {

// Region indices of `player`'s holdings reachable from `from` through owned
// regions only, excluding `from` itself.
std::vector<int> owned_reachable(const GameState& s, int player, int from) {
  const MapGraph& map = *s.map;
  std::vector<bool> seen(static_cast<size_t>(map.region_count()), false);
  std::vector<int> stack{from};
  seen[static_cast<size_t>(from)] = true;
  std::vector<int> found;
  while (!stack.empty()) {
    int r = stack.back();
    stack.pop_back();
    for (int nb : map.neighbors(r)) {
      if (!seen[static_cast<size_t>(nb)] && s.owner[static_cast<size_t>(nb)] == player) {
        seen[static_cast<size_t>(nb)] = true;
        stack.push_back(nb);
        found.push_back(nb);
      }
    }
  }
  std::sort(found.begin(), found.end());
  return found;
}

}  // namespace

std::vector<MoveCandidate> legal_moves(const GameState& state, const GameConfig& config) {
  std::vector<MoveCandidate> moves;
  const MapGraph& map = *state.map;
  const int me = state.current_player;
  if (state.status != GameStatus::Ongoing) return moves;

  switch (state.phase) {
    case Phase::Init: {
      if (state.pools[static_cast<size_t>(me)] <= 0) return moves;
      bool any_unowned = std::any_of(state.owner.begin(), state.owner.end(),
                                     [](int o) { return o == -1; });
      for (int r = 0; r < map.region_count(); ++r) {
        int o = state.owner[static_cast<size_t>(r)];
        if ((any_unowned && o == -1) || (!any_unowned && o == me)) {
          moves.push_back(MoveCandidate::place(r));
        }
      }
      return moves;
    }
    case Phase::Reinforce: {
      if (state.pending_reinforcements <= 0) return moves;
      for (int r = 0; r < map.region_count(); ++r) {
        if (state.owner[static_cast<size_t>(r)] == me) moves.push_back(MoveCandidate::place(r));
      }
      return moves;
    }
    case Phase::Attack: {
      for (int from = 0; from < map.region_count(); ++from) {
        if (state.owner[static_cast<size_t>(from)] != me) continue;
        if (state.units[static_cast<size_t>(from)] < 2) continue;
        int64_t committed = config.commit_size(state.units[static_cast<size_t>(from)]);
        for (int to : map.neighbors(from)) {
          int o = state.owner[static_cast<size_t>(to)];
          if (o != -1 && o != me) moves.push_back(MoveCandidate::attack(from, to, committed));
        }
      }
      moves.push_back(MoveCandidate::pass());
      return moves;
    }
    case Phase::Redeploy: {
      for (int from = 0; from < map.region_count(); ++from) {
        if (state.owner[static_cast<size_t>(from)] != me) continue;
        if (state.units[static_cast<size_t>(from)] < 2) continue;
        int64_t count = state.units[static_cast<size_t>(from)] - 1;
        for (int to : owned_reachable(state, me, from)) {
          moves.push_back(MoveCandidate::redeploy(from, to, count));
        }
      }
      moves.push_back(MoveCandidate::pass());
      return moves;
    }
  }
  return moves;
}

std::pair<int, int> combat_round(std::vector<int> attacker_dice,
                                 std::vector<int> defender_dice) {
  if (attacker_dice.empty() || defender_dice.empty()) {
    fail(ErrorKind::Logic, "combat_round needs dice on both sides");
  }
  std::sort(attacker_dice.begin(), attacker_dice.end(), std::greater<int>());
  std::sort(defender_dice.begin(), defender_dice.end(), std::greater<int>());
  size_t pairs = std::min(attacker_dice.size(), defender_dice.size());
  int att_loss = 0, def_loss = 0;
  for (size_t i = 0; i < pairs; ++i) {
    if (attacker_dice[i] > defender_dice[i]) ++def_loss;
    else ++att_loss;  // defender wins ties
  }
  return {att_loss, def_loss};
}

CombatOutcome resolve_combat(int64_t committed, int64_t defenders, Rng& rng) {
  return resolve_combat_with(committed, defenders, [&rng]() { return rng.roll_d6(); });
}

namespace {

[[noreturn]] void illegal(const GameState& s, const MoveCandidate& m, const std::string& rule) {
  fail(ErrorKind::Logic,
       "illegal move (" + m.describe(*s.map) + ") in phase " + phase_name(s.phase) + ": " + rule);
}

void check_region(const GameState& s, const MoveCandidate& m, int r, const char* which) {
  if (r < 0 || r >= s.map->region_count()) {
    illegal(s, m, std::string(which) + " region index out of range");
  }
}

}  // namespace

std::optional<CombatOutcome> apply_move_in_place(GameState& state, const MoveCandidate& move,
                                                 Rng& rng) {
  if (state.status != GameStatus::Ongoing) illegal(state, move, "game already decided");
  const int me = state.current_player;

  switch (move.kind) {
    case MoveCandidate::Kind::Place: {
      if (state.phase != Phase::Init && state.phase != Phase::Reinforce) {
        illegal(state, move, "placement only happens in init or reinforce");
      }
      check_region(state, move, move.to, "target");
      int o = state.owner[static_cast<size_t>(move.to)];
      if (state.phase == Phase::Init) {
        if (state.pools[static_cast<size_t>(me)] <= 0) illegal(state, move, "init pool exhausted");
        bool any_unowned = std::any_of(state.owner.begin(), state.owner.end(),
                                       [](int ow) { return ow == -1; });
        if (any_unowned && o != -1) {
          illegal(state, move, "unoccupied regions must be claimed before stacking");
        }
        if (!any_unowned && o != me) illegal(state, move, "placement target not owned");
        state.pools[static_cast<size_t>(me)] -= 1;
      } else {
        if (state.pending_reinforcements <= 0) illegal(state, move, "no reinforcements pending");
        if (o != me) illegal(state, move, "placement target not owned");
        state.pending_reinforcements -= 1;
      }
      state.owner[static_cast<size_t>(move.to)] = me;
      state.units[static_cast<size_t>(move.to)] += 1;
      return std::nullopt;
    }

    case MoveCandidate::Kind::Attack: {
      if (state.phase != Phase::Attack) illegal(state, move, "attack outside attack phase");
      check_region(state, move, move.from, "source");
      check_region(state, move, move.to, "target");
      if (state.owner[static_cast<size_t>(move.from)] != me) illegal(state, move, "source not owned");
      int defender = state.owner[static_cast<size_t>(move.to)];
      if (defender == me || defender == -1) illegal(state, move, "target not enemy-owned");
      if (!state.map->adjacent(move.from, move.to)) illegal(state, move, "target not adjacent to source");
      int64_t src_units = state.units[static_cast<size_t>(move.from)];
      if (src_units < 2) illegal(state, move, "source needs at least 2 units");
      if (move.count < 1 || move.count > src_units - 1) {
        illegal(state, move, "commitment must leave one unit behind");
      }
      state.units[static_cast<size_t>(move.from)] -= move.count;
      CombatOutcome out = resolve_combat(move.count, state.units[static_cast<size_t>(move.to)], rng);
      if (out.conquered) {
        state.owner[static_cast<size_t>(move.to)] = me;
        state.units[static_cast<size_t>(move.to)] = out.moved_in;
        bool all_mine = std::all_of(state.owner.begin(), state.owner.end(),
                                    [me](int o) { return o == me; });
        if (all_mine) {
          state.status = GameStatus::Won;
          state.winner = me;
        }
      } else {
        state.units[static_cast<size_t>(move.to)] -= out.defender_losses;
      }
      return out;
    }

    case MoveCandidate::Kind::Redeploy: {
      if (state.phase != Phase::Redeploy) illegal(state, move, "redeploy outside redeploy phase");
      check_region(state, move, move.from, "source");
      check_region(state, move, move.to, "target");
      if (move.from == move.to) illegal(state, move, "source and target must differ");
      if (state.owner[static_cast<size_t>(move.from)] != me) illegal(state, move, "source not owned");
      if (state.owner[static_cast<size_t>(move.to)] != me) illegal(state, move, "target not owned");
      int64_t src_units = state.units[static_cast<size_t>(move.from)];
      if (src_units < 2) illegal(state, move, "source needs at least 2 units");
      if (move.count < 1 || move.count > src_units - 1) {
        illegal(state, move, "redeploy must leave one unit behind");
      }
      std::vector<int> reachable = owned_reachable(state, me, move.from);
      if (!std::binary_search(reachable.begin(), reachable.end(), move.to)) {
        illegal(state, move, "target not connected through owned regions");
      }
      state.units[static_cast<size_t>(move.from)] -= move.count;
      state.units[static_cast<size_t>(move.to)] += move.count;
      return std::nullopt;
    }

    case MoveCandidate::Kind::Pass: {
      if (state.phase != Phase::Attack && state.phase != Phase::Redeploy) {
        illegal(state, move, "pass only allowed in attack or redeploy");
      }
      return std::nullopt;
    }
  }
  illegal(state, move, "unknown move kind");
}

GameState apply_move(const GameState& state, const MoveCandidate& move, Rng& rng) {
  GameState next = state;
  apply_move_in_place(next, move, rng);
  return next;
}

}  // namespace peril
