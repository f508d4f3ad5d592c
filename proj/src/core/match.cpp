#include "core/match.hpp"

#include <sstream>

namespace peril {

namespace {

const char* status_name(GameStatus s) {
  switch (s) {
    case GameStatus::Ongoing: return "ongoing";
    case GameStatus::Won: return "won";
    case GameStatus::Draw: return "draw";
  }
  return "?";
}

GameStatus parse_status(const std::string& s, const std::string& origin) {
  if (s == "ongoing") return GameStatus::Ongoing;
  if (s == "won") return GameStatus::Won;
  if (s == "draw") return GameStatus::Draw;
  fail(ErrorKind::Validation, "unknown game status '" + s + "' (" + origin + ")");
}

Json snapshot_of(const GameState& s) {
  return Json{{"turn", s.turn}, {"owner", s.owner}, {"units", s.units}};
}

}  // namespace

Json MatchRecord::to_json() const {
  Json doc{{"game_id", game_id},
           {"seed", seed},
           {"map", map_name},
           {"players", players},
           {"status", status_name(status)},
           {"winner", winner},
           {"turns", turns}};
  if (!snapshots.empty()) doc["snapshots"] = snapshots;
  if (!moves.empty()) doc["moves"] = moves;
  return doc;
}

MatchRecord MatchRecord::from_json(const Json& doc, const std::string& origin) {
  if (!doc.is_object()) fail(ErrorKind::Validation, "match record must be an object (" + origin + ")");
  MatchRecord r;
  r.game_id = doc.value("game_id", std::string());
  r.seed = doc.value("seed", uint64_t{0});
  r.map_name = doc.value("map", std::string());
  if (doc.contains("players")) r.players = doc["players"].get<std::vector<std::string>>();
  r.status = parse_status(doc.value("status", std::string("ongoing")), origin);
  r.winner = doc.value("winner", -1);
  r.turns = doc.value("turns", int64_t{0});
  if (doc.contains("snapshots")) r.snapshots = doc["snapshots"].get<std::vector<Json>>();
  if (doc.contains("moves")) r.moves = doc["moves"].get<std::vector<Json>>();
  return r;
}

namespace {

struct Driver {
  const MapGraph& map;
  const std::vector<HeuristicProfile>& profiles;
  const GameConfig& config;
  const PlayOptions& options;
  Rng rng;
  GameState state;
  MatchRecord record;

  Driver(const MapGraph& m, const std::vector<HeuristicProfile>& p, const GameConfig& c,
         uint64_t seed, const PlayOptions& o)
      : map(m), profiles(p), config(c), options(o), rng(seed), state(initial_state(m, c)) {
    record.seed = seed;
    record.map_name = m.name();
    for (const HeuristicProfile& prof : p) record.players.push_back(prof.persona_id);
  }

  void log_move(const GameState& before, const MoveCandidate& mv,
                const std::optional<CombatOutcome>& combat, const GameState& after) {
    if (options.record_moves) {
      Json entry{{"turn", before.turn},
                 {"phase", phase_name(before.phase)},
                 {"player", before.current_player},
                 {"move", mv.describe(map)}};
      if (combat) {
        entry["combat"] = Json{{"attacker_losses", combat->attacker_losses},
                               {"defender_losses", combat->defender_losses},
                               {"conquered", combat->conquered},
                               {"moved_in", combat->moved_in}};
      }
      record.moves.push_back(std::move(entry));
    }
    if (options.observer) options.observer(before, mv, combat, after);
  }

  void step(const MoveCandidate& mv) {
    if (options.observer || options.record_moves) {
      GameState before = state;
      std::optional<CombatOutcome> combat = apply_move_in_place(state, mv, rng);
      log_move(before, mv, combat, state);
    } else {
      apply_move_in_place(state, mv, rng);
    }
  }

  void choose_and_step() {
    std::vector<MoveCandidate> cands = legal_moves(state, config);
    MoveCandidate mv = select_move(profiles[static_cast<size_t>(state.current_player)],
                                   state, cands, rng);
    step(mv);
  }

  void run_init() {
    state.phase = Phase::Init;
    int p = 0;
    const int np = config.players;
    while (true) {
      bool any_pool = false;
      for (int64_t pool : state.pools) any_pool |= (pool > 0);
      if (!any_pool) break;
      if (state.pools[static_cast<size_t>(p)] > 0) {
        state.current_player = p;
        choose_and_step();
      }
      p = (p + 1) % np;
    }
    if (options.record_snapshots) record.snapshots.push_back(snapshot_of(state));
  }

  // One player's full turn; true when the game ended inside it.
  bool run_turn(int player) {
    state.current_player = player;

    state.phase = Phase::Reinforce;
    state.pending_reinforcements = reinforcement_count(state, player);
    while (state.pending_reinforcements > 0) choose_and_step();

    state.phase = Phase::Attack;
    while (state.status == GameStatus::Ongoing) {
      std::vector<MoveCandidate> cands = legal_moves(state, config);
      if (cands.size() <= 1) break;  // only Pass left: nothing to attack
      MoveCandidate mv =
          select_move(profiles[static_cast<size_t>(player)], state, cands, rng);
      if (mv.kind == MoveCandidate::Kind::Pass) break;
      step(mv);
    }
    if (state.status != GameStatus::Ongoing) return true;

    state.phase = Phase::Redeploy;
    int64_t budget = state.regions_owned(player);
    while (budget-- > 0) {
      std::vector<MoveCandidate> cands = legal_moves(state, config);
      if (cands.size() <= 1) break;
      MoveCandidate mv =
          select_move(profiles[static_cast<size_t>(player)], state, cands, rng);
      if (mv.kind == MoveCandidate::Kind::Pass) break;
      step(mv);
    }
    return false;
  }

  MatchRecord run() {
    run_init();
    int np = config.players;
    int seat = 0;
    int64_t turn = 0;
    while (true) {
      // Seats rotate; eliminated players drop out of the rotation.
      int guard = 0;
      while (state.eliminated(seat) && guard++ <= np) seat = (seat + 1) % np;
      ++turn;
      if (turn > config.turn_limit) {
        state.status = GameStatus::Draw;
        state.turn = turn;
        break;
      }
      state.turn = turn;
      bool ended = run_turn(seat);
      if (options.record_snapshots) record.snapshots.push_back(snapshot_of(state));
      if (ended) break;
      seat = (seat + 1) % np;
    }
    record.status = state.status;
    record.winner = state.winner;
    record.turns = state.turn;
    return std::move(record);
  }
};

}  // namespace

MatchRecord play_game(const MapGraph& map, const std::vector<HeuristicProfile>& profiles,
                      const GameConfig& config, uint64_t seed, const PlayOptions& options) {
  if (static_cast<int>(profiles.size()) != config.players) {
    fail(ErrorKind::Validation,
         "need one profile per player: " + std::to_string(profiles.size()) + " profiles for " +
             std::to_string(config.players) + " players");
  }
  Driver driver(map, profiles, config, seed, options);
  return driver.run();
}

void export_replay(const MatchRecord& record, const std::string& path) {
  if (record.snapshots.empty()) {
    fail(ErrorKind::Validation, "match record for game '" + record.game_id +
                                    "' carries no snapshots; re-play it with snapshots on");
  }
  std::ostringstream out;
  Json header{{"game_id", record.game_id}, {"seed", record.seed},
              {"map", record.map_name},   {"players", record.players},
              {"status", record.to_json()["status"]},
              {"winner", record.winner},  {"turns", record.turns}};
  out << header.dump() << "\n";
  for (const Json& snap : record.snapshots) out << snap.dump() << "\n";
  write_text_file(path, out.str());
}

}  // namespace peril
