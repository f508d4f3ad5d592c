#include "core/tournament.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>

namespace peril {

std::vector<std::pair<int, int>> schedule_round(int player_count, Rng& rng) {
  if (player_count < 2 || player_count % 2 != 0) {
    fail(ErrorKind::Validation,
         "scheduling needs an even player count >= 2, got " + std::to_string(player_count));
  }
  std::vector<int> seats(static_cast<size_t>(player_count));
  for (int i = 0; i < player_count; ++i) seats[static_cast<size_t>(i)] = i;
  rng.shuffle(seats);
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<size_t>(player_count / 2));
  for (size_t i = 0; i + 1 < seats.size(); i += 2) pairs.push_back({seats[i], seats[i + 1]});
  return pairs;
}

namespace {

std::string pad2(int v) {
  std::string s = std::to_string(v);
  return s.size() < 2 ? "0" + s : s;
}

MatchRatings apply_match(std::vector<PlayerStanding>& standings,
                         const std::map<std::string, size_t>& seat_of, const MatchRecord& match,
                         const TrueSkillConfig& rating) {
  if (match.players.size() != 2) {
    fail(ErrorKind::Validation, "rating pass expects two-player matches, game '" +
                                    match.game_id + "' has " +
                                    std::to_string(match.players.size()));
  }
  auto a_it = seat_of.find(match.players[0]);
  auto b_it = seat_of.find(match.players[1]);
  if (a_it == seat_of.end() || b_it == seat_of.end()) {
    fail(ErrorKind::Validation, "game '" + match.game_id + "' names an unknown player");
  }
  PlayerStanding& a = standings[a_it->second];
  PlayerStanding& b = standings[b_it->second];
  MatchRatings trail;
  trail.before = {a.rating, b.rating};
  if (match.status == GameStatus::Draw) {
    a.rating = rate_draw_as_loss(a.rating, rating);
    b.rating = rate_draw_as_loss(b.rating, rating);
    a.draws += 1;
    b.draws += 1;
    trail.after = {a.rating, b.rating};
    return trail;
  }
  if (match.status != GameStatus::Won || (match.winner != 0 && match.winner != 1)) {
    fail(ErrorKind::Validation, "game '" + match.game_id + "' has no usable outcome");
  }
  PlayerStanding& w = match.winner == 0 ? a : b;
  PlayerStanding& l = match.winner == 0 ? b : a;
  auto [nw, nl] = update_two_player(w.rating, l.rating, rating);
  w.rating = nw;
  l.rating = nl;
  w.wins += 1;
  l.losses += 1;
  trail.after = {a.rating, b.rating};
  return trail;
}

}  // namespace

TournamentResult run_tournament(const MapGraph& map,
                                const std::vector<HeuristicProfile>& profiles,
                                const TournamentConfig& config) {
  const int n = static_cast<int>(profiles.size());
  if (n < 2 || n % 2 != 0) {
    fail(ErrorKind::Validation,
         "tournament needs an even number of players >= 2, got " + std::to_string(n));
  }
  if (config.rounds < 1) fail(ErrorKind::Validation, "tournament needs rounds >= 1");
  std::map<std::string, size_t> seat_of;
  for (size_t i = 0; i < profiles.size(); ++i) {
    if (profiles[i].persona_id.empty()) {
      fail(ErrorKind::Validation, "tournament profiles need non-empty persona_id (seat " +
                                      std::to_string(i) + ")");
    }
    if (!seat_of.emplace(profiles[i].persona_id, i).second) {
      fail(ErrorKind::Validation,
           "duplicate persona_id in tournament field: '" + profiles[i].persona_id + "'");
    }
  }
  GameConfig game_config = config.game;
  game_config.players = 2;
  game_config.validate(map);

  TournamentResult result;
  result.standings.resize(profiles.size());
  for (size_t i = 0; i < profiles.size(); ++i) {
    result.standings[i].persona_id = profiles[i].persona_id;
    result.standings[i].rating = {config.rating.mu0, config.rating.sigma0};
  }

  for (int round = 0; round < config.rounds; ++round) {
    Rng sched_rng(derive_seed(config.seed, 0x5ced0000ULL + static_cast<uint64_t>(round), 0));
    std::vector<std::pair<int, int>> pairs = schedule_round(n, sched_rng);
    result.pairings.push_back(pairs);

    std::vector<MatchRecord> round_matches(pairs.size());
    auto play_one = [&](size_t g) {
      auto [a, b] = pairs[g];
      std::vector<HeuristicProfile> seats{profiles[static_cast<size_t>(a)],
                                          profiles[static_cast<size_t>(b)]};
      uint64_t game_seed =
          derive_seed(config.seed, static_cast<uint64_t>(round) + 1, static_cast<uint64_t>(g) + 1);
      MatchRecord rec = play_game(map, seats, game_config, game_seed);
      rec.game_id = "r" + pad2(round + 1) + "_g" + pad2(static_cast<int>(g) + 1);
      round_matches[g] = std::move(rec);
    };

    int jobs = std::max(1, config.jobs);
    if (jobs == 1 || pairs.size() <= 1) {
      for (size_t g = 0; g < pairs.size(); ++g) play_one(g);
    } else {
      std::atomic<size_t> next{0};
      std::vector<std::thread> workers;
      size_t nworkers = std::min<size_t>(static_cast<size_t>(jobs), pairs.size());
      workers.reserve(nworkers);
      for (size_t t = 0; t < nworkers; ++t) {
        workers.emplace_back([&] {
          for (size_t g = next.fetch_add(1); g < pairs.size(); g = next.fetch_add(1)) {
            play_one(g);
          }
        });
      }
      for (std::thread& t : workers) t.join();
    }

    // Rating updates stay strictly sequential in pairing order regardless of
    // how the games were executed.
    for (const MatchRecord& match : round_matches) {
      result.rating_trail.push_back(apply_match(result.standings, seat_of, match, config.rating));
    }
    for (MatchRecord& match : round_matches) result.matches.push_back(std::move(match));
  }
  return result;
}

std::vector<PlayerStanding> recompute_standings(const std::vector<MatchRecord>& matches,
                                                const std::vector<std::string>& persona_ids,
                                                const TrueSkillConfig& rating) {
  std::vector<PlayerStanding> standings(persona_ids.size());
  std::map<std::string, size_t> seat_of;
  for (size_t i = 0; i < persona_ids.size(); ++i) {
    standings[i].persona_id = persona_ids[i];
    standings[i].rating = {rating.mu0, rating.sigma0};
    seat_of[persona_ids[i]] = i;
  }
  for (const MatchRecord& match : matches) apply_match(standings, seat_of, match, rating);
  return standings;
}

Json leaderboard_json(const TournamentResult& result) {
  std::vector<size_t> order(result.standings.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
    const PlayerStanding& a = result.standings[x];
    const PlayerStanding& b = result.standings[y];
    if (a.rating.mu != b.rating.mu) return a.rating.mu > b.rating.mu;
    return a.persona_id < b.persona_id;
  });
  Json rows = Json::array();
  int rank = 1;
  for (size_t ix : order) {
    const PlayerStanding& s = result.standings[ix];
    rows.push_back(Json{{"rank", rank++},
                        {"persona_id", s.persona_id},
                        {"mu", s.rating.mu},
                        {"sigma", s.rating.sigma},
                        {"wins", s.wins},
                        {"losses", s.losses},
                        {"draws", s.draws}});
  }
  return rows;
}

void write_leaderboard(const std::string& path, const TournamentResult& result) {
  std::vector<Json> rows;
  for (const Json& row : leaderboard_json(result)) rows.push_back(row);
  write_ndjson_file(path, rows);
}

std::vector<PlayerStanding> load_leaderboard(const std::string& path) {
  std::vector<PlayerStanding> out;
  for (const Json& row : read_ndjson_file(path)) {
    if (!row.is_object() || !row.contains("persona_id") || !row.contains("mu")) {
      fail(ErrorKind::Validation, "leaderboard rows need persona_id and mu (" + path + ")");
    }
    PlayerStanding s;
    s.persona_id = row["persona_id"].get<std::string>();
    s.rating.mu = row["mu"].get<double>();
    s.rating.sigma = row.value("sigma", 25.0 / 3.0);
    s.wins = row.value("wins", 0);
    s.losses = row.value("losses", 0);
    s.draws = row.value("draws", 0);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace peril
