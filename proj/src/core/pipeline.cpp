#include "core/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "core/analysis.hpp"
#include "core/tournament.hpp"

namespace peril {

namespace {

namespace fs = std::filesystem;

void ensure_parent_dir(const std::string& path) {
  fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::string pad2(int v) {
  std::string s = std::to_string(v);
  return s.size() < 2 ? "0" + s : s;
}

MapGraph load_map(const std::string& path) {
  return MapGraph::from_json(read_json_file(path), path);
}

std::string file_label(const std::string& path) {
  std::string stem = fs::path(path).stem().string();
  return stem.empty() ? path : stem;
}

// Runs fn(i) for i in [0, count) across min(jobs, count) workers. Exceptions
// propagate out of the calling thread after all workers join.
template <typename Fn>
void parallel_for(size_t count, int jobs, Fn&& fn) {
  size_t nworkers = std::min<size_t>(static_cast<size_t>(std::max(1, jobs)), count);
  if (nworkers <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> workers;
  std::exception_ptr first_error;
  std::mutex err_mu;
  workers.reserve(nworkers);
  for (size_t t = 0; t < nworkers; ++t) {
    workers.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct Skip {
  std::string persona_id;
  std::string error;
};

std::string skips_path_for(const std::string& out_path) { return out_path + ".skips.jsonl"; }

// Writes (or clears) the skip report next to `out_path` and folds the result
// into the command status.
CmdStatus settle_skips(const std::string& out_path, const std::vector<Skip>& skips,
                       std::string& summary) {
  std::string path = skips_path_for(out_path);
  if (skips.empty()) {
    fs::remove(path);
    return CmdStatus::Done;
  }
  std::vector<Json> rows;
  rows.reserve(skips.size());
  for (const Skip& s : skips) rows.push_back(Json{{"persona_id", s.persona_id}, {"error", s.error}});
  write_ndjson_file(path, rows);
  summary += "skipped " + std::to_string(skips.size()) + " personas; see " + path + "\n";
  return CmdStatus::Partial;
}

std::string fmt_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

RunConfig RunConfig::from_json(const Json& doc, const std::string& origin) {
  if (!doc.is_object()) fail(ErrorKind::Validation, "run config must be an object (" + origin + ")");
  RunConfig cfg;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    const Json& v = it.value();
    auto want_string = [&]() -> std::string {
      if (!v.is_string()) fail(ErrorKind::Validation, "config " + key + " must be a string (" + origin + ")");
      return v.get<std::string>();
    };
    auto want_int = [&]() -> int64_t {
      if (!v.is_number_integer()) fail(ErrorKind::Validation, "config " + key + " must be an integer (" + origin + ")");
      return v.get<int64_t>();
    };
    if (key == "map") cfg.map_path = want_string();
    else if (key == "lambda") {
      if (!v.is_number()) fail(ErrorKind::Validation, "config lambda must be a number (" + origin + ")");
      cfg.lambda = v.get<double>();
    } else if (key == "seed") cfg.seed = static_cast<uint64_t>(want_int());
    else if (key == "rounds") cfg.rounds = static_cast<int>(want_int());
    else if (key == "runs") cfg.runs = static_cast<int>(want_int());
    else if (key == "k") cfg.k = static_cast<int>(want_int());
    else if (key == "jobs") cfg.jobs = static_cast<int>(want_int());
    else if (key == "method") cfg.method = want_string();
    else if (key == "out_dir") cfg.out_dir = want_string();
    else if (key == "backend") cfg.backend = BackendConfig::from_json(v, origin);
    else if (key == "game") cfg.game = GameConfig::from_json(v, origin);
    else fail(ErrorKind::Validation, "unknown config key '" + key + "' (" + origin + ")");
  }
  if (cfg.lambda <= 0.0) fail(ErrorKind::Validation, "lambda must be > 0 (" + origin + ")");
  if (cfg.rounds < 1 || cfg.runs < 1 || cfg.k < 1 || cfg.jobs < 1) {
    fail(ErrorKind::Validation, "rounds, runs, k and jobs must be >= 1 (" + origin + ")");
  }
  if (cfg.method != "DH" && cfg.method != "PI") {
    fail(ErrorKind::Validation, "method must be DH or PI (" + origin + ")");
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  return from_json(read_json_file(path), path);
}

Json RunConfig::to_json() const {
  return Json{{"map", map_path},       {"lambda", lambda}, {"seed", seed},
              {"rounds", rounds},      {"runs", runs},     {"k", k},
              {"jobs", jobs},          {"method", method}, {"out_dir", out_dir},
              {"backend", backend.to_json()}, {"game", game.to_json()}};
}

CmdResult cmd_annotate(const RunConfig& cfg, const std::string& corpus_path,
                       const std::string& out_path, const std::string& audit_path) {
  std::vector<Persona> corpus = load_personas(corpus_path);
  ensure_parent_dir(out_path);
  CmdResult res;
  if (corpus.empty()) {
    write_ndjson_file(out_path, {});
    fs::remove(skips_path_for(out_path));
    res.summary = "warning: corpus " + corpus_path + " is empty; wrote 0 rating rows to " +
                  out_path + "\n";
    return res;
  }
  std::unique_ptr<AuditLog> audit;
  if (!audit_path.empty()) {
    ensure_parent_dir(audit_path);
    audit = std::make_unique<AuditLog>(audit_path);
  }
  std::vector<std::optional<FeatureRatings>> results(corpus.size());
  std::vector<std::string> errors(corpus.size());
  parallel_for(corpus.size(), cfg.jobs, [&](size_t i) {
    try {
      results[i] = annotate_persona(cfg.backend, corpus[i], static_cast<int>(i), audit.get());
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  std::vector<FeatureRatings> rows;
  std::vector<Skip> skips;
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (results[i]) rows.push_back(std::move(*results[i]));
    else skips.push_back({corpus[i].persona_id, errors[i]});
  }
  save_ratings(out_path, rows);
  res.summary = "annotated " + std::to_string(rows.size()) + "/" + std::to_string(corpus.size()) +
                " personas -> " + out_path + "\n";
  res.status = settle_skips(out_path, skips, res.summary);
  return res;
}

CmdResult cmd_select_personas(const RunConfig& cfg, const std::string& corpus_path,
                              const std::string& ratings_path, const std::string& out_path) {
  std::vector<Persona> corpus = load_personas(corpus_path);
  std::vector<FeatureRatings> ratings = load_ratings(ratings_path);
  std::map<std::string, const Persona*> by_id;
  for (const Persona& p : corpus) by_id[p.persona_id] = &p;
  std::vector<size_t> picked = greedy_select(ratings, static_cast<size_t>(cfg.k));
  std::vector<Persona> subset;
  subset.reserve(picked.size());
  for (size_t ix : picked) {
    auto it = by_id.find(ratings[ix].persona_id);
    if (it == by_id.end()) {
      fail(ErrorKind::Validation, "rated persona '" + ratings[ix].persona_id +
                                      "' is missing from corpus " + corpus_path);
    }
    subset.push_back(*it->second);
  }
  ensure_parent_dir(out_path);
  save_personas(out_path, subset);
  CmdResult res;
  res.summary = "selected " + std::to_string(subset.size()) + " of " +
                std::to_string(ratings.size()) + " personas (objective " +
                fmt_double(diversity_objective(ratings, picked)) + ") -> " + out_path + "\n";
  return res;
}

CmdResult cmd_elicit(const RunConfig& cfg, const std::string& subset_path,
                     const std::string& inventory_path, const std::string& out_path,
                     const std::string& audit_path) {
  std::vector<Persona> personas = load_personas(subset_path);
  Inventory inventory;
  const bool pi = cfg.method == "PI";
  if (pi) {
    if (inventory_path.empty()) {
      fail(ErrorKind::Validation, "PI elicitation requires an inventory file");
    }
    inventory = load_inventory(inventory_path);
  }
  std::unique_ptr<AuditLog> audit;
  if (!audit_path.empty()) {
    ensure_parent_dir(audit_path);
    audit = std::make_unique<AuditLog>(audit_path);
  }
  std::vector<std::optional<HeuristicProfile>> results(personas.size());
  std::vector<std::string> errors(personas.size());
  parallel_for(personas.size(), cfg.jobs, [&](size_t i) {
    try {
      results[i] = pi ? elicit_profile_pi(cfg.backend, personas[i], inventory, cfg.lambda,
                                          audit.get())
                      : elicit_profile_dh(cfg.backend, personas[i], audit.get());
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  std::vector<HeuristicProfile> profiles;
  std::vector<Skip> skips;
  for (size_t i = 0; i < personas.size(); ++i) {
    if (results[i]) profiles.push_back(std::move(*results[i]));
    else skips.push_back({personas[i].persona_id, errors[i]});
  }
  ensure_parent_dir(out_path);
  save_profile_set(out_path, profiles);
  CmdResult res;
  res.summary = "elicited " + std::to_string(profiles.size()) + "/" +
                std::to_string(personas.size()) + " " + cfg.method + " profiles -> " + out_path +
                "\n";
  res.status = settle_skips(out_path, skips, res.summary);
  return res;
}

CmdResult cmd_tournament(const RunConfig& cfg, const std::string& profiles_path,
                         const std::string& out_prefix) {
  MapGraph map = load_map(cfg.map_path);
  std::vector<HeuristicProfile> profiles = load_profile_set(profiles_path);
  CmdResult res;
  for (int run = 1; run <= cfg.runs; ++run) {
    TournamentConfig tc;
    tc.rounds = cfg.rounds;
    tc.seed = derive_seed(cfg.seed, 0x52554eULL, static_cast<uint64_t>(run));
    tc.jobs = cfg.jobs;
    tc.game = cfg.game;
    TournamentResult result = run_tournament(map, profiles, tc);

    std::string board_path = out_prefix + "_run" + pad2(run) + "_leaderboard.jsonl";
    std::string log_path = out_prefix + "_run" + pad2(run) + "_log.jsonl";
    ensure_parent_dir(board_path);
    write_leaderboard(board_path, result);

    std::vector<Json> rows;
    rows.reserve(result.matches.size() + 1);
    Json players = Json::array();
    for (const HeuristicProfile& p : profiles) players.push_back(p.persona_id);
    rows.push_back(Json{{"kind", "header"},
                        {"map_path", cfg.map_path},
                        {"profiles_path", profiles_path},
                        {"seed", tc.seed},
                        {"rounds", tc.rounds},
                        {"players", players},
                        {"game", tc.game.to_json()},
                        {"rating", Json{{"mu0", tc.rating.mu0},
                                        {"sigma0", tc.rating.sigma0},
                                        {"beta", tc.rating.beta},
                                        {"tau", tc.rating.tau}}}});
    const size_t pairs_per_round = profiles.size() / 2;
    for (size_t i = 0; i < result.matches.size(); ++i) {
      Json row = result.matches[i].to_json();
      row["kind"] = "match";
      row["round"] = static_cast<int>(i / pairs_per_round) + 1;
      row["pair"] = static_cast<int>(i % pairs_per_round) + 1;
      const MatchRatings& trail = result.rating_trail[i];
      auto rating_json = [](const Rating& r) { return Json{{"mu", r.mu}, {"sigma", r.sigma}}; };
      row["ratings"] = Json{
          {"before", Json::array({rating_json(trail.before[0]), rating_json(trail.before[1])})},
          {"after", Json::array({rating_json(trail.after[0]), rating_json(trail.after[1])})}};
      rows.push_back(std::move(row));
    }
    write_ndjson_file(log_path, rows);

    Json board = leaderboard_json(result);
    std::string leader = board.empty() ? "-" : board[0]["persona_id"].get<std::string>();
    res.summary += "run " + pad2(run) + ": " + std::to_string(result.matches.size()) +
                   " matches, leader " + leader + " -> " + board_path + ", " + log_path + "\n";
  }
  return res;
}

CmdResult cmd_analyze(const RunConfig& cfg, const std::vector<std::string>& leaderboard_paths,
                      const std::string& ratings_path,
                      const std::vector<std::string>& profile_paths,
                      const std::string& corpus_path, const std::string& out_prefix) {
  (void)cfg;
  if (profile_paths.size() > 2) {
    fail(ErrorKind::Validation, "analyze takes at most two profile sets");
  }
  std::string text;
  Json bundle = Json::object();

  if (!leaderboard_paths.empty()) {
    if (ratings_path.empty()) {
      fail(ErrorKind::Validation, "leaderboard correlation needs a ratings file");
    }
    std::vector<FeatureRatings> ratings = load_ratings(ratings_path);
    std::vector<std::pair<std::string, std::vector<PlayerStanding>>> boards;
    for (const std::string& path : leaderboard_paths) {
      boards.emplace_back(file_label(path), load_leaderboard(path));
    }
    std::vector<CorrelationRow> rows = feature_rating_correlations(ratings, boards);
    text += "== feature correlations ==\n" + correlation_report_text(rows) + "\n";
    bundle["correlations"] = correlation_report_json(rows);

    if (!corpus_path.empty()) {
      std::vector<Persona> corpus = load_personas(corpus_path);
      for (const auto& [label, standings] : boards) {
        text += "== extremes: " + label + " ==\n" +
                leaderboard_extremes_text(standings, corpus, 3) + "\n";
      }
    }
  }

  std::vector<std::pair<std::string, std::vector<HeuristicProfile>>> sets;
  for (const std::string& path : profile_paths) {
    sets.emplace_back(file_label(path), load_profile_set(path));
  }
  Json ovc_bundle = Json::object();
  Json means_bundle = Json::object();
  for (const auto& [label, profiles] : sets) {
    std::vector<OvcRow> rows = ovc_table(profiles);
    text += ovc_table_text(rows, "opposite-value consistency: " + label) + "\n";
    ovc_bundle[label] = ovc_table_json(rows);

    double total = 0.0, nonpass = 0.0;
    size_t nonpass_n = 0;
    for (const HeuristicProfile& p : profiles) {
      for (size_t c = 0; c < kHeuristicCodeCount; ++c) {
        HeuristicCode code = static_cast<HeuristicCode>(c);
        total += p.weight(code);
        if (!is_pass_code(code)) {
          nonpass += p.weight(code);
          ++nonpass_n;
        }
      }
    }
    size_t cells = profiles.size() * kHeuristicCodeCount;
    double mean_all = cells ? total / static_cast<double>(cells) : 0.0;
    double mean_np = nonpass_n ? nonpass / static_cast<double>(nonpass_n) : 0.0;
    text += "== mean weights: " + label + " ==\nall codes " + fmt_double(mean_all) +
            ", non-pass " + fmt_double(mean_np) + "\n\n";
    means_bundle[label] = Json{{"all", mean_all}, {"non_pass", mean_np}};
  }
  if (!sets.empty()) {
    bundle["ovc"] = std::move(ovc_bundle);
    bundle["mean_weights"] = std::move(means_bundle);
  }
  if (sets.size() == 2) {
    std::vector<OvcDiffRow> diff = ovc_difference_table(sets[0].second, sets[1].second);
    text += "== difference (" + sets[0].first + " - " + sets[1].first + ") ==\n" +
            ovc_difference_text(diff) + "\n";
    bundle["difference"] = ovc_difference_json(diff);
  }

  if (text.empty()) fail(ErrorKind::Validation, "analyze was given nothing to analyze");
  std::string text_path = out_prefix + "_report.txt";
  std::string json_path = out_prefix + "_report.json";
  ensure_parent_dir(text_path);
  write_text_file(text_path, text);
  write_json_file(json_path, bundle);
  CmdResult res;
  res.summary = "wrote " + text_path + " and " + json_path + "\n";
  return res;
}

CmdResult cmd_export_replay(const std::string& log_path, const std::string& game_id,
                            const std::string& out_path) {
  std::vector<Json> rows = read_ndjson_file(log_path);
  const Json* header = nullptr;
  const Json* match_row = nullptr;
  for (const Json& row : rows) {
    if (!row.is_object()) continue;
    std::string kind = row.value("kind", std::string());
    if (kind == "header" && !header) header = &row;
    if (kind == "match" && row.value("game_id", std::string()) == game_id) {
      match_row = &row;
      break;
    }
  }
  if (!header) fail(ErrorKind::Parse, "tournament log has no header row: " + log_path);
  if (!match_row) {
    fail(ErrorKind::Validation, "game '" + game_id + "' is not in log " + log_path);
  }
  MatchRecord logged = MatchRecord::from_json(*match_row, log_path);
  MapGraph map = load_map(header->at("map_path").get<std::string>());
  std::vector<HeuristicProfile> all =
      load_profile_set(header->at("profiles_path").get<std::string>());
  GameConfig game = GameConfig::from_json(header->at("game"), log_path);
  game.players = static_cast<int>(logged.players.size());

  std::vector<HeuristicProfile> seats;
  for (const std::string& pid : logged.players) {
    auto it = std::find_if(all.begin(), all.end(),
                           [&](const HeuristicProfile& p) { return p.persona_id == pid; });
    if (it == all.end()) {
      fail(ErrorKind::Validation, "profile set no longer contains player '" + pid + "'");
    }
    seats.push_back(*it);
  }
  PlayOptions options;
  options.record_snapshots = true;
  MatchRecord replayed = play_game(map, seats, game, logged.seed, options);
  if (replayed.status != logged.status || replayed.winner != logged.winner ||
      replayed.turns != logged.turns) {
    fail(ErrorKind::Logic, "replayed game '" + game_id +
                               "' diverges from the log; map or profiles changed since the run");
  }
  replayed.game_id = logged.game_id;
  ensure_parent_dir(out_path);
  export_replay(replayed, out_path);
  CmdResult res;
  res.summary = "exported " + std::to_string(replayed.snapshots.size()) + " snapshots of game " +
                game_id + " -> " + out_path + "\n";
  return res;
}

}  // namespace peril
