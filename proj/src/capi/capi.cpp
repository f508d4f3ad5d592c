#include "peril/peril.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "core/match.hpp"
#include "core/pipeline.hpp"

struct peril_map {
  peril::MapGraph graph;
};

struct peril_profile_set {
  std::vector<peril::HeuristicProfile> profiles;
};

struct peril_match {
  peril::MatchRecord record;
};

struct peril_run_config {
  peril::Json doc = peril::Json::object();
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
peril_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PERIL_ERROR;
  } catch (...) {
    g_last_error = "unknown failure";
    return PERIL_ERROR;
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) return nullptr;
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void put_summary(char** summary_out, const std::string& text) {
  if (summary_out) *summary_out = dup_string(text);
}

std::string opt_str(const char* s) { return s ? std::string(s) : std::string(); }

peril_status from_cmd(const peril::CmdResult& result, char** summary_out) {
  put_summary(summary_out, result.summary);
  return result.status == peril::CmdStatus::Partial ? PERIL_PARTIAL : PERIL_OK;
}

peril::RunConfig materialize(const peril_run_config* cfg) {
  if (!cfg) return peril::RunConfig{};
  return peril::RunConfig::from_json(cfg->doc, "run config");
}

}  // namespace

extern "C" {

const char* peril_last_error(void) { return g_last_error.c_str(); }

void peril_string_free(char* s) { std::free(s); }

peril_status peril_map_load(const char* path, peril_map** out) {
  return guarded([&]() -> peril_status {
    if (!path || !out) peril::fail(peril::ErrorKind::Validation, "map_load needs path and out");
    auto* handle = new peril_map{peril::MapGraph::from_json(peril::read_json_file(path), path)};
    *out = handle;
    return PERIL_OK;
  });
}

void peril_map_free(peril_map* map) { delete map; }

const char* peril_map_name(const peril_map* map) { return map ? map->graph.name().c_str() : ""; }

int peril_map_region_count(const peril_map* map) { return map ? map->graph.region_count() : 0; }

int peril_map_zone_count(const peril_map* map) { return map ? map->graph.zone_count() : 0; }

peril_status peril_profile_set_load(const char* path, peril_profile_set** out) {
  return guarded([&]() -> peril_status {
    if (!path || !out) peril::fail(peril::ErrorKind::Validation, "profile_set_load needs path and out");
    auto* handle = new peril_profile_set{peril::load_profile_set(path)};
    *out = handle;
    return PERIL_OK;
  });
}

void peril_profile_set_free(peril_profile_set* set) { delete set; }

size_t peril_profile_set_size(const peril_profile_set* set) {
  return set ? set->profiles.size() : 0;
}

const char* peril_profile_set_persona_id(const peril_profile_set* set, size_t ix) {
  if (!set || ix >= set->profiles.size()) return nullptr;
  return set->profiles[ix].persona_id.c_str();
}

peril_status peril_game_play(const peril_map* map, const peril_profile_set* profiles,
                             const size_t* seats, size_t seat_count,
                             const char* game_config_json, uint64_t seed, int record_snapshots,
                             peril_match** out) {
  return guarded([&]() -> peril_status {
    if (!map || !profiles || !seats || !out) {
      peril::fail(peril::ErrorKind::Validation, "game_play needs map, profiles, seats and out");
    }
    peril::GameConfig config;
    if (game_config_json && *game_config_json) {
      peril::Json doc = peril::Json::parse(game_config_json, nullptr, false);
      if (doc.is_discarded()) {
        peril::fail(peril::ErrorKind::Parse, "game_config_json is not valid JSON");
      }
      config = peril::GameConfig::from_json(doc, "game_config_json");
    }
    config.players = static_cast<int>(seat_count);
    std::vector<peril::HeuristicProfile> seated;
    for (size_t i = 0; i < seat_count; ++i) {
      if (seats[i] >= profiles->profiles.size()) {
        peril::fail(peril::ErrorKind::Validation,
                    "seat index " + std::to_string(seats[i]) + " is out of range");
      }
      seated.push_back(profiles->profiles[seats[i]]);
    }
    peril::PlayOptions options;
    options.record_snapshots = record_snapshots != 0;
    auto* handle =
        new peril_match{peril::play_game(map->graph, seated, config, seed, options)};
    *out = handle;
    return PERIL_OK;
  });
}

void peril_match_free(peril_match* match) { delete match; }

const char* peril_match_status(const peril_match* match) {
  if (!match) return "";
  switch (match->record.status) {
    case peril::GameStatus::Won: return "won";
    case peril::GameStatus::Draw: return "draw";
    default: return "ongoing";
  }
}

int peril_match_winner(const peril_match* match) { return match ? match->record.winner : -1; }

int64_t peril_match_turns(const peril_match* match) { return match ? match->record.turns : 0; }

peril_status peril_match_to_json(const peril_match* match, char** json_out) {
  return guarded([&]() -> peril_status {
    if (!match || !json_out) peril::fail(peril::ErrorKind::Validation, "match_to_json needs match and out");
    *json_out = dup_string(match->record.to_json().dump());
    return PERIL_OK;
  });
}

peril_status peril_match_export_replay(const peril_match* match, const char* path) {
  return guarded([&]() -> peril_status {
    if (!match || !path) peril::fail(peril::ErrorKind::Validation, "export_replay needs match and path");
    peril::export_replay(match->record, path);
    return PERIL_OK;
  });
}

peril_status peril_run_config_create(const char* config_path, peril_run_config** out) {
  return guarded([&]() -> peril_status {
    if (!out) peril::fail(peril::ErrorKind::Validation, "run_config_create needs out");
    auto handle = std::make_unique<peril_run_config>();
    if (config_path && *config_path) {
      handle->doc = peril::read_json_file(config_path);
      peril::RunConfig::from_json(handle->doc, config_path);  // validate eagerly
    }
    *out = handle.release();
    return PERIL_OK;
  });
}

void peril_run_config_free(peril_run_config* cfg) { delete cfg; }

peril_status peril_run_config_set(peril_run_config* cfg, const char* key, const char* value) {
  return guarded([&]() -> peril_status {
    if (!cfg || !key || !value) {
      peril::fail(peril::ErrorKind::Validation, "run_config_set needs cfg, key and value");
    }
    // Key table: s = string, i = integer, d = double.
    static const struct {
      const char* key;
      char type;
    } kKeys[] = {
        {"map", 's'},          {"lambda", 'd'},        {"seed", 'i'},
        {"rounds", 'i'},       {"runs", 'i'},          {"k", 'i'},
        {"jobs", 'i'},         {"method", 's'},        {"out_dir", 's'},
        {"backend.kind", 's'}, {"backend.endpoint", 's'}, {"backend.model", 's'},
        {"backend.temperature", 'd'}, {"backend.max_retries", 'i'},
        {"backend.backoff_ms", 'i'},  {"backend.timeout_ms", 'i'},
        {"game.players", 'i'}, {"game.initial_units", 'i'}, {"game.turn_limit", 'i'},
        {"game.commit_policy", 's'},
    };
    char type = 0;
    for (const auto& entry : kKeys) {
      if (std::strcmp(entry.key, key) == 0) {
        type = entry.type;
        break;
      }
    }
    if (!type) peril::fail(peril::ErrorKind::Validation, std::string("unknown config key '") + key + "'");

    peril::Json parsed;
    std::string text(value);
    try {
      size_t used = 0;
      if (type == 'i') {
        long long n = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        parsed = n;
      } else if (type == 'd') {
        double d = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        parsed = d;
      } else {
        parsed = text;
      }
    } catch (const std::exception&) {
      peril::fail(peril::ErrorKind::Validation,
                  std::string("config key '") + key + "' rejects value '" + text + "'");
    }

    peril::Json updated = cfg->doc;
    std::string keystr(key);
    size_t dot = keystr.find('.');
    if (dot == std::string::npos) {
      updated[keystr] = parsed;
    } else {
      updated[keystr.substr(0, dot)][keystr.substr(dot + 1)] = parsed;
    }
    peril::RunConfig::from_json(updated, "run config override");  // validate before committing
    cfg->doc = std::move(updated);
    return PERIL_OK;
  });
}

peril_status peril_run_config_to_json(const peril_run_config* cfg, char** json_out) {
  return guarded([&]() -> peril_status {
    if (!cfg || !json_out) peril::fail(peril::ErrorKind::Validation, "run_config_to_json needs cfg and out");
    *json_out = dup_string(materialize(cfg).to_json().dump(2));
    return PERIL_OK;
  });
}

peril_status peril_cmd_annotate(const peril_run_config* cfg, const char* corpus_path,
                                const char* out_path, const char* audit_path,
                                char** summary_out) {
  return guarded([&]() -> peril_status {
    if (!corpus_path || !out_path) {
      peril::fail(peril::ErrorKind::Validation, "annotate needs corpus and out paths");
    }
    return from_cmd(peril::cmd_annotate(materialize(cfg), corpus_path, out_path,
                                        opt_str(audit_path)),
                    summary_out);
  });
}

peril_status peril_cmd_select_personas(const peril_run_config* cfg, const char* corpus_path,
                                       const char* ratings_path, const char* out_path,
                                       char** summary_out) {
  return guarded([&]() -> peril_status {
    if (!corpus_path || !ratings_path || !out_path) {
      peril::fail(peril::ErrorKind::Validation, "select-personas needs corpus, ratings and out paths");
    }
    return from_cmd(
        peril::cmd_select_personas(materialize(cfg), corpus_path, ratings_path, out_path),
        summary_out);
  });
}

peril_status peril_cmd_elicit(const peril_run_config* cfg, const char* subset_path,
                              const char* inventory_path, const char* out_path,
                              const char* audit_path, char** summary_out) {
  return guarded([&]() -> peril_status {
    if (!subset_path || !out_path) {
      peril::fail(peril::ErrorKind::Validation, "elicit needs subset and out paths");
    }
    return from_cmd(peril::cmd_elicit(materialize(cfg), subset_path, opt_str(inventory_path),
                                      out_path, opt_str(audit_path)),
                    summary_out);
  });
}

peril_status peril_cmd_tournament(const peril_run_config* cfg, const char* profiles_path,
                                  const char* out_prefix, char** summary_out) {
  return guarded([&]() -> peril_status {
    if (!profiles_path || !out_prefix) {
      peril::fail(peril::ErrorKind::Validation, "tournament needs profiles and out prefix");
    }
    return from_cmd(peril::cmd_tournament(materialize(cfg), profiles_path, out_prefix),
                    summary_out);
  });
}

peril_status peril_cmd_analyze(const peril_run_config* cfg, const char* const* leaderboard_paths,
                               size_t leaderboard_count, const char* ratings_path,
                               const char* const* profile_paths, size_t profile_count,
                               const char* corpus_path, const char* out_prefix,
                               char** summary_out) {
  return guarded([&]() -> peril_status {
    if (!out_prefix) peril::fail(peril::ErrorKind::Validation, "analyze needs an out prefix");
    std::vector<std::string> boards;
    for (size_t i = 0; i < leaderboard_count; ++i) {
      if (!leaderboard_paths || !leaderboard_paths[i]) {
        peril::fail(peril::ErrorKind::Validation, "leaderboard path list holds a null entry");
      }
      boards.emplace_back(leaderboard_paths[i]);
    }
    std::vector<std::string> sets;
    for (size_t i = 0; i < profile_count; ++i) {
      if (!profile_paths || !profile_paths[i]) {
        peril::fail(peril::ErrorKind::Validation, "profile path list holds a null entry");
      }
      sets.emplace_back(profile_paths[i]);
    }
    return from_cmd(peril::cmd_analyze(materialize(cfg), boards, opt_str(ratings_path), sets,
                                       opt_str(corpus_path), out_prefix),
                    summary_out);
  });
}

peril_status peril_cmd_export_replay(const char* log_path, const char* game_id,
                                     const char* out_path, char** summary_out) {
  return guarded([&]() -> peril_status {
    if (!log_path || !game_id || !out_path) {
      peril::fail(peril::ErrorKind::Validation, "export-replay needs log, game_id and out paths");
    }
    return from_cmd(peril::cmd_export_replay(log_path, game_id, out_path), summary_out);
  });
}

}  // extern "C"
