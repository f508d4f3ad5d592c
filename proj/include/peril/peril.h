#ifndef PERIL_H
#define PERIL_H

/* C interface to the conquest-game experimentation engine. Every entry point
 * returns a peril_status; on PERIL_ERROR the calling thread's message is
 * available via peril_last_error(). Handles are opaque and freed with their
 * matching *_free function. Strings returned through char** out-params are
 * heap copies owned by the caller; release them with peril_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PERIL_API __declspec(dllexport)
#else
#define PERIL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum peril_status {
  PERIL_OK = 0,
  PERIL_ERROR = 1,
  PERIL_PARTIAL = 2 /* command finished but skipped some inputs */
} peril_status;

/* Message for the most recent failure on this thread; "" when none. The
 * pointer stays valid until the thread's next peril_* call. */
PERIL_API const char* peril_last_error(void);

PERIL_API void peril_string_free(char* s);

/* ---- boards ---- */

typedef struct peril_map peril_map;

PERIL_API peril_status peril_map_load(const char* path, peril_map** out);
PERIL_API void peril_map_free(peril_map* map);
PERIL_API const char* peril_map_name(const peril_map* map);
PERIL_API int peril_map_region_count(const peril_map* map);
PERIL_API int peril_map_zone_count(const peril_map* map);

/* ---- heuristic profile sets ---- */

typedef struct peril_profile_set peril_profile_set;

PERIL_API peril_status peril_profile_set_load(const char* path, peril_profile_set** out);
PERIL_API void peril_profile_set_free(peril_profile_set* set);
PERIL_API size_t peril_profile_set_size(const peril_profile_set* set);
/* NULL when ix is out of range; pointer valid while the set lives. */
PERIL_API const char* peril_profile_set_persona_id(const peril_profile_set* set, size_t ix);

/* ---- single games ---- */

typedef struct peril_match peril_match;

/* Seats profiles[seats[0]], profiles[seats[1]], ... (2..6 seats) and plays
 * one seeded game. game_config_json may be NULL/"" for defaults, or a JSON
 * object with keys players/initial_units/turn_limit/commit_policy (players is
 * inferred from seat_count). */
PERIL_API peril_status peril_game_play(const peril_map* map, const peril_profile_set* profiles,
                                       const size_t* seats, size_t seat_count,
                                       const char* game_config_json, uint64_t seed,
                                       int record_snapshots, peril_match** out);
PERIL_API void peril_match_free(peril_match* match);
PERIL_API const char* peril_match_status(const peril_match* match); /* "won"|"draw" */
PERIL_API int peril_match_winner(const peril_match* match);         /* seat; -1 on draw */
PERIL_API int64_t peril_match_turns(const peril_match* match);
PERIL_API peril_status peril_match_to_json(const peril_match* match, char** json_out);
/* One board snapshot per line; fails unless the game was played with
 * record_snapshots. */
PERIL_API peril_status peril_match_export_replay(const peril_match* match, const char* path);

/* ---- run configuration ---- */

typedef struct peril_run_config peril_run_config;

/* Loads a JSON config file, or starts from defaults when path is NULL/"". */
PERIL_API peril_status peril_run_config_create(const char* config_path, peril_run_config** out);
PERIL_API void peril_run_config_free(peril_run_config* cfg);
/* Dotted keys: map, lambda, seed, rounds, runs, k, jobs, method, out_dir,
 * backend.kind, backend.endpoint, backend.model, backend.temperature,
 * backend.max_retries, backend.backoff_ms, backend.timeout_ms, game.players,
 * game.initial_units, game.turn_limit, game.commit_policy. Values are given
 * as text and parsed/validated to the key's type; a rejected value leaves the
 * config unchanged. */
PERIL_API peril_status peril_run_config_set(peril_run_config* cfg, const char* key,
                                            const char* value);
PERIL_API peril_status peril_run_config_to_json(const peril_run_config* cfg, char** json_out);

/* ---- pipeline commands ----
 * Each returns PERIL_OK, PERIL_PARTIAL (skip report written next to the
 * output), or PERIL_ERROR. summary_out (optional) receives printable text. */

PERIL_API peril_status peril_cmd_annotate(const peril_run_config* cfg, const char* corpus_path,
                                          const char* out_path, const char* audit_path,
                                          char** summary_out);
PERIL_API peril_status peril_cmd_select_personas(const peril_run_config* cfg,
                                                 const char* corpus_path,
                                                 const char* ratings_path, const char* out_path,
                                                 char** summary_out);
PERIL_API peril_status peril_cmd_elicit(const peril_run_config* cfg, const char* subset_path,
                                        const char* inventory_path, const char* out_path,
                                        const char* audit_path, char** summary_out);
PERIL_API peril_status peril_cmd_tournament(const peril_run_config* cfg,
                                            const char* profiles_path, const char* out_prefix,
                                            char** summary_out);
PERIL_API peril_status peril_cmd_analyze(const peril_run_config* cfg,
                                         const char* const* leaderboard_paths,
                                         size_t leaderboard_count, const char* ratings_path,
                                         const char* const* profile_paths, size_t profile_count,
                                         const char* corpus_path, const char* out_prefix,
                                         char** summary_out);
PERIL_API peril_status peril_cmd_export_replay(const char* log_path, const char* game_id,
                                               const char* out_path, char** summary_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PERIL_H */
