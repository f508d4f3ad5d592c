#pragma once

#include <string>
#include <vector>

#include "core/game.hpp"
#include "core/llm.hpp"

namespace peril {

// Stage commands communicate only through files; each is re-runnable from
// persisted artifacts alone.
struct RunConfig {
  std::string map_path;
  double lambda = kDefaultLambda;
  uint64_t seed = 1;
  int rounds = 49;
  int runs = 1;
  int k = 50;               // diversity subset size
  int jobs = 1;
  std::string method = "PI";  // "DH" | "PI"
  std::string out_dir = "out";
  BackendConfig backend;
  GameConfig game;

  // Strict parse: unknown keys, bad types, lambda <= 0, rounds/runs/k/jobs < 1
  // or a method outside {DH, PI} are validation errors.
  static RunConfig from_json(const Json& doc, const std::string& origin);
  static RunConfig load(const std::string& path);
  Json to_json() const;
};

// 0 = full success, 2 = partial (skip report written), hard errors throw.
enum class CmdStatus : int { Done = 0, Partial = 2 };

struct CmdResult {
  CmdStatus status = CmdStatus::Done;
  std::string summary;  // printable, one line per fact
};

// Rates every corpus persona on the five characteristics. Failures skip the
// persona and land in <out>.skips.jsonl; surviving rows keep corpus order.
CmdResult cmd_annotate(const RunConfig& cfg, const std::string& corpus_path,
                       const std::string& out_path, const std::string& audit_path);

// Picks the k most spread personas by the diversity objective and writes the
// subset as a persona file (greedy order-independent: ids sorted by corpus
// position).
CmdResult cmd_select_personas(const RunConfig& cfg, const std::string& corpus_path,
                              const std::string& ratings_path, const std::string& out_path);

// Elicits one heuristic profile per persona via cfg.method. PI requires an
// inventory path. Failures skip the persona into <out>.skips.jsonl.
CmdResult cmd_elicit(const RunConfig& cfg, const std::string& subset_path,
                     const std::string& inventory_path, const std::string& out_path,
                     const std::string& audit_path);

// Runs cfg.runs independent tournaments over one profile set. Run r is
// seeded derive_seed(cfg.seed, 0x52554e, r) and writes
//   <prefix>_run<r>_leaderboard.jsonl
//   <prefix>_run<r>_log.jsonl     (header row, then one row per match)
CmdResult cmd_tournament(const RunConfig& cfg, const std::string& profiles_path,
                         const std::string& out_prefix);

// Report bundle: per-leaderboard feature correlations (plus extremes when a
// corpus is given), per-profile-set opposite-value consistency, and a
// difference table when exactly two profile sets are given. Writes
// <prefix>_report.txt and <prefix>_report.json, byte-stable across reruns.
CmdResult cmd_analyze(const RunConfig& cfg, const std::vector<std::string>& leaderboard_paths,
                      const std::string& ratings_path,
                      const std::vector<std::string>& profile_paths,
                      const std::string& corpus_path,  // may be empty
                      const std::string& out_prefix);

// Re-plays one logged game from the header's map/profiles references and the
// match row's seed, then writes the per-turn snapshot file. The replayed
// outcome must agree with the log row.
CmdResult cmd_export_replay(const std::string& log_path, const std::string& game_id,
                            const std::string& out_path);

}  // namespace peril
