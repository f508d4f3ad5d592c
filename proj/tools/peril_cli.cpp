// Command-line front end. Everything goes through the C API in peril/peril.h;
// the only other dependencies are CLI11 for argument parsing and the JSON
// header for reading the engine's own config echo.
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "peril/peril.h"

namespace {

struct ConfigHandle {
  peril_run_config* cfg = nullptr;
  ~ConfigHandle() { peril_run_config_free(cfg); }
};

int die(const std::string& where) {
  std::fprintf(stderr, "peril: %s: %s\n", where.c_str(), peril_last_error());
  return 1;
}

int finish(peril_status status, char* summary, const std::string& where) {
  if (summary) {
    std::fputs(summary, stdout);
    peril_string_free(summary);
  }
  if (status == PERIL_ERROR) return die(where);
  return static_cast<int>(status);
}

// Echoes the merged config back out of the engine to pick up defaults the
// user left to the config file (output directory, method).
nlohmann::json echo_config(peril_run_config* cfg) {
  char* text = nullptr;
  if (peril_run_config_to_json(cfg, &text) != PERIL_OK || !text) return nlohmann::json::object();
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  peril_string_free(text);
  return doc.is_discarded() ? nlohmann::json::object() : doc;
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"persona-driven conquest-game experiment pipeline"};
  app.require_subcommand(1);

  std::string config_path, seed, jobs, out_dir;
  app.add_option("--config", config_path, "JSON run-config file");
  app.add_option("--seed", seed, "master seed (integer)");
  app.add_option("--jobs", jobs, "worker threads");
  app.add_option("--out", out_dir, "output directory");

  // Per-command inputs.
  std::string corpus, ratings, personas, inventory, profiles, out, audit, prefix;
  std::string method, lambda, rounds, runs, k, map_path, backend, log_path, game_id;
  std::vector<std::string> leaderboards, profile_sets;
  bool no_audit = false;

  CLI::App* annotate = app.add_subcommand("annotate", "rate personas on the five characteristics");
  annotate->add_option("--corpus", corpus, "persona corpus (ndjson)")->required();
  annotate->add_option("--out-file", out, "ratings output path");
  annotate->add_option("--audit", audit, "prompt/reply audit path");
  annotate->add_flag("--no-audit", no_audit, "disable the audit log");
  annotate->add_option("--backend", backend, "backend kind: mock or http");

  CLI::App* select = app.add_subcommand("select-personas", "pick the most spread subset");
  select->add_option("--corpus", corpus, "persona corpus (ndjson)")->required();
  select->add_option("--ratings", ratings, "ratings file")->required();
  select->add_option("--out-file", out, "subset output path");
  select->add_option("--k", k, "subset size");

  CLI::App* elicit = app.add_subcommand("elicit", "turn personas into heuristic profiles");
  elicit->add_option("--personas", personas, "persona subset (ndjson)")->required();
  elicit->add_option("--method", method, "DH or PI");
  elicit->add_option("--inventory", inventory, "inventory file (PI)");
  elicit->add_option("--lambda", lambda, "weight transform scale");
  elicit->add_option("--out-file", out, "profile set output path");
  elicit->add_option("--audit", audit, "prompt/reply audit path");
  elicit->add_flag("--no-audit", no_audit, "disable the audit log");
  elicit->add_option("--backend", backend, "backend kind: mock or http");

  CLI::App* tournament = app.add_subcommand("tournament", "run rated rounds over a profile set");
  tournament->add_option("--profiles", profiles, "profile set (ndjson)")->required();
  tournament->add_option("--map", map_path, "board file");
  tournament->add_option("--rounds", rounds, "rounds per run");
  tournament->add_option("--runs", runs, "independent runs");
  tournament->add_option("--out-prefix", prefix, "output path prefix");

  CLI::App* analyze = app.add_subcommand("analyze", "correlations, consistency and reports");
  analyze->add_option("--leaderboard", leaderboards, "leaderboard file (repeatable)");
  analyze->add_option("--ratings", ratings, "feature ratings file");
  analyze->add_option("--profiles", profile_sets, "profile set (repeatable, max 2)");
  analyze->add_option("--corpus", corpus, "persona corpus for description snippets");
  analyze->add_option("--out-prefix", prefix, "output path prefix");

  CLI::App* replay = app.add_subcommand("export-replay", "write per-turn snapshots of one game");
  replay->add_option("--log", log_path, "tournament log file")->required();
  replay->add_option("--game", game_id, "game id, e.g. r01_g07")->required();
  replay->add_option("--out-file", out, "replay output path");

  // Lets the global flags appear after the subcommand name too.
  for (CLI::App* sub : {annotate, select, elicit, tournament, analyze, replay}) {
    sub->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);

  ConfigHandle handle;
  if (peril_run_config_create(opt(config_path), &handle.cfg) != PERIL_OK) {
    return die("config");
  }
  auto set = [&](const char* key, const std::string& value) -> bool {
    if (value.empty()) return true;
    if (peril_run_config_set(handle.cfg, key, value.c_str()) != PERIL_OK) {
      die(std::string("config key ") + key);
      return false;
    }
    return true;
  };
  if (!set("seed", seed) || !set("jobs", jobs) || !set("out_dir", out_dir) ||
      !set("method", method) || !set("lambda", lambda) || !set("rounds", rounds) ||
      !set("runs", runs) || !set("k", k) || !set("map", map_path) ||
      !set("backend.kind", backend)) {
    return 1;
  }

  nlohmann::json merged = echo_config(handle.cfg);
  std::string dir = merged.value("out_dir", "out");
  std::string chosen_method = merged.value("method", "PI");

  char* summary = nullptr;
  if (annotate->parsed()) {
    std::string out_path = out.empty() ? dir + "/ratings.jsonl" : out;
    std::string audit_path = no_audit ? "" : (audit.empty() ? dir + "/audit_annotate.jsonl" : audit);
    peril_status st = peril_cmd_annotate(handle.cfg, corpus.c_str(), out_path.c_str(),
                                         opt(audit_path), &summary);
    return finish(st, summary, "annotate");
  }
  if (select->parsed()) {
    std::string out_path = out.empty() ? dir + "/personas_selected.jsonl" : out;
    peril_status st = peril_cmd_select_personas(handle.cfg, corpus.c_str(), ratings.c_str(),
                                                out_path.c_str(), &summary);
    return finish(st, summary, "select-personas");
  }
  if (elicit->parsed()) {
    std::string out_path = out.empty() ? dir + "/profiles_" + chosen_method + ".jsonl" : out;
    std::string audit_path =
        no_audit ? "" : (audit.empty() ? dir + "/audit_" + chosen_method + ".jsonl" : audit);
    peril_status st = peril_cmd_elicit(handle.cfg, personas.c_str(), opt(inventory),
                                       out_path.c_str(), opt(audit_path), &summary);
    return finish(st, summary, "elicit");
  }
  if (tournament->parsed()) {
    std::string out_prefix = prefix.empty() ? dir + "/tournament" : prefix;
    peril_status st = peril_cmd_tournament(handle.cfg, profiles.c_str(), out_prefix.c_str(),
                                           &summary);
    return finish(st, summary, "tournament");
  }
  if (analyze->parsed()) {
    std::string out_prefix = prefix.empty() ? dir + "/analysis" : prefix;
    std::vector<const char*> board_ptrs, set_ptrs;
    for (const std::string& s : leaderboards) board_ptrs.push_back(s.c_str());
    for (const std::string& s : profile_sets) set_ptrs.push_back(s.c_str());
    peril_status st = peril_cmd_analyze(handle.cfg, board_ptrs.data(), board_ptrs.size(),
                                        opt(ratings), set_ptrs.data(), set_ptrs.size(),
                                        opt(corpus), out_prefix.c_str(), &summary);
    return finish(st, summary, "analyze");
  }
  if (replay->parsed()) {
    std::string out_path = out.empty() ? dir + "/replay_" + game_id + ".jsonl" : out;
    peril_status st = peril_cmd_export_replay(log_path.c_str(), game_id.c_str(),
                                              out_path.c_str(), &summary);
    return finish(st, summary, "export-replay");
  }
  std::fprintf(stderr, "peril: no subcommand\n");
  return 1;
}
