#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <peril/peril.h>

#include "core/error.hpp"
#include "core/jsonio.hpp"
#include "core/match.hpp"
#include "core/pipeline.hpp"
#include "core/tournament.hpp"

using namespace peril;
namespace fs = std::filesystem;

namespace {

const std::string kDataDir = PERIL_DATA_DIR;

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(name) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  std::string operator/(const std::string& leaf) const { return (dir / leaf).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void clear_llm_env() {
  unsetenv("PERIL_LLM_ENDPOINT");
  unsetenv("PERIL_LLM_MODEL");
  unsetenv("PERIL_LLM_KEY");
}

RunConfig mock_run_config() {
  RunConfig cfg;
  cfg.map_path = kDataDir + "/maps/duel12.json";
  cfg.lambda = 0.5;
  cfg.seed = 99;
  cfg.rounds = 5;
  cfg.runs = 2;
  cfg.k = 8;
  cfg.jobs = 1;
  cfg.method = "PI";
  cfg.backend.kind = "mock";
  cfg.game.players = 2;
  cfg.game.initial_units = 8;
  cfg.game.turn_limit = 60;
  return cfg;
}

void write_small_corpus(const std::string& path, size_t n) {
  std::vector<Persona> corpus = load_personas(kDataDir + "/personas/sample_personas.jsonl");
  REQUIRE(corpus.size() >= n);
  corpus.resize(n);
  save_personas(path, corpus);
}

// In-process chat-completions fixture; responds via the supplied callback.
struct FixtureServer {
  httplib::Server svr;
  std::thread th;
  int port = 0;
  std::atomic<int> requests{0};

  explicit FixtureServer(std::function<std::string(const std::string& body)> content_for,
                         std::function<bool(const std::string& body)> reject = nullptr) {
    svr.Post("/.*", [this, content_for, reject](const httplib::Request& req,
                                                httplib::Response& res) {
      ++requests;
      if (reject && reject(req.body)) {
        res.status = 500;
        return;
      }
      Json msg{{"role", "assistant"}, {"content", content_for(req.body)}};
      res.status = 200;
      res.set_content(Json{{"choices", Json::array({Json{{"message", msg}}})}}.dump(),
                      "application/json");
    });
    port = svr.bind_to_any_port("127.0.0.1");
    th = std::thread([this] { svr.listen_after_bind(); });
    svr.wait_until_ready();
  }
  ~FixtureServer() {
    svr.stop();
    th.join();
  }

  BackendConfig backend() const {
    BackendConfig cfg;
    cfg.kind = "http";
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port);
    cfg.model = "fixture";
    cfg.api_key = "k";
    cfg.max_retries = 0;
    cfg.backoff_ms = 1;
    cfg.timeout_ms = 5000;
    return cfg;
  }
};

}  // namespace

TEST_CASE("run configs parse strictly") {
  Json good{{"map", "m.json"},
            {"lambda", 0.5},
            {"seed", 7},
            {"rounds", 3},
            {"runs", 2},
            {"k", 4},
            {"jobs", 1},
            {"method", "PI"},
            {"out_dir", "o"},
            {"backend", Json{{"kind", "mock"}}},
            {"game", Json{{"players", 2}, {"initial_units", 8}, {"turn_limit", 60}}}};
  RunConfig cfg = RunConfig::from_json(good, "test");
  CHECK(cfg.map_path == "m.json");
  CHECK(cfg.seed == 7);
  CHECK(cfg.game.initial_units == 8);
  CHECK(cfg.backend.kind == "mock");
  // to_json -> from_json is stable.
  CHECK(RunConfig::from_json(cfg.to_json(), "again").to_json().dump() == cfg.to_json().dump());

  auto rejects = [&](const char* key, Json value, const char* fragment) {
    Json doc = good;
    doc[key] = std::move(value);
    CHECK_THROWS_WITH_AS(RunConfig::from_json(doc, "test"), doctest::Contains(fragment), Error);
  };
  rejects("lambda", 0.0, "lambda must be > 0");
  rejects("lambda", "half", "must be a number");
  rejects("rounds", 0, ">= 1");
  rejects("runs", 0, ">= 1");
  rejects("k", 0, ">= 1");
  rejects("jobs", 0, ">= 1");
  rejects("method", "XP", "method must be DH or PI");
  rejects("seed", 1.5, "must be an integer");
  rejects("map", 7, "must be a string");
  Json stray = good;
  stray["mood"] = "upbeat";
  CHECK_THROWS_WITH_AS(RunConfig::from_json(stray, "test"),
                       doctest::Contains("unknown config key 'mood'"), Error);
  Json keyed = good;
  keyed["backend"] = Json{{"kind", "http"}, {"api_key", "nope"}};
  CHECK_THROWS_WITH_AS(RunConfig::from_json(keyed, "test"),
                       doctest::Contains("never from config files"), Error);

  // The shipped default config is valid.
  CHECK_NOTHROW(RunConfig::load(kDataDir + "/run_config.json"));
}

TEST_CASE("the mock pipeline runs end to end and is re-runnable byte for byte") {
  Scratch a("pipeline_scratch_a");
  Scratch b("pipeline_scratch_b");
  RunConfig cfg = mock_run_config();
  std::string corpus = a / "corpus.jsonl";
  write_small_corpus(corpus, 12);

  auto run_all = [&](const Scratch& s) {
    CmdResult ann = cmd_annotate(cfg, corpus, s / "ratings.jsonl", "");
    CHECK(ann.status == CmdStatus::Done);
    CHECK(ann.summary.find("annotated 12/12") != std::string::npos);
    CHECK_FALSE(fs::exists(s / "ratings.jsonl.skips.jsonl"));

    CmdResult sel = cmd_select_personas(cfg, corpus, s / "ratings.jsonl", s / "subset.jsonl");
    CHECK(sel.summary.find("selected 8 of 12") != std::string::npos);

    CmdResult eli =
        cmd_elicit(cfg, s / "subset.jsonl", kDataDir + "/inventory/starter_inventory.json",
                   s / "profiles.jsonl", "");
    CHECK(eli.status == CmdStatus::Done);
    CHECK(eli.summary.find("elicited 8/8 PI profiles") != std::string::npos);

    CmdResult tour = cmd_tournament(cfg, s / "profiles.jsonl", s / "t");
    CHECK(tour.summary.find("run 01: 20 matches") != std::string::npos);
    CHECK(tour.summary.find("run 02: 20 matches") != std::string::npos);
  };
  run_all(a);

  std::vector<FeatureRatings> ratings = load_ratings(a / "ratings.jsonl");
  REQUIRE(ratings.size() == 12);
  std::vector<Persona> subset = load_personas(a / "subset.jsonl");
  REQUIRE(subset.size() == 8);
  std::vector<HeuristicProfile> profiles = load_profile_set(a / "profiles.jsonl");
  REQUIRE(profiles.size() == 8);
  for (size_t i = 0; i < profiles.size(); ++i) {
    CHECK(profiles[i].provenance == "PI");
    CHECK(profiles[i].persona_id == subset[i].persona_id);
  }

  // Tournament artifacts: a leaderboard and a log per run.
  auto boards = load_leaderboard(a / "t_run01_leaderboard.jsonl");
  REQUIRE(boards.size() == 8);
  for (size_t i = 1; i < boards.size(); ++i) {
    CHECK(boards[i - 1].rating.mu >= boards[i].rating.mu);
  }
  std::vector<Json> log = read_ndjson_file(a / "t_run01_log.jsonl");
  REQUIRE(log.size() == 21);  // header + 5 rounds x 4 pairings
  CHECK(log[0]["kind"] == "header");
  CHECK(log[0]["players"].size() == 8);
  CHECK(log[0]["map_path"] == cfg.map_path);
  for (size_t i = 1; i < log.size(); ++i) {
    CHECK(log[i]["kind"] == "match");
    CHECK(log[i]["round"] == (i - 1) / 4 + 1);
    CHECK(log[i]["pair"] == (i - 1) % 4 + 1);
    CHECK(log[i]["ratings"]["before"].size() == 2);
    CHECK(log[i]["ratings"]["after"].size() == 2);
  }
  // Runs are independently seeded.
  CHECK(slurp(a / "t_run01_log.jsonl") != slurp(a / "t_run02_log.jsonl"));

  // A second pass from the same inputs reproduces every artifact exactly.
  run_all(b);
  CHECK(slurp(a / "ratings.jsonl") == slurp(b / "ratings.jsonl"));
  CHECK(slurp(a / "subset.jsonl") == slurp(b / "subset.jsonl"));
  CHECK(slurp(a / "profiles.jsonl") == slurp(b / "profiles.jsonl"));
  for (const char* leaf : {"t_run01_leaderboard.jsonl", "t_run02_leaderboard.jsonl"}) {
    CHECK(slurp(a / leaf) == slurp(b / leaf));
  }
  for (const char* leaf : {"t_run01_log.jsonl", "t_run02_log.jsonl"}) {
    std::vector<Json> la = read_ndjson_file(a / leaf), lb = read_ndjson_file(b / leaf);
    REQUIRE(la.size() == lb.size());
    la[0].erase("profiles_path");  // headers embed the (differing) artifact paths
    lb[0].erase("profiles_path");
    for (size_t i = 0; i < la.size(); ++i) CHECK(la[i].dump() == lb[i].dump());
  }

  // Annotation is order-stable under a thread pool.
  RunConfig threaded = cfg;
  threaded.jobs = 3;
  cmd_annotate(threaded, corpus, b / "ratings_threaded.jsonl", "");
  CHECK(slurp(a / "ratings.jsonl") == slurp(b / "ratings_threaded.jsonl"));

  SUBCASE("analysis reports are byte-stable") {
    std::vector<std::string> leaderboards{a / "t_run01_leaderboard.jsonl",
                                          a / "t_run02_leaderboard.jsonl"};
    CmdResult rep = cmd_analyze(cfg, leaderboards, a / "ratings.jsonl",
                                {a / "profiles.jsonl"}, corpus, a / "rep");
    CHECK(rep.summary.find("rep_report.txt") != std::string::npos);
    std::string text = slurp(a / "rep_report.txt");
    CHECK(text.find("== feature correlations ==") != std::string::npos);
    CHECK(text.find("== extremes: t_run01_leaderboard ==") != std::string::npos);
    CHECK(text.find("opposite-value consistency: profiles") != std::string::npos);
    CHECK(text.find("== mean weights: profiles ==") != std::string::npos);
    Json bundle = read_json_file(a / "rep_report.json");
    CHECK(bundle.contains("correlations"));
    CHECK(bundle["correlations"].size() == 10);  // 2 leaderboards x 5 features
    CHECK(bundle.contains("ovc"));
    CHECK(bundle.contains("mean_weights"));
    CHECK_FALSE(bundle.contains("difference"));

    cmd_analyze(cfg, leaderboards, a / "ratings.jsonl", {a / "profiles.jsonl"}, corpus,
                b / "rep");
    CHECK(text == slurp(b / "rep_report.txt"));
    CHECK(slurp(a / "rep_report.json") == slurp(b / "rep_report.json"));

    // Two profile sets add the difference table; against itself it is zero.
    cmd_analyze(cfg, {}, "", {a / "profiles.jsonl", a / "profiles.jsonl"}, "", a / "diff");
    Json diff = read_json_file(a / "diff_report.json");
    REQUIRE(diff.contains("difference"));
    for (const Json& row : diff["difference"]) {
      CHECK(row["ovc_ratio_diff"].get<double>() == 0.0);
      CHECK(row["raw_weight_diff"].get<double>() == 0.0);
    }

    CHECK_THROWS_WITH_AS(cmd_analyze(cfg, leaderboards, "", {}, "", a / "x"),
                         doctest::Contains("needs a ratings file"), Error);
    CHECK_THROWS_WITH_AS(
        cmd_analyze(cfg, {}, "",
                    {a / "profiles.jsonl", a / "profiles.jsonl", a / "profiles.jsonl"}, "",
                    a / "x"),
        doctest::Contains("at most two profile sets"), Error);
    CHECK_THROWS_WITH_AS(cmd_analyze(cfg, {}, "", {}, "", a / "x"),
                         doctest::Contains("nothing to analyze"), Error);
  }

  SUBCASE("logged games replay to the same outcome") {
    CmdResult rep = cmd_export_replay(a / "t_run01_log.jsonl", "r01_g01", a / "replay.jsonl");
    CHECK(rep.summary.find("exported") != std::string::npos);
    std::vector<Json> frames = read_ndjson_file(a / "replay.jsonl");
    REQUIRE(frames.size() >= 2);
    CHECK(frames[0]["game_id"] == "r01_g01");  // header line, then one snapshot per line
    for (size_t i = 1; i < frames.size(); ++i) {
      CHECK(frames[i].contains("owner"));
      CHECK(frames[i].contains("units"));
    }

    CHECK_THROWS_WITH_AS(cmd_export_replay(a / "t_run01_log.jsonl", "r77_g77", a / "x.jsonl"),
                         doctest::Contains("is not in log"), Error);

    // A tampered outcome row no longer matches the replay.
    std::vector<Json> rows = read_ndjson_file(a / "t_run01_log.jsonl");
    for (Json& row : rows) {
      if (row.value("kind", "") == "match" && row["game_id"] == "r01_g01") {
        row["turns"] = row["turns"].get<int64_t>() + 1;
      }
    }
    write_ndjson_file(a / "tampered_log.jsonl", rows);
    CHECK_THROWS_WITH_AS(cmd_export_replay(a / "tampered_log.jsonl", "r01_g01", a / "y.jsonl"),
                         doctest::Contains("diverges from the log"), Error);
  }
}

TEST_CASE("unreachable backends degrade to a partial result with a skip report") {
  clear_llm_env();
  Scratch s("pipeline_scratch_partial");
  std::string corpus = s / "corpus.jsonl";
  write_small_corpus(corpus, 3);

  RunConfig cfg = mock_run_config();
  cfg.backend.kind = "http";
  cfg.backend.endpoint = "http://127.0.0.1:1";  // nothing listens here
  cfg.backend.model = "m";
  cfg.backend.api_key = "k";
  cfg.backend.max_retries = 0;
  cfg.backend.backoff_ms = 1;

  CmdResult res = cmd_annotate(cfg, corpus, s / "ratings.jsonl", "");
  CHECK(res.status == CmdStatus::Partial);
  CHECK(res.summary.find("annotated 0/3") != std::string::npos);
  CHECK(res.summary.find("skipped 3 personas") != std::string::npos);
  CHECK(load_ratings(s / "ratings.jsonl").empty());
  std::vector<Json> skips = read_ndjson_file(s / "ratings.jsonl.skips.jsonl");
  REQUIRE(skips.size() == 3);
  for (const Json& skip : skips) {
    CHECK(skip["error"].get<std::string>().find("transport error") != std::string::npos);
  }

  // A later clean pass removes the stale skip report.
  cfg.backend = BackendConfig{};
  cfg.backend.kind = "mock";
  CmdResult ok = cmd_annotate(cfg, corpus, s / "ratings.jsonl", "");
  CHECK(ok.status == CmdStatus::Done);
  CHECK_FALSE(fs::exists(s / "ratings.jsonl.skips.jsonl"));
}

TEST_CASE("per-persona failures skip just that persona") {
  Scratch s("pipeline_scratch_poison");
  std::vector<Persona> corpus{{"good1", "a calm, friendly analyst"},
                              {"bad", "POISONMARK triggers a useless reply"},
                              {"good2", "an aggressive warlord"}};
  save_personas(s / "corpus.jsonl", corpus);

  FixtureServer server(
      [](const std::string& body) -> std::string {
        if (body.find("POISONMARK") != std::string::npos) return "I refuse to answer.";
        return R"({"strategicThinker": 0.5, "domainExpert": 0, "perilSpecific": -0.5,
                   "riskTaker": 1, "doOrBe": 0})";
      });
  RunConfig cfg = mock_run_config();
  cfg.backend = server.backend();

  CmdResult res = cmd_annotate(cfg, s / "corpus.jsonl", s / "ratings.jsonl", "");
  CHECK(res.status == CmdStatus::Partial);
  std::vector<FeatureRatings> rows = load_ratings(s / "ratings.jsonl");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].persona_id == "good1");  // corpus order survives the skip
  CHECK(rows[1].persona_id == "good2");
  std::vector<Json> skips = read_ndjson_file(s / "ratings.jsonl.skips.jsonl");
  REQUIRE(skips.size() == 1);
  CHECK(skips[0]["persona_id"] == "bad");
  CHECK(skips[0]["error"].get<std::string>().find("no assessment object") != std::string::npos);
}

TEST_CASE("direct elicitation over http applies per-phase replies") {
  Scratch s("pipeline_scratch_dh");
  std::vector<Persona> corpus{{"hero", "a stalwart defender"},
                              {"bad", "POISONMARK breaks this one"}};
  save_personas(s / "corpus.jsonl", corpus);

  FixtureServer server([](const std::string& body) -> std::string {
    if (body.find("POISONMARK") != std::string::npos) return "no structured reply";
    if (body.find("OBTM - Move") != std::string::npos) return R"({"OBTM": 30})";
    if (body.find("ONM - Attack") != std::string::npos) return R"({"ONM": 40})";
    return R"({"ETE": 20})";
  });
  RunConfig cfg = mock_run_config();
  cfg.method = "DH";
  cfg.backend = server.backend();

  CmdResult res = cmd_elicit(cfg, s / "corpus.jsonl", "", s / "profiles.jsonl", "");
  CHECK(res.status == CmdStatus::Partial);
  std::vector<HeuristicProfile> got = load_profile_set(s / "profiles.jsonl");
  REQUIRE(got.size() == 1);
  CHECK(got[0].persona_id == "hero");
  CHECK(got[0].provenance == "DH");
  CHECK(got[0].weight(HeuristicCode::DeployETE) == 20.0);
  CHECK(got[0].weight(HeuristicCode::AttackONM) == 40.0);
  CHECK(got[0].weight(HeuristicCode::RedeployOBTM) == 30.0);
  CHECK(got[0].weight(HeuristicCode::DeployPTM) == 5.0);
  CHECK(got[0].weight(HeuristicCode::AttackPASS) == 5.0);
  std::vector<Json> skips = read_ndjson_file(s / "profiles.jsonl.skips.jsonl");
  REQUIRE(skips.size() == 1);
  CHECK(skips[0]["persona_id"] == "bad");

  RunConfig pi = mock_run_config();
  CHECK_THROWS_WITH_AS(cmd_elicit(pi, s / "corpus.jsonl", "", s / "x.jsonl", ""),
                       doctest::Contains("requires an inventory file"), Error);
}

TEST_CASE("the C interface wraps maps, games, and configs") {
  peril_map* map = nullptr;
  CHECK(peril_map_load("no/such/map.json", &map) == PERIL_ERROR);
  CHECK(std::string(peril_last_error()).size() > 0);

  std::string duel12 = kDataDir + "/maps/duel12.json";
  REQUIRE(peril_map_load(duel12.c_str(), &map) == PERIL_OK);
  CHECK(std::string(peril_last_error()).empty());
  CHECK(peril_map_region_count(map) == 12);
  CHECK(peril_map_zone_count(map) == 3);
  CHECK(std::string(peril_map_name(map)).size() > 0);

  // Build a small profile set on disk for the C loader.
  Scratch s("pipeline_scratch_capi");
  {
    HeuristicProfile a;
    a.persona_id = "alpha";
    a.set_weight(HeuristicCode::AttackONM, 80.0);
    a.set_weight(HeuristicCode::AttackPASS, 0.0);
    HeuristicProfile b;
    b.persona_id = "beta";
    HeuristicProfile c;
    c.persona_id = "gamma";
    c.set_weight(HeuristicCode::AttackPASS, 100.0);
    c.set_weight(HeuristicCode::RedeployPASS, 100.0);
    save_profile_set(s / "set.jsonl", {a, b, c});
  }
  peril_profile_set* set = nullptr;
  REQUIRE(peril_profile_set_load((s / "set.jsonl").c_str(), &set) == PERIL_OK);
  CHECK(peril_profile_set_size(set) == 3);
  CHECK(std::string(peril_profile_set_persona_id(set, 0)) == "alpha");
  CHECK(std::string(peril_profile_set_persona_id(set, 2)) == "gamma");
  CHECK(peril_profile_set_persona_id(set, 3) == nullptr);

  size_t seats[2] = {0, 2};
  const char* game_json = R"({"initial_units": 6, "turn_limit": 40})";
  peril_match* match = nullptr;
  REQUIRE(peril_game_play(map, set, seats, 2, game_json, 5, 1, &match) == PERIL_OK);
  std::string status = peril_match_status(match);
  CHECK((status == "won" || status == "draw"));
  CHECK(peril_match_turns(match) >= 1);
  char* json_out = nullptr;
  REQUIRE(peril_match_to_json(match, &json_out) == PERIL_OK);
  Json record = Json::parse(json_out);
  peril_string_free(json_out);
  CHECK(record["players"] == Json::array({"alpha", "gamma"}));
  CHECK(record["seed"] == 5);

  // The C-side game equals the core engine run with the same inputs.
  {
    std::vector<HeuristicProfile> profiles = load_profile_set(s / "set.jsonl");
    GameConfig gc;
    gc.players = 2;
    gc.initial_units = 6;
    gc.turn_limit = 40;
    MapGraph graph = MapGraph::load(duel12);
    MatchRecord want = play_game(graph, {profiles[0], profiles[2]}, gc, 5);
    CHECK(record["status"] == want.to_json()["status"]);
    CHECK(record["winner"].get<int>() == want.winner);
    CHECK(record["turns"].get<int64_t>() == want.turns);
  }

  REQUIRE(peril_match_export_replay(match, (s / "replay.jsonl").c_str()) == PERIL_OK);
  CHECK(read_ndjson_file(s / "replay.jsonl").size() >= 2);
  peril_match_free(match);

  // Snapshots are opt-in; exporting without them fails.
  peril_match* bare = nullptr;
  REQUIRE(peril_game_play(map, set, seats, 2, game_json, 5, 0, &bare) == PERIL_OK);
  CHECK(peril_match_export_replay(bare, (s / "no.jsonl").c_str()) == PERIL_ERROR);
  CHECK(std::string(peril_last_error()).size() > 0);
  peril_match_free(bare);

  size_t bad_seats[2] = {0, 9};
  peril_match* nope = nullptr;
  CHECK(peril_game_play(map, set, bad_seats, 2, nullptr, 1, 0, &nope) == PERIL_ERROR);
  CHECK(std::string(peril_last_error()).find("out of range") != std::string::npos);
  CHECK(peril_game_play(map, set, seats, 2, "{nonsense", 1, 0, &nope) == PERIL_ERROR);

  // Run configs: dotted keys, validation, and rejected values changing nothing.
  peril_run_config* cfg = nullptr;
  REQUIRE(peril_run_config_create(nullptr, &cfg) == PERIL_OK);
  CHECK(peril_run_config_set(cfg, "rounds", "7") == PERIL_OK);
  CHECK(peril_run_config_set(cfg, "game.players", "3") == PERIL_OK);
  CHECK(peril_run_config_set(cfg, "backend.kind", "mock") == PERIL_OK);
  CHECK(peril_run_config_set(cfg, "lambda", "0.25") == PERIL_OK);

  CHECK(peril_run_config_set(cfg, "rounds", "0") == PERIL_ERROR);
  CHECK(peril_run_config_set(cfg, "rounds", "several") == PERIL_ERROR);
  CHECK(peril_run_config_set(cfg, "mood", "sunny") == PERIL_ERROR);
  CHECK(std::string(peril_last_error()).find("unknown config key") != std::string::npos);
  CHECK(peril_run_config_set(cfg, "backend.api_key", "sneaky") == PERIL_ERROR);

  char* cfg_json = nullptr;
  REQUIRE(peril_run_config_to_json(cfg, &cfg_json) == PERIL_OK);
  Json doc = Json::parse(cfg_json);
  peril_string_free(cfg_json);
  CHECK(doc["rounds"] == 7);  // the rejected overrides left it alone
  CHECK(doc["lambda"] == 0.25);
  CHECK(doc["game"]["players"] == 3);
  CHECK_FALSE(doc["backend"].contains("api_key"));

  std::string shipped = kDataDir + "/run_config.json";
  peril_run_config* from_file = nullptr;
  REQUIRE(peril_run_config_create(shipped.c_str(), &from_file) == PERIL_OK);
  peril_run_config_free(from_file);

  peril_run_config_free(cfg);
  peril_profile_set_free(set);
  peril_map_free(map);
}

TEST_CASE("the C interface runs pipeline commands and reports partial results") {
  clear_llm_env();
  Scratch s("pipeline_scratch_capi_cmds");
  write_small_corpus(s / "corpus.jsonl", 6);

  peril_run_config* cfg = nullptr;
  REQUIRE(peril_run_config_create(nullptr, &cfg) == PERIL_OK);
  REQUIRE(peril_run_config_set(cfg, "backend.kind", "mock") == PERIL_OK);
  REQUIRE(peril_run_config_set(cfg, "map", (kDataDir + "/maps/tiny3.json").c_str()) == PERIL_OK);
  REQUIRE(peril_run_config_set(cfg, "k", "4") == PERIL_OK);
  REQUIRE(peril_run_config_set(cfg, "rounds", "2") == PERIL_OK);
  REQUIRE(peril_run_config_set(cfg, "game.initial_units", "6") == PERIL_OK);
  REQUIRE(peril_run_config_set(cfg, "game.turn_limit", "40") == PERIL_OK);

  char* summary = nullptr;
  CHECK(peril_cmd_annotate(cfg, (s / "corpus.jsonl").c_str(), (s / "ratings.jsonl").c_str(),
                           nullptr, &summary) == PERIL_OK);
  REQUIRE(summary != nullptr);
  CHECK(std::string(summary).find("annotated 6/6") != std::string::npos);
  peril_string_free(summary);

  CHECK(peril_cmd_select_personas(cfg, (s / "corpus.jsonl").c_str(),
                                  (s / "ratings.jsonl").c_str(), (s / "subset.jsonl").c_str(),
                                  &summary) == PERIL_OK);
  peril_string_free(summary);

  std::string inventory = kDataDir + "/inventory/starter_inventory.json";
  CHECK(peril_cmd_elicit(cfg, (s / "subset.jsonl").c_str(), inventory.c_str(),
                         (s / "profiles.jsonl").c_str(), nullptr, &summary) == PERIL_OK);
  peril_string_free(summary);

  CHECK(peril_cmd_tournament(cfg, (s / "profiles.jsonl").c_str(), (s / "t").c_str(),
                             &summary) == PERIL_OK);
  CHECK(std::string(summary).find("run 01") != std::string::npos);
  peril_string_free(summary);

  const char* boards[1] = {nullptr};
  std::string board_path = s / "t_run01_leaderboard.jsonl";
  boards[0] = board_path.c_str();
  const char* sets[1];
  std::string profiles_path = s / "profiles.jsonl";
  sets[0] = profiles_path.c_str();
  CHECK(peril_cmd_analyze(cfg, boards, 1, (s / "ratings.jsonl").c_str(), sets, 1,
                          (s / "corpus.jsonl").c_str(), (s / "rep").c_str(),
                          &summary) == PERIL_OK);
  peril_string_free(summary);
  CHECK(fs::exists(s / "rep_report.txt"));
  CHECK(fs::exists(s / "rep_report.json"));

  std::vector<Json> log = read_ndjson_file(s / "t_run01_log.jsonl");
  std::string game_id = log.at(1)["game_id"].get<std::string>();
  CHECK(peril_cmd_export_replay((s / "t_run01_log.jsonl").c_str(), game_id.c_str(),
                                (s / "replay.jsonl").c_str(), &summary) == PERIL_OK);
  peril_string_free(summary);
  CHECK(fs::exists(s / "replay.jsonl"));

  // An http backend with no key in the environment skips every persona.
  REQUIRE(peril_run_config_set(cfg, "backend.kind", "http") == PERIL_OK);
  REQUIRE(peril_run_config_set(cfg, "backend.endpoint", "http://127.0.0.1:1") == PERIL_OK);
  REQUIRE(peril_run_config_set(cfg, "backend.model", "m") == PERIL_OK);
  REQUIRE(peril_run_config_set(cfg, "backend.max_retries", "0") == PERIL_OK);
  REQUIRE(peril_run_config_set(cfg, "backend.backoff_ms", "1") == PERIL_OK);
  CHECK(peril_cmd_annotate(cfg, (s / "corpus.jsonl").c_str(), (s / "r2.jsonl").c_str(), nullptr,
                           &summary) == PERIL_PARTIAL);
  CHECK(std::string(summary).find("skipped 6 personas") != std::string::npos);
  peril_string_free(summary);
  std::vector<Json> skips = read_ndjson_file(s / "r2.jsonl.skips.jsonl");
  REQUIRE(skips.size() == 6);
  CHECK(skips[0]["error"].get<std::string>().find("PERIL_LLM_KEY") != std::string::npos);

  peril_run_config_free(cfg);
}
