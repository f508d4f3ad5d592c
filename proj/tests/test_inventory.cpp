#include <doctest.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/inventory.hpp"

using namespace peril;

namespace {

const std::string kDataDir = PERIL_DATA_DIR;

const Inventory& starter() {
  static Inventory inv = load_inventory(kDataDir + "/inventory/starter_inventory.json");
  return inv;
}

Json tiny_inventory_doc() {
  return Json{{"items", Json::array({
      Json{{"id", "q1"},
           {"statement", "I go straight for the throat."},
           {"maps", Json{{"attack", Json{{"positive", Json::array({"ONM"})},
                                         {"negative", Json::array({"PASS"})}}}}}},
      Json{{"id", "q2"},
           {"statement", "I prefer to sit back and fortify."},
           {"maps", Json{{"attack", Json{{"positive", Json::array({"PASS"})}}},
                         {"redeploy", Json{{"positive", Json::array({"L"})}}}}}},
  })}};
}

}  // namespace

TEST_CASE("starter inventory loads and covers every code at least twice") {
  const Inventory& inv = starter();
  CHECK(inv.size() == 30);

  std::array<int, kHeuristicCodeCount> touches{};
  for (const InventoryItem& item : inv) {
    CHECK_FALSE(item.statement.empty());
    for (HeuristicCode c : item.positive) ++touches[static_cast<size_t>(c)];
    for (HeuristicCode c : item.negative) ++touches[static_cast<size_t>(c)];
  }
  for (size_t c = 0; c < kHeuristicCodeCount; ++c) {
    INFO("code ", heur_phase_name(code_phase(static_cast<HeuristicCode>(c))), "/",
         code_name(static_cast<HeuristicCode>(c)));
    CHECK(touches[c] >= 2);
  }

  // Round-trip through json preserves the mapping.
  Inventory back = inventory_from_json(inventory_to_json(inv), "round-trip");
  REQUIRE(back.size() == inv.size());
  for (size_t i = 0; i < inv.size(); ++i) {
    CHECK(back[i].item_id == inv[i].item_id);
    CHECK(back[i].statement == inv[i].statement);
    CHECK(back[i].positive == inv[i].positive);
    CHECK(back[i].negative == inv[i].negative);
  }
}

TEST_CASE("inventory validation rejects malformed documents") {
  Json good = tiny_inventory_doc();
  CHECK(inventory_from_json(good, "ok").size() == 2);

  Json bad = good;
  bad["items"][1]["id"] = "q1";
  CHECK_THROWS_WITH_AS(inventory_from_json(bad, "t"), doctest::Contains("duplicate item"), Error);

  bad = good;
  bad["items"][0]["maps"]["attack"]["positive"].push_back("ZZZ");
  CHECK_THROWS_WITH_AS(inventory_from_json(bad, "t"), doctest::Contains("unknown code"), Error);

  // Same code in both orientations of one item.
  bad = good;
  bad["items"][0]["maps"]["attack"]["negative"].push_back("ONM");
  CHECK_THROWS_AS(inventory_from_json(bad, "t"), Error);

  // Same code twice in one orientation.
  bad = good;
  bad["items"][0]["maps"]["attack"]["positive"].push_back("ONM");
  CHECK_THROWS_AS(inventory_from_json(bad, "t"), Error);

  bad = good;
  bad["items"][0]["maps"]["attack"]["positive"].push_back(7);
  CHECK_THROWS_WITH_AS(inventory_from_json(bad, "t"), doctest::Contains("non-string"), Error);

  bad = good;
  bad["items"][0]["maps"]["siege"] = Json::object();
  CHECK_THROWS_AS(inventory_from_json(bad, "t"), Error);

  // PASS is a deploy stranger: deploy defines no PASS code.
  bad = good;
  bad["items"][0]["maps"]["deploy"] = Json{{"positive", Json::array({"PASS"})}};
  CHECK_THROWS_AS(inventory_from_json(bad, "t"), Error);

  CHECK_THROWS_AS(inventory_from_json(Json{{"nope", 1}}, "t"), Error);
}

TEST_CASE("scoring accumulates signed points per code") {
  ResponseSheet sheet;
  sheet.persona_id = "p";
  sheet.answers = {{"inv02", 2}, {"inv03", -1}};
  auto scores = score_points(starter(), sheet);

  // inv02 maps attack PTM positive, inv03 maps it negative: +2 - (-1) = 3 of 4.
  const CodeScore& ptm = scores[static_cast<size_t>(HeuristicCode::AttackPTM)];
  CHECK(ptm.points == doctest::Approx(3.0));
  CHECK(ptm.max_points == doctest::Approx(4.0));

  // The mirrored code runs the other way: -2 + (-1) = -3 of 4.
  const CodeScore& ptl = scores[static_cast<size_t>(HeuristicCode::AttackPTL)];
  CHECK(ptl.points == doctest::Approx(-3.0));
  CHECK(ptl.max_points == doctest::Approx(4.0));

  // inv02 also speaks for deploy PTM; inv03 does not.
  const CodeScore& dptm = scores[static_cast<size_t>(HeuristicCode::DeployPTM)];
  CHECK(dptm.points == doctest::Approx(2.0));
  CHECK(dptm.max_points == doctest::Approx(2.0));

  // Untouched codes stay at zero max.
  CHECK(scores[static_cast<size_t>(HeuristicCode::RedeployCB)].max_points == 0.0);
}

TEST_CASE("scoring rejects unknown items and off-scale answers") {
  ResponseSheet sheet;
  sheet.persona_id = "p";
  sheet.answers = {{"inv99", 1}};
  CHECK_THROWS_WITH_AS(score_points(starter(), sheet), doctest::Contains("unknown item"), Error);

  sheet.answers = {{"inv01", 0}};
  CHECK_THROWS_WITH_AS(score_points(starter(), sheet), doctest::Contains("off the"), Error);
  sheet.answers = {{"inv01", 3}};
  CHECK_THROWS_AS(score_points(starter(), sheet), Error);
  sheet.answers = {{"inv01", -3}};
  CHECK_THROWS_AS(score_points(starter(), sheet), Error);
}

TEST_CASE("response sheets round-trip and validate") {
  ResponseSheet s;
  s.persona_id = "p7";
  s.answers = {{"inv01", 2}, {"inv05", -2}};
  ResponseSheet back = ResponseSheet::from_json(s.to_json(), "t");
  CHECK(back.persona_id == "p7");
  CHECK(back.answers == s.answers);

  Json bad = s.to_json();
  bad["answers"]["inv02"] = 1.5;
  CHECK_THROWS_AS(ResponseSheet::from_json(bad, "t"), Error);
  CHECK_THROWS_AS(ResponseSheet::from_json(Json{{"answers", Json::object()}}, "t"), Error);

  std::string path = "sheets_roundtrip_test.jsonl";
  save_sheets(path, {s});
  auto loaded = load_sheets(path);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].answers == s.answers);
  std::remove(path.c_str());
}

TEST_CASE("weight transform hits the printed anchors") {
  CHECK(weight_transform(1.0, 0.5) == doctest::Approx(52.5).epsilon(1e-12));
  CHECK(weight_transform(-1.0, 0.5) == doctest::Approx(4.9).epsilon(1e-12));
  CHECK(weight_transform(0.0, 0.5) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(weight_transform(0.5, 0.5) == doctest::Approx(28.75).epsilon(1e-12));
  CHECK(weight_transform(-0.5, 0.5) == doctest::Approx(4.95).epsilon(1e-12));

  // The cap and the floor.
  CHECK(weight_transform(1.0, 2.0) == 100.0);
  CHECK(weight_transform(-1.0, 30.0) == 0.0);

  // Lambda zero pins everything to the default.
  CHECK(weight_transform(1.0, 0.0) == 5.0);
  CHECK(weight_transform(-1.0, 0.0) == 5.0);

  CHECK_THROWS_AS(weight_transform(1.1, 0.5), Error);
  CHECK_THROWS_AS(weight_transform(-1.1, 0.5), Error);
  CHECK_THROWS_AS(weight_transform(0.5, -0.1), Error);
}

TEST_CASE("strong agreement with the spread-out item reshapes ten deploy codes") {
  ResponseSheet sheet;
  sheet.persona_id = "spread";
  sheet.answers = {{"inv01", 2}};
  HeuristicProfile prof = build_profile_pi(starter(), sheet, 0.5);
  CHECK(prof.provenance == "PI");
  CHECK(prof.persona_id == "spread");

  for (HeuristicCode c : {HeuristicCode::DeployPTL, HeuristicCode::DeployPUL,
                          HeuristicCode::DeployPCL, HeuristicCode::DeployETN,
                          HeuristicCode::DeployEACL}) {
    CHECK(prof.weight(c) == doctest::Approx(52.5).epsilon(1e-12));
  }
  for (HeuristicCode c : {HeuristicCode::DeployPTM, HeuristicCode::DeployPUM,
                          HeuristicCode::DeployPCM, HeuristicCode::DeployETE,
                          HeuristicCode::DeployEACM}) {
    CHECK(prof.weight(c) == doctest::Approx(4.9).epsilon(1e-12));
  }
  // Everything the item does not touch keeps the default.
  CHECK(prof.weight(HeuristicCode::DeployEAC) == 5.0);
  CHECK(prof.weight(HeuristicCode::AttackONM) == 5.0);
  CHECK(prof.weight(HeuristicCode::RedeployPASS) == 5.0);
}

TEST_CASE("profiles accumulate multiple items before transforming") {
  ResponseSheet sheet;
  sheet.persona_id = "mixed";
  sheet.answers = {{"inv02", 2}, {"inv03", -1}};
  HeuristicProfile prof = build_profile_pi(starter(), sheet, 0.5);

  // attack PTM: r = 3/4 -> 0.5 * 95 * 0.75 + 5.
  CHECK(prof.weight(HeuristicCode::AttackPTM) == doctest::Approx(40.625).epsilon(1e-12));
  // attack PTL: r = -3/4 -> 5 - 0.5 * 0.15.
  CHECK(prof.weight(HeuristicCode::AttackPTL) == doctest::Approx(4.925).epsilon(1e-12));
  // deploy PTM saw only inv02: r = 1.
  CHECK(prof.weight(HeuristicCode::DeployPTM) == doctest::Approx(52.5).epsilon(1e-12));

  // An empty sheet leaves the whole profile at defaults.
  ResponseSheet empty;
  empty.persona_id = "blank";
  HeuristicProfile dflt = build_profile_pi(starter(), empty, 0.5);
  for (double w : dflt.weights) CHECK(w == kDefaultWeight);
}

TEST_CASE("lambda scales how hard the inventory bends weights") {
  ResponseSheet sheet;
  sheet.persona_id = "p";
  sheet.answers = {{"inv01", 2}};
  HeuristicProfile soft = build_profile_pi(starter(), sheet, 0.1);
  HeuristicProfile hard = build_profile_pi(starter(), sheet, 2.0);
  CHECK(soft.weight(HeuristicCode::DeployPTL) == doctest::Approx(14.5).epsilon(1e-12));
  CHECK(hard.weight(HeuristicCode::DeployPTL) == 100.0);
  CHECK(hard.weight(HeuristicCode::DeployPTM) == doctest::Approx(4.6).epsilon(1e-12));
}

TEST_CASE("dh responses parse from bare, fenced, and prose-wrapped json") {
  HeuristicProfile bare = parse_dh_response(R"({"ONM": 80, "PASS": 10})");
  CHECK(bare.provenance == "DH");
  CHECK(bare.weight(HeuristicCode::AttackONM) == 80.0);
  CHECK(bare.weight(HeuristicCode::AttackPASS) == 10.0);
  CHECK(bare.weight(HeuristicCode::RedeployPASS) == 10.0);  // phase-less applies everywhere
  CHECK(bare.weight(HeuristicCode::DeployPTM) == 5.0);

  HeuristicProfile fenced = parse_dh_response(
      "Here are my weights:\n```json\n{\"PTM\": 60, \"ETE\": 45}\n```\nLet me know.");
  CHECK(fenced.weight(HeuristicCode::DeployPTM) == 60.0);
  CHECK(fenced.weight(HeuristicCode::AttackPTM) == 60.0);  // both phases define PTM
  CHECK(fenced.weight(HeuristicCode::DeployETE) == 45.0);

  HeuristicProfile prose = parse_dh_response(
      "I would assign {\"L\": 20, \"SI\": 95} because mobility matters.");
  CHECK(prose.weight(HeuristicCode::RedeploySI) == 95.0);
  CHECK(prose.weight(HeuristicCode::RedeployL) == 20.0);
  CHECK(prose.weight(HeuristicCode::AttackL) == 20.0);

  // One wrapper level is tolerated.
  HeuristicProfile wrapped = parse_dh_response(R"({"weights": {"CB": 33}})");
  CHECK(wrapped.weight(HeuristicCode::RedeployCB) == 33.0);

  // Values clamp into the weight range; strings holding numbers are accepted.
  HeuristicProfile clamped = parse_dh_response(R"({"ONM": 250, "ONL": -3, "ON2": "42"})");
  CHECK(clamped.weight(HeuristicCode::AttackONM) == 100.0);
  CHECK(clamped.weight(HeuristicCode::AttackONL) == 0.0);
  CHECK(clamped.weight(HeuristicCode::AttackON2) == 42.0);

  CHECK_THROWS_AS(parse_dh_response("no mapping here at all"), Error);
  CHECK_THROWS_AS(parse_dh_response(R"({"XYZ": 10})"), Error);
  CHECK_THROWS_AS(parse_dh_response("[1, 2, 3]"), Error);
}

TEST_CASE("apply_dh_response scopes names to one phase") {
  HeuristicProfile prof;
  apply_dh_response(prof, R"({"PTM": 70, "PASS": 25})", HeurPhase::Attack);
  CHECK(prof.weight(HeuristicCode::AttackPTM) == 70.0);
  CHECK(prof.weight(HeuristicCode::AttackPASS) == 25.0);
  CHECK(prof.weight(HeuristicCode::DeployPTM) == 5.0);  // untouched in deploy
  CHECK(prof.weight(HeuristicCode::RedeployPASS) == 5.0);

  // A reply naming only foreign codes is unusable for this phase.
  HeuristicProfile other;
  CHECK_THROWS_AS(apply_dh_response(other, R"({"CB": 10})", HeurPhase::Attack), Error);
}

TEST_CASE("shuffled mappings permute pairs and keep statements") {
  const Inventory& inv = starter();
  Inventory shuf = shuffled_mappings(inv, 42);
  REQUIRE(shuf.size() == inv.size());

  auto key = [](const InventoryItem& it) {
    std::string k;
    for (HeuristicCode c : it.positive) k += std::to_string(static_cast<int>(c)) + "+";
    k += "|";
    for (HeuristicCode c : it.negative) k += std::to_string(static_cast<int>(c)) + "-";
    return k;
  };

  std::vector<std::string> orig_pairs, shuf_pairs;
  bool any_moved = false;
  for (size_t i = 0; i < inv.size(); ++i) {
    CHECK(shuf[i].item_id == inv[i].item_id);
    CHECK(shuf[i].statement == inv[i].statement);
    orig_pairs.push_back(key(inv[i]));
    shuf_pairs.push_back(key(shuf[i]));
    if (key(shuf[i]) != key(inv[i])) any_moved = true;
  }
  CHECK(any_moved);

  // Same multiset of mapping pairs.
  std::sort(orig_pairs.begin(), orig_pairs.end());
  std::sort(shuf_pairs.begin(), shuf_pairs.end());
  CHECK(orig_pairs == shuf_pairs);

  // Deterministic in the seed, and different seeds give different orders.
  Inventory again = shuffled_mappings(inv, 42);
  for (size_t i = 0; i < inv.size(); ++i) CHECK(key(again[i]) == key(shuf[i]));
  Inventory other = shuffled_mappings(inv, 43);
  bool differs = false;
  for (size_t i = 0; i < inv.size(); ++i) differs |= (key(other[i]) != key(shuf[i]));
  CHECK(differs);
}
