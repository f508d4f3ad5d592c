#include "core/inventory.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "core/rng.hpp"

namespace peril {

namespace {

std::vector<HeuristicCode> parse_code_list(const Json& arr, HeurPhase phase,
                                           const std::string& item_id,
                                           const std::string& origin) {
  if (!arr.is_array()) {
    fail(ErrorKind::Validation,
         "item '" + item_id + "' mapping lists must be arrays (" + origin + ")");
  }
  std::vector<HeuristicCode> out;
  for (const Json& cj : arr) {
    if (!cj.is_string()) {
      fail(ErrorKind::Validation, "item '" + item_id + "' mapping holds a non-string (" + origin + ")");
    }
    std::optional<HeuristicCode> code = find_code(phase, cj.get<std::string>());
    if (!code) {
      fail(ErrorKind::Validation, "item '" + item_id + "' maps unknown code '" +
                                      cj.get<std::string>() + "' in phase '" +
                                      heur_phase_name(phase) + "' (" + origin + ")");
    }
    out.push_back(*code);
  }
  return out;
}

}  // namespace

Inventory inventory_from_json(const Json& doc, const std::string& origin) {
  if (!doc.is_object() || !doc.contains("items") || !doc["items"].is_array()) {
    fail(ErrorKind::Validation, "inventory needs an 'items' array (" + origin + ")");
  }
  Inventory inv;
  std::set<std::string> ids;
  for (const Json& ij : doc["items"]) {
    InventoryItem item;
    if (!ij.is_object() || !ij.contains("id") || !ij["id"].is_string() ||
        !ij.contains("statement") || !ij["statement"].is_string()) {
      fail(ErrorKind::Validation, "items need string 'id' and 'statement' (" + origin + ")");
    }
    item.item_id = ij["id"].get<std::string>();
    item.statement = ij["statement"].get<std::string>();
    if (!ids.insert(item.item_id).second) {
      fail(ErrorKind::Validation, "duplicate item id '" + item.item_id + "' (" + origin + ")");
    }
    if (ij.contains("maps")) {
      if (!ij["maps"].is_object()) {
        fail(ErrorKind::Validation, "item '" + item.item_id + "' maps must be an object (" + origin + ")");
      }
      for (auto it = ij["maps"].begin(); it != ij["maps"].end(); ++it) {
        std::optional<HeurPhase> phase = parse_heur_phase(it.key());
        if (!phase) {
          fail(ErrorKind::Validation,
               "item '" + item.item_id + "' maps unknown phase '" + it.key() + "' (" + origin + ")");
        }
        const Json& block = it.value();
        if (!block.is_object()) {
          fail(ErrorKind::Validation,
               "item '" + item.item_id + "' phase block must be an object (" + origin + ")");
        }
        if (block.contains("positive")) {
          auto codes = parse_code_list(block["positive"], *phase, item.item_id, origin);
          item.positive.insert(item.positive.end(), codes.begin(), codes.end());
        }
        if (block.contains("negative")) {
          auto codes = parse_code_list(block["negative"], *phase, item.item_id, origin);
          item.negative.insert(item.negative.end(), codes.begin(), codes.end());
        }
      }
    }
    std::set<HeuristicCode> seen;
    for (HeuristicCode c : item.positive) {
      if (!seen.insert(c).second) {
        fail(ErrorKind::Validation, "item '" + item.item_id + "' touches code " +
                                        std::string(code_name(c)) + " twice (" + origin + ")");
      }
    }
    for (HeuristicCode c : item.negative) {
      if (!seen.insert(c).second) {
        fail(ErrorKind::Validation, "item '" + item.item_id + "' touches code " +
                                        std::string(code_name(c)) + " twice (" + origin + ")");
      }
    }
    inv.push_back(std::move(item));
  }
  return inv;
}

Inventory load_inventory(const std::string& path) {
  return inventory_from_json(read_json_file(path), path);
}

Json inventory_to_json(const Inventory& inv) {
  Json items = Json::array();
  for (const InventoryItem& item : inv) {
    Json maps = Json::object();
    for (int p = 0; p < kHeurPhaseCount; ++p) {
      HeurPhase phase = static_cast<HeurPhase>(p);
      Json pos = Json::array(), neg = Json::array();
      for (HeuristicCode c : item.positive) {
        if (code_phase(c) == phase) pos.push_back(std::string(code_name(c)));
      }
      for (HeuristicCode c : item.negative) {
        if (code_phase(c) == phase) neg.push_back(std::string(code_name(c)));
      }
      if (!pos.empty() || !neg.empty()) {
        Json block = Json::object();
        if (!pos.empty()) block["positive"] = pos;
        if (!neg.empty()) block["negative"] = neg;
        maps[heur_phase_name(phase)] = std::move(block);
      }
    }
    items.push_back(Json{{"id", item.item_id}, {"statement", item.statement}, {"maps", maps}});
  }
  return Json{{"items", items}};
}

Json ResponseSheet::to_json() const {
  Json ans = Json::object();
  for (const auto& [item, v] : answers) ans[item] = v;
  return Json{{"persona_id", persona_id}, {"answers", ans}};
}

ResponseSheet ResponseSheet::from_json(const Json& doc, const std::string& origin) {
  if (!doc.is_object() || !doc.contains("persona_id") || !doc["persona_id"].is_string()) {
    fail(ErrorKind::Validation, "response sheet needs string persona_id (" + origin + ")");
  }
  ResponseSheet sheet;
  sheet.persona_id = doc["persona_id"].get<std::string>();
  if (doc.contains("answers")) {
    if (!doc["answers"].is_object()) {
      fail(ErrorKind::Validation, "sheet 'answers' must be an object (" + origin + ")");
    }
    for (auto it = doc["answers"].begin(); it != doc["answers"].end(); ++it) {
      if (!it.value().is_number_integer()) {
        fail(ErrorKind::Validation,
             "answer for item '" + it.key() + "' must be an integer (" + origin + ")");
      }
      sheet.answers[it.key()] = it.value().get<int>();
    }
  }
  return sheet;
}

std::vector<ResponseSheet> load_sheets(const std::string& path) {
  std::vector<ResponseSheet> out;
  for (const Json& row : read_ndjson_file(path)) out.push_back(ResponseSheet::from_json(row, path));
  return out;
}

void save_sheets(const std::string& path, const std::vector<ResponseSheet>& sheets) {
  std::vector<Json> rows;
  rows.reserve(sheets.size());
  for (const ResponseSheet& s : sheets) rows.push_back(s.to_json());
  write_ndjson_file(path, rows);
}

std::array<CodeScore, kHeuristicCodeCount> score_points(const Inventory& inventory,
                                                        const ResponseSheet& sheet) {
  std::map<std::string, const InventoryItem*> by_id;
  for (const InventoryItem& item : inventory) by_id[item.item_id] = &item;

  std::array<CodeScore, kHeuristicCodeCount> scores{};
  for (const auto& [item_id, response] : sheet.answers) {
    auto it = by_id.find(item_id);
    if (it == by_id.end()) {
      fail(ErrorKind::Validation, "sheet for '" + sheet.persona_id +
                                      "' answers unknown item '" + item_id + "'");
    }
    if (response != -2 && response != -1 && response != 1 && response != 2) {
      fail(ErrorKind::Validation, "response for item '" + item_id +
                                      "' off the -2/-1/+1/+2 scale: " + std::to_string(response));
    }
    for (HeuristicCode c : it->second->positive) {
      scores[static_cast<size_t>(c)].points += response;
      scores[static_cast<size_t>(c)].max_points += 2.0;
    }
    for (HeuristicCode c : it->second->negative) {
      scores[static_cast<size_t>(c)].points -= response;
      scores[static_cast<size_t>(c)].max_points += 2.0;
    }
  }
  return scores;
}

double weight_transform(double r, double lambda) {
  if (!(r >= -1.0 && r <= 1.0)) {
    fail(ErrorKind::Logic, "normalized score outside [-1,1]: " + std::to_string(r));
  }
  if (lambda < 0.0) fail(ErrorKind::Logic, "lambda must be >= 0");
  if (r <= 0.0) return std::max(0.0, lambda * (r / 5.0) + kDefaultWeight);
  return std::min(100.0, lambda * (95.0 * r) + kDefaultWeight);
}

HeuristicProfile build_profile_pi(const Inventory& inventory, const ResponseSheet& sheet,
                                  double lambda) {
  std::array<CodeScore, kHeuristicCodeCount> scores = score_points(inventory, sheet);
  HeuristicProfile prof;
  prof.persona_id = sheet.persona_id;
  prof.provenance = "PI";
  for (size_t c = 0; c < kHeuristicCodeCount; ++c) {
    if (scores[c].max_points > 0.0) {
      prof.set_weight(static_cast<HeuristicCode>(c),
                      weight_transform(scores[c].points / scores[c].max_points, lambda));
    }
  }
  return prof;
}

namespace {

std::optional<double> numeric_value(const Json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      size_t used = 0;
      double d = std::stod(v.get<std::string>(), &used);
      if (used > 0) return d;
    } catch (...) {
    }
  }
  return std::nullopt;
}

// Applies every key of `obj` that names a code in one of `phases`, clamped to
// the weight range. Returns how many keys matched.
int apply_code_object(HeuristicProfile& prof, const Json& obj,
                      const std::vector<HeurPhase>& phases) {
  int applied = 0;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    std::optional<double> value = numeric_value(it.value());
    if (!value) continue;
    double clamped = std::clamp(*value, kMinWeight, kMaxWeight);
    for (HeurPhase phase : phases) {
      if (std::optional<HeuristicCode> code = find_code(phase, it.key())) {
        prof.set_weight(*code, clamped);
        ++applied;
      }
    }
  }
  return applied;
}

void apply_dh_phases(HeuristicProfile& prof, const std::string& raw,
                     const std::vector<HeurPhase>& phases) {
  for (const Json& obj : extract_json_values(raw)) {
    if (!obj.is_object()) continue;
    // Some models nest the mapping under a wrapper key; accept one level down.
    if (apply_code_object(prof, obj, phases) > 0) return;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (it.value().is_object()) {
        HeuristicProfile scratch = prof;
        if (apply_code_object(scratch, it.value(), phases) > 0) {
          prof = scratch;
          return;
        }
      }
    }
  }
  fail(ErrorKind::Parse, "no heuristic mapping object found in model output");
}

}  // namespace

HeuristicProfile parse_dh_response(const std::string& raw) {
  HeuristicProfile prof;
  prof.provenance = "DH";
  apply_dh_phases(prof, raw,
                  {HeurPhase::Deploy, HeurPhase::Attack, HeurPhase::Redeploy});
  return prof;
}

void apply_dh_response(HeuristicProfile& profile, const std::string& raw, HeurPhase phase) {
  apply_dh_phases(profile, raw, {phase});
}

Inventory shuffled_mappings(const Inventory& inventory, uint64_t seed) {
  Inventory out = inventory;
  std::vector<size_t> order(inventory.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, 0x1713, inventory.size()));
  rng.shuffle(order);
  for (size_t i = 0; i < order.size(); ++i) {
    out[i].positive = inventory[order[i]].positive;
    out[i].negative = inventory[order[i]].negative;
  }
  return out;
}

}  // namespace peril
