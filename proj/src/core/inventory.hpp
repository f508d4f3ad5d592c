#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "core/heuristics.hpp"

namespace peril {

// One self-report statement and the heuristic codes it speaks for (positive)
// and against (negative). Codes carry their phase, so one item may touch
// several phases.
struct InventoryItem {
  std::string item_id;
  std::string statement;
  std::vector<HeuristicCode> positive;
  std::vector<HeuristicCode> negative;
};

using Inventory = std::vector<InventoryItem>;

// File shape: {"items": [{"id", "statement", "maps": {phase: {"positive":
// [codes], "negative": [codes]}}}]}. A code listed twice in one item, or in
// both orientations, is a validation error.
Inventory load_inventory(const std::string& path);
Inventory inventory_from_json(const Json& doc, const std::string& origin);
Json inventory_to_json(const Inventory& inv);

// A persona's answers on the agreement scale {-2, -1, +1, +2} (strongly
// false .. strongly true; the raw 0..3 LLM scale maps 0,1,2,3 ->
// -2,-1,+1,+2). Items may be left unanswered.
struct ResponseSheet {
  std::string persona_id;
  std::map<std::string, int> answers;  // item_id -> response

  Json to_json() const;
  static ResponseSheet from_json(const Json& doc, const std::string& origin);
};

std::vector<ResponseSheet> load_sheets(const std::string& path);
void save_sheets(const std::string& path, const std::vector<ResponseSheet>& sheets);

struct CodeScore {
  double points = 0.0;
  double max_points = 0.0;  // 2 per answered item touching the code
};

// Accumulates responses onto codes: +response on positively mapped codes,
// -response on negatively mapped ones. Unknown item ids and off-scale
// responses are validation errors. score.points / score.max_points lands in
// [-1, 1] for every touched code.
std::array<CodeScore, kHeuristicCodeCount> score_points(const Inventory& inventory,
                                                        const ResponseSheet& sheet);

// Normalized score -> weight. Non-positive scores shrink below the default
// (floor 0), positive scores grow toward the cap:
//   r <= 0: max(0, lambda * (r / 5) + 5)
//   r >  0: min(100, lambda * (95 * r) + 5)
// Requires -1 <= r <= 1 and lambda >= 0.
double weight_transform(double r, double lambda);

constexpr double kDefaultLambda = 0.5;

// Full PI pipeline tail: score the sheet, transform touched codes, leave the
// rest at the default weight. Provenance "PI".
HeuristicProfile build_profile_pi(const Inventory& inventory, const ResponseSheet& sheet,
                                  double lambda = kDefaultLambda);

// Pulls a {code: value} object out of free-form model output (bare JSON,
// fenced block, or JSON embedded in prose), clamps values to [0, 100] and
// applies them. The phase-less flavor applies each code name to every phase
// that defines it; elicitation always knows the phase and uses the second
// flavor. Error{Parse} when no usable object is found.
HeuristicProfile parse_dh_response(const std::string& raw);
void apply_dh_response(HeuristicProfile& profile, const std::string& raw, HeurPhase phase);

// Control-experiment helper: permutes the (positive, negative) mapping pairs
// across items, statements untouched, deterministically in `seed`.
Inventory shuffled_mappings(const Inventory& inventory, uint64_t seed);

}  // namespace peril
