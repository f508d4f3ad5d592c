#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/game.hpp"
#include "core/jsonio.hpp"

namespace peril {

// Heuristic phases. Init and Reinforce decisions both use the Deploy family.
enum class HeurPhase : uint8_t { Deploy = 0, Attack = 1, Redeploy = 2 };
constexpr int kHeurPhaseCount = 3;

const char* heur_phase_name(HeurPhase p);                  // "deploy" | "attack" | "redeploy"
std::optional<HeurPhase> parse_heur_phase(std::string_view name);
HeurPhase heur_phase_of(Phase game_phase);

// Every (phase, code) pair gets its own enumerator; short names repeat across
// phases (PTM appears in Deploy and Attack, L in Attack and Redeploy).
enum class HeuristicCode : uint8_t {
  // Deploy: placement target T.
  DeployPTM,   // T adjacent to a region of the enemy with the most regions
  DeployPTL,   // ... enemy with the fewest regions
  DeployPUM,   // ... enemy with the most total units
  DeployPUL,   // ... enemy with the fewest total units
  DeployPCM,   // ... enemy with the most fully-owned zone bonus
  DeployPCL,   // ... enemy with the least fully-owned zone bonus
  DeployETE,   // T adjacent to enemy territory
  DeployETN,   // T not adjacent to enemy territory
  DeployEAC,   // T on a zone boundary
  DeployEACM,  // T bordering the largest zone (by region count) from outside
  DeployEACL,  // T bordering the smallest zone from outside
  DeployEACO,  // T bordering a zone fully owned by one enemy

  // Attack: source T1, target T2.
  AttackPTM,   // T2 owned by the enemy with the most regions
  AttackPTL,
  AttackPUM,
  AttackPUL,
  AttackPCM,
  AttackPCL,
  AttackONM,   // T1 has more units than T2
  AttackONL,   // T1 has fewer units than T2
  AttackON2,   // T1 has at least twice the units of T2
  AttackICD,   // T1 and T2 in different zones
  AttackICS,   // T1 and T2 in the same zone
  AttackICOE,  // T2's zone fully owned by a single player
  AttackL,     // taking T2 links T1's owned component to another owned component
  AttackPASS,  // likelihood of ending the attack subphase (selection-only)

  // Redeploy: source T1, destination T2.
  RedeployOBTM,  // T2 borders more regions of the enemy with most regions than T1
  RedeployOBTL,
  RedeployOBUM,
  RedeployOBUL,
  RedeployOBCM,
  RedeployOBCL,
  RedeployCNM,   // T2 has more map links than T1
  RedeployCNL,   // fewer
  RedeployCB,    // T2 on a zone boundary and T1 not
  RedeployCA,    // T2 borders enemy territory and T1 not
  RedeployCAC,   // T2 borders a region in a zone fully owned by one enemy and T1 not
  RedeployM,     // T2 has more units than T1
  RedeployL,     // T2 has fewer units than T1
  RedeploySI,    // T2's weakest enemy neighbor is weaker than T1's
  RedeployPASS,  // likelihood of ending the redeploy subphase (selection-only)

  Count_
};
constexpr size_t kHeuristicCodeCount = static_cast<size_t>(HeuristicCode::Count_);

HeurPhase code_phase(HeuristicCode code);
std::string_view code_name(HeuristicCode code);  // short name, e.g. "PTM"
bool is_pass_code(HeuristicCode code);
std::optional<HeuristicCode> find_code(HeurPhase phase, std::string_view name);
const std::vector<HeuristicCode>& codes_in_phase(HeurPhase phase);

constexpr double kDefaultWeight = 5.0;
constexpr double kMinWeight = 0.0;
constexpr double kMaxWeight = 100.0;

// A complete playing style: one weight per (phase, code), default 5, range
// [0, 100]. Provenance records how the profile was produced.
struct HeuristicProfile {
  std::string persona_id;
  std::string provenance = "manual";  // "DH" | "PI" | "manual"
  std::array<double, kHeuristicCodeCount> weights;

  HeuristicProfile() { weights.fill(kDefaultWeight); }

  double weight(HeuristicCode code) const { return weights[static_cast<size_t>(code)]; }
  // Error{Validation} outside [0, 100].
  void set_weight(HeuristicCode code, double value);

  Json to_json() const;
  static HeuristicProfile from_json(const Json& doc, const std::string& origin);
  void save(const std::string& path) const;
  static HeuristicProfile load(const std::string& path);
};

// Profile sets travel as NDJSON, one profile per line.
std::vector<HeuristicProfile> load_profile_set(const std::string& path);
void save_profile_set(const std::string& path, const std::vector<HeuristicProfile>& profiles);

// Cross-player facts predicates consult, computed once per decision.
// Superlatives rank enemies of the decider only, skip eliminated players, and
// break ties toward the lowest player id; -1 means no surviving enemy.
struct StateStats {
  int decider = -1;
  std::vector<int64_t> regions_of;
  std::vector<int64_t> units_of;
  std::vector<int64_t> bonus_of;  // summed bonuses of fully-owned zones
  int enemy_most_regions = -1, enemy_fewest_regions = -1;
  int enemy_most_units = -1, enemy_fewest_units = -1;
  int enemy_most_bonus = -1, enemy_fewest_bonus = -1;
  std::vector<int> zone_sole_owner;   // per zone; -1 when contested/unclaimed
  int largest_zone = -1;              // by member count, ties to lowest zone id
  int smallest_zone = -1;
  std::vector<int> owned_component;   // decider's holdings labeled by component; -1 elsewhere
};

StateStats compute_state_stats(const GameState& state);

// Truth of one code's condition for one candidate move. The code must belong
// to the phase the state is in and must not be a PASS code (PASS gates the
// subphase via selection, it has no per-move condition); Error{Logic}
// otherwise. Pass candidates are likewise rejected.
bool evaluate_predicate(HeuristicCode code, const GameState& state, const MoveCandidate& move);
bool evaluate_predicate_with(const StateStats& stats, HeuristicCode code,
                             const GameState& state, const MoveCandidate& move);

// Sum of weights of the phase's satisfied non-PASS codes.
double score_move(const HeuristicProfile& profile, const GameState& state,
                  const MoveCandidate& move);
double score_move_with(const StateStats& stats, const HeuristicProfile& profile,
                       const GameState& state, const MoveCandidate& move);

// Weighted-random policy. In Attack/Redeploy a Bernoulli(PASS/100) draw
// happens first (skipped entirely when PASS is 0 or no Pass candidate
// exists); otherwise one non-Pass candidate is sampled proportionally to its
// score, uniformly if all scores are zero.
MoveCandidate select_move(const HeuristicProfile& profile, const GameState& state,
                          const std::vector<MoveCandidate>& candidates, Rng& rng);

}  // namespace peril
