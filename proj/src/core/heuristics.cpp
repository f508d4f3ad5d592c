#include "core/heuristics.hpp"

#include <algorithm>
#include <limits>

namespace peril {

namespace {

struct CodeInfo {
  HeurPhase phase;
  const char* name;
  bool pass;
};

// Order must match the HeuristicCode enumerators exactly.
constexpr CodeInfo kCodeTable[kHeuristicCodeCount] = {
    {HeurPhase::Deploy, "PTM", false},  {HeurPhase::Deploy, "PTL", false},
    {HeurPhase::Deploy, "PUM", false},  {HeurPhase::Deploy, "PUL", false},
    {HeurPhase::Deploy, "PCM", false},  {HeurPhase::Deploy, "PCL", false},
    {HeurPhase::Deploy, "ETE", false},  {HeurPhase::Deploy, "ETN", false},
    {HeurPhase::Deploy, "EAC", false},  {HeurPhase::Deploy, "EACM", false},
    {HeurPhase::Deploy, "EACL", false}, {HeurPhase::Deploy, "EACO", false},

    {HeurPhase::Attack, "PTM", false},  {HeurPhase::Attack, "PTL", false},
    {HeurPhase::Attack, "PUM", false},  {HeurPhase::Attack, "PUL", false},
    {HeurPhase::Attack, "PCM", false},  {HeurPhase::Attack, "PCL", false},
    {HeurPhase::Attack, "ONM", false},  {HeurPhase::Attack, "ONL", false},
    {HeurPhase::Attack, "ON2", false},  {HeurPhase::Attack, "ICD", false},
    {HeurPhase::Attack, "ICS", false},  {HeurPhase::Attack, "ICOE", false},
    {HeurPhase::Attack, "L", false},    {HeurPhase::Attack, "PASS", true},

    {HeurPhase::Redeploy, "OBTM", false}, {HeurPhase::Redeploy, "OBTL", false},
    {HeurPhase::Redeploy, "OBUM", false}, {HeurPhase::Redeploy, "OBUL", false},
    {HeurPhase::Redeploy, "OBCM", false}, {HeurPhase::Redeploy, "OBCL", false},
    {HeurPhase::Redeploy, "CNM", false},  {HeurPhase::Redeploy, "CNL", false},
    {HeurPhase::Redeploy, "CB", false},   {HeurPhase::Redeploy, "CA", false},
    {HeurPhase::Redeploy, "CAC", false},  {HeurPhase::Redeploy, "M", false},
    {HeurPhase::Redeploy, "L", false},    {HeurPhase::Redeploy, "SI", false},
    {HeurPhase::Redeploy, "PASS", true},
};

const std::vector<HeuristicCode>& phase_codes(HeurPhase p) {
  static const std::vector<std::vector<HeuristicCode>> by_phase = [] {
    std::vector<std::vector<HeuristicCode>> v(kHeurPhaseCount);
    for (size_t i = 0; i < kHeuristicCodeCount; ++i) {
      v[static_cast<size_t>(kCodeTable[i].phase)].push_back(static_cast<HeuristicCode>(i));
    }
    return v;
  }();
  return by_phase[static_cast<size_t>(p)];
}

}  // namespace

const char* heur_phase_name(HeurPhase p) {
  switch (p) {
    case HeurPhase::Deploy: return "deploy";
    case HeurPhase::Attack: return "attack";
    case HeurPhase::Redeploy: return "redeploy";
  }
  return "?";
}

std::optional<HeurPhase> parse_heur_phase(std::string_view name) {
  if (name == "deploy") return HeurPhase::Deploy;
  if (name == "attack") return HeurPhase::Attack;
  if (name == "redeploy") return HeurPhase::Redeploy;
  return std::nullopt;
}

HeurPhase heur_phase_of(Phase game_phase) {
  switch (game_phase) {
    case Phase::Init:
    case Phase::Reinforce: return HeurPhase::Deploy;
    case Phase::Attack: return HeurPhase::Attack;
    case Phase::Redeploy: return HeurPhase::Redeploy;
  }
  return HeurPhase::Deploy;
}

HeurPhase code_phase(HeuristicCode code) { return kCodeTable[static_cast<size_t>(code)].phase; }
std::string_view code_name(HeuristicCode code) { return kCodeTable[static_cast<size_t>(code)].name; }
bool is_pass_code(HeuristicCode code) { return kCodeTable[static_cast<size_t>(code)].pass; }

std::optional<HeuristicCode> find_code(HeurPhase phase, std::string_view name) {
  for (HeuristicCode c : phase_codes(phase)) {
    if (code_name(c) == name) return c;
  }
  return std::nullopt;
}

const std::vector<HeuristicCode>& codes_in_phase(HeurPhase phase) { return phase_codes(phase); }

void HeuristicProfile::set_weight(HeuristicCode code, double value) {
  if (!(value >= kMinWeight && value <= kMaxWeight)) {
    fail(ErrorKind::Validation,
         "weight for " + std::string(heur_phase_name(code_phase(code))) + "/" +
             std::string(code_name(code)) + " outside [0,100]: " + std::to_string(value));
  }
  weights[static_cast<size_t>(code)] = value;
}

Json HeuristicProfile::to_json() const {
  Json phases = Json::object();
  for (int p = 0; p < kHeurPhaseCount; ++p) {
    Json block = Json::object();
    for (HeuristicCode c : phase_codes(static_cast<HeurPhase>(p))) {
      block[std::string(code_name(c))] = weight(c);
    }
    phases[heur_phase_name(static_cast<HeurPhase>(p))] = std::move(block);
  }
  return Json{{"persona_id", persona_id}, {"provenance", provenance}, {"phases", phases}};
}

HeuristicProfile HeuristicProfile::from_json(const Json& doc, const std::string& origin) {
  if (!doc.is_object()) fail(ErrorKind::Validation, "profile must be an object (" + origin + ")");
  HeuristicProfile prof;
  prof.persona_id = doc.value("persona_id", std::string());
  prof.provenance = doc.value("provenance", std::string("manual"));
  if (prof.provenance != "DH" && prof.provenance != "PI" && prof.provenance != "manual") {
    fail(ErrorKind::Validation,
         "unknown provenance '" + prof.provenance + "' in profile (" + origin + ")");
  }
  if (!doc.contains("phases")) return prof;  // all defaults
  const Json& phases = doc["phases"];
  if (!phases.is_object()) fail(ErrorKind::Validation, "profile 'phases' must be an object (" + origin + ")");
  for (auto it = phases.begin(); it != phases.end(); ++it) {
    std::optional<HeurPhase> hp = parse_heur_phase(it.key());
    if (!hp) fail(ErrorKind::Validation, "unknown phase '" + it.key() + "' in profile (" + origin + ")");
    if (!it.value().is_object()) {
      fail(ErrorKind::Validation, "phase '" + it.key() + "' must map codes to numbers (" + origin + ")");
    }
    for (auto cit = it.value().begin(); cit != it.value().end(); ++cit) {
      std::optional<HeuristicCode> code = find_code(*hp, cit.key());
      if (!code) {
        fail(ErrorKind::Validation,
             "unknown code '" + cit.key() + "' in phase '" + it.key() + "' (" + origin + ")");
      }
      if (!cit.value().is_number()) {
        fail(ErrorKind::Validation,
             "weight for '" + cit.key() + "' must be numeric (" + origin + ")");
      }
      prof.set_weight(*code, cit.value().get<double>());
    }
  }
  return prof;
}

void HeuristicProfile::save(const std::string& path) const { write_json_file(path, to_json()); }

HeuristicProfile HeuristicProfile::load(const std::string& path) {
  return from_json(read_json_file(path), path);
}

std::vector<HeuristicProfile> load_profile_set(const std::string& path) {
  std::vector<HeuristicProfile> out;
  for (const Json& row : read_ndjson_file(path)) {
    out.push_back(HeuristicProfile::from_json(row, path));
  }
  return out;
}

void save_profile_set(const std::string& path, const std::vector<HeuristicProfile>& profiles) {
  std::vector<Json> rows;
  rows.reserve(profiles.size());
  for (const HeuristicProfile& p : profiles) rows.push_back(p.to_json());
  write_ndjson_file(path, rows);
}

StateStats compute_state_stats(const GameState& state) {
  const MapGraph& map = *state.map;
  StateStats st;
  st.decider = state.current_player;
  const size_t np = state.pools.size();
  st.regions_of.assign(np, 0);
  st.units_of.assign(np, 0);
  st.bonus_of.assign(np, 0);
  for (size_t r = 0; r < state.owner.size(); ++r) {
    int o = state.owner[r];
    if (o >= 0) {
      st.regions_of[static_cast<size_t>(o)] += 1;
      st.units_of[static_cast<size_t>(o)] += state.units[r];
    }
  }

  st.zone_sole_owner.assign(static_cast<size_t>(map.zone_count()), -1);
  for (int z = 0; z < map.zone_count(); ++z) {
    const Zone& zone = map.zone(z);
    int sole = state.owner[static_cast<size_t>(zone.members.front())];
    for (int r : zone.members) {
      if (state.owner[static_cast<size_t>(r)] != sole) {
        sole = -1;
        break;
      }
    }
    st.zone_sole_owner[static_cast<size_t>(z)] = sole;
    if (sole >= 0) st.bonus_of[static_cast<size_t>(sole)] += zone.bonus;
  }

  // Enemy superlatives: alive enemies only, ties to the lowest id. A scan in
  // ascending id order with strict improvement gives exactly that.
  auto pick = [&](const std::vector<int64_t>& stat, bool most) {
    int best = -1;
    for (size_t p = 0; p < np; ++p) {
      if (static_cast<int>(p) == st.decider) continue;
      if (st.regions_of[p] == 0) continue;
      if (best == -1 || (most ? stat[p] > stat[static_cast<size_t>(best)]
                              : stat[p] < stat[static_cast<size_t>(best)])) {
        best = static_cast<int>(p);
      }
    }
    return best;
  };
  st.enemy_most_regions = pick(st.regions_of, true);
  st.enemy_fewest_regions = pick(st.regions_of, false);
  st.enemy_most_units = pick(st.units_of, true);
  st.enemy_fewest_units = pick(st.units_of, false);
  st.enemy_most_bonus = pick(st.bonus_of, true);
  st.enemy_fewest_bonus = pick(st.bonus_of, false);

  int largest = 0, smallest = 0;
  for (int z = 1; z < map.zone_count(); ++z) {
    if (map.zone(z).members.size() > map.zone(largest).members.size()) largest = z;
    if (map.zone(z).members.size() < map.zone(smallest).members.size()) smallest = z;
  }
  st.largest_zone = largest;
  st.smallest_zone = smallest;

  // Decider's holdings split into connected components (owned links only).
  st.owned_component.assign(state.owner.size(), -1);
  int comp = 0;
  for (size_t seed = 0; seed < state.owner.size(); ++seed) {
    if (state.owner[seed] != st.decider || st.owned_component[seed] != -1) continue;
    std::vector<int> stack{static_cast<int>(seed)};
    st.owned_component[seed] = comp;
    while (!stack.empty()) {
      int r = stack.back();
      stack.pop_back();
      for (int nb : map.neighbors(r)) {
        if (state.owner[static_cast<size_t>(nb)] == st.decider &&
            st.owned_component[static_cast<size_t>(nb)] == -1) {
          st.owned_component[static_cast<size_t>(nb)] = comp;
          stack.push_back(nb);
        }
      }
    }
    ++comp;
  }
  return st;
}

namespace {

bool enemy_adjacent(const GameState& s, int r) {
  for (int nb : s.map->neighbors(r)) {
    int o = s.owner[static_cast<size_t>(nb)];
    if (o != -1 && o != s.current_player) return true;
  }
  return false;
}

bool borders_player(const GameState& s, int r, int player) {
  if (player < 0) return false;
  for (int nb : s.map->neighbors(r)) {
    if (s.owner[static_cast<size_t>(nb)] == player) return true;
  }
  return false;
}

int count_borders_player(const GameState& s, int r, int player) {
  int n = 0;
  for (int nb : s.map->neighbors(r)) {
    if (s.owner[static_cast<size_t>(nb)] == player) ++n;
  }
  return n;
}

bool borders_zone(const MapGraph& map, int r, int zone) {
  if (zone < 0 || map.region(r).zone == zone) return false;
  const std::vector<int>& zs = map.adjacent_zones(r);
  return std::binary_search(zs.begin(), zs.end(), zone);
}

bool borders_enemy_owned_zone(const StateStats& st, const GameState& s, int r) {
  for (int nb : s.map->neighbors(r)) {
    int z = s.map->region(nb).zone;
    int sole = st.zone_sole_owner[static_cast<size_t>(z)];
    if (sole != -1 && sole != st.decider) return true;
  }
  return false;
}

// Smallest enemy stack adjacent to r; nullopt when r has no enemy neighbor.
// The redeploy SI rule compares invasion odds from the destination vs the
// source; the invading stack is the same army either way, so the troop ratio
// reduces to comparing the weakest reachable target.
std::optional<int64_t> weakest_enemy_neighbor(const GameState& s, int r) {
  std::optional<int64_t> best;
  for (int nb : s.map->neighbors(r)) {
    int o = s.owner[static_cast<size_t>(nb)];
    if (o == -1 || o == s.current_player) continue;
    int64_t u = s.units[static_cast<size_t>(nb)];
    if (!best || u < *best) best = u;
  }
  return best;
}

}  // namespace

bool evaluate_predicate_with(const StateStats& st, HeuristicCode code,
                             const GameState& s, const MoveCandidate& m) {
  HeurPhase hp = heur_phase_of(s.phase);
  if (code_phase(code) != hp) {
    fail(ErrorKind::Logic, "code " + std::string(code_name(code)) + " belongs to phase " +
                               heur_phase_name(code_phase(code)) + ", state is in " +
                               heur_phase_name(hp));
  }
  if (is_pass_code(code)) {
    fail(ErrorKind::Logic, "PASS has no per-move condition; it gates the subphase in selection");
  }
  if (m.kind == MoveCandidate::Kind::Pass) {
    fail(ErrorKind::Logic, "predicates apply to concrete moves, not Pass");
  }
  const MapGraph& map = *s.map;

  switch (code) {
    // Deploy: condition on the placement target.
    case HeuristicCode::DeployPTM: return borders_player(s, m.to, st.enemy_most_regions);
    case HeuristicCode::DeployPTL: return borders_player(s, m.to, st.enemy_fewest_regions);
    case HeuristicCode::DeployPUM: return borders_player(s, m.to, st.enemy_most_units);
    case HeuristicCode::DeployPUL: return borders_player(s, m.to, st.enemy_fewest_units);
    case HeuristicCode::DeployPCM: return borders_player(s, m.to, st.enemy_most_bonus);
    case HeuristicCode::DeployPCL: return borders_player(s, m.to, st.enemy_fewest_bonus);
    case HeuristicCode::DeployETE: return enemy_adjacent(s, m.to);
    case HeuristicCode::DeployETN: return !enemy_adjacent(s, m.to);
    case HeuristicCode::DeployEAC: return map.on_zone_boundary(m.to);
    case HeuristicCode::DeployEACM: return borders_zone(map, m.to, st.largest_zone);
    case HeuristicCode::DeployEACL: return borders_zone(map, m.to, st.smallest_zone);
    case HeuristicCode::DeployEACO: {
      for (int z : map.adjacent_zones(m.to)) {
        int sole = st.zone_sole_owner[static_cast<size_t>(z)];
        if (sole != -1 && sole != st.decider) return true;
      }
      return false;
    }

    // Attack: condition on source/target.
    case HeuristicCode::AttackPTM: return s.owner[static_cast<size_t>(m.to)] == st.enemy_most_regions;
    case HeuristicCode::AttackPTL: return s.owner[static_cast<size_t>(m.to)] == st.enemy_fewest_regions;
    case HeuristicCode::AttackPUM: return s.owner[static_cast<size_t>(m.to)] == st.enemy_most_units;
    case HeuristicCode::AttackPUL: return s.owner[static_cast<size_t>(m.to)] == st.enemy_fewest_units;
    case HeuristicCode::AttackPCM: return s.owner[static_cast<size_t>(m.to)] == st.enemy_most_bonus;
    case HeuristicCode::AttackPCL: return s.owner[static_cast<size_t>(m.to)] == st.enemy_fewest_bonus;
    case HeuristicCode::AttackONM:
      return s.units[static_cast<size_t>(m.from)] > s.units[static_cast<size_t>(m.to)];
    case HeuristicCode::AttackONL:
      return s.units[static_cast<size_t>(m.from)] < s.units[static_cast<size_t>(m.to)];
    case HeuristicCode::AttackON2:
      return s.units[static_cast<size_t>(m.from)] >= 2 * s.units[static_cast<size_t>(m.to)];
    case HeuristicCode::AttackICD:
      return map.region(m.from).zone != map.region(m.to).zone;
    case HeuristicCode::AttackICS:
      return map.region(m.from).zone == map.region(m.to).zone;
    case HeuristicCode::AttackICOE: {
      int sole = st.zone_sole_owner[static_cast<size_t>(map.region(m.to).zone)];
      return sole != -1 && sole != st.decider;
    }
    case HeuristicCode::AttackL: {
      int from_comp = st.owned_component[static_cast<size_t>(m.from)];
      for (int nb : map.neighbors(m.to)) {
        if (s.owner[static_cast<size_t>(nb)] == st.decider &&
            st.owned_component[static_cast<size_t>(nb)] != from_comp) {
          return true;
        }
      }
      return false;
    }

    // Redeploy: compare destination against source.
    case HeuristicCode::RedeployOBTM:
      return st.enemy_most_regions != -1 &&
             count_borders_player(s, m.to, st.enemy_most_regions) >
                 count_borders_player(s, m.from, st.enemy_most_regions);
    case HeuristicCode::RedeployOBTL:
      return st.enemy_fewest_regions != -1 &&
             count_borders_player(s, m.to, st.enemy_fewest_regions) >
                 count_borders_player(s, m.from, st.enemy_fewest_regions);
    case HeuristicCode::RedeployOBUM:
      return st.enemy_most_units != -1 &&
             count_borders_player(s, m.to, st.enemy_most_units) >
                 count_borders_player(s, m.from, st.enemy_most_units);
    case HeuristicCode::RedeployOBUL:
      return st.enemy_fewest_units != -1 &&
             count_borders_player(s, m.to, st.enemy_fewest_units) >
                 count_borders_player(s, m.from, st.enemy_fewest_units);
    case HeuristicCode::RedeployOBCM:
      return st.enemy_most_bonus != -1 &&
             count_borders_player(s, m.to, st.enemy_most_bonus) >
                 count_borders_player(s, m.from, st.enemy_most_bonus);
    case HeuristicCode::RedeployOBCL:
      return st.enemy_fewest_bonus != -1 &&
             count_borders_player(s, m.to, st.enemy_fewest_bonus) >
                 count_borders_player(s, m.from, st.enemy_fewest_bonus);
    case HeuristicCode::RedeployCNM:
      return map.neighbors(m.to).size() > map.neighbors(m.from).size();
    case HeuristicCode::RedeployCNL:
      return map.neighbors(m.to).size() < map.neighbors(m.from).size();
    case HeuristicCode::RedeployCB:
      return map.on_zone_boundary(m.to) && !map.on_zone_boundary(m.from);
    case HeuristicCode::RedeployCA:
      return enemy_adjacent(s, m.to) && !enemy_adjacent(s, m.from);
    case HeuristicCode::RedeployCAC:
      return borders_enemy_owned_zone(st, s, m.to) && !borders_enemy_owned_zone(st, s, m.from);
    case HeuristicCode::RedeployM:
      return s.units[static_cast<size_t>(m.to)] > s.units[static_cast<size_t>(m.from)];
    case HeuristicCode::RedeployL:
      return s.units[static_cast<size_t>(m.to)] < s.units[static_cast<size_t>(m.from)];
    case HeuristicCode::RedeploySI: {
      std::optional<int64_t> to_best = weakest_enemy_neighbor(s, m.to);
      if (!to_best) return false;
      std::optional<int64_t> from_best = weakest_enemy_neighbor(s, m.from);
      return !from_best || *to_best < *from_best;
    }

    case HeuristicCode::AttackPASS:
    case HeuristicCode::RedeployPASS:
    case HeuristicCode::Count_:
      break;
  }
  fail(ErrorKind::Logic, "unhandled heuristic code");
}

bool evaluate_predicate(HeuristicCode code, const GameState& state, const MoveCandidate& move) {
  StateStats st = compute_state_stats(state);
  return evaluate_predicate_with(st, code, state, move);
}

double score_move_with(const StateStats& st, const HeuristicProfile& profile,
                       const GameState& state, const MoveCandidate& move) {
  if (move.kind == MoveCandidate::Kind::Pass) {
    fail(ErrorKind::Logic, "score_move applies to concrete moves, not Pass");
  }
  double total = 0.0;
  for (HeuristicCode c : codes_in_phase(heur_phase_of(state.phase))) {
    if (is_pass_code(c)) continue;
    if (evaluate_predicate_with(st, c, state, move)) total += profile.weight(c);
  }
  return total;
}

double score_move(const HeuristicProfile& profile, const GameState& state,
                  const MoveCandidate& move) {
  StateStats st = compute_state_stats(state);
  return score_move_with(st, profile, state, move);
}

MoveCandidate select_move(const HeuristicProfile& profile, const GameState& state,
                          const std::vector<MoveCandidate>& candidates, Rng& rng) {
  if (candidates.empty()) fail(ErrorKind::Logic, "select_move on empty candidate set");
  HeurPhase hp = heur_phase_of(state.phase);

  bool has_pass = false;
  for (const MoveCandidate& c : candidates) {
    if (c.kind == MoveCandidate::Kind::Pass) {
      has_pass = true;
      break;
    }
  }

  if (has_pass && hp != HeurPhase::Deploy) {
    HeuristicCode pass_code =
        hp == HeurPhase::Attack ? HeuristicCode::AttackPASS : HeuristicCode::RedeployPASS;
    double pw = profile.weight(pass_code) / 100.0;
    if (pw > 0.0 && rng.bernoulli(pw)) return MoveCandidate::pass();
  }

  std::vector<const MoveCandidate*> concrete;
  concrete.reserve(candidates.size());
  for (const MoveCandidate& c : candidates) {
    if (c.kind != MoveCandidate::Kind::Pass) concrete.push_back(&c);
  }
  if (concrete.empty()) {
    if (!has_pass) fail(ErrorKind::Logic, "candidate set holds neither moves nor Pass");
    return MoveCandidate::pass();
  }

  StateStats st = compute_state_stats(state);
  std::vector<double> scores(concrete.size());
  for (size_t i = 0; i < concrete.size(); ++i) {
    scores[i] = score_move_with(st, profile, state, *concrete[i]);
  }
  return *concrete[rng.weighted_choice(scores)];
}

}  // namespace peril
