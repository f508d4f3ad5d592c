#include "core/llm.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <initializer_list>
#include <thread>

#include <httplib.h>

#include "core/rng.hpp"

namespace peril {

namespace {

const char* kAssessmentText =
    R"tpl(You will be given a personality of an individual. You must estimate how well that person would do on the strategic board game Peril. In the game of Peril, you are a player who must achieve world conquest, very similar to the popular board game Risk. For the personality you are given, return a JSON object with the following values:
- 'index': An integer describing the index of the prompt in the dataset. We will provide this for you.
- 'personality': The personality of the individual, which we also provided to you.
- 'strategicThinker': A rating of whether this personality describes a strategic thinker. This should be one of the numbers in {-1, -0.5, 0, 0.5, 1}. Use the following scale:
	- +1 : This is certain to be a very capable strategic thinker, who combines systematic thinking with appropriate use of intuition and can consistently perform at a high level.
	- +0.5 : This is more likely than not to be someone with good strategic thinking capabilities, but they may not be consistent or fully developed.
	- 0 : There is no evidence to suggest that this person is or is not a capable strategic thinker.
	- -0.5 : This is more likely than not to be someone with poor or no strategic thinking capabilities.
	- -1: This is certain to be someone with poor or no strategic thinking capabilities, who is unable to perform at an acceptable level at any task requiring strategic thinking.
- 'domainExpert': A rating of whether this personality describes someone who has experience in combat, military warfare, or other similar areas of expertise. This should be one of the numbers in {-1, -0.5, 0, 0.5, 1}. Use the following scale:
	- +1 : This is certain to be someone who has high level experience in combat, military warfare, or other similar areas of expertise.
	- +0.5 : This is more likely than not to be someone who has experience in combat, military warfare, or other similar areas of expertise.
	- 0 : There is no evidence to suggest that this person does or does not have experience in combat, military warfare, or other similar areas of expertise.
	- -0.5 : This is more likely than not to be someone who has poor or no experience in combat, military warfare, or other similar areas of expertise.
	- -1: This is certain to be someone with poor or no experience in combat, military warfare, or other similar areas of expertise.
- 'perilSpecific': A rating of whether this personality describes someone who is likely to perform well on the game Peril specifically. This should be one of the numbers in {-1, -0.5, 0, 0.5, 1}. Use the following scale:
	- +1 : This is certain to be someone who is likely to perform well on the game Risk.
	- +0.5 : This is more likely than not to be someone who is likely to perform well on the game Risk.
	- 0 : There is no evidence to suggest that this person is or is not likely to perform well on the game Risk.
	- -0.5 : This is more likely to be someone who will perform poorly on the game Risk.
	- -1: This is certain to be someone who will perform poorly on the game Risk.
- 'riskTaker': A rating of whether this personality describes someone who is likely to be a high risk taker. This should be one of the numbers in {-1, -0.5, 0, 0.5, 1}. Use the following scale:
	- +1 : This is certain to be someone who is likely to take dangerous risks, always making moves that are likely to have a high payoff but also a high risk of failure.
	- +0.5 : This is more likely than not to be someone who is likely to take dangerous risks, often making moves that are likely to have a high payoff but also a high risk of failure.
	- 0 : There is no evidence to suggest that this person is or is not likely to take dangerous risks.
	- -0.5 : This is more likely to be someone who will not take dangerous risks, often making moves that are likely to have a low payoff but also a low risk of failure.
	- -1: This is certain to be someone who will not take dangerous risks, always making moves that are likely to have a low payoff but also a low risk of failure.
- 'doOrBe': A rating of whether this personality description is an instruction to act a certain way by describing actions (do) or if it is an instruction to play a role by describing a personality or character background (be). This should be one of the numbers in {-1, 0, 1}. Use the following scale:
	- +1 : This personality description describes how to act a certain way primarily by describing specific actions.
	- 0 : This personality description has a balance between describing specific actions and describing a personality or character background.
	- -1: This personality description describes how to play a role primarily by describing a personality or character background.

index: {index}
personality: {persona}
)tpl";

const char* kGameIntroText =
    R"tpl(You are playing the board game "Peril" with other players, which is inspired by the popular board game "Risk". In this game, you are battling to conquer the world. The first player to achieve this wins the game.

    BOARD
    The board consists of seven zones (North America, South America, Europe, Asia, Africa, and Australia), which are divided into regions. The regions are connected to each other and either connect over land, or over water. Players control units, which can be thought of as armies. Every region must have at least one unit on it (except in the beginning of the game, when no regions have any). Regions can contain an unlimited number of units, but all units on a single region must belong to the same player.

    GAMEPLAY
    - First, all players are given a number of units. They alternate, placing one unit on an unoccupied region at a time. When all regions are occupied, players can place units on regions they already occupy. At no time are players allowed to place units in regions occupied by other players. They continue in this manner, placing one unit at a time, until all players have placed their units. This ends the initial placement phase.
    - Each player now takes their regular turns. Each turn is broken up into three subphases: reinforcement, attack, and deployment.
    - In the reinforcement phase, the player is given a number of units depending on which regions and zones they own. If they own all regions in a zone at the beginning of their turn, they get a bonus number of units depending on the size of the zone. They are allowed to place units on regions they already occupy.
    - In the attack phase, players may attack from a region they own into any adjacent enemy-occupied region. They must declare how many units they wish to send in the attack, and this number must be less than or equal to the number of units on the attacking region. A number of attackers and defenders will be killed in this attack, and the higher the number of attackers, the greater the chance of success. If all defenders are killed, then the number of units remaining in the attack must all move to the defending region, leaving at least one unit behind in the attacking region. The player may then perform additional attacks until they are done or cannot attack any more.
    - In the redeployment phase, the player may relocate any of their units to any other region they control, so long as: (1) they leave at least one unit on every region they own, and (2) if a unit is moved from one region T1 to another region T2, T1 and T2 must be either directly connected, or connected via a sequence of connected regions that are all owned by the player.)tpl";

const char* kDhPreambleText =
    R"tpl(We need to determine what values to assign these heuristics, based on your assigned personality. For each of the heuristics above, we need to determine a value between 0 and 100 that represents how much this heuristic should be weighted in the decision making process. This value should be based on your assigned personality. For example, a player who is very aggressive might have a high value for the heuristic that says to attack from region T1 to region T2 if T2 is owned by the player with the fewest units. By default, every heuristic has a value of 5. So if you want to deprioritize a heuristic, you can assign it a value less than 5. If you want to prioritize a heuristic, you can assign it a value greater than 5. If you want to ignore a heuristic, you can assign it a value of 0. If you want to use a heuristic as much as possible, you can assign it a value of 100.)tpl";

const char* kDeployListText =
    R"tpl(PTM - Place a unit in a region T1 that is adjacent to region T2 if T2 is owned by the player with the most regions.
PTL - Place a unit in a region T1 that is adjacent to region T2 if T2 is owned by the player with the fewest regions.
PUM - Place a unit in a region T1 that is adjacent to region T2 if T2 is owned by the player with the most units.
PUL - Place a unit in a region T1 that is adjacent to region T2 if T2 is owned by the player with the fewest units.
PCM - Place a unit in a region T1 that is adjacent to region T2 if T2 is owned by the player with the most zones owned (measured by total zone bonuses).
PCL - Place a unit in a region T1 that is adjacent to region T2 if T2 is owned by the player with the fewest zones owned (measured by total zone bonuses).
ETE - Place a unit in region T if T is adjacent to an enemy region.
ETN - Place a unit in region T if T is not adjacent to any enemy regions.
EAC - Place a unit in region T if T is on a zone boundary.
EACM - Place a unit in region T if T is adjacent to the largest zone (by number of regions).
EACL - Place a unit in region T if T is adjacent to the smallest zone (by number of regions).
EACO - Place a unit in region T if T is adjacent to a zone that is completely owned by another player.)tpl";

const char* kAttackListText =
    R"tpl(PTM - Attack from region T1 to region T2 if T2 is owned by the player with the most regions.
PTL - Attack from region T1 to region T2 if T2 is owned by the player with the fewest regions.
PUM - Attack from region T1 to region T2 if T2 is owned by the player with the most units.
PUL - Attack from region T1 to region T2 if T2 is owned by the player with the fewest units.
PCM - Attack from region T1 to region T2 if T2 is owned by the player with the most zones owned (measured by total zone bonuses).
PCL - Attack from region T1 to region T2 if T2 is owned by the player with the fewest zones owned (measured by total zone bonuses).
ONM - Attack if the units on T1 are greater than the units on T2.
ONL - Attack if the units on T1 are fewer than the units on T2.
ON2 - Attack if the units on T1 are at least 2x the number of units on T2.
ICD - Attack if T1 and T2 are in different zones.
ICS - Attack if T1 and T2 are in the same zone.
ICOE - Attack if T2 is in a zone completely owned by a single player.
L - Attack if T2 connects to a region you own that T1 isn't currently linked to.
PASS - Likelihood of passing (ending your turn and not doing any more attacks). If set to 100, you will never attack; if 0, you will always attack.)tpl";

const char* kRedeployListText =
    R"tpl(OBTM - Move from region T1 to T2 if T2 is adjacent to more regions occupied by the player with the most regions.
OBTL - Move from region T1 to T2 if T2 is adjacent to more regions occupied by the player with the fewest regions.
OBUM - Move from region T1 to T2 if T2 is adjacent to more regions occupied by the player with the most units.
OBUL - Move from region T1 to T2 if T2 is adjacent to more regions occupied by the player with the fewest units.
OBCM - Move from region T1 to T2 if T2 is adjacent to more regions occupied by the player with the most zones owned (measured by total zone bonuses).
OBCL - Move from region T1 to T2 if T2 is adjacent to more regions occupied by the player with the fewest zones owned (measured by total zone bonuses).
CNM - Move from region T1 to T2 if T2 is connected to more regions than T1 is.
CNL - Move from region T1 to T2 if T2 is connected to fewer regions than T1 is.
CB - Move from region T1 to T2 if T2 is on a zone boundary and T1 is not.
CA - Move from region T1 to T2 if T2 is adjacent to at least one enemy-owned region and T1 is not.
CAC - Move from region T1 to T2 if T2 is adjacent to a region in a zone completely owned by a single enemy player and T1 is not.
M - Move from region T1 to T2 if T2 has more units than T1.
L - Move from region T1 to T2 if T2 has fewer units than T1.
SI - Move from region T1 to T2 if T2 is adjacent to a region with a higher chance of successful invasion than any of those connected to T1, calculated using the ratio of available troops from attacking region to troops on target region.
PASS - Likelihood of passing (ending your turn and not doing any more redeployments). If set to 100, you will never redeploy; if 0, you will always redeploy.)tpl";

const char* kInventoryItemText =
    R"tpl(Your assigned personality is: {persona}

We are interested in how you would describe yourself. Given the statement "{item_statement}", you must choose a number from 0 to 3:
        0 - Very false or often false
        1 - Sometimes or somewhat false
        2 - Sometimes or somewhat true
        3 - Very true or often true

Reply with the number only.
)tpl";

std::string make_dh_template(const char* list) {
  return std::string(list) + "\n\n" + kDhPreambleText +
         "\n\nYour assigned personality is: {persona}\n\n"
         "Reply with a JSON object mapping each heuristic code above to the value you assign it.\n";
}

const std::array<std::string, 6>& all_templates() {
  static const std::array<std::string, 6> kTexts = {
      std::string(kAssessmentText),
      std::string(kGameIntroText),
      make_dh_template(kDeployListText),
      make_dh_template(kAttackListText),
      make_dh_template(kRedeployListText),
      std::string(kInventoryItemText),
  };
  return kTexts;
}

constexpr const char* kTemplateNames[6] = {"assessment", "game_intro", "dh_phase0",
                                           "dh_phase1",  "dh_phase2",  "inventory_item"};

}  // namespace

const char* template_id_name(TemplateId id) {
  return kTemplateNames[static_cast<size_t>(id)];
}

std::optional<TemplateId> parse_template_id(std::string_view name) {
  for (size_t i = 0; i < 6; ++i) {
    if (name == kTemplateNames[i]) return static_cast<TemplateId>(i);
  }
  return std::nullopt;
}

const std::string& template_text(TemplateId id) {
  return all_templates()[static_cast<size_t>(id)];
}

std::string render_template(TemplateId id,
                            const std::map<std::string, std::string>& vars) {
  const std::string& text = template_text(id);
  std::string out;
  out.reserve(text.size() + 256);
  size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      size_t j = i + 1;
      while (j < text.size() && (std::islower(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      if (j > i + 1 && j < text.size() && text[j] == '}') {
        std::string key = text.substr(i + 1, j - i - 1);
        auto it = vars.find(key);
        if (it == vars.end()) {
          fail(ErrorKind::Validation, std::string("template '") + template_id_name(id) +
                                          "' placeholder '{" + key + "}' has no value");
        }
        out += it->second;
        i = j + 1;
        continue;
      }
    }
    out += text[i++];
  }
  return out;
}

std::string dh_prompt(HeurPhase phase, const std::string& persona_description) {
  TemplateId id = phase == HeurPhase::Deploy   ? TemplateId::DhDeploy
                  : phase == HeurPhase::Attack ? TemplateId::DhAttack
                                               : TemplateId::DhRedeploy;
  return render_template(TemplateId::GameIntro, {}) + "\n\n" +
         render_template(id, {{"persona", persona_description}});
}

void BackendConfig::apply_env() {
  auto fill = [](std::string& slot, const char* var) {
    if (!slot.empty()) return;
    if (const char* v = std::getenv(var)) slot = v;
  };
  fill(endpoint, "PERIL_LLM_ENDPOINT");
  fill(model, "PERIL_LLM_MODEL");
  fill(api_key, "PERIL_LLM_KEY");
}

Json BackendConfig::to_json() const {
  return Json{{"kind", kind},
              {"endpoint", endpoint},
              {"model", model},
              {"temperature", temperature},
              {"max_retries", max_retries},
              {"backoff_ms", backoff_ms},
              {"timeout_ms", timeout_ms}};
}

BackendConfig BackendConfig::from_json(const Json& doc, const std::string& origin) {
  if (!doc.is_object()) fail(ErrorKind::Validation, "backend config must be an object (" + origin + ")");
  BackendConfig cfg;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    const Json& v = it.value();
    auto want_string = [&]() -> std::string {
      if (!v.is_string()) fail(ErrorKind::Validation, "backend " + key + " must be a string (" + origin + ")");
      return v.get<std::string>();
    };
    auto want_int = [&]() -> int {
      if (!v.is_number_integer()) fail(ErrorKind::Validation, "backend " + key + " must be an integer (" + origin + ")");
      return v.get<int>();
    };
    if (key == "kind") cfg.kind = want_string();
    else if (key == "endpoint") cfg.endpoint = want_string();
    else if (key == "model") cfg.model = want_string();
    else if (key == "temperature") {
      if (!v.is_number()) fail(ErrorKind::Validation, "backend temperature must be a number (" + origin + ")");
      cfg.temperature = v.get<double>();
    } else if (key == "max_retries") cfg.max_retries = want_int();
    else if (key == "backoff_ms") cfg.backoff_ms = want_int();
    else if (key == "timeout_ms") cfg.timeout_ms = want_int();
    else if (key == "api_key") {
      fail(ErrorKind::Validation, "api keys are read from PERIL_LLM_KEY, never from config files (" + origin + ")");
    } else {
      fail(ErrorKind::Validation, "unknown backend config key '" + key + "' (" + origin + ")");
    }
  }
  if (cfg.kind != "mock" && cfg.kind != "http") {
    fail(ErrorKind::Validation, "backend kind must be 'mock' or 'http' (" + origin + ")");
  }
  if (cfg.max_retries < 0 || cfg.backoff_ms < 0 || cfg.timeout_ms <= 0) {
    fail(ErrorKind::Validation, "backend retry/timeout settings must be non-negative (" + origin + ")");
  }
  return cfg;
}

namespace {

// ---- deterministic mock backend ----

double unit_from_hash(uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

uint64_t text_salt(std::string_view tag, std::string_view text) {
  uint64_t state = fnv1a(tag) ^ (fnv1a(text) * 0x9e3779b97f4a7c15ULL);
  return splitmix64(state);
}

std::string lower_copy(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trim_copy(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int presence_hits(const std::string& lower, std::initializer_list<const char*> words) {
  int hits = 0;
  for (const char* w : words) {
    if (lower.find(w) != std::string::npos) ++hits;
  }
  return hits;
}

int aggression_signal(const std::string& lower) {
  int pos = presence_hits(
      lower, {"aggress", "attack",   "offensive", "conquer", "dominat", "ruthless",
              "strike",  "warrior",  "fearless",  "relentless", "assertive", "competitiv",
              "overwhelm", "crush",  "charge",    "raid",    "expand",  "onslaught",
              "press the advantage", "seize"});
  int neg = presence_hits(
      lower, {"cautious", "careful",  "defensive", "patien",  "gentle",   "quiet",
              "timid",    "peace",    "calm",      "reserved", "conservativ", "protect",
              "fortif",   "consolidat", "avoid",   "retreat", "passive",  "hesita",
              "diplomat", "nurtur",   "hold back", "wait"});
  return pos - neg;
}

int strategy_signal(const std::string& lower) {
  int pos = presence_hits(lower, {"strateg", "chess", "grandmaster", "tactic", "planner",
                                  "plans ahead", "analyt", "calculat", "mastermind",
                                  "foresight", "outmaneuver", "outthink", "systematic",
                                  "anticipat", "methodical"});
  int neg = presence_hits(lower, {"impulsive", "whimsical", "scattered", "disorganiz",
                                  "careless", "clueless", "confus", "forgetful",
                                  "daydream", "absent-minded", "no patience for plans"});
  return pos - neg;
}

int domain_signal(const std::string& lower) {
  int pos = presence_hits(lower, {"military", "soldier", "veteran", "combat", "warfare",
                                  "army", "general", "commander", "officer", "battalion",
                                  "naval", "marine", "colonel", "sergeant", "troops",
                                  "battle", "campaign", "wargam"});
  int neg = presence_hits(lower, {"pacifist", "artist", "librarian", "gardener", "poet",
                                  "baker", "florist", "musician", "accountant", "monk",
                                  "never fought", "hates conflict"});
  return pos - neg;
}

int risk_signal(const std::string& lower) {
  int pos = presence_hits(lower, {"risk", "gambl", "daredevil", "reckless", "impulsive",
                                  "all-in", "adrenaline", "thrill", "adventur", "audacious",
                                  "high-stakes", "long shot"});
  int neg = presence_hits(lower, {"risk-averse", "averse", "prudent", "cautious", "careful",
                                  "safe", "measured", "deliberate", "insur", "hedge",
                                  "timid", "never bets"});
  return pos - neg;
}

int do_signal(const std::string& lower) {
  int pos = presence_hits(lower, {"always ", "never ", "every turn", "prioritize",
                                  "immediately", "you must", "make sure to", "focus on",
                                  "prefer to", "first,"});
  int neg = presence_hits(lower, {"grew up", "childhood", "career", "retired", "is a ",
                                  "was a ", "years of", "background", "personality",
                                  "temperament", "known for", "reputation", "spent"});
  return pos - neg;
}

double trait_unit(int signal, uint64_t salt) {
  double jitter = (unit_from_hash(salt) - 0.5) * 0.18;
  return std::clamp(0.5 + 0.16 * signal + jitter, 0.0, 1.0);
}

double grid5(double u) {
  if (u < 0.18) return -1.0;
  if (u < 0.42) return -0.5;
  if (u <= 0.58) return 0.0;
  if (u <= 0.82) return 0.5;
  return 1.0;
}

double ternary(double u) {
  if (u < 0.35) return -1.0;
  if (u <= 0.65) return 0.0;
  return 1.0;
}

double mock_aggression(const std::string& persona) {
  return trait_unit(aggression_signal(lower_copy(persona)), text_salt("agg", persona));
}

std::string mock_assessment(const std::string& prompt) {
  size_t ipos = prompt.rfind("\nindex: ");
  size_t ppos = prompt.rfind("\npersonality: ");
  if (ipos == std::string::npos || ppos == std::string::npos || ppos < ipos) {
    fail(ErrorKind::Backend, "mock backend: assessment prompt lacks the index/personality lines");
  }
  size_t iend = prompt.find('\n', ipos + 1);
  std::string index_text = trim_copy(prompt.substr(ipos + 8, iend - (ipos + 8)));
  std::string persona = trim_copy(prompt.substr(ppos + 14));
  long index = 0;
  try {
    index = std::stol(index_text);
  } catch (...) {
    fail(ErrorKind::Backend, "mock backend: assessment index is not an integer");
  }
  std::string lower = lower_copy(persona);
  double strategic = trait_unit(strategy_signal(lower), text_salt("strat", persona));
  double domain = trait_unit(domain_signal(lower), text_salt("dom", persona));
  double risk = trait_unit(risk_signal(lower), text_salt("risk", persona));
  double peril = std::clamp(0.5 + 0.55 * (strategic - 0.5) + 0.35 * (domain - 0.5) +
                                (unit_from_hash(text_salt("peril", persona)) - 0.5) * 0.14,
                            0.0, 1.0);
  double dobe = std::clamp(0.5 + 0.13 * do_signal(lower) +
                               (unit_from_hash(text_salt("dobe", persona)) - 0.5) * 0.2,
                           0.0, 1.0);
  Json reply{{"index", index},
             {"personality", persona},
             {"strategicThinker", grid5(strategic)},
             {"domainExpert", grid5(domain)},
             {"perilSpecific", grid5(peril)},
             {"riskTaker", grid5(risk)},
             {"doOrBe", ternary(dobe)}};
  return reply.dump();
}

// Direction each heuristic moves with the mock's aggression trait: +1 grows,
// -1 shrinks, 0 stays near the default.
int dh_direction(HeuristicCode code) {
  switch (code) {
    case HeuristicCode::DeployETE:
    case HeuristicCode::DeployEAC:
    case HeuristicCode::DeployEACO:
    case HeuristicCode::DeployPTM:
    case HeuristicCode::DeployPUM:
    case HeuristicCode::DeployPCM:
    case HeuristicCode::AttackONM:
    case HeuristicCode::AttackON2:
    case HeuristicCode::AttackICOE:
    case HeuristicCode::AttackPTM:
    case HeuristicCode::AttackPUM:
    case HeuristicCode::AttackPCM:
    case HeuristicCode::RedeployCA:
    case HeuristicCode::RedeploySI:
    case HeuristicCode::RedeployCB:
    case HeuristicCode::RedeployM:
      return 1;
    case HeuristicCode::DeployETN:
    case HeuristicCode::DeployPTL:
    case HeuristicCode::DeployPUL:
    case HeuristicCode::DeployPCL:
    case HeuristicCode::AttackPASS:
    case HeuristicCode::AttackONL:
    case HeuristicCode::RedeployPASS:
    case HeuristicCode::RedeployCNL:
    case HeuristicCode::RedeployL:
      return -1;
    default:
      return 0;
  }
}

std::string extract_between(const std::string& text, const std::string& open,
                            const std::string& close, const char* what) {
  size_t b = text.find(open);
  if (b == std::string::npos) {
    fail(ErrorKind::Backend, std::string("mock backend: prompt lacks ") + what);
  }
  b += open.size();
  size_t e = close.empty() ? std::string::npos : text.find(close, b);
  if (e == std::string::npos && !close.empty()) {
    fail(ErrorKind::Backend, std::string("mock backend: prompt truncates ") + what);
  }
  return trim_copy(text.substr(b, e == std::string::npos ? e : e - b));
}

std::string mock_dh(const std::string& prompt) {
  HeurPhase phase;
  if (prompt.find("ETE - Place") != std::string::npos) phase = HeurPhase::Deploy;
  else if (prompt.find("ONM - Attack") != std::string::npos) phase = HeurPhase::Attack;
  else if (prompt.find("OBTM - Move") != std::string::npos) phase = HeurPhase::Redeploy;
  else fail(ErrorKind::Backend, "mock backend: heuristic prompt has no recognizable phase list");
  std::string persona =
      extract_between(prompt, "Your assigned personality is: ", "\n\n", "a personality segment");
  double agg = mock_aggression(persona);
  Json obj = Json::object();
  for (HeuristicCode code : codes_in_phase(phase)) {
    std::string name(code_name(code));
    uint64_t salt = text_salt(std::string(heur_phase_name(phase)) + ":" + name, persona);
    double noise = (unit_from_hash(salt) - 0.5) * 10.0;
    double value = 5.0 + dh_direction(code) * (agg - 0.5) * 70.0 + noise;
    obj[name] = static_cast<int>(std::lround(std::clamp(value, 0.0, 100.0)));
  }
  return "```json\n" + obj.dump(2) + "\n```";
}

std::string mock_item(const std::string& prompt) {
  std::string persona =
      extract_between(prompt, "Your assigned personality is: ", "\n\n", "a personality segment");
  std::string statement =
      extract_between(prompt, "Given the statement \"", "\", you must choose", "an item statement");
  double agg = mock_aggression(persona);
  double sent = std::clamp(0.6 * aggression_signal(lower_copy(statement)), -1.0, 1.0);
  uint64_t salt = text_salt("item", persona + "\x1f" + statement);
  double noise = (unit_from_hash(salt) - 0.5) * 1.1;
  double latent = 1.5 + 1.65 * ((2.0 * agg - 1.0) * sent) + noise;
  int answer = static_cast<int>(std::clamp(std::lround(latent), 0l, 3l));
  return std::to_string(answer);
}

std::string mock_complete(const std::string& prompt) {
  if (prompt.find("must estimate how well that person would do") != std::string::npos) {
    return mock_assessment(prompt);
  }
  if (prompt.find("you must choose a number from 0 to 3") != std::string::npos) {
    return mock_item(prompt);
  }
  if (prompt.find("what values to assign these heuristics") != std::string::npos) {
    return mock_dh(prompt);
  }
  fail(ErrorKind::Backend, "mock backend: unrecognized prompt shape");
}

// ---- http backend ----

struct ParsedEndpoint {
  std::string base;    // scheme://host:port
  std::string prefix;  // path prefix, no trailing slash
};

ParsedEndpoint split_endpoint(const std::string& endpoint) {
  if (endpoint.rfind("https://", 0) == 0) {
    fail(ErrorKind::Backend, "built without TLS support; point PERIL_LLM_ENDPOINT at an http URL or a local proxy");
  }
  if (endpoint.rfind("http://", 0) != 0) {
    fail(ErrorKind::Backend, "endpoint must be an http:// URL: " + endpoint);
  }
  size_t slash = endpoint.find('/', 7);
  if (slash == std::string::npos) return {endpoint, ""};
  std::string prefix = endpoint.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {endpoint.substr(0, slash), prefix};
}

void set_timeouts(httplib::Client& cli, int timeout_ms) {
  time_t sec = timeout_ms / 1000;
  time_t usec = (timeout_ms % 1000) * 1000;
  cli.set_connection_timeout(sec, usec);
  cli.set_read_timeout(sec, usec);
  cli.set_write_timeout(sec, usec);
}

std::string http_complete(const BackendConfig& cfg, const std::string& prompt) {
  ParsedEndpoint ep = split_endpoint(cfg.endpoint);
  std::string path = ep.prefix;
  bool full = path.size() >= 17 && path.compare(path.size() - 17, 17, "/chat/completions") == 0;
  if (!full) {
    bool versioned = path.size() >= 3 && path.compare(path.size() - 3, 3, "/v1") == 0;
    path += versioned ? "/chat/completions" : "/v1/chat/completions";
  }
  Json body{{"model", cfg.model},
            {"temperature", cfg.temperature},
            {"messages", Json::array({Json{{"role", "user"}, {"content", prompt}}})}};
  std::string payload = body.dump();
  httplib::Headers headers{{"Authorization", "Bearer " + cfg.api_key}};

  std::string last_err;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0) {
      long wait = static_cast<long>(cfg.backoff_ms) << (2 * (attempt - 1));
      std::this_thread::sleep_for(std::chrono::milliseconds(wait));
    }
    httplib::Client cli(ep.base);
    set_timeouts(cli, cfg.timeout_ms);
    httplib::Result res = cli.Post(path, headers, payload, "application/json");
    if (!res) {
      last_err = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      fail(ErrorKind::Backend, "backend rejected the API key (http " + std::to_string(res->status) + ")");
    }
    if (res->status != 200) {
      last_err = "http " + std::to_string(res->status);
      continue;
    }
    Json doc = Json::parse(res->body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("choices") || !doc["choices"].is_array() ||
        doc["choices"].empty() || !doc["choices"][0].contains("message") ||
        !doc["choices"][0]["message"].contains("content") ||
        !doc["choices"][0]["message"]["content"].is_string()) {
      last_err = "malformed completion body";
      continue;
    }
    return doc["choices"][0]["message"]["content"].get<std::string>();
  }
  fail(ErrorKind::Backend, "completion failed after " + std::to_string(cfg.max_retries + 1) +
                               " attempts; last error: " + last_err);
}

std::string iso_utc_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string complete(const BackendConfig& config, const std::string& prompt) {
  if (config.kind == "mock") return mock_complete(prompt);
  if (config.kind != "http") {
    fail(ErrorKind::Validation, "unknown backend kind '" + config.kind + "'");
  }
  BackendConfig cfg = config;
  cfg.apply_env();
  if (cfg.endpoint.empty()) fail(ErrorKind::Backend, "no endpoint configured; set PERIL_LLM_ENDPOINT");
  if (cfg.model.empty()) fail(ErrorKind::Backend, "no model configured; set PERIL_LLM_MODEL");
  if (cfg.api_key.empty()) fail(ErrorKind::Backend, "no API key configured; set PERIL_LLM_KEY");
  return http_complete(cfg, prompt);
}

AuditLog::AuditLog(const std::string& path)
    : path_(path), out_(path, std::ios::binary | std::ios::app) {
  if (!out_) fail(ErrorKind::Io, "cannot open audit log for append: " + path);
}

void AuditLog::append(Json record) {
  std::lock_guard<std::mutex> lock(mu_);
  record["seq"] = seq_++;
  record["ts"] = iso_utc_now();
  out_ << record.dump() << "\n";
  out_.flush();
  if (!out_) fail(ErrorKind::Io, "audit log write failed: " + path_);
}

namespace {

void audit_exchange(AuditLog* audit, Json meta, const std::string& prompt,
                    const std::string& reply) {
  if (!audit) return;
  meta["prompt"] = prompt;
  meta["reply"] = reply;
  audit->append(std::move(meta));
}

// First standalone integer in the reply; only 0..3 qualifies. Digits glued to
// letters, signs, or decimal points do not count.
std::optional<int> parse_scale_answer(const std::string& reply) {
  for (size_t i = 0; i < reply.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(reply[i]))) continue;
    bool glued_left = i > 0 && (std::isalnum(static_cast<unsigned char>(reply[i - 1])) ||
                                reply[i - 1] == '.' || reply[i - 1] == '-' || reply[i - 1] == '+');
    size_t j = i;
    while (j + 1 < reply.size() && std::isdigit(static_cast<unsigned char>(reply[j + 1]))) ++j;
    bool glued_right = j + 1 < reply.size() && (reply[j + 1] == '.' ||
                       std::isalpha(static_cast<unsigned char>(reply[j + 1])));
    if (!glued_left && !glued_right && j == i) {
      int v = reply[i] - '0';
      if (v <= 3) return v;
    }
    i = j;
  }
  return std::nullopt;
}

constexpr int kScaleToResponse[4] = {-2, -1, 1, 2};

}  // namespace

FeatureRatings annotate_persona(const BackendConfig& config, const Persona& persona,
                                int index, AuditLog* audit) {
  std::string prompt = render_template(TemplateId::Assessment,
                                       {{"persona", persona.description},
                                        {"index", std::to_string(index)}});
  std::string reply = complete(config, prompt);
  audit_exchange(audit,
                 Json{{"kind", "assessment"},
                      {"persona_id", persona.persona_id},
                      {"index", index},
                      {"template", template_id_name(TemplateId::Assessment)}},
                 prompt, reply);
  for (const Json& cand : extract_json_values(reply)) {
    if (!cand.is_object()) continue;
    bool complete_row = true;
    for (Feature f : all_features()) {
      if (!cand.contains(feature_name(f)) || !cand[feature_name(f)].is_number()) {
        complete_row = false;
        break;
      }
    }
    if (!complete_row) continue;
    FeatureRatings ratings;
    ratings.persona_id = persona.persona_id;
    for (Feature f : all_features()) {
      double v = cand[feature_name(f)].get<double>();
      if (!feature_grid_allows(f, v)) {
        fail(ErrorKind::Validation, "assessment for persona '" + persona.persona_id +
                                        "' puts " + feature_name(f) + " off the allowed grid");
      }
      ratings.set_value(f, v);
    }
    return ratings;
  }
  fail(ErrorKind::Parse,
       "no assessment object found in model output for persona '" + persona.persona_id + "'");
}

HeuristicProfile elicit_profile_dh(const BackendConfig& config, const Persona& persona,
                                   AuditLog* audit) {
  HeuristicProfile profile;
  profile.persona_id = persona.persona_id;
  profile.provenance = "DH";
  static constexpr HeurPhase kPhases[3] = {HeurPhase::Deploy, HeurPhase::Attack,
                                           HeurPhase::Redeploy};
  static constexpr TemplateId kIds[3] = {TemplateId::DhDeploy, TemplateId::DhAttack,
                                         TemplateId::DhRedeploy};
  for (int i = 0; i < 3; ++i) {
    std::string prompt = dh_prompt(kPhases[i], persona.description);
    std::string reply = complete(config, prompt);
    audit_exchange(audit,
                   Json{{"kind", "dh"},
                        {"persona_id", persona.persona_id},
                        {"phase", heur_phase_name(kPhases[i])},
                        {"template", template_id_name(kIds[i])}},
                   prompt, reply);
    apply_dh_response(profile, reply, kPhases[i]);
  }
  return profile;
}

ResponseSheet elicit_sheet_pi(const BackendConfig& config, const Persona& persona,
                              const Inventory& inventory, AuditLog* audit) {
  ResponseSheet sheet;
  sheet.persona_id = persona.persona_id;
  for (const InventoryItem& item : inventory) {
    std::string prompt = render_template(TemplateId::InventoryItem,
                                         {{"persona", persona.description},
                                          {"item_statement", item.statement}});
    std::string reply = complete(config, prompt);
    audit_exchange(audit,
                   Json{{"kind", "item"},
                        {"persona_id", persona.persona_id},
                        {"item_id", item.item_id},
                        {"template", template_id_name(TemplateId::InventoryItem)}},
                   prompt, reply);
    std::optional<int> raw = parse_scale_answer(reply);
    if (!raw) {
      fail(ErrorKind::Parse, "no 0..3 answer found for item '" + item.item_id +
                                 "' of persona '" + persona.persona_id + "'");
    }
    sheet.answers[item.item_id] = kScaleToResponse[*raw];
  }
  return sheet;
}

HeuristicProfile elicit_profile_pi(const BackendConfig& config, const Persona& persona,
                                   const Inventory& inventory, double lambda,
                                   AuditLog* audit) {
  ResponseSheet sheet = elicit_sheet_pi(config, persona, inventory, audit);
  HeuristicProfile profile = build_profile_pi(inventory, sheet, lambda);
  profile.persona_id = persona.persona_id;
  return profile;
}

std::vector<HeuristicProfile> replay_audit(const std::string& audit_path,
                                           const Inventory* inventory, double lambda) {
  struct Partial {
    bool has_dh = false;
    bool has_pi = false;
    HeuristicProfile dh;
    ResponseSheet sheet;
  };
  std::vector<std::string> order;
  std::map<std::string, Partial> by_id;
  size_t row_ix = 0;
  for (const Json& row : read_ndjson_file(audit_path)) {
    ++row_ix;
    std::string origin = audit_path + " record " + std::to_string(row_ix);
    if (!row.is_object() || !row.contains("kind") || !row["kind"].is_string()) {
      fail(ErrorKind::Parse, "audit record has no kind (" + origin + ")");
    }
    std::string kind = row["kind"].get<std::string>();
    if (kind == "assessment") continue;
    if (kind != "dh" && kind != "item") {
      fail(ErrorKind::Parse, "unknown audit record kind '" + kind + "' (" + origin + ")");
    }
    if (!row.contains("persona_id") || !row["persona_id"].is_string() ||
        !row.contains("reply") || !row["reply"].is_string()) {
      fail(ErrorKind::Parse, "audit record lacks persona_id/reply (" + origin + ")");
    }
    std::string persona_id = row["persona_id"].get<std::string>();
    auto [it, inserted] = by_id.try_emplace(persona_id);
    if (inserted) {
      order.push_back(persona_id);
      it->second.dh.persona_id = persona_id;
      it->second.dh.provenance = "DH";
      it->second.sheet.persona_id = persona_id;
    }
    Partial& entry = it->second;
    std::string reply = row["reply"].get<std::string>();
    if (kind == "dh") {
      if (!row.contains("phase") || !row["phase"].is_string()) {
        fail(ErrorKind::Parse, "dh audit record lacks a phase (" + origin + ")");
      }
      std::optional<HeurPhase> phase = parse_heur_phase(row["phase"].get<std::string>());
      if (!phase) fail(ErrorKind::Parse, "dh audit record names an unknown phase (" + origin + ")");
      apply_dh_response(entry.dh, reply, *phase);
      entry.has_dh = true;
    } else {
      if (!row.contains("item_id") || !row["item_id"].is_string()) {
        fail(ErrorKind::Parse, "item audit record lacks an item_id (" + origin + ")");
      }
      std::optional<int> raw = parse_scale_answer(reply);
      if (!raw) fail(ErrorKind::Parse, "item audit record reply has no 0..3 answer (" + origin + ")");
      entry.sheet.answers[row["item_id"].get<std::string>()] = kScaleToResponse[*raw];
      entry.has_pi = true;
    }
  }
  std::vector<HeuristicProfile> profiles;
  profiles.reserve(order.size());
  for (const std::string& persona_id : order) {
    Partial& entry = by_id[persona_id];
    if (entry.has_dh && entry.has_pi) {
      fail(ErrorKind::Validation,
           "persona '" + persona_id + "' has audit records from both elicitation methods");
    }
    if (entry.has_pi) {
      if (!inventory) {
        fail(ErrorKind::Validation,
             "audit log contains inventory answers; an inventory is required to replay them");
      }
      HeuristicProfile profile = build_profile_pi(*inventory, entry.sheet, lambda);
      profile.persona_id = persona_id;
      profiles.push_back(std::move(profile));
    } else if (entry.has_dh) {
      profiles.push_back(std::move(entry.dh));
    }
  }
  return profiles;
}

}  // namespace peril
