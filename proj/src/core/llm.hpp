#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "core/inventory.hpp"
#include "core/jsonio.hpp"
#include "core/persona.hpp"

namespace peril {

// The fixed prompt library. Placeholders use {name} syntax; rendering demands
// a binding for every placeholder in the text.
enum class TemplateId : uint8_t {
  Assessment,     // rate one persona on the five characteristics
  GameIntro,      // rules framing prepended to heuristic-value prompts
  DhDeploy,       // deploy heuristic list + value-assignment instructions
  DhAttack,       // attack heuristic list + value-assignment instructions
  DhRedeploy,     // redeploy heuristic list + value-assignment instructions
  InventoryItem,  // one self-description statement answered on the 0..3 scale
};

const char* template_id_name(TemplateId id);
std::optional<TemplateId> parse_template_id(std::string_view name);

// Raw template text, placeholders unexpanded.
const std::string& template_text(TemplateId id);

// Substitutes every {token} of lowercase/underscore letters from `vars`.
// A placeholder without a binding is Error{Validation}; extra bindings are
// ignored and other brace runs (e.g. "{-1, 0, 1}") pass through untouched.
std::string render_template(TemplateId id,
                            const std::map<std::string, std::string>& vars);

// DH prompts are the rules intro plus the per-phase template.
std::string dh_prompt(HeurPhase phase, const std::string& persona_description);

struct BackendConfig {
  std::string kind = "mock";  // "mock" | "http"
  std::string endpoint;       // e.g. http://host:8080 or http://host:8080/v1
  std::string model;
  std::string api_key;
  double temperature = 0.0;
  int max_retries = 3;    // attempts beyond the first; waits quadruple
  int backoff_ms = 1000;  // first retry wait; then 4x, 16x, ...
  int timeout_ms = 60000;

  // Fills endpoint, model and api_key from PERIL_LLM_ENDPOINT,
  // PERIL_LLM_MODEL and PERIL_LLM_KEY where still empty. The key is only
  // ever sourced from the environment.
  void apply_env();

  Json to_json() const;  // omits api_key
  static BackendConfig from_json(const Json& doc, const std::string& origin);
};

// One completion call. The mock backend answers deterministically from the
// prompt text alone and never touches the network; the http backend speaks
// the chat-completions protocol against `endpoint` with retry and backoff.
// Missing endpoint/model/key on an http backend is Error{Backend} raised
// before any request is attempted.
std::string complete(const BackendConfig& config, const std::string& prompt);

// Append-only NDJSON record of every prompt/reply exchange. Each appended
// record gains a sequence number and UTC timestamp. Thread-safe.
class AuditLog {
 public:
  explicit AuditLog(const std::string& path);  // opens in append mode

  void append(Json record);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  std::mutex mu_;
  uint64_t seq_ = 0;
};

// Renders the assessment prompt for one persona, asks the backend, and
// parses the first JSON object carrying all five characteristic keys.
// Off-grid values are Error{Validation}; no usable object is Error{Parse}.
// `audit` may be null.
FeatureRatings annotate_persona(const BackendConfig& config, const Persona& persona,
                                int index, AuditLog* audit);

// Three prompts (deploy, attack, redeploy), each the rules intro plus the
// phase's heuristic list; replies are applied onto a default profile.
HeuristicProfile elicit_profile_dh(const BackendConfig& config, const Persona& persona,
                                   AuditLog* audit);

// One prompt per inventory item. The prompt text never names heuristic
// codes; replies are read as the first standalone integer in 0..3 and
// recorded on the agreement scale.
ResponseSheet elicit_sheet_pi(const BackendConfig& config, const Persona& persona,
                              const Inventory& inventory, AuditLog* audit);

HeuristicProfile elicit_profile_pi(const BackendConfig& config, const Persona& persona,
                                   const Inventory& inventory, double lambda,
                                   AuditLog* audit);

// Rebuilds every elicited profile from an audit log alone, without a
// backend: direct-heuristic records replay through the same reply parser,
// inventory records through the same answer scale and transform. Profiles
// come back in first-appearance order. Inventory records require
// `inventory`; a persona with records of both methods is an error.
std::vector<HeuristicProfile> replay_audit(const std::string& audit_path,
                                           const Inventory* inventory, double lambda);

}  // namespace peril
