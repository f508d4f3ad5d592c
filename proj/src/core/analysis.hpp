#pragma once

#include <string>
#include <vector>

#include "core/heuristics.hpp"
#include "core/persona.hpp"
#include "core/tournament.hpp"

namespace peril {

// Ranks with ties averaged (1-based). Input order preserved.
std::vector<double> average_ranks(const std::vector<double>& values);

struct SpearmanResult {
  double rho = 0.0;
  double p_value = 1.0;
  size_t n = 0;
  bool defined = true;  // false when either vector is constant; rho/p are NaN then
};

// Spearman rank correlation: Pearson over tie-averaged ranks. Two-sided
// p-value by exhaustive permutation enumeration for n <= 8, by the
// t-distribution approximation above that. Requires equal lengths and n >= 3.
SpearmanResult spearman(const std::vector<double>& x, const std::vector<double>& y);

// "*" p <= 0.05, "**" p <= 0.01, "***" p <= 0.005, otherwise "".
std::string significance_stars(double p_value);

// Continued-fraction regularized incomplete beta I_x(a, b); feeds the
// t-distribution tail. Exposed for direct verification.
double regularized_incomplete_beta(double a, double b, double x);
double student_t_two_sided_p(double t, double dof);

// The five mirrored heuristic pairs per phase (e.g. "prefer strongest enemy"
// vs "prefer weakest enemy").
struct OppositePair {
  HeuristicCode a;
  HeuristicCode b;
};
const std::vector<OppositePair>& opposite_pairs(HeurPhase phase);

// Ratio consistency of one profile's pair of mirrored weights: the larger of
// the two ratios, capped at 100. Two zeros count as perfectly consistent (1);
// exactly one zero maxes the ratio out at the cap.
double pair_consistency(double h1, double h2);

// Mean pair_consistency across profiles.
double opposite_value_consistency(const std::vector<HeuristicProfile>& profiles,
                                  const OppositePair& pair);

struct OvcRow {
  HeurPhase phase;
  std::string code_a;
  std::string code_b;
  double mean_consistency = 0.0;
  double mean_abs_diff = 0.0;  // companion metric: mean |h1 - h2|
};
std::vector<OvcRow> ovc_table(const std::vector<HeuristicProfile>& profiles);

// Per pair, first-set minus second-set, under both candidate metrics.
struct OvcDiffRow {
  HeurPhase phase;
  std::string code_a;
  std::string code_b;
  double ovc_ratio_diff = 0.0;
  double raw_weight_diff = 0.0;
};
std::vector<OvcDiffRow> ovc_difference_table(const std::vector<HeuristicProfile>& first,
                                             const std::vector<HeuristicProfile>& second);

struct CorrelationRow {
  std::string label;  // leaderboard label, e.g. "run01"
  Feature feature;
  SpearmanResult result;
};

// For every leaderboard and every feature: Spearman between the feature's
// rating values and final mu, joined by persona_id. A player without a rating
// row is Error{Validation}.
std::vector<CorrelationRow> feature_rating_correlations(
    const std::vector<FeatureRatings>& ratings,
    const std::vector<std::pair<std::string, std::vector<PlayerStanding>>>& leaderboards);

// Deterministic fixed-precision text renderings for the report bundle.
std::string correlation_report_text(const std::vector<CorrelationRow>& rows);
std::string ovc_table_text(const std::vector<OvcRow>& rows, const std::string& title);
std::string ovc_difference_text(const std::vector<OvcDiffRow>& rows);
std::string leaderboard_extremes_text(const std::vector<PlayerStanding>& sorted_standings,
                                      const std::vector<Persona>& personas, size_t top_k);

Json correlation_report_json(const std::vector<CorrelationRow>& rows);
Json ovc_table_json(const std::vector<OvcRow>& rows);
Json ovc_difference_json(const std::vector<OvcDiffRow>& rows);

}  // namespace peril
