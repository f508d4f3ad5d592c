#pragma once

#include <array>
#include <string>
#include <vector>

#include "core/jsonio.hpp"

namespace peril {

// The five assessed characteristics, in canonical order.
enum class Feature : uint8_t {
  StrategicThinker,
  DomainExpert,
  PerilSpecific,
  RiskTaker,
  DoOrBe,
};
constexpr int kFeatureCount = 5;
const char* feature_name(Feature f);  // camelCase, as stored in rating files
const std::array<Feature, kFeatureCount>& all_features();

struct Persona {
  std::string persona_id;
  std::string description;
};

// One assessment row. The first four features live on the five-point grid
// {-1, -0.5, 0, 0.5, 1}; doOrBe is ternary {-1, 0, 1} (do = 1, be = -1).
struct FeatureRatings {
  std::string persona_id;
  std::array<double, kFeatureCount> values{};

  double value(Feature f) const { return values[static_cast<size_t>(f)]; }
  void set_value(Feature f, double v);  // Error{Validation} off the grid

  Json to_json() const;
  static FeatureRatings from_json(const Json& doc, const std::string& origin);
};

bool feature_grid_allows(Feature f, double v);

// Corpus and rating files are NDJSON.
std::vector<Persona> load_personas(const std::string& path);
void save_personas(const std::string& path, const std::vector<Persona>& personas);
std::vector<FeatureRatings> load_ratings(const std::string& path);
void save_ratings(const std::string& path, const std::vector<FeatureRatings>& ratings);

// Spread objective for a candidate subset: the product over features of the
// sum of squared deviations from the subset mean (unnormalized variance
// numerators multiplied together). Zero whenever any feature is constant on
// the subset. `subset` holds indices into `ratings`; Error{Logic} on empty
// subsets or bad indices.
double diversity_objective(const std::vector<FeatureRatings>& ratings,
                           const std::vector<size_t>& subset);

// Greedy maximization restarted from every persona as seed: grow by the
// candidate with the best objective increase, ties toward the lowest index;
// while every candidate leaves the product at zero, the sum of per-feature
// deviation terms breaks the plateau. Returns the best subset across seeds
// (final objective, then lexicographically smallest index set), sorted
// ascending. Requires 1 <= k <= |ratings|.
std::vector<size_t> greedy_select(const std::vector<FeatureRatings>& ratings, size_t k);

}  // namespace peril
