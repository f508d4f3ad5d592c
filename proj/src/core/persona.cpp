#include "core/persona.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace peril {

const char* feature_name(Feature f) {
  switch (f) {
    case Feature::StrategicThinker: return "strategicThinker";
    case Feature::DomainExpert: return "domainExpert";
    case Feature::PerilSpecific: return "perilSpecific";
    case Feature::RiskTaker: return "riskTaker";
    case Feature::DoOrBe: return "doOrBe";
  }
  return "?";
}

const std::array<Feature, kFeatureCount>& all_features() {
  static const std::array<Feature, kFeatureCount> fs = {
      Feature::StrategicThinker, Feature::DomainExpert, Feature::PerilSpecific,
      Feature::RiskTaker, Feature::DoOrBe};
  return fs;
}

bool feature_grid_allows(Feature f, double v) {
  if (f == Feature::DoOrBe) return v == -1.0 || v == 0.0 || v == 1.0;
  return v == -1.0 || v == -0.5 || v == 0.0 || v == 0.5 || v == 1.0;
}

void FeatureRatings::set_value(Feature f, double v) {
  if (!feature_grid_allows(f, v)) {
    fail(ErrorKind::Validation, std::string("rating for ") + feature_name(f) +
                                    " off the grid: " + std::to_string(v));
  }
  values[static_cast<size_t>(f)] = v;
}

Json FeatureRatings::to_json() const {
  Json doc{{"persona_id", persona_id}};
  for (Feature f : all_features()) doc[feature_name(f)] = value(f);
  return doc;
}

FeatureRatings FeatureRatings::from_json(const Json& doc, const std::string& origin) {
  if (!doc.is_object()) fail(ErrorKind::Validation, "rating row must be an object (" + origin + ")");
  FeatureRatings r;
  r.persona_id = doc.value("persona_id", std::string());
  if (r.persona_id.empty()) {
    fail(ErrorKind::Validation, "rating row missing persona_id (" + origin + ")");
  }
  for (Feature f : all_features()) {
    const char* key = feature_name(f);
    if (!doc.contains(key) || !doc[key].is_number()) {
      fail(ErrorKind::Validation, "rating row for '" + r.persona_id + "' missing numeric '" +
                                      key + "' (" + origin + ")");
    }
    r.set_value(f, doc[key].get<double>());
  }
  return r;
}

std::vector<Persona> load_personas(const std::string& path) {
  std::vector<Persona> out;
  for (const Json& row : read_ndjson_file(path)) {
    if (!row.is_object() || !row.contains("persona_id") || !row.contains("description") ||
        !row["persona_id"].is_string() || !row["description"].is_string()) {
      fail(ErrorKind::Validation,
           "persona rows need string persona_id and description (" + path + ")");
    }
    out.push_back({row["persona_id"].get<std::string>(), row["description"].get<std::string>()});
  }
  return out;
}

void save_personas(const std::string& path, const std::vector<Persona>& personas) {
  std::vector<Json> rows;
  rows.reserve(personas.size());
  for (const Persona& p : personas) {
    rows.push_back(Json{{"persona_id", p.persona_id}, {"description", p.description}});
  }
  write_ndjson_file(path, rows);
}

std::vector<FeatureRatings> load_ratings(const std::string& path) {
  std::vector<FeatureRatings> out;
  for (const Json& row : read_ndjson_file(path)) out.push_back(FeatureRatings::from_json(row, path));
  return out;
}

void save_ratings(const std::string& path, const std::vector<FeatureRatings>& ratings) {
  std::vector<Json> rows;
  rows.reserve(ratings.size());
  for (const FeatureRatings& r : ratings) rows.push_back(r.to_json());
  write_ndjson_file(path, rows);
}

namespace {

// Running sums per feature; deviation term for feature f over m members with
// sum S and square-sum Q is Q - S^2/m.
struct SubsetSums {
  std::array<double, kFeatureCount> sum{};
  std::array<double, kFeatureCount> sqsum{};
  size_t count = 0;

  void add(const FeatureRatings& r) {
    for (size_t f = 0; f < kFeatureCount; ++f) {
      sum[f] += r.values[f];
      sqsum[f] += r.values[f] * r.values[f];
    }
    ++count;
  }

  // (product of per-feature terms, sum of per-feature terms)
  std::pair<double, double> objective_with(const FeatureRatings& r) const {
    double product = 1.0;
    double total = 0.0;
    double m = static_cast<double>(count + 1);
    for (size_t f = 0; f < kFeatureCount; ++f) {
      double s = sum[f] + r.values[f];
      double q = sqsum[f] + r.values[f] * r.values[f];
      double term = q - (s * s) / m;
      if (term < 0.0) term = 0.0;  // rounding guard; exact value is >= 0
      product *= term;
      total += term;
    }
    return {product, total};
  }
};

}  // namespace

double diversity_objective(const std::vector<FeatureRatings>& ratings,
                           const std::vector<size_t>& subset) {
  if (subset.empty()) fail(ErrorKind::Logic, "diversity_objective on empty subset");
  double product = 1.0;
  double m = static_cast<double>(subset.size());
  for (size_t f = 0; f < kFeatureCount; ++f) {
    double mean = 0.0;
    for (size_t ix : subset) {
      if (ix >= ratings.size()) fail(ErrorKind::Logic, "subset index out of range");
      mean += ratings[ix].values[f];
    }
    mean /= m;
    double term = 0.0;
    for (size_t ix : subset) {
      double d = ratings[ix].values[f] - mean;
      term += d * d;
    }
    product *= term;
  }
  return product;
}

std::vector<size_t> greedy_select(const std::vector<FeatureRatings>& ratings, size_t k) {
  const size_t n = ratings.size();
  if (k < 1 || k > n) {
    fail(ErrorKind::Validation, "greedy_select needs 1 <= k <= corpus size, got k=" +
                                    std::to_string(k) + " over " + std::to_string(n));
  }

  std::vector<size_t> best_subset;
  double best_objective = -1.0;

  std::vector<bool> in_subset(n);
  for (size_t seed = 0; seed < n; ++seed) {
    std::fill(in_subset.begin(), in_subset.end(), false);
    SubsetSums sums;
    std::vector<size_t> subset{seed};
    in_subset[seed] = true;
    sums.add(ratings[seed]);

    while (subset.size() < k) {
      size_t best_ix = n;
      double best_prod = -1.0, best_total = -1.0;
      for (size_t cand = 0; cand < n; ++cand) {
        if (in_subset[cand]) continue;
        auto [prod, total] = sums.objective_with(ratings[cand]);
        // Primary: the product objective. While every candidate leaves it at
        // zero, the per-feature sum keeps greedy moving. Ties favor the
        // lowest index because the scan ascends and requires strict gain.
        bool better;
        if (best_ix == n) better = true;
        else if (prod != best_prod) better = prod > best_prod;
        else if (best_prod == 0.0) better = total > best_total;
        else better = false;
        if (better) {
          best_ix = cand;
          best_prod = prod;
          best_total = total;
        }
      }
      subset.push_back(best_ix);
      in_subset[best_ix] = true;
      sums.add(ratings[best_ix]);
    }

    std::sort(subset.begin(), subset.end());
    double obj = diversity_objective(ratings, subset);
    if (obj > best_objective ||
        (obj == best_objective && subset < best_subset)) {
      best_objective = obj;
      best_subset = subset;
    }
  }
  return best_subset;
}

}  // namespace peril
