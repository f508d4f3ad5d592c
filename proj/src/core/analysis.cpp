#include "core/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace peril {

std::vector<double> average_ranks(const std::vector<double>& values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share the average of ranks i+1..j+1.
    double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

namespace {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

bool is_constant(const std::vector<double>& v) {
  for (double x : v) {
    if (x != v.front()) return false;
  }
  return true;
}

// Two-sided exact permutation p-value: the fraction of reorderings of y whose
// |rho| reaches |rho_obs|. A hair of slack keeps equal-magnitude rationals
// counted on both sides of the comparison identically.
double exact_permutation_p(const std::vector<double>& x_ranks, std::vector<double> y_values,
                           double rho_obs) {
  std::sort(y_values.begin(), y_values.end());
  size_t total = 0, at_least = 0;
  const double slack = 1e-12;
  do {
    std::vector<double> y_ranks = average_ranks(y_values);
    double rho = pearson(x_ranks, y_ranks);
    ++total;
    if (std::abs(rho) >= std::abs(rho_obs) - slack) ++at_least;
  } while (std::next_permutation(y_values.begin(), y_values.end()));
  return static_cast<double>(at_least) / static_cast<double>(total);
}

double betacf(double a, double b, double x) {
  // Lentz's continued fraction for the incomplete beta, as in the classic
  // numerical recipes formulation.
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log(1.0 - x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (!std::isfinite(t)) return 0.0;
  return regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
}

SpearmanResult spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    fail(ErrorKind::Logic, "spearman needs equal-length vectors");
  }
  if (x.size() < 3) fail(ErrorKind::Logic, "spearman needs n >= 3");
  SpearmanResult res;
  res.n = x.size();
  if (is_constant(x) || is_constant(y)) {
    res.defined = false;
    res.rho = std::numeric_limits<double>::quiet_NaN();
    res.p_value = std::numeric_limits<double>::quiet_NaN();
    return res;
  }
  std::vector<double> rx = average_ranks(x);
  std::vector<double> ry = average_ranks(y);
  res.rho = pearson(rx, ry);

  if (res.n <= 8) {
    res.p_value = exact_permutation_p(rx, y, res.rho);
  } else {
    double denom = 1.0 - res.rho * res.rho;
    if (denom <= 0.0) {
      res.p_value = 0.0;
    } else {
      double dof = static_cast<double>(res.n) - 2.0;
      double t = res.rho * std::sqrt(dof / denom);
      res.p_value = student_t_two_sided_p(t, dof);
    }
  }
  return res;
}

std::string significance_stars(double p_value) {
  if (!(p_value == p_value)) return "";  // NaN: undefined result carries no stars
  if (p_value <= 0.005) return "***";
  if (p_value <= 0.01) return "**";
  if (p_value <= 0.05) return "*";
  return "";
}

const std::vector<OppositePair>& opposite_pairs(HeurPhase phase) {
  static const std::vector<std::vector<OppositePair>> pairs = [] {
    auto need = [](HeurPhase p, const char* a, const char* b) {
      return OppositePair{*find_code(p, a), *find_code(p, b)};
    };
    std::vector<std::vector<OppositePair>> v(kHeurPhaseCount);
    v[static_cast<size_t>(HeurPhase::Deploy)] = {
        need(HeurPhase::Deploy, "EACM", "EACL"), need(HeurPhase::Deploy, "ETE", "ETN"),
        need(HeurPhase::Deploy, "PCM", "PCL"),   need(HeurPhase::Deploy, "PTM", "PTL"),
        need(HeurPhase::Deploy, "PUM", "PUL")};
    v[static_cast<size_t>(HeurPhase::Attack)] = {
        need(HeurPhase::Attack, "ICD", "ICS"), need(HeurPhase::Attack, "ONM", "ONL"),
        need(HeurPhase::Attack, "PCM", "PCL"), need(HeurPhase::Attack, "PTM", "PTL"),
        need(HeurPhase::Attack, "PUM", "PUL")};
    v[static_cast<size_t>(HeurPhase::Redeploy)] = {
        need(HeurPhase::Redeploy, "CNM", "CNL"), need(HeurPhase::Redeploy, "M", "L"),
        need(HeurPhase::Redeploy, "OBCM", "OBCL"), need(HeurPhase::Redeploy, "OBTM", "OBTL"),
        need(HeurPhase::Redeploy, "OBUM", "OBUL")};
    return v;
  }();
  return pairs[static_cast<size_t>(phase)];
}

double pair_consistency(double h1, double h2) {
  if (h1 < 0.0 || h2 < 0.0) fail(ErrorKind::Logic, "weights are non-negative");
  if (h1 == 0.0 && h2 == 0.0) return 1.0;
  if (h1 == 0.0 || h2 == 0.0) return 100.0;
  double ratio = std::max(h1 / h2, h2 / h1);
  return std::min(ratio, 100.0);
}

double opposite_value_consistency(const std::vector<HeuristicProfile>& profiles,
                                  const OppositePair& pair) {
  if (profiles.empty()) fail(ErrorKind::Logic, "consistency over an empty profile set");
  double total = 0.0;
  for (const HeuristicProfile& p : profiles) {
    total += pair_consistency(p.weight(pair.a), p.weight(pair.b));
  }
  return total / static_cast<double>(profiles.size());
}

std::vector<OvcRow> ovc_table(const std::vector<HeuristicProfile>& profiles) {
  std::vector<OvcRow> rows;
  for (int p = 0; p < kHeurPhaseCount; ++p) {
    HeurPhase phase = static_cast<HeurPhase>(p);
    for (const OppositePair& pair : opposite_pairs(phase)) {
      OvcRow row;
      row.phase = phase;
      row.code_a = std::string(code_name(pair.a));
      row.code_b = std::string(code_name(pair.b));
      row.mean_consistency = opposite_value_consistency(profiles, pair);
      double abs_diff = 0.0;
      for (const HeuristicProfile& prof : profiles) {
        abs_diff += std::abs(prof.weight(pair.a) - prof.weight(pair.b));
      }
      row.mean_abs_diff = abs_diff / static_cast<double>(profiles.size());
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<OvcDiffRow> ovc_difference_table(const std::vector<HeuristicProfile>& first,
                                             const std::vector<HeuristicProfile>& second) {
  std::vector<OvcRow> a = ovc_table(first);
  std::vector<OvcRow> b = ovc_table(second);
  std::vector<OvcDiffRow> rows;
  rows.reserve(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    OvcDiffRow row;
    row.phase = a[i].phase;
    row.code_a = a[i].code_a;
    row.code_b = a[i].code_b;
    row.ovc_ratio_diff = a[i].mean_consistency - b[i].mean_consistency;
    row.raw_weight_diff = a[i].mean_abs_diff - b[i].mean_abs_diff;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<CorrelationRow> feature_rating_correlations(
    const std::vector<FeatureRatings>& ratings,
    const std::vector<std::pair<std::string, std::vector<PlayerStanding>>>& leaderboards) {
  std::map<std::string, const FeatureRatings*> by_id;
  for (const FeatureRatings& r : ratings) by_id[r.persona_id] = &r;

  std::vector<CorrelationRow> rows;
  for (const auto& [label, standings] : leaderboards) {
    std::vector<const FeatureRatings*> joined;
    std::vector<double> mu;
    joined.reserve(standings.size());
    for (const PlayerStanding& s : standings) {
      auto it = by_id.find(s.persona_id);
      if (it == by_id.end()) {
        fail(ErrorKind::Validation,
             "leaderboard '" + label + "' player '" + s.persona_id + "' has no rating row");
      }
      joined.push_back(it->second);
      mu.push_back(s.rating.mu);
    }
    for (Feature f : all_features()) {
      std::vector<double> fv;
      fv.reserve(joined.size());
      for (const FeatureRatings* r : joined) fv.push_back(r->value(f));
      CorrelationRow row;
      row.label = label;
      row.feature = f;
      row.result = spearman(fv, mu);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace {

std::string fmt(double v, const char* spec = "%.4f") {
  if (!(v == v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

void pad_to(std::string& s, size_t width) {
  while (s.size() < width) s.push_back(' ');
}

std::string table(const std::vector<std::vector<std::string>>& cells) {
  std::vector<size_t> widths;
  for (const auto& row : cells) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : cells) {
    std::string line;
    for (size_t c = 0; c < row.size(); ++c) {
      std::string cell = row[c];
      if (c + 1 < row.size()) {
        pad_to(cell, widths[c] + 2);
      }
      line += cell;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << "\n";
  }
  return out.str();
}

}  // namespace

std::string correlation_report_text(const std::vector<CorrelationRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"leaderboard", "feature", "n", "rho", "p", "sig"});
  for (const CorrelationRow& row : rows) {
    cells.push_back({row.label, feature_name(row.feature), std::to_string(row.result.n),
                     fmt(row.result.rho), fmt(row.result.p_value, "%.6f"),
                     row.result.defined ? significance_stars(row.result.p_value) : "undefined"});
  }
  return table(cells);
}

Json correlation_report_json(const std::vector<CorrelationRow>& rows) {
  Json arr = Json::array();
  for (const CorrelationRow& row : rows) {
    arr.push_back(Json{{"leaderboard", row.label},
                       {"feature", feature_name(row.feature)},
                       {"n", row.result.n},
                       {"rho", row.result.defined ? Json(row.result.rho) : Json()},
                       {"p", row.result.defined ? Json(row.result.p_value) : Json()},
                       {"defined", row.result.defined},
                       {"stars", row.result.defined ? significance_stars(row.result.p_value)
                                                    : std::string()}});
  }
  return arr;
}

std::string ovc_table_text(const std::vector<OvcRow>& rows, const std::string& title) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"phase", "pair", "mean_ratio", "mean_abs_diff"});
  for (const OvcRow& row : rows) {
    cells.push_back({heur_phase_name(row.phase), row.code_a + "-" + row.code_b,
                     fmt(row.mean_consistency), fmt(row.mean_abs_diff)});
  }
  return title + "\n" + table(cells);
}

Json ovc_table_json(const std::vector<OvcRow>& rows) {
  Json arr = Json::array();
  for (const OvcRow& row : rows) {
    arr.push_back(Json{{"phase", heur_phase_name(row.phase)},
                       {"pair", row.code_a + "-" + row.code_b},
                       {"mean_ratio", row.mean_consistency},
                       {"mean_abs_diff", row.mean_abs_diff}});
  }
  return arr;
}

std::string ovc_difference_text(const std::vector<OvcDiffRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"phase", "pair", "ovc_ratio_diff", "raw_weight_diff"});
  for (const OvcDiffRow& row : rows) {
    cells.push_back({heur_phase_name(row.phase), row.code_a + "-" + row.code_b,
                     fmt(row.ovc_ratio_diff), fmt(row.raw_weight_diff)});
  }
  return table(cells);
}

Json ovc_difference_json(const std::vector<OvcDiffRow>& rows) {
  Json arr = Json::array();
  for (const OvcDiffRow& row : rows) {
    arr.push_back(Json{{"phase", heur_phase_name(row.phase)},
                       {"pair", row.code_a + "-" + row.code_b},
                       {"ovc_ratio_diff", row.ovc_ratio_diff},
                       {"raw_weight_diff", row.raw_weight_diff}});
  }
  return arr;
}

std::string leaderboard_extremes_text(const std::vector<PlayerStanding>& sorted_standings,
                                      const std::vector<Persona>& personas, size_t top_k) {
  std::map<std::string, const std::string*> desc;
  for (const Persona& p : personas) desc[p.persona_id] = &p.description;
  auto snippet = [&](const std::string& id) -> std::string {
    auto it = desc.find(id);
    if (it == desc.end()) return "";
    std::string s = *it->second;
    if (s.size() > 90) s = s.substr(0, 87) + "...";
    return s;
  };
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"rank", "persona_id", "mu", "sigma", "description"});
  size_t n = sorted_standings.size();
  size_t k = std::min(top_k, n);
  for (size_t i = 0; i < k; ++i) {
    const PlayerStanding& s = sorted_standings[i];
    cells.push_back({std::to_string(i + 1), s.persona_id, fmt(s.rating.mu, "%.2f"),
                     fmt(s.rating.sigma, "%.2f"), snippet(s.persona_id)});
  }
  if (n > 2 * k) cells.push_back({"...", "", "", "", ""});
  for (size_t i = n > k ? std::max(n - k, k) : n; i < n; ++i) {
    const PlayerStanding& s = sorted_standings[i];
    cells.push_back({std::to_string(i + 1), s.persona_id, fmt(s.rating.mu, "%.2f"),
                     fmt(s.rating.sigma, "%.2f"), snippet(s.persona_id)});
  }
  return table(cells);
}

}  // namespace peril
