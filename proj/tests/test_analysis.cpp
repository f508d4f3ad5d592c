#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "core/analysis.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"

using namespace peril;

namespace {

// Independent count-based ranking: rank_i = 1 + #smaller + (#equal - 1) / 2.
std::vector<double> oracle_ranks(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    int smaller = 0, equal = 0;
    for (double w : v) {
      if (w < v[i]) ++smaller;
      if (w == v[i]) ++equal;
    }
    out[i] = 1.0 + smaller + (equal - 1) / 2.0;
  }
  return out;
}

double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

HeuristicProfile with_pair(const std::string& id, HeuristicCode a, double wa, HeuristicCode b,
                           double wb) {
  HeuristicProfile p;
  p.persona_id = id;
  p.set_weight(a, wa);
  p.set_weight(b, wb);
  return p;
}

}  // namespace

TEST_CASE("average_ranks ties to the midpoint") {
  CHECK(average_ranks({10, 20, 20, 30}) == std::vector<double>{1, 2.5, 2.5, 4});
  CHECK(average_ranks({5, 5, 5}) == std::vector<double>{2, 2, 2});
  CHECK(average_ranks({7}) == std::vector<double>{1});
  CHECK(average_ranks({}) == std::vector<double>{});
  CHECK(average_ranks({3, 1, 2}) == std::vector<double>{3, 1, 2});
  // Cross-check the sort-based path against count-based ranking on noisy input.
  Rng rng(404);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<double> v;
    for (int i = 0; i < 12; ++i) v.push_back(static_cast<double>(rng.uniform_int(5)));
    CHECK(average_ranks(v) == oracle_ranks(v));
  }
}

TEST_CASE("spearman agrees with hand-computed rank correlations") {
  SpearmanResult r = spearman({1, 2, 3, 4, 5}, {2, 1, 4, 3, 5});
  CHECK(r.n == 5);
  CHECK(r.defined);
  CHECK(r.rho == doctest::Approx(0.8).epsilon(1e-12));
  // Sum of squared rank gaps <= 4 happens 8 ways out of 120; doubled for the
  // mirrored tail.
  CHECK(r.p_value == doctest::Approx(16.0 / 120.0).epsilon(1e-12));

  SpearmanResult perfect = spearman({1, 2, 3, 4}, {10, 20, 30, 40});
  CHECK(perfect.rho == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(perfect.p_value == doctest::Approx(2.0 / 24.0).epsilon(1e-12));

  SpearmanResult inverse = spearman({1, 2, 3, 4}, {8, 6, 4, 2});
  CHECK(inverse.rho == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(inverse.p_value == doctest::Approx(2.0 / 24.0).epsilon(1e-12));

  SpearmanResult flat = spearman({1, 2, 3}, {7, 7, 7});
  CHECK_FALSE(flat.defined);
  CHECK(std::isnan(flat.rho));
  CHECK(std::isnan(flat.p_value));

  CHECK_THROWS_AS(spearman({1, 2}, {1, 2, 3}), Error);
  CHECK_THROWS_AS(spearman({1, 2}, {3, 4}), Error);
}

TEST_CASE("spearman exact p matches a brute-force enumeration") {
  // Ties included: x holds two 1s.
  std::vector<double> x{3, 1, 4, 1, 5};
  std::vector<double> y{9, 2, 6, 5, 3};
  SpearmanResult r = spearman(x, y);

  std::vector<double> rx = oracle_ranks(x);
  double rho_obs = oracle_pearson(rx, oracle_ranks(y));
  CHECK(r.rho == doctest::Approx(rho_obs).epsilon(1e-12));

  std::vector<double> perm = y;
  std::sort(perm.begin(), perm.end());
  int total = 0, at_least = 0;
  do {
    double rho = oracle_pearson(rx, oracle_ranks(perm));
    ++total;
    if (std::abs(rho) >= std::abs(rho_obs) - 1e-12) ++at_least;
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(total == 120);
  CHECK(r.p_value == doctest::Approx(static_cast<double>(at_least) / total).epsilon(1e-12));
}

TEST_CASE("spearman above n = 8 switches to the t approximation") {
  std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9};
  SpearmanResult perfect = spearman(x, x);
  CHECK(perfect.rho == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(perfect.p_value == 0.0);

  std::vector<double> y{2, 1, 4, 3, 6, 5, 8, 7, 9};
  SpearmanResult r = spearman(x, y);
  CHECK(r.rho == doctest::Approx(1.0 - 6.0 * 8.0 / (9.0 * 80.0)).epsilon(1e-12));
  double dof = 7.0;
  double t = r.rho * std::sqrt(dof / (1.0 - r.rho * r.rho));
  CHECK(r.p_value == doctest::Approx(student_t_two_sided_p(t, dof)).epsilon(1e-12));
  CHECK(r.p_value < 0.001);

  // Ranks ignore monotone rescaling of either input.
  std::vector<double> cubed;
  for (double v : y) cubed.push_back(v * v * v);
  SpearmanResult same = spearman(x, cubed);
  CHECK(same.rho == r.rho);
  CHECK(same.p_value == r.p_value);
}

TEST_CASE("incomplete beta matches closed forms") {
  for (double x : {0.0, 0.125, 0.5, 0.9, 1.0}) {
    CHECK(regularized_incomplete_beta(1, 1, x) == doctest::Approx(x).epsilon(1e-12));
  }
  for (double x : {0.1, 0.3, 0.5, 0.7, 0.95}) {
    double want = 6 * x * x - 8 * x * x * x + 3 * x * x * x * x;
    CHECK(regularized_incomplete_beta(2, 3, x) == doctest::Approx(want).epsilon(1e-10));
  }
  // I_x(a, b) = 1 - I_(1-x)(b, a).
  Rng rng(11);
  for (int i = 0; i < 30; ++i) {
    double a = 0.5 + 5.0 * rng.next_double();
    double b = 0.5 + 5.0 * rng.next_double();
    double x = rng.next_double();
    double lhs = regularized_incomplete_beta(a, b, x);
    double rhs = 1.0 - regularized_incomplete_beta(b, a, 1.0 - x);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
  }
  CHECK(regularized_incomplete_beta(3, 4, -0.5) == 0.0);
  CHECK(regularized_incomplete_beta(3, 4, 1.5) == 1.0);
}

TEST_CASE("two-sided t tail matches Cauchy and dof-2 closed forms") {
  CHECK(student_t_two_sided_p(0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(student_t_two_sided_p(0.0, 17.0) == doctest::Approx(1.0).epsilon(1e-12));
  // dof 1 is Cauchy: p = 1 - (2 / pi) atan(t).
  for (double t : {0.3, 1.0, 2.5, 12.7062}) {
    double want = 1.0 - 2.0 / M_PI * std::atan(t);
    CHECK(student_t_two_sided_p(t, 1.0) == doctest::Approx(want).epsilon(1e-9));
  }
  CHECK(student_t_two_sided_p(12.7062, 1.0) == doctest::Approx(0.05).epsilon(1e-4));
  // dof 2: p = 1 - t / sqrt(t^2 + 2).
  for (double t : {0.5, std::sqrt(2.0), 4.0}) {
    double want = 1.0 - t / std::sqrt(t * t + 2.0);
    CHECK(student_t_two_sided_p(t, 2.0) == doctest::Approx(want).epsilon(1e-9));
  }
  CHECK(student_t_two_sided_p(std::numeric_limits<double>::infinity(), 5.0) == 0.0);
  CHECK(student_t_two_sided_p(-3.0, 5.0) == student_t_two_sided_p(3.0, 5.0));
}

TEST_CASE("significance stars honor the three thresholds") {
  CHECK(significance_stars(0.2) == "");
  CHECK(significance_stars(0.051) == "");
  CHECK(significance_stars(0.05) == "*");
  CHECK(significance_stars(0.049) == "*");
  CHECK(significance_stars(0.01) == "**");
  CHECK(significance_stars(0.0051) == "**");
  CHECK(significance_stars(0.005) == "***");
  CHECK(significance_stars(1e-9) == "***");
  CHECK(significance_stars(std::numeric_limits<double>::quiet_NaN()) == "");
}

TEST_CASE("each phase exposes its five mirrored pairs") {
  auto names = [](HeurPhase phase) {
    std::set<std::pair<std::string, std::string>> out;
    for (const OppositePair& p : opposite_pairs(phase)) {
      std::string a(code_name(p.a)), b(code_name(p.b));
      CHECK(code_phase(p.a) == phase);
      CHECK(code_phase(p.b) == phase);
      if (a > b) std::swap(a, b);
      out.insert({a, b});
    }
    return out;
  };
  std::set<std::pair<std::string, std::string>> deploy{
      {"EACL", "EACM"}, {"ETE", "ETN"}, {"PCL", "PCM"}, {"PTL", "PTM"}, {"PUL", "PUM"}};
  std::set<std::pair<std::string, std::string>> attack{
      {"ICD", "ICS"}, {"ONL", "ONM"}, {"PCL", "PCM"}, {"PTL", "PTM"}, {"PUL", "PUM"}};
  std::set<std::pair<std::string, std::string>> redeploy{
      {"CNL", "CNM"}, {"L", "M"}, {"OBCL", "OBCM"}, {"OBTL", "OBTM"}, {"OBUL", "OBUM"}};
  CHECK(names(HeurPhase::Deploy) == deploy);
  CHECK(names(HeurPhase::Attack) == attack);
  CHECK(names(HeurPhase::Redeploy) == redeploy);
}

TEST_CASE("pair consistency is the capped larger ratio") {
  CHECK(pair_consistency(10, 5) == 2.0);
  CHECK(pair_consistency(5, 10) == 2.0);
  CHECK(pair_consistency(7, 7) == 1.0);
  CHECK(pair_consistency(0, 0) == 1.0);
  CHECK(pair_consistency(100, 0) == 100.0);
  CHECK(pair_consistency(0, 3) == 100.0);
  CHECK(pair_consistency(90, 0.5) == 100.0);  // 180 capped
  CHECK_THROWS_AS(pair_consistency(-1, 5), Error);

  const OppositePair& ptm_ptl = [] {
    for (const OppositePair& p : opposite_pairs(HeurPhase::Deploy)) {
      if (std::string(code_name(p.a)) == "PTM") return p;
    }
    FAIL("PTM pair missing");
    return opposite_pairs(HeurPhase::Deploy)[0];
  }();
  std::vector<HeuristicProfile> profiles{
      with_pair("u", ptm_ptl.a, 10, ptm_ptl.b, 5),
      with_pair("v", ptm_ptl.a, 5, ptm_ptl.b, 5),
  };
  CHECK(opposite_value_consistency(profiles, ptm_ptl) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK_THROWS_AS(opposite_value_consistency({}, ptm_ptl), Error);
}

TEST_CASE("the consistency table covers fifteen pairs") {
  HeuristicProfile plain;
  plain.persona_id = "plain";
  std::vector<OvcRow> rows = ovc_table({plain});
  REQUIRE(rows.size() == 15);
  for (size_t i = 0; i < 5; ++i) CHECK(rows[i].phase == HeurPhase::Deploy);
  for (size_t i = 5; i < 10; ++i) CHECK(rows[i].phase == HeurPhase::Attack);
  for (size_t i = 10; i < 15; ++i) CHECK(rows[i].phase == HeurPhase::Redeploy);
  // Defaults sit at 5 everywhere: ratio 1, gap 0.
  for (const OvcRow& row : rows) {
    CHECK(row.mean_consistency == 1.0);
    CHECK(row.mean_abs_diff == 0.0);
  }

  HeuristicProfile skewed;
  skewed.persona_id = "skewed";
  skewed.set_weight(*find_code(HeurPhase::Deploy, "PTM"), 20.0);
  skewed.set_weight(*find_code(HeurPhase::Deploy, "PTL"), 10.0);
  std::vector<OvcRow> rows2 = ovc_table({skewed});
  bool found = false;
  for (const OvcRow& row : rows2) {
    if (row.phase == HeurPhase::Deploy && row.code_a == "PTM" && row.code_b == "PTL") {
      found = true;
      CHECK(row.mean_consistency == 2.0);
      CHECK(row.mean_abs_diff == 10.0);
    }
  }
  CHECK(found);
}

TEST_CASE("difference table of a set against itself is zero") {
  HeuristicProfile a = with_pair("a", *find_code(HeurPhase::Attack, "ONM"), 60,
                                 *find_code(HeurPhase::Attack, "ONL"), 12);
  std::vector<HeuristicProfile> set{a};
  std::vector<OvcDiffRow> self = ovc_difference_table(set, set);
  REQUIRE(self.size() == 15);
  for (const OvcDiffRow& row : self) {
    CHECK(row.ovc_ratio_diff == 0.0);
    CHECK(row.raw_weight_diff == 0.0);
  }

  HeuristicProfile plain;
  plain.persona_id = "p";
  std::vector<OvcDiffRow> diff = ovc_difference_table(set, {plain});
  for (const OvcDiffRow& row : diff) {
    if (row.phase == HeurPhase::Attack && row.code_a == "ONM") {
      CHECK(row.ovc_ratio_diff == doctest::Approx(4.0).epsilon(1e-12));  // 5 - 1
      CHECK(row.raw_weight_diff == doctest::Approx(48.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("feature correlations join ratings to standings by persona id") {
  std::vector<FeatureRatings> ratings;
  std::vector<double> grid{-1.0, -0.5, 0.0, 0.5, 1.0, 0.0};
  for (int i = 0; i < 6; ++i) {
    FeatureRatings r;
    r.persona_id = "p" + std::to_string(i);
    r.set_value(Feature::StrategicThinker, grid[i]);
    r.set_value(Feature::RiskTaker, 0.5);
    ratings.push_back(r);
  }
  std::vector<PlayerStanding> standings;
  std::vector<double> mu{5, 10, 15, 20, 25, 15};
  for (int i = 0; i < 6; ++i) {
    PlayerStanding s;
    s.persona_id = "p" + std::to_string(i);
    s.rating.mu = mu[i];
    standings.push_back(s);
  }

  auto rows = feature_rating_correlations(ratings, {{"run01", standings}});
  REQUIRE(rows.size() == 5);
  for (const CorrelationRow& row : rows) CHECK(row.label == "run01");

  const CorrelationRow* strat = nullptr;
  const CorrelationRow* risk = nullptr;
  for (const CorrelationRow& row : rows) {
    if (row.feature == Feature::StrategicThinker) strat = &row;
    if (row.feature == Feature::RiskTaker) risk = &row;
  }
  REQUIRE(strat != nullptr);
  REQUIRE(risk != nullptr);
  // Ranks coincide exactly, ties and all, so rho is 1; two of 360 distinct
  // orderings reach magnitude 1.
  CHECK(strat->result.rho == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(strat->result.p_value == doctest::Approx(2.0 / 360.0).epsilon(1e-12));
  CHECK_FALSE(risk->result.defined);

  std::vector<PlayerStanding> orphan = standings;
  orphan[2].persona_id = "ghost";
  CHECK_THROWS_WITH_AS(feature_rating_correlations(ratings, {{"run01", orphan}}),
                       doctest::Contains("has no rating row"), Error);

  auto twice = feature_rating_correlations(ratings, {{"a", standings}, {"b", standings}});
  CHECK(twice.size() == 10);
  CHECK(twice[0].label == "a");
  CHECK(twice[5].label == "b");
}

TEST_CASE("report renderers emit aligned, labeled text") {
  std::vector<FeatureRatings> ratings;
  std::vector<double> grid{-1.0, -0.5, 0.0, 0.5, 1.0, 0.0};
  for (int i = 0; i < 6; ++i) {
    FeatureRatings r;
    r.persona_id = "p" + std::to_string(i);
    r.set_value(Feature::StrategicThinker, grid[i]);
    ratings.push_back(r);
  }
  std::vector<PlayerStanding> standings;
  std::vector<double> mus{5, 10, 15, 20, 25, 15};  // mu ranks tie where the grid ties
  for (int i = 0; i < 6; ++i) {
    PlayerStanding s;
    s.persona_id = "p" + std::to_string(i);
    s.rating.mu = mus[i];
    standings.push_back(s);
  }
  auto rows = feature_rating_correlations(ratings, {{"run01", standings}});
  std::string report = correlation_report_text(rows);
  CHECK(report.find("leaderboard") != std::string::npos);
  CHECK(report.find("strategicThinker") != std::string::npos);
  CHECK(report.find("undefined") != std::string::npos);  // constant features
  CHECK(report.back() == '\n');

  Json rj = correlation_report_json(rows);
  REQUIRE(rj.size() == 5);
  for (const Json& row : rj) {
    if (row["feature"] == "riskTaker") {
      CHECK(row["rho"].is_null());
      CHECK(row["defined"] == false);
      CHECK(row["stars"] == "");
    }
    if (row["feature"] == "strategicThinker") {
      CHECK(row["defined"] == true);
      CHECK(row["rho"].get<double>() > 0.99);
    }
  }

  HeuristicProfile plain;
  plain.persona_id = "x";
  std::string ovc = ovc_table_text(ovc_table({plain}), "direct profiles");
  CHECK(ovc.rfind("direct profiles\n", 0) == 0);
  CHECK(ovc.find("PTM-PTL") != std::string::npos);
  CHECK(ovc_table_json(ovc_table({plain})).size() == 15);

  std::string diff_text = ovc_difference_text(ovc_difference_table({plain}, {plain}));
  CHECK(diff_text.find("ovc_ratio_diff") != std::string::npos);
  CHECK(ovc_difference_json(ovc_difference_table({plain}, {plain})).size() == 15);
}

TEST_CASE("leaderboard extremes show both ends with descriptions") {
  std::vector<PlayerStanding> standings;
  std::vector<Persona> personas;
  for (int i = 0; i < 6; ++i) {
    PlayerStanding s;
    s.persona_id = "p" + std::to_string(i);
    s.rating.mu = 30.0 - i;
    s.rating.sigma = 1.5;
    standings.push_back(s);
    Persona p;
    p.persona_id = s.persona_id;
    p.description = "persona number " + std::to_string(i);
    personas.push_back(p);
  }
  personas.pop_back();  // drop p5's entry: its description cell renders blank
  std::string text = leaderboard_extremes_text(standings, personas, 2);
  CHECK(text.find("p0") != std::string::npos);
  CHECK(text.find("p1") != std::string::npos);
  CHECK(text.find("p4") != std::string::npos);
  CHECK(text.find("p5") != std::string::npos);
  CHECK(text.find("p2") == std::string::npos);  // middle elided
  CHECK(text.find("...") != std::string::npos);
  CHECK(text.find("persona number 0") != std::string::npos);

  // Long descriptions are clipped to ninety characters.
  personas.push_back(Persona{"p5", std::string(100, 'z')});
  std::string full = leaderboard_extremes_text(standings, personas, 2);
  CHECK(full.find(std::string(87, 'z') + "...") != std::string::npos);
  CHECK(full.find(std::string(91, 'z')) == std::string::npos);
}
