#include "core/trueskill.hpp"

#include <cmath>

namespace peril {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

}  // namespace

double v_exceeds(double t) {
  // Both pdf and cdf stay normal doubles down to t ~ -37; past that the ratio
  // is taken from the Mills-ratio series 1/v ~ (1/x)(1 - 1/x^2 + 3/x^4), x=-t.
  if (t < -34.0) {
    double x = -t;
    return x + 1.0 / x - 2.0 / (x * x * x);
  }
  return normal_pdf(t) / normal_cdf(t);
}

double w_exceeds(double t) {
  double v = v_exceeds(t);
  return v * (v + t);
}

std::pair<Rating, Rating> update_two_player(const Rating& winner, const Rating& loser,
                                            const TrueSkillConfig& config) {
  double var_w = winner.sigma * winner.sigma + config.tau * config.tau;
  double var_l = loser.sigma * loser.sigma + config.tau * config.tau;
  double c2 = 2.0 * config.beta * config.beta + var_w + var_l;
  double c = std::sqrt(c2);
  double t = (winner.mu - loser.mu) / c;
  double v = v_exceeds(t);
  double w = w_exceeds(t);

  Rating new_w, new_l;
  new_w.mu = winner.mu + var_w / c * v;
  new_l.mu = loser.mu - var_l / c * v;
  new_w.sigma = std::sqrt(var_w * (1.0 - var_w / c2 * w));
  new_l.sigma = std::sqrt(var_l * (1.0 - var_l / c2 * w));
  return {new_w, new_l};
}

Rating rate_draw_as_loss(const Rating& player, const TrueSkillConfig& config) {
  Rating synthetic{config.mu0, config.sigma0};
  return update_two_player(synthetic, player, config).second;
}

}  // namespace peril
