#pragma once

#include <utility>

namespace peril {

struct Rating {
  double mu = 25.0;
  double sigma = 25.0 / 3.0;

  // Conservative display value: the skill floor the system is ~99% sure of.
  double display() const { return mu - 3.0 * sigma; }
};

struct TrueSkillConfig {
  double mu0 = 25.0;
  double sigma0 = 25.0 / 3.0;
  double beta = 25.0 / 6.0;   // sigma0 / 2
  double tau = 25.0 / 300.0;  // sigma0 / 100
  // Draws never enter the update directly (margin stays 0); a drawn game is
  // rated as each participant independently losing to a synthetic opponent
  // sitting at the prior.
  double draw_probability = 0.0;
};

// Truncated-Gaussian mean correction v(t) = phi(t) / Phi(t) and the matching
// variance correction w(t) = v(t) * (v(t) + t). Exposed for oracle tests.
double v_exceeds(double t);
double w_exceeds(double t);

// Two-player win/loss update: dynamics tau is added into both variances, then
//   c^2 = 2 beta^2 + sigma_w^2 + sigma_l^2,  t = (mu_w - mu_l) / c
//   mu_w += sigma_w^2/c * v(t),   mu_l -= sigma_l^2/c * v(t)
//   sigma^2 *= 1 - sigma^2/c^2 * w(t)   (each side with its own sigma)
// Returns {winner', loser'}.
std::pair<Rating, Rating> update_two_player(const Rating& winner, const Rating& loser,
                                            const TrueSkillConfig& config);

// Draw handling: the player takes the loser's side of an update against a
// fresh (mu0, sigma0) opponent; the synthetic side is discarded.
Rating rate_draw_as_loss(const Rating& player, const TrueSkillConfig& config);

}  // namespace peril
