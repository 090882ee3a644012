#include "ocpls/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ocpls {

void ControllerConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("controller: alpha must lie in (0, 1)");
  if (!(gamma >= 0.0)) throw ConfigError("controller: gamma must be >= 0");
  if (!(lambda1 >= 0.0 && lambda1 <= 1.0)) throw ConfigError("controller: lambda1 must lie in [0, 1]");
  if (!(p_floor > 0.0 && p_floor <= 1.0)) throw ConfigError("controller: p_floor must lie in (0, 1]");
  if (t_max_batch < 1) throw ConfigError("controller: t_max_batch must be >= 1");
}

double FeedbackPolicy::probability(double log_volume, int n) const {
  if (n < 1) throw ConfigError("feedback policy: dimension must be >= 1");
  // Degenerate sets force feedback: an infinite set is maximally uncertain
  // and an empty set is a certain miss, so both offload with probability 1.
  // Any choice of p >= p_floor keeps the inverse-probability weighting
  // unbiased; p = 1 avoids amplified updates in the degenerate regimes.
  if (std::isinf(log_volume)) return 1.0;
  const double z = log_volume / n - theta;
  const double p = 1.0 / (1.0 + std::exp(-z));
  return std::clamp(p, p_floor, 1.0);
}

ThresholdController::ThresholdController(const ControllerConfig& cfg, bool delayed)
    : cfg_(cfg), delayed_(delayed), lambda_(cfg.lambda1) {
  cfg_.validate();
}

double ThresholdController::bound_lo() const {
  const double span = std::max(cfg_.alpha, 1.0 - cfg_.alpha);
  const double batch = delayed_ ? cfg_.t_max_batch : 1;
  return 0.0 - cfg_.gamma * batch * span / cfg_.p_floor;
}

double ThresholdController::bound_hi() const {
  const double span = std::max(cfg_.alpha, 1.0 - cfg_.alpha);
  const double batch = delayed_ ? cfg_.t_max_batch : 1;
  return 1.0 + cfg_.gamma * batch * span / cfg_.p_floor;
}

void ThresholdController::check_bounds() const {
  const double slack = 1e-12 * (1.0 + std::abs(lambda_));
  if (lambda_ < bound_lo() - slack || lambda_ > bound_hi() + slack) {
    throw NumericalError("threshold bound violated at round " + std::to_string(t_) +
                         ": lambda = " + std::to_string(lambda_));
  }
}

void ThresholdController::update_full(int err) {
  lambda_ -= cfg_.gamma * (err - cfg_.alpha);
  ++t_;
  check_bounds();
}

void ThresholdController::update_intermittent(int err, int obs, double p) {
  if (obs) {
    if (p < cfg_.p_floor) {
      throw ConfigError("intermittent update: p = " + std::to_string(p) +
                        " below p_floor = " + std::to_string(cfg_.p_floor));
    }
    lambda_ -= cfg_.gamma / p * (err - cfg_.alpha);
  }
  ++t_;
  check_bounds();
}

void ThresholdController::update_delayed(const std::vector<Arrival>& arrivals) {
  if (static_cast<int>(arrivals.size()) > cfg_.t_max_batch) {
    throw ConfigError("delayed update: batch of " + std::to_string(arrivals.size()) +
                      " exceeds t_max_batch = " + std::to_string(cfg_.t_max_batch));
  }
  for (const Arrival& a : arrivals) {
    if (a.p < cfg_.p_floor) {
      throw ConfigError("delayed update: p below p_floor");
    }
    lambda_ -= cfg_.gamma / a.p * (a.err - cfg_.alpha);
  }
  ++t_;
  check_bounds();
}

Decision decide_membership(const PlsPosterior& post, double lambda,
                           const Vector& x_star) {
  const bool covered = post.score(x_star) >= lambda;
  return Decision{covered, covered ? 0 : 1};
}

}  // namespace ocpls
