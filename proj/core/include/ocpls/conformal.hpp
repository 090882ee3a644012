#pragma once

#include <cstdint>
#include <vector>

#include "ocpls/common.hpp"
#include "ocpls/pls.hpp"

namespace ocpls {

struct ControllerConfig {
  double alpha = 0.1;     // target miscoverage
  double gamma = 0.05;    // step size
  double lambda1 = 0.95;  // initial threshold
  double p_floor = 0.01;  // minimum feedback probability
  int t_max_batch = 1;    // max feedback arrivals per round (delayed mode)

  void validate() const;
};

/// Sigmoid offloading policy: p = sigma(log|C| / n - theta), clamped to
/// [p_floor, 1]. Lower theta asks the cloud more often. Degenerate sets
/// (log-volume of either infinity) offload with probability 1.
struct FeedbackPolicy {
  double theta = -5.5;
  double p_floor = 0.01;

  double probability(double log_volume, int n) const;
};

/// One delayed-feedback arrival: the round's coverage error and the feedback
/// probability that was in force when the request was dispatched.
struct Arrival {
  int err;   // 0 or 1
  double p;  // probability used for the inverse-probability weight
};

/// Online conformal threshold state machine for super-level sets. The
/// threshold moves down on miscoverage and up on coverage; it is deliberately
/// not clamped to [0, 1], since out-of-range values encode the always-cover
/// and never-cover regimes that the telescoping analysis relies on.
///
/// Every update re-checks the threshold bound for the active mode and throws
/// NumericalError on violation.
class ThresholdController {
 public:
  explicit ThresholdController(const ControllerConfig& cfg, bool delayed = false);

  double lambda() const { return lambda_; }
  std::int64_t round() const { return t_; }
  const ControllerConfig& config() const { return cfg_; }

  /// Full feedback: lambda -= gamma * (err - alpha).
  void update_full(int err);

  /// Intermittent feedback with inverse-probability weighting:
  /// obs == 0 leaves lambda untouched; obs == 1 applies
  /// lambda -= gamma / p * (err - alpha). Requires p >= p_floor.
  void update_intermittent(int err, int obs, double p);

  /// Delayed feedback: one aggregated step over this round's arrivals.
  /// The batch must not exceed t_max_batch.
  void update_delayed(const std::vector<Arrival>& arrivals);

  /// Widest threshold interval the update rule can reach given p >= p_floor.
  double bound_lo() const;
  double bound_hi() const;

 private:
  void check_bounds() const;

  ControllerConfig cfg_;
  bool delayed_;
  double lambda_;
  std::int64_t t_ = 0;
};

/// Coverage decision for one round: covered iff score(x*) >= lambda.
struct Decision {
  bool covered;
  int err;  // 1 - covered
};

Decision decide_membership(const PlsPosterior& post, double lambda,
                           const Vector& x_star);

}  // namespace ocpls
