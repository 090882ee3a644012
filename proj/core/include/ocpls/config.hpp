#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "ocpls/common.hpp"
#include "ocpls/conformal.hpp"
#include "ocpls/problems.hpp"

namespace ocpls {

enum class Mode { pls_baseline, ocp_pls, ocp_pls_full_feedback };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& s);

/// Per-round solver iteration budget. Fractions are applied to the round's
/// dimension as clamp(round(f * n), 1, n); piecewise ranges are
/// inclusive-left, [from, to).
struct BudgetSchedule {
  enum class Kind { constant_fraction, piecewise_fraction, explicit_list };
  struct Piece {
    std::int64_t from = 1;
    std::int64_t to = 0;
    double fraction = 0.1;
  };

  Kind kind = Kind::constant_fraction;
  double fraction = 0.1;
  std::vector<Piece> pieces;
  std::vector<int> budgets;  // explicit_list: budgets[t-1]

  int budget_at(std::int64_t t, int n) const;
  void validate() const;
};

struct DelayModel {
  enum class Kind { none, constant, random_bounded };

  Kind kind = Kind::none;
  int delay = 0;       // constant
  int max_delay = 0;   // random_bounded: d ~ U{0..max_delay}, then clipped in-order
  int t_max_batch = 1;

  void validate() const;
};

struct ExperimentConfig {
  Mode mode = Mode::ocp_pls;
  std::int64_t rounds = 2000;
  int n_runs = 10;
  std::uint64_t master_seed = 1;
  int parallel = 1;
  std::string out_dir;

  GeneratorConfig generator;
  PriorCov prior_kind = PriorCov::identity;
  double prior_scale = 1.0;
  double jitter = 1e-6;
  ControllerConfig controller;
  FeedbackPolicy policy;
  BudgetSchedule schedule;
  DelayModel delay;

  PriorSpec prior() const;
  void validate() const;
};

/// Reads and validates a JSON config file; unknown keys are rejected and
/// defaults are filled for absent ones. Throws ConfigError / IoError.
ExperimentConfig parse_config(const std::string& path);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Applies one "dotted.path=value" override to a config JSON object. The
/// value is parsed as JSON when possible, otherwise taken as a string.
void apply_override(nlohmann::json& j, const std::string& key_eq_value);

}  // namespace ocpls
