#pragma once

#include <cstdint>
#include <vector>

#include "ocpls/config.hpp"

namespace ocpls {

/// One row of the per-round log. err is the value the controller saw:
/// 0/1 when feedback was observed, -1 (unknown) otherwise.
struct RoundRecord {
  int run_id = 0;
  std::int64_t t = 0;
  int n = 0;
  int budget = 0;
  double lambda = 0.0;
  double log_volume = 0.0;
  double p = 0.0;
  int obs = 0;
  int covered = 0;
  int err = -1;
  double cum_coverage = 0.0;
  double cum_log_volume_mean = 0.0;  // mean over finite-volume rounds so far
  std::int64_t cum_feedback = 0;
};

/// Per-round metrics averaged over runs, plus the guarantee constants.
struct RunSummary {
  std::int64_t rounds = 0;
  int n_runs = 0;
  double alpha = 0.0;
  std::vector<double> mean_coverage;      // index t-1: mean cum coverage
  std::vector<double> mean_log_volume;    // mean running mean of finite log-volumes
  std::vector<double> mean_cum_feedback;  // mean cumulative feedback count

  double min_p = 1.0;           // realized min p_t across runs and rounds
  double final_coverage = 0.0;  // mean over runs at t = T
  double coverage_gap = 0.0;    // |final_coverage - (1 - alpha)|
  double se_final_coverage = 0.0;
  double bound_constant = 0.0;  // C of the applicable coverage guarantee
  double mean_feedback_ratio = 0.0;  // mean cum_feedback(T) / T
  std::int64_t infinite_set_rounds = 0;
};

/// Runs one seeded episode of the round protocol: generate the system, run
/// the budgeted solver, form the uncertainty set, sample offloading, consult
/// the oracle, update the threshold controller. Returns exactly T records.
std::vector<RoundRecord> run_episode(const ExperimentConfig& cfg, int run_id);

/// All episodes, optionally in parallel (cfg.parallel worker threads).
std::vector<std::vector<RoundRecord>> run_episodes(const ExperimentConfig& cfg);

RunSummary summarize(const ExperimentConfig& cfg,
                     const std::vector<std::vector<RoundRecord>>& episodes);

RunSummary run_experiment(const ExperimentConfig& cfg);

/// Coverage-guarantee constant C for the config's mode: (1+gamma)/gamma for
/// full feedback, 1/gamma + 1/p_bar intermittent, and
/// t_max - 1 + 1/gamma + t_max/p_bar with delays. p_bar is the realized
/// minimum feedback probability.
double guarantee_constant(const ExperimentConfig& cfg, double realized_min_p);

struct ThetaSweepPoint {
  double theta = 0.0;
  double feedback_ratio = 1.0;
  double coverage_gap = 1.0;
};

struct ThetaSweepResult {
  double best_theta = 0.0;
  std::vector<ThetaSweepPoint> grid;
};

/// Grid search for the offloading offset theta: among settings whose
/// short-horizon coverage gap stays within `gap_tol`, picks the one with the
/// lowest feedback ratio. Falls back to the smallest gap if none qualify.
ThetaSweepResult sweep_theta(const ExperimentConfig& base,
                             const std::vector<double>& grid,
                             std::int64_t sweep_rounds, int sweep_runs,
                             double gap_tol = 0.03);

}  // namespace ocpls
