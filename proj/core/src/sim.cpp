#include "ocpls/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <future>
#include <limits>
#include <string>

#include "ocpls/pls.hpp"

namespace ocpls {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct PendingFeedback {
  std::int64_t arrival;  // round whose end-of-round update consumes this
  Arrival payload;
};

}  // namespace

std::vector<RoundRecord> run_episode(const ExperimentConfig& cfg, int run_id) {
  cfg.validate();
  const std::uint64_t run_seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(run_id));

  GeneratorConfig gen = cfg.generator;
  gen.seed = derive_seed(run_seed, 0x67656e65);

  const bool delayed = cfg.delay.kind != DelayModel::Kind::none;
  ControllerConfig ctrl_cfg = cfg.controller;
  ctrl_cfg.t_max_batch = cfg.delay.t_max_batch;
  ThresholdController controller(ctrl_cfg, delayed);

  std::deque<PendingFeedback> pending;
  std::int64_t last_arrival = 0;  // in-order constraint: t + d_t nondecreasing
  std::int64_t batch_fill = -1;   // arrival round currently being filled
  int batch_count = 0;

  std::vector<RoundRecord> records;
  records.reserve(static_cast<std::size_t>(cfg.rounds));

  std::int64_t covered_sum = 0;
  std::int64_t feedback_sum = 0;
  std::int64_t finite_volume_rounds = 0;
  double finite_volume_sum = 0.0;

  const PriorSpec prior = cfg.prior();

  for (std::int64_t t = 1; t <= cfg.rounds; ++t) {
    try {
      LinearSystem sys = generate_system(gen, static_cast<std::uint64_t>(t));
      const int n = sys.dim();
      const int budget = cfg.schedule.budget_at(t, n);
      PlsPosterior post = pls_run(sys, budget, prior, cfg.jitter);

      double lambda;
      if (cfg.mode == Mode::pls_baseline) {
        lambda = pls_baseline_threshold(n, cfg.controller.alpha);
      } else {
        lambda = controller.lambda();
      }
      const double log_volume = set_log_volume(post, lambda);

      // Metrics always consult the oracle; obs gates only the controller.
      const Decision decision = decide_membership(post, lambda, sys.exact_solution());

      double p = 0.0;
      int obs = 0;
      int seen_err = -1;
      Rng round_rng(derive_seed(run_seed, 0x6f627300, static_cast<std::uint64_t>(t)));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const double obs_draw = unit(round_rng);

      switch (cfg.mode) {
        case Mode::pls_baseline:
          break;
        case Mode::ocp_pls_full_feedback:
          p = 1.0;
          obs = 1;
          seen_err = decision.err;
          controller.update_full(decision.err);
          break;
        case Mode::ocp_pls: {
          p = cfg.policy.probability(log_volume, n);
          obs = obs_draw < p ? 1 : 0;
          if (obs) seen_err = decision.err;
          if (!delayed) {
            controller.update_intermittent(decision.err, obs, p);
          } else {
            if (obs) {
              std::int64_t d = cfg.delay.kind == DelayModel::Kind::constant
                                   ? cfg.delay.delay
                                   : std::uniform_int_distribution<int>(0, cfg.delay.max_delay)(round_rng);
              std::int64_t arrival = std::max(t + d, last_arrival);
              if (arrival == batch_fill && batch_count >= cfg.delay.t_max_batch) {
                ++arrival;  // keep |T_t| within the batch bound
              }
              if (arrival != batch_fill) {
                batch_fill = arrival;
                batch_count = 0;
              }
              ++batch_count;
              last_arrival = arrival;
              pending.push_back({arrival, Arrival{decision.err, p}});
            }
            std::vector<Arrival> due;
            while (!pending.empty() && pending.front().arrival <= t) {
              due.push_back(pending.front().payload);
              pending.pop_front();
            }
            controller.update_delayed(due);
          }
          break;
        }
      }

      covered_sum += decision.covered ? 1 : 0;
      feedback_sum += obs;
      if (std::isfinite(log_volume)) {
        finite_volume_sum += log_volume;
        ++finite_volume_rounds;
      }

      RoundRecord rec;
      rec.run_id = run_id;
      rec.t = t;
      rec.n = n;
      rec.budget = post.iterations();
      rec.lambda = lambda;
      rec.log_volume = log_volume;
      rec.p = p;
      rec.obs = obs;
      rec.covered = decision.covered ? 1 : 0;
      rec.err = seen_err;
      rec.cum_coverage = static_cast<double>(covered_sum) / static_cast<double>(t);
      rec.cum_log_volume_mean = finite_volume_rounds > 0
                                    ? finite_volume_sum / finite_volume_rounds
                                    : -kInf;
      rec.cum_feedback = feedback_sum;
      records.push_back(rec);
    } catch (const NumericalError& e) {
      throw NumericalError("run " + std::to_string(run_id) + ", round " +
                           std::to_string(t) + ": " + e.what());
    }
  }
  return records;
}

std::vector<std::vector<RoundRecord>> run_episodes(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<RoundRecord>> episodes(static_cast<std::size_t>(cfg.n_runs));
  if (cfg.parallel <= 1 || cfg.n_runs == 1) {
    for (int r = 0; r < cfg.n_runs; ++r) episodes[static_cast<std::size_t>(r)] = run_episode(cfg, r);
    return episodes;
  }
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int r = next.fetch_add(1); r < cfg.n_runs; r = next.fetch_add(1)) {
      episodes[static_cast<std::size_t>(r)] = run_episode(cfg, r);
    }
  };
  std::vector<std::future<void>> pool;
  const int workers = std::min(cfg.parallel, cfg.n_runs);
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.push_back(std::async(std::launch::async, worker));
  for (auto& f : pool) f.get();
  return episodes;
}

double guarantee_constant(const ExperimentConfig& cfg, double realized_min_p) {
  const double gamma = cfg.controller.gamma;
  const double p_bar = std::max(realized_min_p, cfg.controller.p_floor);
  switch (cfg.mode) {
    case Mode::pls_baseline:
      return 0.0;
    case Mode::ocp_pls_full_feedback:
      return (1.0 + gamma) / gamma;
    case Mode::ocp_pls:
      if (cfg.delay.kind == DelayModel::Kind::none) {
        return 1.0 / gamma + 1.0 / p_bar;
      }
      return cfg.delay.t_max_batch - 1 + 1.0 / gamma + cfg.delay.t_max_batch / p_bar;
  }
  return 0.0;
}

RunSummary summarize(const ExperimentConfig& cfg,
                     const std::vector<std::vector<RoundRecord>>& episodes) {
  RunSummary s;
  s.rounds = cfg.rounds;
  s.n_runs = static_cast<int>(episodes.size());
  s.alpha = cfg.controller.alpha;
  const auto T = static_cast<std::size_t>(cfg.rounds);
  s.mean_coverage.assign(T, 0.0);
  s.mean_log_volume.assign(T, 0.0);
  s.mean_cum_feedback.assign(T, 0.0);

  for (const auto& ep : episodes) {
    if (ep.size() != T) throw NumericalError("summarize: episode length mismatch");
    for (std::size_t i = 0; i < T; ++i) {
      s.mean_coverage[i] += ep[i].cum_coverage;
      s.mean_log_volume[i] += ep[i].cum_log_volume_mean;
      s.mean_cum_feedback[i] += static_cast<double>(ep[i].cum_feedback);
      if (ep[i].p > 0.0) s.min_p = std::min(s.min_p, ep[i].p);
      if (std::isinf(ep[i].log_volume) && ep[i].log_volume > 0) ++s.infinite_set_rounds;
    }
  }
  const double runs = static_cast<double>(s.n_runs);
  for (std::size_t i = 0; i < T; ++i) {
    s.mean_coverage[i] /= runs;
    s.mean_log_volume[i] /= runs;
    s.mean_cum_feedback[i] /= runs;
  }
  s.final_coverage = s.mean_coverage[T - 1];
  s.coverage_gap = std::abs(s.final_coverage - (1.0 - s.alpha));
  double var = 0.0;
  for (const auto& ep : episodes) {
    const double d = ep[T - 1].cum_coverage - s.final_coverage;
    var += d * d;
  }
  s.se_final_coverage = s.n_runs > 1 ? std::sqrt(var / (runs * (runs - 1.0))) : 0.0;
  s.bound_constant = guarantee_constant(cfg, s.min_p);
  s.mean_feedback_ratio = s.mean_cum_feedback[T - 1] / static_cast<double>(cfg.rounds);
  return s;
}

RunSummary run_experiment(const ExperimentConfig& cfg) {
  return summarize(cfg, run_episodes(cfg));
}

ThetaSweepResult sweep_theta(const ExperimentConfig& base, const std::vector<double>& grid,
                             std::int64_t sweep_rounds, int sweep_runs, double gap_tol) {
  if (grid.empty()) throw ConfigError("sweep_theta: empty grid");
  ExperimentConfig cfg = base;
  cfg.mode = Mode::ocp_pls;
  cfg.rounds = sweep_rounds;
  cfg.n_runs = sweep_runs;
  cfg.delay = DelayModel{};
  cfg.controller.t_max_batch = 1;

  ThetaSweepResult result;
  for (double theta : grid) {
    cfg.policy.theta = theta;
    const RunSummary s = run_experiment(cfg);
    result.grid.push_back({theta, s.mean_feedback_ratio, s.coverage_gap});
  }
  const ThetaSweepPoint* best = nullptr;
  for (const auto& p : result.grid) {
    if (p.coverage_gap > gap_tol) continue;
    if (!best || p.feedback_ratio < best->feedback_ratio) best = &p;
  }
  if (!best) {
    for (const auto& p : result.grid) {
      if (!best || p.coverage_gap < best->coverage_gap) best = &p;
    }
  }
  result.best_theta = best->theta;
  return result;
}

}  // namespace ocpls
