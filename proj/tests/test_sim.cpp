#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ocpls/report.hpp"
#include "ocpls/sim.hpp"

using namespace ocpls;

namespace {

ExperimentConfig small_cfg(Mode mode, std::int64_t T = 200, int runs = 2) {
  ExperimentConfig cfg;
  cfg.mode = mode;
  cfg.rounds = T;
  cfg.n_runs = runs;
  cfg.master_seed = 2024;
  cfg.generator.n_min = 25;
  cfg.generator.n_max = 40;
  return cfg;
}

}  // namespace

TEST_CASE("budget_at: constant, piecewise, explicit") {
  BudgetSchedule s;
  s.kind = BudgetSchedule::Kind::constant_fraction;
  s.fraction = 0.1;
  CHECK(s.budget_at(1, 800) == 80);
  s.fraction = 1.0;
  CHECK(s.budget_at(1, 40) == 40);
  s.fraction = 0.0001;
  CHECK(s.budget_at(1, 40) == 1);  // clamped below

  BudgetSchedule pw;
  pw.kind = BudgetSchedule::Kind::piecewise_fraction;
  pw.pieces = {{1, 1500, 0.1}, {1500, 3500, 0.05}, {3500, 5001, 0.15}};
  CHECK(pw.budget_at(2000, 600) == 30);
  CHECK(pw.budget_at(1499, 600) == 60);
  CHECK(pw.budget_at(1500, 600) == 30);  // inclusive-left boundary
  CHECK(pw.budget_at(3500, 600) == 90);
  CHECK_THROWS_AS(pw.budget_at(5001, 600), ConfigError);

  BudgetSchedule ex;
  ex.kind = BudgetSchedule::Kind::explicit_list;
  ex.budgets = {5, 7, 200};
  CHECK(ex.budget_at(2, 50) == 7);
  CHECK(ex.budget_at(3, 50) == 50);  // clamped at n
  CHECK_THROWS_AS(ex.budget_at(4, 50), ConfigError);
}

TEST_CASE("episodes are deterministic given the seed") {
  const ExperimentConfig cfg = small_cfg(Mode::ocp_pls, 60, 1);
  const auto a = run_episode(cfg, 0);
  const auto b = run_episode(cfg, 0);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(round_csv_row(a[i]) == round_csv_row(b[i]));
  }
  // Different run ids give different streams.
  const auto c = run_episode(cfg, 1);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].n != c[i].n || a[i].covered != c[i].covered) any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("episode produces exactly T records with consistent running stats") {
  const ExperimentConfig cfg = small_cfg(Mode::ocp_pls, 150, 1);
  const auto ep = run_episode(cfg, 0);
  REQUIRE(ep.size() == 150);
  std::int64_t covered = 0, fed = 0;
  for (std::size_t i = 0; i < ep.size(); ++i) {
    const auto& r = ep[i];
    CHECK(r.t == static_cast<std::int64_t>(i + 1));
    covered += r.covered;
    fed += r.obs;
    CHECK(r.cum_feedback == fed);
    CHECK(r.cum_coverage == doctest::Approx(static_cast<double>(covered) / r.t));
    CHECK(r.budget >= 1);
    CHECK(r.budget <= r.n);
  }
}

TEST_CASE("rounds without feedback never move the threshold") {
  for (auto delay_kind : {DelayModel::Kind::none, DelayModel::Kind::constant}) {
    ExperimentConfig cfg = small_cfg(Mode::ocp_pls, 300, 1);
    cfg.delay.kind = delay_kind;
    cfg.delay.delay = 2;
    cfg.delay.t_max_batch = delay_kind == DelayModel::Kind::none ? 1 : 3;
    const auto ep = run_episode(cfg, 0);
    if (delay_kind == DelayModel::Kind::none) {
      for (std::size_t i = 0; i + 1 < ep.size(); ++i) {
        if (ep[i].obs == 0) CHECK(ep[i + 1].lambda == ep[i].lambda);
      }
    } else {
      // With constant delay d, an arrival at round t comes from round t - d.
      for (std::size_t i = 0; i + 1 < ep.size(); ++i) {
        const std::int64_t source = ep[i].t - cfg.delay.delay;
        const bool arrival = source >= 1 && ep[static_cast<std::size_t>(source - 1)].obs == 1;
        if (!arrival) CHECK(ep[i + 1].lambda == ep[i].lambda);
      }
    }
  }
}

TEST_CASE("full-feedback mode observes every round") {
  const auto ep = run_episode(small_cfg(Mode::ocp_pls_full_feedback, 80, 1), 0);
  for (const auto& r : ep) {
    CHECK(r.obs == 1);
    CHECK(r.p == 1.0);
    CHECK(r.err == 1 - r.covered);
  }
  CHECK(ep.back().cum_feedback == 80);
}

TEST_CASE("baseline mode always covers and never offloads") {
  const auto ep = run_episode(small_cfg(Mode::pls_baseline, 100, 1), 0);
  for (const auto& r : ep) {
    CHECK(r.covered == 1);
    CHECK(r.obs == 0);
    CHECK(r.err == -1);
  }
  CHECK(ep.back().cum_coverage == 1.0);
}

TEST_CASE("raising theta lowers the offloading probability and feedback") {
  ExperimentConfig lo = small_cfg(Mode::ocp_pls, 300, 3);
  ExperimentConfig hi = lo;
  hi.policy.theta = lo.policy.theta + 1.0;

  const auto eps_lo = run_episodes(lo);
  const auto eps_hi = run_episodes(hi);
  double p1_lo = 0.0, p1_hi = 0.0, fed_lo = 0.0, fed_hi = 0.0;
  for (int r = 0; r < 3; ++r) {
    p1_lo += eps_lo[r][0].p;
    p1_hi += eps_hi[r][0].p;
    fed_lo += static_cast<double>(eps_lo[r].back().cum_feedback);
    fed_hi += static_cast<double>(eps_hi[r].back().cum_feedback);
    // Identical seeds: round 1 sees the same system and volume.
    CHECK(eps_lo[r][0].log_volume == eps_hi[r][0].log_volume);
    CHECK(eps_hi[r][0].p < eps_lo[r][0].p);
  }
  CHECK(p1_hi < p1_lo);
  CHECK(fed_hi <= fed_lo);  // trend over the run
}

TEST_CASE("summary aggregates runs and reports guarantee constants") {
  const ExperimentConfig cfg = small_cfg(Mode::ocp_pls, 120, 3);
  const auto episodes = run_episodes(cfg);
  const RunSummary s = summarize(cfg, episodes);
  CHECK(s.n_runs == 3);
  CHECK(s.mean_coverage.size() == 120);
  double cov = 0.0;
  for (const auto& ep : episodes) cov += ep.back().cum_coverage;
  CHECK(s.final_coverage == doctest::Approx(cov / 3.0));
  CHECK(s.bound_constant ==
        doctest::Approx(1.0 / cfg.controller.gamma + 1.0 / std::max(s.min_p, 0.01)));

  ExperimentConfig full = cfg;
  full.mode = Mode::ocp_pls_full_feedback;
  const RunSummary fs = run_experiment(full);
  CHECK(fs.bound_constant == doctest::Approx((1.0 + 0.05) / 0.05));
  CHECK(fs.mean_feedback_ratio == 1.0);
}

TEST_CASE("single run summary equals the episode metrics") {
  ExperimentConfig cfg = small_cfg(Mode::ocp_pls, 90, 1);
  const auto ep = run_episode(cfg, 0);
  const RunSummary s = summarize(cfg, {ep});
  CHECK(s.final_coverage == ep.back().cum_coverage);
  CHECK(s.mean_cum_feedback.back() == static_cast<double>(ep.back().cum_feedback));
  CHECK(s.mean_log_volume.back() == ep.back().cum_log_volume_mean);
}

TEST_CASE("intermittent feedback count stays below full feedback") {
  ExperimentConfig cfg = small_cfg(Mode::ocp_pls, 400, 2);
  cfg.policy.theta = -2.0;  // desk-scale volumes: sub-unit offloading probability
  const RunSummary ocp = run_experiment(cfg);
  ExperimentConfig full = cfg;
  full.mode = Mode::ocp_pls_full_feedback;
  const RunSummary fs = run_experiment(full);
  CHECK(ocp.mean_cum_feedback.back() < fs.mean_cum_feedback.back());
  CHECK(fs.mean_cum_feedback.back() == 400.0);
}

TEST_CASE("delayed episodes respect ordering and batch limits") {
  ExperimentConfig cfg = small_cfg(Mode::ocp_pls, 400, 1);
  cfg.delay.kind = DelayModel::Kind::random_bounded;
  cfg.delay.max_delay = 4;
  cfg.delay.t_max_batch = 2;
  // Bound checks inside the controller throw on violation; a clean run plus
  // record count is the assertion here.
  const auto ep = run_episode(cfg, 0);
  CHECK(ep.size() == 400);
}

TEST_CASE("delayed mode with d = 0 matches the intermittent trajectory") {
  ExperimentConfig inter = small_cfg(Mode::ocp_pls, 250, 1);
  ExperimentConfig delayed = inter;
  delayed.delay.kind = DelayModel::Kind::constant;
  delayed.delay.delay = 0;
  delayed.delay.t_max_batch = 1;
  const auto a = run_episode(inter, 0);
  const auto b = run_episode(delayed, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].lambda == b[i].lambda);
    CHECK(a[i].obs == b[i].obs);
    CHECK(a[i].covered == b[i].covered);
  }
}

TEST_CASE("theta sweep picks a feasible low-feedback setting") {
  ExperimentConfig cfg = small_cfg(Mode::ocp_pls, 150, 2);
  const ThetaSweepResult sweep = sweep_theta(cfg, {-5.5, -3.0, -1.0}, 150, 2, 0.05);
  CHECK(sweep.grid.size() == 3);
  bool found = false;
  for (const auto& p : sweep.grid) {
    if (p.theta == sweep.best_theta) found = true;
  }
  CHECK(found);
}
