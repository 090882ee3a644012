#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ocpls/config.hpp"

using namespace ocpls;
using nlohmann::json;

TEST_CASE("minimal config gets the documented defaults") {
  const auto cfg = config_from_json(json{{"mode", "ocp-pls"}, {"T", 100}});
  CHECK(cfg.mode == Mode::ocp_pls);
  CHECK(cfg.rounds == 100);
  CHECK(cfg.controller.alpha == 0.1);
  CHECK(cfg.controller.gamma == 0.05);
  CHECK(cfg.controller.lambda1 == 0.95);
  CHECK(cfg.controller.p_floor == 0.01);
  CHECK(cfg.policy.theta == -5.5);
  CHECK(cfg.jitter == 1e-6);
  CHECK(cfg.generator.n_min == 50);
  CHECK(cfg.generator.n_max == 100);
  CHECK(cfg.schedule.kind == BudgetSchedule::Kind::constant_fraction);
  CHECK(cfg.schedule.fraction == 0.1);
}

TEST_CASE("validation errors name the field") {
  CHECK_THROWS_WITH_AS(config_from_json(json{{"controller", {{"alpha", 1.5}}}}),
                       doctest::Contains("alpha"), ConfigError);
  CHECK_THROWS_WITH_AS(config_from_json(json{{"T", 0}}), doctest::Contains("T"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(config_from_json(json{{"generator", {{"n_min", 0}}}}),
                       doctest::Contains("n_min"), ConfigError);
}

TEST_CASE("unknown keys are rejected") {
  CHECK_THROWS_WITH_AS(config_from_json(json{{"bogus", 1}}), doctest::Contains("bogus"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(config_from_json(json{{"controller", {{"beta", 1}}}}),
                       doctest::Contains("controller.beta"), ConfigError);
}

TEST_CASE("delays require ocp-pls mode") {
  json j{{"mode", "pls-baseline"},
         {"delay", {{"kind", "constant"}, {"d", 2}, {"t_max_batch", 2}}}};
  CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("delay"), ConfigError);
  j["mode"] = "ocp-pls";
  const auto cfg = config_from_json(j);
  CHECK(cfg.delay.kind == DelayModel::Kind::constant);
  CHECK(cfg.controller.t_max_batch == 2);
}

TEST_CASE("round-trip: parse(serialize(cfg)) == cfg for random valid configs") {
  std::mt19937_64 rng(42);
  auto unit = [&]() { return std::uniform_real_distribution<double>()(rng); };
  for (int trial = 0; trial < 200; ++trial) {
    ExperimentConfig cfg;
    cfg.mode = static_cast<Mode>(rng() % 3);
    cfg.rounds = 1 + static_cast<std::int64_t>(rng() % 5000);
    cfg.n_runs = 1 + static_cast<int>(rng() % 20);
    cfg.master_seed = rng();
    cfg.parallel = 1 + static_cast<int>(rng() % 4);
    cfg.generator.n_min = 1 + static_cast<int>(rng() % 50);
    cfg.generator.n_max = cfg.generator.n_min + static_cast<int>(rng() % 50);
    cfg.generator.gamma_shape = 0.5 + 20.0 * unit();
    cfg.generator.gamma_scale = 0.1 + 5.0 * unit();
    cfg.prior_kind = rng() % 2 ? PriorCov::identity : PriorCov::scaled_identity;
    cfg.prior_scale = 0.1 + 10.0 * unit();
    cfg.jitter = 1e-8 + 1e-4 * unit();
    cfg.controller.alpha = 0.01 + 0.9 * unit();
    cfg.controller.gamma = 0.2 * unit();
    cfg.controller.lambda1 = unit();
    cfg.controller.p_floor = 0.01 + 0.4 * unit();
    cfg.policy.theta = -10.0 + 20.0 * unit();
    cfg.policy.p_floor = cfg.controller.p_floor + 0.1 * unit();
    switch (rng() % 3) {
      case 0:
        cfg.schedule.kind = BudgetSchedule::Kind::constant_fraction;
        cfg.schedule.fraction = 0.05 + unit();
        break;
      case 1: {
        cfg.schedule.kind = BudgetSchedule::Kind::piecewise_fraction;
        const std::int64_t mid = 1 + cfg.rounds / 2;
        cfg.schedule.pieces = {{1, mid, 0.1}, {mid, cfg.rounds + 1, 0.2}};
        break;
      }
      case 2:
        cfg.schedule.kind = BudgetSchedule::Kind::explicit_list;
        cfg.schedule.budgets.assign(static_cast<std::size_t>(cfg.rounds), 3);
        break;
    }
    if (cfg.mode == Mode::ocp_pls && rng() % 2) {
      cfg.delay.kind = rng() % 2 ? DelayModel::Kind::constant : DelayModel::Kind::random_bounded;
      cfg.delay.delay = static_cast<int>(rng() % 5);
      cfg.delay.max_delay = static_cast<int>(rng() % 5);
      cfg.delay.t_max_batch = 1 + static_cast<int>(rng() % 3);
    }
    cfg.controller.t_max_batch = cfg.delay.t_max_batch;
    cfg.validate();

    const ExperimentConfig back = config_from_json(config_to_json(cfg));
    CHECK(config_to_json(back) == config_to_json(cfg));
  }
}

TEST_CASE("overrides follow dotted paths and parse JSON values") {
  json j{{"mode", "ocp-pls"}, {"T", 100}};
  apply_override(j, "T=10");
  apply_override(j, "controller.alpha=0.2");
  apply_override(j, "mode=pls-baseline");
  const auto cfg = config_from_json(j);
  CHECK(cfg.rounds == 10);
  CHECK(cfg.controller.alpha == 0.2);
  CHECK(cfg.mode == Mode::pls_baseline);
  CHECK_THROWS_AS(apply_override(j, "no-equals"), ConfigError);
}

TEST_CASE("parse_config reports missing files and parse errors") {
  CHECK_THROWS_AS(parse_config("/nonexistent/x.json"), IoError);
}
