#include "ocpls/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace ocpls {

using nlohmann::json;

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::pls_baseline: return "pls-baseline";
    case Mode::ocp_pls: return "ocp-pls";
    case Mode::ocp_pls_full_feedback: return "ocp-pls-full-feedback";
  }
  throw ConfigError("unknown mode");
}

Mode mode_from_string(const std::string& s) {
  if (s == "pls-baseline") return Mode::pls_baseline;
  if (s == "ocp-pls") return Mode::ocp_pls;
  if (s == "ocp-pls-full-feedback") return Mode::ocp_pls_full_feedback;
  throw ConfigError("unknown mode '" + s + "'");
}

int BudgetSchedule::budget_at(std::int64_t t, int n) const {
  auto from_fraction = [n](double f) {
    return std::clamp(static_cast<int>(std::lround(f * n)), 1, n);
  };
  switch (kind) {
    case Kind::constant_fraction:
      return from_fraction(fraction);
    case Kind::piecewise_fraction:
      for (const Piece& p : pieces) {
        if (t >= p.from && t < p.to) return from_fraction(p.fraction);
      }
      throw ConfigError("schedule: round " + std::to_string(t) +
                        " outside all piecewise ranges");
    case Kind::explicit_list:
      if (t < 1 || t > static_cast<std::int64_t>(budgets.size())) {
        throw ConfigError("schedule: round " + std::to_string(t) +
                          " outside explicit budget list");
      }
      return std::clamp(budgets[static_cast<std::size_t>(t - 1)], 1, n);
  }
  throw ConfigError("schedule: unknown kind");
}

void BudgetSchedule::validate() const {
  switch (kind) {
    case Kind::constant_fraction:
      if (!(fraction > 0.0)) throw ConfigError("schedule: fraction must be > 0");
      break;
    case Kind::piecewise_fraction:
      if (pieces.empty()) throw ConfigError("schedule: piecewise needs pieces");
      for (const Piece& p : pieces) {
        if (!(p.fraction > 0.0)) throw ConfigError("schedule: fraction must be > 0");
        if (p.to <= p.from) throw ConfigError("schedule: piece range must satisfy from < to");
      }
      break;
    case Kind::explicit_list:
      if (budgets.empty()) throw ConfigError("schedule: explicit list is empty");
      for (int b : budgets) {
        if (b < 1) throw ConfigError("schedule: explicit budgets must be >= 1");
      }
      break;
  }
}

void DelayModel::validate() const {
  if (delay < 0 || max_delay < 0) throw ConfigError("delay: delays must be >= 0");
  if (t_max_batch < 1) throw ConfigError("delay: t_max_batch must be >= 1");
}

PriorSpec ExperimentConfig::prior() const {
  PriorSpec p;
  p.kind = prior_kind;
  p.scale = prior_scale;
  return p;
}

void ExperimentConfig::validate() const {
  if (rounds < 1) throw ConfigError("config: T must be >= 1");
  if (n_runs < 1) throw ConfigError("config: runs must be >= 1");
  if (parallel < 1) throw ConfigError("config: parallel must be >= 1");
  if (jitter < 0.0) throw ConfigError("config: jitter must be >= 0");
  if (prior_kind == PriorCov::scaled_identity && !(prior_scale > 0.0)) {
    throw ConfigError("config: prior scale must be > 0");
  }
  generator.validate();
  controller.validate();
  schedule.validate();
  delay.validate();
  if (!(policy.p_floor > 0.0 && policy.p_floor <= 1.0)) {
    throw ConfigError("config: policy.p_floor must lie in (0, 1]");
  }
  if (policy.p_floor < controller.p_floor) {
    throw ConfigError("config: policy.p_floor may not undercut controller.p_floor");
  }
  if (delay.kind != DelayModel::Kind::none && mode != Mode::ocp_pls) {
    throw ConfigError("config: delay model requires mode 'ocp-pls'");
  }
}

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("config: unknown key '" + where + key + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config: bad value for '" + std::string(key) + "': " + e.what());
    }
  }
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  reject_unknown_keys(j, {"mode", "T", "runs", "seed", "parallel", "out_dir",
                          "generator", "prior", "jitter", "controller", "policy",
                          "schedule", "delay"},
                      "");
  ExperimentConfig cfg;
  if (auto it = j.find("mode"); it != j.end()) {
    cfg.mode = mode_from_string(it->get<std::string>());
  }
  read(j, "T", cfg.rounds);
  read(j, "runs", cfg.n_runs);
  read(j, "seed", cfg.master_seed);
  read(j, "parallel", cfg.parallel);
  read(j, "out_dir", cfg.out_dir);
  read(j, "jitter", cfg.jitter);

  if (auto it = j.find("generator"); it != j.end()) {
    const json& g = *it;
    reject_unknown_keys(g, {"n_min", "n_max", "gamma_shape", "gamma_scale"}, "generator.");
    read(g, "n_min", cfg.generator.n_min);
    read(g, "n_max", cfg.generator.n_max);
    read(g, "gamma_shape", cfg.generator.gamma_shape);
    read(g, "gamma_scale", cfg.generator.gamma_scale);
  }
  if (auto it = j.find("prior"); it != j.end()) {
    const json& p = *it;
    reject_unknown_keys(p, {"kind", "scale"}, "prior.");
    std::string kind = "identity";
    read(p, "kind", kind);
    if (kind == "identity") cfg.prior_kind = PriorCov::identity;
    else if (kind == "scaled-identity") cfg.prior_kind = PriorCov::scaled_identity;
    else throw ConfigError("config: unknown prior kind '" + kind + "'");
    read(p, "scale", cfg.prior_scale);
  }
  if (auto it = j.find("controller"); it != j.end()) {
    const json& c = *it;
    reject_unknown_keys(c, {"alpha", "gamma", "lambda1", "p_floor"}, "controller.");
    read(c, "alpha", cfg.controller.alpha);
    read(c, "gamma", cfg.controller.gamma);
    read(c, "lambda1", cfg.controller.lambda1);
    read(c, "p_floor", cfg.controller.p_floor);
  }
  cfg.policy.p_floor = cfg.controller.p_floor;
  if (auto it = j.find("policy"); it != j.end()) {
    const json& p = *it;
    reject_unknown_keys(p, {"theta", "p_floor"}, "policy.");
    read(p, "theta", cfg.policy.theta);
    read(p, "p_floor", cfg.policy.p_floor);
  }
  if (auto it = j.find("schedule"); it != j.end()) {
    const json& s = *it;
    reject_unknown_keys(s, {"kind", "fraction", "pieces", "budgets"}, "schedule.");
    std::string kind = "constant-fraction";
    read(s, "kind", kind);
    if (kind == "constant-fraction") cfg.schedule.kind = BudgetSchedule::Kind::constant_fraction;
    else if (kind == "piecewise-fraction") cfg.schedule.kind = BudgetSchedule::Kind::piecewise_fraction;
    else if (kind == "explicit-list") cfg.schedule.kind = BudgetSchedule::Kind::explicit_list;
    else throw ConfigError("config: unknown schedule kind '" + kind + "'");
    read(s, "fraction", cfg.schedule.fraction);
    if (auto pit = s.find("pieces"); pit != s.end()) {
      for (const json& pj : *pit) {
        reject_unknown_keys(pj, {"from", "to", "fraction"}, "schedule.pieces.");
        BudgetSchedule::Piece piece;
        read(pj, "from", piece.from);
        read(pj, "to", piece.to);
        read(pj, "fraction", piece.fraction);
        cfg.schedule.pieces.push_back(piece);
      }
    }
    read(s, "budgets", cfg.schedule.budgets);
  }
  if (auto it = j.find("delay"); it != j.end()) {
    const json& d = *it;
    reject_unknown_keys(d, {"kind", "d", "max_delay", "t_max_batch"}, "delay.");
    std::string kind = "none";
    read(d, "kind", kind);
    if (kind == "none") cfg.delay.kind = DelayModel::Kind::none;
    else if (kind == "constant") cfg.delay.kind = DelayModel::Kind::constant;
    else if (kind == "random-bounded") cfg.delay.kind = DelayModel::Kind::random_bounded;
    else throw ConfigError("config: unknown delay kind '" + kind + "'");
    read(d, "d", cfg.delay.delay);
    read(d, "max_delay", cfg.delay.max_delay);
    read(d, "t_max_batch", cfg.delay.t_max_batch);
  }
  cfg.controller.t_max_batch = cfg.delay.t_max_batch;
  cfg.validate();
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["mode"] = to_string(cfg.mode);
  j["T"] = cfg.rounds;
  j["runs"] = cfg.n_runs;
  j["seed"] = cfg.master_seed;
  j["parallel"] = cfg.parallel;
  j["out_dir"] = cfg.out_dir;
  j["jitter"] = cfg.jitter;
  j["generator"] = {{"n_min", cfg.generator.n_min},
                    {"n_max", cfg.generator.n_max},
                    {"gamma_shape", cfg.generator.gamma_shape},
                    {"gamma_scale", cfg.generator.gamma_scale}};
  j["prior"] = {{"kind", cfg.prior_kind == PriorCov::identity ? "identity" : "scaled-identity"},
                {"scale", cfg.prior_scale}};
  j["controller"] = {{"alpha", cfg.controller.alpha},
                     {"gamma", cfg.controller.gamma},
                     {"lambda1", cfg.controller.lambda1},
                     {"p_floor", cfg.controller.p_floor}};
  j["policy"] = {{"theta", cfg.policy.theta}, {"p_floor", cfg.policy.p_floor}};
  json s;
  switch (cfg.schedule.kind) {
    case BudgetSchedule::Kind::constant_fraction:
      s = {{"kind", "constant-fraction"}, {"fraction", cfg.schedule.fraction}};
      break;
    case BudgetSchedule::Kind::piecewise_fraction: {
      json pieces = json::array();
      for (const auto& p : cfg.schedule.pieces) {
        pieces.push_back({{"from", p.from}, {"to", p.to}, {"fraction", p.fraction}});
      }
      s = {{"kind", "piecewise-fraction"}, {"pieces", pieces}};
      break;
    }
    case BudgetSchedule::Kind::explicit_list:
      s = {{"kind", "explicit-list"}, {"budgets", cfg.schedule.budgets}};
      break;
  }
  j["schedule"] = s;
  switch (cfg.delay.kind) {
    case DelayModel::Kind::none:
      j["delay"] = {{"kind", "none"}};
      break;
    case DelayModel::Kind::constant:
      j["delay"] = {{"kind", "constant"}, {"d", cfg.delay.delay},
                    {"t_max_batch", cfg.delay.t_max_batch}};
      break;
    case DelayModel::Kind::random_bounded:
      j["delay"] = {{"kind", "random-bounded"}, {"max_delay", cfg.delay.max_delay},
                    {"t_max_batch", cfg.delay.t_max_batch}};
      break;
  }
  return j;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: parse error in '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

void apply_override(json& j, const std::string& key_eq_value) {
  const auto eq = key_eq_value.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override must have the form key=value, got '" + key_eq_value + "'");
  }
  const std::string path = key_eq_value.substr(0, eq);
  const std::string raw = key_eq_value.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;  // treat as bare string

  json* node = &j;
  std::size_t pos = 0;
  while (true) {
    const auto dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
    if (key.empty()) throw ConfigError("override: empty path segment in '" + path + "'");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    pos = dot + 1;
  }
}

}  // namespace ocpls
