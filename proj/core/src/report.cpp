#include "ocpls/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace ocpls {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

std::string round_csv_header() {
  return "run,t,n,I,lambda,log_volume,p,obs,covered,err,cum_coverage,cum_feedback";
}

std::string round_csv_row(const RoundRecord& r) {
  std::string row;
  row += std::to_string(r.run_id);
  row += ',' + std::to_string(r.t);
  row += ',' + std::to_string(r.n);
  row += ',' + std::to_string(r.budget);
  row += ',' + fmt(r.lambda);
  row += ',' + fmt(r.log_volume);
  row += ',' + fmt(r.p);
  row += ',' + std::to_string(r.obs);
  row += ',' + std::to_string(r.covered);
  row += ',' + std::to_string(r.err);
  row += ',' + fmt(r.cum_coverage);
  row += ',' + std::to_string(r.cum_feedback);
  return row;
}

json summary_to_json(const ExperimentConfig& cfg, const RunSummary& s,
                     double runtime_seconds) {
  json j;
  j["mode"] = to_string(cfg.mode);
  j["T"] = s.rounds;
  j["runs"] = s.n_runs;
  j["master_seed"] = cfg.master_seed;
  j["alpha"] = s.alpha;
  j["final_coverage"] = s.final_coverage;
  j["coverage_gap"] = s.coverage_gap;
  j["se_final_coverage"] = s.se_final_coverage;
  j["bound_constant"] = s.bound_constant;
  j["bound_over_T"] = s.bound_constant / static_cast<double>(s.rounds);
  j["realized_min_p"] = s.min_p;
  j["mean_feedback_count"] = s.mean_cum_feedback.empty() ? 0.0 : s.mean_cum_feedback.back();
  j["feedback_ratio"] = s.mean_feedback_ratio;
  j["infinite_set_rounds"] = s.infinite_set_rounds;
  j["mean_final_log_volume"] = s.mean_log_volume.empty() ? 0.0 : s.mean_log_volume.back();
  j["runtime_seconds"] = runtime_seconds;
  j["config"] = config_to_json(cfg);
  return j;
}

fs::path write_run_artifacts(const ExperimentConfig& cfg,
                             const std::vector<std::vector<RoundRecord>>& episodes,
                             const RunSummary& summary, const fs::path& out_dir,
                             double runtime_seconds) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "'");

  const fs::path csv_path = out_dir / "rounds.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot write '" + csv_path.string() + "'");
  csv << round_csv_header() << '\n';
  for (const auto& ep : episodes) {
    for (const RoundRecord& r : ep) csv << round_csv_row(r) << '\n';
  }
  if (!csv.good()) throw IoError("write failed for '" + csv_path.string() + "'");

  const fs::path json_path = out_dir / "summary.json";
  std::ofstream js(json_path);
  if (!js) throw IoError("cannot write '" + json_path.string() + "'");
  js << summary_to_json(cfg, summary, runtime_seconds).dump(2) << '\n';
  if (!js.good()) throw IoError("write failed for '" + json_path.string() + "'");
  return out_dir;
}

std::vector<RoundRecord> read_round_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV '" + path.string() + "'");
  if (line != round_csv_header()) {
    throw IoError("unexpected CSV header in '" + path.string() + "'");
  }
  std::vector<RoundRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 12) throw IoError("malformed CSV row in '" + path.string() + "'");
    RoundRecord r;
    r.run_id = std::stoi(f[0]);
    r.t = std::stoll(f[1]);
    r.n = std::stoi(f[2]);
    r.budget = std::stoi(f[3]);
    r.lambda = std::stod(f[4]);
    r.log_volume = std::stod(f[5]);
    r.p = std::stod(f[6]);
    r.obs = std::stoi(f[7]);
    r.covered = std::stoi(f[8]);
    r.err = std::stoi(f[9]);
    r.cum_coverage = std::stod(f[10]);
    r.cum_feedback = std::stoll(f[11]);
    out.push_back(r);
  }
  return out;
}

json comparison_json(const std::vector<ComparisonEntry>& entries) {
  if (entries.empty()) throw ConfigError("compare: no configs given");
  const std::int64_t T = entries.front().summary.rounds;
  for (const auto& e : entries) {
    if (e.summary.rounds != T) {
      throw ConfigError("compare: configs disagree on T (" + std::to_string(T) +
                        " vs " + std::to_string(e.summary.rounds) + ")");
    }
  }
  json j;
  j["T"] = T;
  json rows = json::array();
  const ComparisonEntry* ocp = nullptr;
  const ComparisonEntry* full = nullptr;
  for (const auto& e : entries) {
    rows.push_back({{"label", e.label},
                    {"mode", to_string(e.cfg.mode)},
                    {"final_coverage", e.summary.final_coverage},
                    {"coverage_gap", e.summary.coverage_gap},
                    {"final_log_volume", e.summary.mean_log_volume.back()},
                    {"feedback_count", e.summary.mean_cum_feedback.back()},
                    {"feedback_ratio", e.summary.mean_feedback_ratio}});
    if (e.cfg.mode == Mode::ocp_pls && !ocp) ocp = &e;
    if (e.cfg.mode == Mode::ocp_pls_full_feedback && !full) full = &e;
  }
  j["entries"] = rows;
  if (ocp && full && full->summary.mean_cum_feedback.back() > 0) {
    j["feedback_reduction_ratio"] =
        ocp->summary.mean_cum_feedback.back() / full->summary.mean_cum_feedback.back();
  }
  return j;
}

void write_comparison_csv(const fs::path& path, const std::vector<ComparisonEntry>& entries) {
  if (entries.empty()) throw ConfigError("compare: no configs given");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "t";
  for (const auto& e : entries) {
    out << ',' << e.label << "_coverage," << e.label << "_log_volume,"
        << e.label << "_cum_feedback";
  }
  out << '\n';
  const auto T = static_cast<std::size_t>(entries.front().summary.rounds);
  for (std::size_t i = 0; i < T; ++i) {
    out << (i + 1);
    for (const auto& e : entries) {
      out << ',' << fmt(e.summary.mean_coverage[i]) << ','
          << fmt(e.summary.mean_log_volume[i]) << ','
          << fmt(e.summary.mean_cum_feedback[i]);
    }
    out << '\n';
  }
  if (!out.good()) throw IoError("write failed for '" + path.string() + "'");
}

void write_plotdata(const fs::path& run_dir, const fs::path& out_path) {
  const fs::path csv_path = run_dir / "rounds.csv";
  const fs::path json_path = run_dir / "summary.json";
  if (!fs::exists(csv_path) || !fs::exists(json_path)) {
    throw IoError("run artifacts missing in '" + run_dir.string() +
                  "' (need rounds.csv and summary.json)");
  }
  std::ifstream js(json_path);
  json summary;
  try {
    summary = json::parse(js);
  } catch (const json::parse_error& e) {
    throw IoError("cannot parse '" + json_path.string() + "': " + e.what());
  }
  const ExperimentConfig cfg = config_from_json(summary.at("config"));
  const double alpha = summary.at("alpha").get<double>();
  const double bound_c = summary.at("bound_constant").get<double>();

  const auto records = read_round_csv(csv_path);
  const auto T = static_cast<std::size_t>(cfg.rounds);
  std::vector<double> coverage(T, 0.0), volume(T, 0.0), feedback(T, 0.0);
  std::vector<int> seen(T, 0);
  // Per-run running mean of finite log-volumes, then averaged across runs.
  int current_run = -1;
  double finite_sum = 0.0;
  std::int64_t finite_count = 0;
  for (const RoundRecord& r : records) {
    if (r.run_id != current_run) {
      current_run = r.run_id;
      finite_sum = 0.0;
      finite_count = 0;
    }
    if (std::isfinite(r.log_volume)) {
      finite_sum += r.log_volume;
      ++finite_count;
    }
    const auto i = static_cast<std::size_t>(r.t - 1);
    if (i >= T) throw IoError("rounds.csv row beyond configured T");
    coverage[i] += r.cum_coverage;
    volume[i] += finite_count > 0 ? finite_sum / finite_count
                                  : -std::numeric_limits<double>::infinity();
    feedback[i] += static_cast<double>(r.cum_feedback);
    ++seen[i];
  }

  std::ofstream out(out_path);
  if (!out) throw IoError("cannot write '" + out_path.string() + "'");
  out << "series,t,value\n";
  auto emit = [&](const char* series, std::size_t i, double v) {
    out << series << ',' << (i + 1) << ',' << fmt(v) << '\n';
  };
  for (std::size_t i = 0; i < T; ++i) {
    if (seen[i] == 0) throw IoError("rounds.csv has gaps at t = " + std::to_string(i + 1));
    emit("coverage", i, coverage[i] / seen[i]);
  }
  for (std::size_t i = 0; i < T; ++i) emit("log_volume", i, volume[i] / seen[i]);
  for (std::size_t i = 0; i < T; ++i) emit("cum_feedback", i, feedback[i] / seen[i]);
  for (std::size_t i = 0; i < T; ++i) emit("target", i, 1.0 - alpha);
  for (std::size_t i = 0; i < T; ++i) {
    emit("bound_lo", i, 1.0 - alpha - bound_c / static_cast<double>(i + 1));
  }
  for (std::size_t i = 0; i < T; ++i) {
    emit("bound_hi", i, 1.0 - alpha + bound_c / static_cast<double>(i + 1));
  }
  if (cfg.schedule.kind == BudgetSchedule::Kind::piecewise_fraction) {
    for (std::size_t k = 1; k < cfg.schedule.pieces.size(); ++k) {
      out << "budget_change," << cfg.schedule.pieces[k].from << ",0\n";
    }
  }
  if (!out.good()) throw IoError("write failed for '" + out_path.string() + "'");
}

}  // namespace ocpls
