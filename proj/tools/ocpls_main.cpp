#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ocpls/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitIo = 3;

struct CommonOpts {
  std::vector<std::string> overrides;
  std::string out_dir;
  int runs = -1;
  std::int64_t seed = -1;
  int parallel = -1;
};

ocpls::ExperimentConfig load_config(const std::string& path, const CommonOpts& opts) {
  std::ifstream in(path);
  if (!in) throw ocpls::IoError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ocpls::ConfigError("config: parse error in '" + path + "': " + e.what());
  }
  for (const std::string& ov : opts.overrides) ocpls::apply_override(j, ov);
  if (opts.runs > 0) j["runs"] = opts.runs;
  if (opts.seed >= 0) j["seed"] = opts.seed;
  if (opts.parallel > 0) j["parallel"] = opts.parallel;
  if (!opts.out_dir.empty()) j["out_dir"] = opts.out_dir;
  return ocpls::config_from_json(j);
}

fs::path resolve_out_dir(const ocpls::ExperimentConfig& cfg, const std::string& fallback) {
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* env = std::getenv("OCPLS_OUT_DIR"); env && *env) {
    return fs::path(env) / fallback;
  }
  return fallback;
}

int run_command(const std::string& config_path, const CommonOpts& opts) {
  const ocpls::ExperimentConfig cfg = load_config(config_path, opts);
  const auto start = std::chrono::steady_clock::now();
  const auto episodes = ocpls::run_episodes(cfg);
  const ocpls::RunSummary summary = ocpls::summarize(cfg, episodes);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const fs::path dir =
      ocpls::write_run_artifacts(cfg, episodes, summary, resolve_out_dir(cfg, "run_out"), elapsed);
  std::cout << "wrote " << (dir / "rounds.csv").string() << " and "
            << (dir / "summary.json").string() << '\n'
            << "final coverage " << summary.final_coverage << " (target "
            << 1.0 - summary.alpha << "), feedback ratio " << summary.mean_feedback_ratio
            << '\n';
  return kExitOk;
}

int compare_command(const std::vector<std::string>& config_paths, const CommonOpts& opts) {
  std::vector<ocpls::ComparisonEntry> entries;
  for (std::size_t i = 0; i < config_paths.size(); ++i) {
    ocpls::ExperimentConfig cfg = load_config(config_paths[i], opts);
    ocpls::ComparisonEntry e;
    e.label = ocpls::to_string(cfg.mode) + "_" + std::to_string(i);
    e.summary = ocpls::run_experiment(cfg);
    e.cfg = std::move(cfg);
    entries.push_back(std::move(e));
  }
  fs::path dir = opts.out_dir.empty() ? fs::path("compare_out") : fs::path(opts.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ocpls::IoError("cannot create output directory '" + dir.string() + "'");
  ocpls::write_comparison_csv(dir / "compare.csv", entries);
  const json j = ocpls::comparison_json(entries);
  std::ofstream js(dir / "compare.json");
  if (!js) throw ocpls::IoError("cannot write compare.json");
  js << j.dump(2) << '\n';
  std::cout << "wrote " << (dir / "compare.csv").string() << " and "
            << (dir / "compare.json").string() << '\n';
  if (j.contains("feedback_reduction_ratio")) {
    std::cout << "feedback reduction ratio " << j["feedback_reduction_ratio"].get<double>()
              << '\n';
  }
  return kExitOk;
}

int plotdata_command(const std::string& run_dir, std::string out_path) {
  if (out_path.empty()) out_path = (fs::path(run_dir) / "plotdata.csv").string();
  ocpls::write_plotdata(run_dir, out_path);
  std::cout << "wrote " << out_path << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic linear solving with online conformal calibration"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string config_path;
  std::vector<std::string> compare_paths;
  std::string run_dir;
  std::string plot_out;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--override", opts.overrides,
                    "config override as dotted.path=value (repeatable)");
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--runs", opts.runs, "number of independent runs");
    sub->add_option("--seed", opts.seed, "master seed");
    sub->add_option("--parallel", opts.parallel, "worker threads for episodes");
  };

  CLI::App* run = app.add_subcommand("run", "run one experiment and persist results");
  run->add_option("--config", config_path, "JSON experiment config")->required();
  add_common(run);

  CLI::App* compare = app.add_subcommand("compare", "run several configs and tabulate them");
  compare->add_option("--config", compare_paths, "JSON experiment configs")->required();
  add_common(compare);

  CLI::App* plotdata = app.add_subcommand("plotdata", "emit tidy plot data from a run directory");
  plotdata->add_option("dir", run_dir, "run output directory")->required();
  plotdata->add_option("--out", plot_out, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_command(config_path, opts);
    if (compare->parsed()) return compare_command(compare_paths, opts);
    if (plotdata->parsed()) return plotdata_command(run_dir, plot_out);
  } catch (const ocpls::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ocpls::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ocpls::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}
