#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "heavytail/battery.hpp"
#include "heavytail/config.hpp"
#include "heavytail/harness.hpp"
#include "heavytail/io.hpp"
#include "heavytail/parallel.hpp"

namespace {

using heavytail::RunConfig;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSchedule = 2;
constexpr int kExitDiverged = 3;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int threads = -1;
};

RunConfig load_config(const CommonArgs& args, const std::string& expected_kind) {
  RunConfig cfg = heavytail::parse_config_file(args.config_path);
  if (cfg.kind != expected_kind)
    throw heavytail::ConfigError("config kind '" + cfg.kind + "' does not match the '" +
                                 expected_kind + "' subcommand");
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.seed) cfg.seed = *args.seed;
  if (args.threads >= 0) cfg.threads = args.threads;
  return cfg;
}

heavytail::ScheduleSpec spec_from_config(const RunConfig& cfg) {
  heavytail::ScheduleSpec spec;
  spec.algorithm = cfg.algorithm;
  spec.alpha = cfg.alpha;
  spec.p = cfg.p;
  spec.q = cfg.q;
  spec.s = cfg.s;
  spec.r = cfg.r;
  spec.g0 = cfg.g0;
  spec.eta = cfg.eta;
  spec.G = cfg.problem.g;
  return spec;
}

int cmd_run(const RunConfig& cfg) {
  heavytail::Problem problem = heavytail::build_problem(cfg);
  heavytail::ScheduleSpec spec = spec_from_config(cfg);
  if (spec.algorithm == heavytail::Algorithm::sgdm_clipped && !(spec.G > 0.0)) {
    heavytail::RngStream rg(cfg.seed, 0x6573746780000001ULL);
    spec.G = heavytail::estimate_g(problem, cfg.alpha, 10, 10000, rg);
  }
  heavytail::Schedule schedule =
      heavytail::build_schedule(spec, cfg.T, problem.smoothness_L());
  heavytail::RunOptions ro;
  ro.record_every = cfg.record_every > 0 ? cfg.record_every
                                         : std::max<long long>(1, cfg.T / 64);
  heavytail::TrialRecord rec =
      heavytail::run(problem, schedule, cfg.T, cfg.seed, 0, ro);
  heavytail::ensure_directory(cfg.out_dir);
  heavytail::write_trajectory_csv(rec, cfg.out_dir + "/trajectory.csv");
  heavytail::write_dataset_csv(problem, cfg.out_dir + "/dataset.csv");
  heavytail::write_json_file(heavytail::run_summary(cfg, rec),
                             cfg.out_dir + "/run_summary.json");
  std::printf("run: T=%lld avg_sq=%.6g avg_norm=%.6g diverged=%d (%.2fs)\n", rec.T,
              rec.avg_sq, rec.avg_norm, rec.diverged ? 1 : 0, rec.wall_seconds);
  return rec.diverged ? kExitDiverged : kExitOk;
}

int cmd_sweep(const RunConfig& cfg) {
  heavytail::Problem problem = heavytail::build_problem(cfg);
  heavytail::SweepOptions opt;
  opt.T_grid = cfg.T_grid;
  opt.n_seeds = cfg.n_seeds;
  opt.delta = cfg.delta;
  opt.slope_tolerance = cfg.slope_tolerance;
  opt.seed = cfg.seed;
  opt.threads = heavytail::resolve_threads(cfg.threads);
  opt.record_every = cfg.record_every;
  std::vector<heavytail::TrialRecord> records;
  heavytail::SweepResult result =
      heavytail::sweep(problem, spec_from_config(cfg), opt, &records);

  heavytail::ensure_directory(cfg.out_dir);
  heavytail::ensure_directory(cfg.out_dir + "/trajectories");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    long long ti = static_cast<long long>(i) / cfg.n_seeds;
    long long k = static_cast<long long>(i) % cfg.n_seeds;
    heavytail::write_trajectory_csv(
        rec, cfg.out_dir + "/trajectories/T" + std::to_string(cfg.T_grid[ti]) + "_seed" +
                 std::to_string(k) + ".csv");
  }
  heavytail::write_json_file(heavytail::sweep_summary(cfg, result),
                             cfg.out_dir + "/sweep_summary.json");
  std::vector<std::pair<double, double>> pts;
  for (const auto& pt : result.points)
    pts.emplace_back(static_cast<double>(pt.T), pt.quantile);
  heavytail::write_loglog_svg(pts, result.fit,
                              heavytail::to_string(cfg.algorithm) + " quantile vs T",
                              cfg.out_dir + "/sweep.svg");
  std::printf("sweep: slope=%.4g (target -%.4g, tol %.3g) pass=%d\n", result.fit.slope,
              result.fit.target_exponent, result.fit.tolerance,
              result.fit.pass ? 1 : 0);
  if (result.has_log_corrected)
    std::printf("sweep: log-corrected slope=%.4g\n", result.fit_log_corrected.slope);
  return result.all_diverged_somewhere ? kExitDiverged : kExitOk;
}

int cmd_conclab(const RunConfig& cfg) {
  int threads = heavytail::resolve_threads(cfg.threads);
  json checks = heavytail::run_conclab_battery(cfg, threads);
  json doc = {{"config", heavytail::config_echo(cfg)},
              {"environment", heavytail::environment_stamp(cfg.seed)},
              {"checks", checks}};
  heavytail::ensure_directory(cfg.out_dir);
  heavytail::write_json_file(doc, cfg.out_dir + "/conclab_report.json");
  bool all_pass = true;
  for (const auto& chk : checks) {
    bool pass = chk.at("pass").get<bool>();
    all_pass = all_pass && pass;
    std::printf("%-22s %s\n", chk.at("name").get<std::string>().c_str(),
                pass ? "PASS" : "FAIL");
  }
  return all_pass ? kExitOk : kExitDiverged;
}

int cmd_contrast(const RunConfig& cfg) {
  heavytail::Problem problem = heavytail::build_problem(cfg);
  int threads = heavytail::resolve_threads(cfg.threads);
  heavytail::ContrastResult result = heavytail::contrast_clipped_vs_unclipped(
      problem, spec_from_config(cfg), cfg.T, cfg.n_seeds, cfg.delta, cfg.seed, threads);
  heavytail::ensure_directory(cfg.out_dir);
  heavytail::write_json_file(heavytail::contrast_summary(cfg, result),
                             cfg.out_dir + "/contrast_summary.json");
  std::printf("contrast: clipped=%.6g unclipped=%.6g clipped_below=%d\n",
              result.clipped.quantile, result.unclipped.quantile,
              result.clipped_below ? 1 : 0);
  return kExitOk;
}

int cmd_gengap(const RunConfig& cfg) {
  heavytail::GenGapOptions opt;
  opt.d = cfg.problem.d;
  opt.alpha = cfg.alpha;
  opt.n_grid = cfg.n_grid;
  opt.n_seeds = cfg.n_seeds;
  opt.delta = cfg.delta;
  opt.n_fresh = cfg.n_fresh;
  opt.seed = cfg.seed;
  opt.threads = heavytail::resolve_threads(cfg.threads);
  opt.noise.kind = cfg.problem.noise_kind;
  opt.noise.tail_shape = cfg.problem.tail_shape;
  opt.noise.scale = cfg.problem.noise_scale;
  opt.noise.moment = heavytail::MomentBound{cfg.alpha, cfg.problem.g};
  opt.label_noise_scale = cfg.problem.label_noise_scale;
  opt.schedule = spec_from_config(cfg);
  heavytail::GenGapResult result = heavytail::gen_gap_experiment(opt);

  heavytail::ensure_directory(cfg.out_dir);
  heavytail::write_json_file(heavytail::gengap_summary(cfg, result),
                             cfg.out_dir + "/gengap_summary.json");
  std::string csv = "n,T,pop_quantile,emp_quantile,emp_full_quantile,max_gap_sq_quantile\n";
  for (const auto& pt : result.points) {
    csv += std::to_string(pt.n) + "," + std::to_string(pt.T) + "," +
           heavytail::format_double(pt.pop_quantile) + "," +
           heavytail::format_double(pt.emp_quantile) + "," +
           heavytail::format_double(pt.emp_full_quantile) + "," +
           heavytail::format_double(pt.max_gap_sq_quantile) + "\n";
  }
  heavytail::write_text_file(cfg.out_dir + "/gengap_points.csv", csv);
  std::printf("gengap: spearman=%.4f over %zu nodes\n", result.spearman,
              result.points.size());
  return kExitOk;
}

int cmd_plot(const std::string& summary_path, std::string out_dir) {
  std::ifstream in(summary_path);
  if (!in) throw heavytail::ConfigError("cannot open summary: " + summary_path);
  json doc = json::parse(in, nullptr, true);
  std::vector<std::pair<double, double>> pts;
  heavytail::RateFit fit;
  std::string title = "metric quantile";
  if (doc.contains("points") && doc.contains("fit")) {
    for (const auto& pt : doc["points"]) {
      double x = pt.contains("T") ? pt["T"].get<double>() : pt["n"].get<double>();
      double y = pt.contains("quantile") ? pt["quantile"].get<double>()
                                         : pt["pop_quantile"].get<double>();
      pts.emplace_back(x, y);
    }
    const auto& f = doc["fit"];
    fit.slope = f["slope"].get<double>();
    fit.intercept = f["intercept"].get<double>();
    fit.target_exponent = f["target_exponent"].get<double>();
    fit.tolerance = f["tolerance"].get<double>();
    fit.valid = f["valid"].get<bool>();
    fit.pass = f["pass"].get<bool>();
  } else if (doc.contains("points")) {
    for (const auto& pt : doc["points"])
      pts.emplace_back(pt["n"].get<double>(), pt["pop_quantile"].get<double>());
    title = "population metric quantile";
  } else {
    throw heavytail::ConfigError("summary has no plottable points: " + summary_path);
  }
  if (out_dir.empty()) out_dir = ".";
  heavytail::ensure_directory(out_dir);
  heavytail::write_loglog_svg(pts, fit, title, out_dir + "/plot.svg");
  std::printf("plot: wrote %s/plot.svg (%zu points)\n", out_dir.c_str(), pts.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clipped stochastic optimizers under heavy-tailed gradient noise: "
               "experiment harness"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", args.config_path, "JSON config file");
    if (needs_config) opt->required();
    sub->add_option("--out", args.out_dir, "output directory (overrides config)");
    sub->add_option("--seed", args.seed, "base seed (overrides config)");
    sub->add_option("--threads", args.threads, "worker threads (overrides config)");
  };

  auto* c_run = app.add_subcommand("run", "single trial, trajectory CSV + summary");
  auto* c_sweep = app.add_subcommand("sweep", "T sweep with quantile rate fit");
  auto* c_conclab = app.add_subcommand("conclab", "concentration/bound check battery");
  auto* c_gengap = app.add_subcommand("gengap", "generalization n-sweep");
  auto* c_contrast = app.add_subcommand("contrast", "clipped vs unclipped arms");
  auto* c_plot = app.add_subcommand("plot", "render a summary JSON as a log-log SVG");
  for (auto* sub : {c_run, c_sweep, c_conclab, c_gengap, c_contrast})
    add_common(sub, true);
  std::string plot_summary;
  c_plot->add_option("--config", plot_summary, "summary JSON to plot")->required();
  c_plot->add_option("--out", args.out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_run->parsed()) return cmd_run(load_config(args, "run"));
    if (c_sweep->parsed()) return cmd_sweep(load_config(args, "sweep"));
    if (c_conclab->parsed()) return cmd_conclab(load_config(args, "conclab"));
    if (c_gengap->parsed()) return cmd_gengap(load_config(args, "gengap"));
    if (c_contrast->parsed()) return cmd_contrast(load_config(args, "contrast"));
    if (c_plot->parsed()) return cmd_plot(plot_summary, args.out_dir);
  } catch (const heavytail::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const heavytail::ScheduleError& e) {
    std::cerr << "schedule constraint error: " << e.what() << "\n";
    return kExitSchedule;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
