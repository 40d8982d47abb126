#include "heavytail/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

namespace heavytail {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trajectory_csv(const TrialRecord& record) {
  std::string out = "t,grad_norm_sq,loss,stepsize,clip_active\n";
  for (const auto& s : record.samples) {
    out += std::to_string(s.t);
    out += ',';
    out += format_double(s.grad_norm_sq);
    out += ',';
    out += format_double(s.loss);
    out += ',';
    out += format_double(s.stepsize);
    out += ',';
    out += s.clip_active ? '1' : '0';
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

void write_trajectory_csv(const TrialRecord& record, const std::string& path) {
  write_text_file(path, trajectory_csv(record));
}

std::string dataset_csv(const Problem& problem) {
  std::string out;
  for (int j = 1; j <= problem.dim(); ++j) {
    out += "x_" + std::to_string(j);
    out += ',';
  }
  out += "y\n";
  for (const Sample& z : problem.dataset()) {
    for (double x : z.x) {
      out += format_double(x);
      out += ',';
    }
    out += format_double(z.y);
    out += '\n';
  }
  return out;
}

void write_dataset_csv(const Problem& problem, const std::string& path) {
  write_text_file(path, dataset_csv(problem));
}

void write_json_file(const json& doc, const std::string& path) {
  write_text_file(path, doc.dump(2) + "\n");
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw IoError("cannot create directory: " + path);
}

json schedule_to_json(const Schedule& s) {
  return json{{"algorithm", to_string(s.algorithm)},
              {"T", s.T},
              {"alpha", s.alpha},
              {"eta", s.eta},
              {"tau", s.tau},
              {"tau1", s.tau1},
              {"tau2", s.tau2},
              {"gamma", s.gamma},
              {"g0", s.g0},
              {"p", s.p},
              {"q", s.q},
              {"s", s.s},
              {"r", s.r}};
}

Schedule schedule_from_json(const json& doc) {
  Schedule s;
  s.algorithm = algorithm_from_string(doc.at("algorithm").get<std::string>());
  s.T = doc.at("T").get<long long>();
  s.alpha = doc.at("alpha").get<double>();
  s.eta = doc.at("eta").get<double>();
  s.tau = doc.at("tau").get<double>();
  s.tau1 = doc.at("tau1").get<double>();
  s.tau2 = doc.at("tau2").get<double>();
  s.gamma = doc.at("gamma").get<double>();
  s.g0 = doc.at("g0").get<double>();
  s.p = doc.at("p").get<double>();
  s.q = doc.at("q").get<double>();
  s.s = doc.at("s").get<double>();
  s.r = doc.at("r").get<double>();
  s.validate();
  return s;
}

json rate_fit_to_json(const RateFit& fit) {
  return json{{"slope", fit.slope},
              {"intercept", fit.intercept},
              {"residual_rms", fit.residual_rms},
              {"target_exponent", fit.target_exponent},
              {"tolerance", fit.tolerance},
              {"valid", fit.valid},
              {"pass", fit.pass}};
}

json environment_stamp(std::uint64_t seed) {
  return json{{"tool_version", kToolVersion},
              {"rng", {{"generator", "splitmix64-counter"}, {"seed", seed}}}};
}

namespace {

json metric_target(double alpha, Measure measure) {
  return json{{"measure", measure == Measure::sq_norm ? "sq-norm" : "norm"},
              {"formula", measure == Measure::sq_norm ? "(2*alpha-2)/(3*alpha-2)"
                                                      : "(alpha-1)/(3*alpha-2)"},
              {"exponent", rate_exponent(alpha, measure)}};
}

}  // namespace

json sweep_summary(const RunConfig& config, const SweepResult& result) {
  json points = json::array();
  for (const auto& pt : result.points) {
    points.push_back(json{{"T", pt.T},
                          {"schedule", schedule_to_json(pt.schedule)},
                          {"quantile", pt.quantile},
                          {"n_diverged", pt.n_diverged},
                          {"seed_metrics", pt.seed_metrics}});
  }
  json out = {{"config", config_echo(config)},
              {"environment", environment_stamp(config.seed)},
              {"target", metric_target(config.alpha, result.measure)},
              {"delta", result.delta},
              {"resolved_g", result.resolved_g},
              {"points", points},
              {"fit", rate_fit_to_json(result.fit)},
              {"all_diverged_somewhere", result.all_diverged_somewhere}};
  if (result.has_log_corrected)
    out["fit_log_corrected"] = rate_fit_to_json(result.fit_log_corrected);
  return out;
}

json run_summary(const RunConfig& config, const TrialRecord& record) {
  return json{{"config", config_echo(config)},
              {"environment", environment_stamp(config.seed)},
              {"schedule", schedule_to_json(record.schedule)},
              {"T", record.T},
              {"avg_sq", record.avg_sq},
              {"avg_norm", record.avg_norm},
              {"diverged", record.diverged},
              {"n_samples", record.samples.size()}};
}

json contrast_summary(const RunConfig& config, const ContrastResult& result) {
  auto arm = [](const ContrastArm& a) {
    return json{{"name", a.name},
                {"quantile", a.quantile},
                {"diverged_fraction", a.diverged_fraction},
                {"seed_metrics", a.seed_metrics}};
  };
  return json{{"config", config_echo(config)},
              {"environment", environment_stamp(config.seed)},
              {"T", result.T},
              {"delta", result.delta},
              {"clipped", arm(result.clipped)},
              {"unclipped", arm(result.unclipped)},
              {"clipped_below", result.clipped_below}};
}

json gengap_summary(const RunConfig& config, const GenGapResult& result) {
  json points = json::array();
  for (const auto& pt : result.points) {
    points.push_back(json{{"n", pt.n},
                          {"T", pt.T},
                          {"pop_quantile", pt.pop_quantile},
                          {"emp_quantile", pt.emp_quantile},
                          {"emp_full_quantile", pt.emp_full_quantile},
                          {"max_gap_sq_quantile", pt.max_gap_sq_quantile},
                          {"seed_pop_metrics", pt.seed_pop_metrics}});
  }
  return json{{"config", config_echo(config)},
              {"environment", environment_stamp(config.seed)},
              {"points", points},
              {"spearman", result.spearman}};
}

namespace {

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string loglog_svg(const std::vector<std::pair<double, double>>& points,
                       const RateFit& fit, const std::string& title) {
  const int width = 640, height = 480;
  const double ml = 70, mr = 20, mt = 40, mb = 50;
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt6(width / 2.0) +
         "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\" "
         "font-family=\"sans-serif\">" +
         title + "</text>\n";

  std::vector<std::pair<double, double>> finite;
  for (const auto& p : points) {
    if (p.first > 0.0 && std::isfinite(p.second) && p.second > 0.0) finite.push_back(p);
  }
  std::size_t omitted = points.size() - finite.size();

  if (finite.empty()) {
    svg += "<text x=\"" + fmt6(width / 2.0) + "\" y=\"" + fmt6(height / 2.0) +
           "\" text-anchor=\"middle\" font-size=\"14\" "
           "font-family=\"sans-serif\">no data</text>\n";
    svg += "</svg>\n";
    return svg;
  }

  double x_lo = std::log10(finite.front().first), x_hi = x_lo;
  double y_lo = std::log10(finite.front().second), y_hi = y_lo;
  for (const auto& p : finite) {
    x_lo = std::min(x_lo, std::log10(p.first));
    x_hi = std::max(x_hi, std::log10(p.first));
    y_lo = std::min(y_lo, std::log10(p.second));
    y_hi = std::max(y_hi, std::log10(p.second));
  }
  if (x_hi - x_lo < 1e-12) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (y_hi - y_lo < 1e-12) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }
  double pad_x = 0.05 * (x_hi - x_lo), pad_y = 0.1 * (y_hi - y_lo);
  x_lo -= pad_x;
  x_hi += pad_x;
  y_lo -= pad_y;
  y_hi += pad_y;

  auto px = [&](double lx) {
    return ml + (lx - x_lo) / (x_hi - x_lo) * (width - ml - mr);
  };
  auto py = [&](double ly) {
    return height - mb - (ly - y_lo) / (y_hi - y_lo) * (height - mt - mb);
  };

  // axes
  svg += "<line x1=\"" + fmt6(ml) + "\" y1=\"" + fmt6(height - mb) + "\" x2=\"" +
         fmt6(width - mr) + "\" y2=\"" + fmt6(height - mb) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt6(ml) + "\" y1=\"" + fmt6(mt) + "\" x2=\"" + fmt6(ml) +
         "\" y2=\"" + fmt6(height - mb) + "\" stroke=\"black\"/>\n";
  for (int k = static_cast<int>(std::ceil(x_lo)); k <= static_cast<int>(std::floor(x_hi));
       ++k) {
    svg += "<line x1=\"" + fmt6(px(k)) + "\" y1=\"" + fmt6(height - mb) + "\" x2=\"" +
           fmt6(px(k)) + "\" y2=\"" + fmt6(height - mb + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt6(px(k)) + "\" y=\"" + fmt6(height - mb + 18) +
           "\" text-anchor=\"middle\" font-size=\"11\" "
           "font-family=\"sans-serif\">1e" +
           std::to_string(k) + "</text>\n";
  }
  for (int k = static_cast<int>(std::ceil(y_lo)); k <= static_cast<int>(std::floor(y_hi));
       ++k) {
    svg += "<line x1=\"" + fmt6(ml - 5) + "\" y1=\"" + fmt6(py(k)) + "\" x2=\"" +
           fmt6(ml) + "\" y2=\"" + fmt6(py(k)) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt6(ml - 8) + "\" y=\"" + fmt6(py(k) + 4) +
           "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">1e" +
           std::to_string(k) + "</text>\n";
  }
  svg += "<text x=\"" + fmt6((ml + width - mr) / 2.0) + "\" y=\"" +
         fmt6(height - 10.0) +
         "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">T"
         "</text>\n";

  // scatter
  for (const auto& p : finite) {
    svg += "<circle cx=\"" + fmt6(px(std::log10(p.first))) + "\" cy=\"" +
           fmt6(py(std::log10(p.second))) +
           "\" r=\"3.5\" fill=\"steelblue\" stroke=\"none\"/>\n";
  }

  if (fit.valid) {
    // log10 y = (intercept + slope ln x)/ln 10 = intercept/ln10 + slope log10 x
    const double ln10 = std::log(10.0);
    auto fit_ly = [&](double lx) { return fit.intercept / ln10 + fit.slope * lx; };
    svg += "<line x1=\"" + fmt6(px(x_lo)) + "\" y1=\"" + fmt6(py(fit_ly(x_lo))) +
           "\" x2=\"" + fmt6(px(x_hi)) + "\" y2=\"" + fmt6(py(fit_ly(x_hi))) +
           "\" stroke=\"firebrick\" stroke-width=\"1.5\"/>\n";
    // guide line with the target slope through the fitted midpoint
    double mid_x = (x_lo + x_hi) / 2.0;
    double mid_y = fit_ly(mid_x);
    auto guide_ly = [&](double lx) { return mid_y - fit.target_exponent * (lx - mid_x); };
    svg += "<line x1=\"" + fmt6(px(x_lo)) + "\" y1=\"" + fmt6(py(guide_ly(x_lo))) +
           "\" x2=\"" + fmt6(px(x_hi)) + "\" y2=\"" + fmt6(py(guide_ly(x_hi))) +
           "\" stroke=\"gray\" stroke-dasharray=\"6,4\" stroke-width=\"1.5\"/>\n";
    svg += "<text x=\"" + fmt6(width - mr - 8.0) + "\" y=\"" + fmt6(mt + 16.0) +
           "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\" "
           "fill=\"firebrick\">fit slope = " +
           fmt6(fit.slope) + "</text>\n";
    svg += "<text x=\"" + fmt6(width - mr - 8.0) + "\" y=\"" + fmt6(mt + 32.0) +
           "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\" "
           "fill=\"gray\">target slope = " +
           fmt6(-fit.target_exponent) + "</text>\n";
  }

  if (omitted > 0) {
    svg += "<text x=\"" + fmt6(ml) + "\" y=\"" + fmt6(height - 28.0) +
           "\" font-size=\"11\" font-family=\"sans-serif\" fill=\"gray\">" +
           std::to_string(omitted) + " non-finite point(s) omitted</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void write_loglog_svg(const std::vector<std::pair<double, double>>& points,
                      const RateFit& fit, const std::string& title,
                      const std::string& path) {
  write_text_file(path, loglog_svg(points, fit, title));
}

}  // namespace heavytail
