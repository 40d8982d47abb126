#include "heavytail/battery.hpp"

#include <algorithm>
#include <cmath>

#include "heavytail/conclab.hpp"

namespace heavytail {

using nlohmann::json;

namespace {

struct BiasDist {
  double tail_shape;
  double alpha;
  double g;  // moment constant for the mean-shifted distribution
};

// G for || e1 + r u ||, u uniform on the 3-sphere, r ~ Pareto(a, 1):
// alpha = 2 has the closed form sqrt(1 + a/(a-2)); the alpha = 1.5 value is a
// quadrature result, rounded up so it stays a valid upper bound.
constexpr double kG_a3_alpha2 = 2.0;        // sqrt(1 + 3/(3-2)) = 2
constexpr double kG_a18_alpha15 = 3.4790;   // (E||e1+ru||^1.5)^(2/3), E = 6.4857

json grid_to_json(const ClipCheckReport& rep) {
  json pts = json::array();
  for (const auto& p : rep.points) {
    pts.push_back(json{{"tau", p.tau},
                       {"estimate", p.estimate},
                       {"bound", p.bound},
                       {"se", p.se},
                       {"ratio", p.ratio},
                       {"pass", p.pass}});
  }
  return json{{"name", rep.name},
              {"alpha", rep.alpha},
              {"g", rep.g},
              {"n_mc", rep.n_mc},
              {"points", pts},
              {"pass", rep.pass}};
}

json coverage_to_json(const std::string& name, const json& params,
                      const CoverageReport& rep) {
  return json{{"name", name},
              {"params", params},
              {"bound", rep.bound_desc},
              {"n_trials", rep.n_trials},
              {"n_violations", rep.n_violations},
              {"delta", rep.delta},
              {"violation_rate", rep.violation_rate},
              {"se", rep.se},
              {"pass", rep.pass}};
}

bool wanted(const ConclabConfig& cc, const char* name) {
  return std::find(cc.checks.begin(), cc.checks.end(), name) != cc.checks.end();
}

}  // namespace

json run_conclab_battery(const RunConfig& config, int threads) {
  const ConclabConfig& cc = config.conclab;
  json checks = json::array();

  const std::vector<BiasDist> dists = {{3.0, 2.0, kG_a3_alpha2},
                                       {1.8, 1.5, kG_a18_alpha15}};
  const Vec mean = {1.0, 0.0, 0.0};

  if (wanted(cc, "clip-bias")) {
    for (const auto& dist : dists) {
      NoiseModel noise;
      noise.kind = NoiseKind::pareto_additive;
      noise.tail_shape = dist.tail_shape;
      noise.scale = 1.0;
      noise.moment = MomentBound{dist.alpha, dist.g};
      auto rep = check_clip_bias(noise, mean, cc.tau_grid, dist.alpha, dist.g, cc.n_mc,
                                 RngStream(config.seed, 0xb1a5000));
      json doc = grid_to_json(rep);
      doc["tail_shape"] = dist.tail_shape;
      checks.push_back(doc);
    }
  }
  if (wanted(cc, "clip-second-moment")) {
    for (const auto& dist : dists) {
      NoiseModel noise;
      noise.kind = NoiseKind::pareto_additive;
      noise.tail_shape = dist.tail_shape;
      noise.scale = 1.0;
      noise.moment = MomentBound{dist.alpha, dist.g};
      auto rep = check_clip_second_moment(noise, mean, cc.tau_grid, dist.alpha, dist.g,
                                          cc.n_mc, RngStream(config.seed, 0x5ec0000));
      json doc = grid_to_json(rep);
      doc["tail_shape"] = dist.tail_shape;
      checks.push_back(doc);
    }
  }

  if (wanted(cc, "bernstein-scalar")) {
    const ScalarMdsSpec bernoulli{MdsKind::bernoulli, 1.0, 3.0, 1.0, 4.0};
    const ScalarMdsSpec clipped{MdsKind::clipped_pareto, 1.0, 1.8, 1.0, 4.0};
    for (double delta : cc.deltas) {
      auto r1 = check_bernstein_scalar(bernoulli, -1.0, delta, cc.mds_n, cc.n_trials,
                              config.seed, threads);
      checks.push_back(coverage_to_json(
          "bernstein-scalar",
          json{{"increments", "bernoulli"}, {"b", 1.0}, {"n", cc.mds_n}}, r1));
      auto r2 = check_bernstein_scalar(clipped, -1.0, delta, cc.mds_n, cc.n_trials,
                              config.seed + 1, threads);
      checks.push_back(coverage_to_json(
          "bernstein-scalar",
          json{{"increments", "clipped-pareto"},
               {"shape", 1.8},
               {"clip", 4.0},
               {"n", cc.mds_n}},
          r2));
    }
  }
  if (wanted(cc, "pinelis-vector")) {
    VectorMdsSpec rademacher;
    rademacher.kind = VecMdsKind::rademacher;
    rademacher.dim = 2;
    VectorMdsSpec radial;
    radial.kind = VecMdsKind::clipped_pareto_radial;
    radial.dim = 3;
    radial.shape = 1.8;
    radial.scale = 1.0;
    radial.clip_c = 4.0;
    for (double delta : cc.deltas) {
      auto r1 = check_pinelis_vector(rademacher, delta, cc.mds_n, cc.n_trials, config.seed + 2,
                              threads);
      checks.push_back(coverage_to_json(
          "pinelis-vector",
          json{{"increments", "rademacher"}, {"d", 2}, {"t", cc.mds_n}}, r1));
      auto r2 = check_pinelis_vector(radial, delta, cc.mds_n, cc.n_trials, config.seed + 3,
                              threads);
      checks.push_back(coverage_to_json(
          "pinelis-vector",
          json{{"increments", "clipped-pareto-radial"},
               {"d", 3},
               {"shape", 1.8},
               {"clip", 4.0},
               {"t", cc.mds_n}},
          r2));
    }
  }

  if (wanted(cc, "uniform-convergence")) {
    UniformConvBound params{1.0, 1.0, 1.0, 100, 2, 0.05};
    double value = eval_uniform_conv_bound(params);
    NoiseModel noise;
    noise.kind = NoiseKind::sampling;
    noise.tail_shape = 3.0;
    noise.moment = MomentBound{2.0, 0.0};
    Problem problem = Problem::robust_regression(4, 200, config.seed, noise, 0.1);
    auto chk = check_uniform_convergence(problem, 1.0, 0.05, 100, cc.uniform_conv_n_fresh,
                                         RngStream(config.seed, 0x21c0000));
    checks.push_back(json{{"name", "uniform-convergence"},
                          {"params",
                           {{"L", params.L},
                            {"R", params.R},
                            {"b", params.b},
                            {"n", params.n},
                            {"d", params.d},
                            {"delta", params.delta}}},
                          {"bound_value", value},
                          {"ball_check",
                           {{"bound", chk.bound},
                            {"max_observed", chk.max_observed},
                            {"n_probes", chk.n_probes},
                            {"pass", chk.pass}}},
                          {"pass", chk.pass}});
  }

  if (wanted(cc, "adagrad-sums")) {
    RngStream rng(config.seed, 0x22c0000);
    long long failures = 0;
    double min_lower_slack = 1e308, min_upper_slack = 1e308;
    double min_harmonic_slack = 1e308, min_guarded_slack = 1e308;
    for (long long i = 0; i < cc.sum_check_sequences; ++i) {
      auto len = static_cast<std::size_t>(1 + rng.next_below(100));
      std::vector<double> seq(len);
      for (auto& a : seq) {
        double mag = std::pow(10.0, -6.0 + 12.0 * rng.next_unit());
        a = rng.next_unit() < 0.05 ? 0.0 : mag;  // occasional zeros, incl. prefixes
      }
      if (std::all_of(seq.begin(), seq.end(), [](double a) { return a == 0.0; }))
        seq[len / 2] = 1.0;
      auto res = check_adagrad_sums(seq);
      if (!res.pass) ++failures;
      min_lower_slack = std::min(min_lower_slack, res.lower_slack);
      min_upper_slack = std::min(min_upper_slack, res.upper_slack);
      min_harmonic_slack = std::min(min_harmonic_slack, res.harmonic_slack);
      min_guarded_slack = std::min(min_guarded_slack, res.harmonic_guarded_slack);
    }
    checks.push_back(json{{"name", "adagrad-sums"},
                          {"sequences", cc.sum_check_sequences},
                          {"failures", failures},
                          {"min_lower_slack", min_lower_slack},
                          {"min_upper_slack", min_upper_slack},
                          {"min_harmonic_slack_literal", min_harmonic_slack},
                          {"min_harmonic_slack_guarded", min_guarded_slack},
                          {"pass", failures == 0}});
  }

  return checks;
}

}  // namespace heavytail
