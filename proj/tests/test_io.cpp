#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "heavytail/config.hpp"
#include "heavytail/io.hpp"

using namespace heavytail;
using nlohmann::json;

TEST_CASE("minimal sweep config gets defaults filled") {
  RunConfig cfg = parse_config_text(
      R"({"kind":"sweep","algorithm":"sgd-clipped","alpha":2.0})");
  CHECK(cfg.T_grid == std::vector<long long>{256, 512, 1024, 2048, 4096, 8192});
  CHECK(cfg.delta == doctest::Approx(0.1));
  CHECK(cfg.n_seeds == 32);
  CHECK(cfg.algorithm == Algorithm::sgd_clipped);
  CHECK(cfg.problem.family == ProblemFamily::robust_regression);
}

TEST_CASE("alpha outside (1,2] is a schema error") {
  try {
    parse_config_text(R"({"kind":"sweep","algorithm":"sgd-clipped","alpha":2.5})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("alpha must lie in (1,2]") != std::string::npos);
    CHECK(std::string(e.what()).find("/alpha") != std::string::npos);
  }
  CHECK_THROWS_AS(
      parse_config_text(R"({"kind":"sweep","algorithm":"sgd-clipped","alpha":1.0})"),
      ConfigError);
}

TEST_CASE("unknown keys are rejected with their pointer") {
  try {
    parse_config_text(
        R"({"kind":"sweep","algorithm":"sgd-clipped","alpha":2.0,"problem":{"dd":3}})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("/problem/dd") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text(R"({"kind":"sweep","algorithm":"sgd-clipped",
      "alpha":2.0,"bogus":1})"),
                  ConfigError);
}

TEST_CASE("malformed json and wrong kinds") {
  CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"kind":"dance"})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"kind":"sweep","alpha":2.0})"), ConfigError);
  CHECK_THROWS_AS(
      parse_config_text(
          R"({"kind":"sweep","algorithm":"sgd-clipped","alpha":1.5,
              "problem":{"noise":{"kind":"pareto-additive","tail_shape":1.4}}})"),
      ConfigError);
}

TEST_CASE("config echo round-trips through the parser") {
  RunConfig cfg = parse_config_text(R"({
    "kind": "sweep", "algorithm": "sgdm-clipped", "alpha": 1.8,
    "problem": {"family": "robust-regression", "d": 6, "n": 100,
                "noise": {"kind": "pareto-additive", "tail_shape": 2.1, "scale": 0.7}},
    "schedule": {"q": 0.5, "s": 2.0},
    "T_grid": [64, 128, 256, 512], "n_seeds": 16, "delta": 0.2, "seed": 99})");
  json echo = config_echo(cfg);
  RunConfig again = parse_config(echo);
  CHECK(config_echo(again) == echo);
  CHECK(again.alpha == cfg.alpha);
  CHECK(again.q == cfg.q);
  CHECK(again.s == cfg.s);
  CHECK(again.seed == cfg.seed);
  CHECK(again.T_grid == cfg.T_grid);
}

TEST_CASE("trajectory csv: header, one row per sample, inf rendering") {
  TrialRecord rec;
  TrajectorySample s1{1, 0.25, 0.5, 0.01, false};
  TrajectorySample s2{2, std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity(), 0.01, true};
  rec.samples = {s1, s2};
  std::string csv = trajectory_csv(rec);
  CHECK(csv ==
        "t,grad_norm_sq,loss,stepsize,clip_active\n"
        "1,0.25,0.5,0.01,0\n"
        "2,inf,inf,0.01,1\n");
}

TEST_CASE("one-step record renders header plus one row") {
  TrialRecord rec;
  rec.samples = {TrajectorySample{1, 1.0, 2.0, 0.1, false}};
  std::string csv = trajectory_csv(rec);
  CHECK(csv ==
        "t,grad_norm_sq,loss,stepsize,clip_active\n"
        "1,1,2,0.10000000000000001,0\n");
}

TEST_CASE("float formatting is round-trip exact") {
  for (double v : {0.1, 1.0 / 3.0, 6.02e23, 5e-324, -0.0, 123456.789012345678}) {
    std::string s = format_double(v);
    double back = std::strtod(s.c_str(), nullptr);
    CHECK(back == v);
  }
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("schedule serialization round-trip re-validates") {
  Schedule s = schedule_sgd(256, 2.0, 0.2, 1.0, 2.0);
  json doc = schedule_to_json(s);
  Schedule back = schedule_from_json(doc);
  CHECK(back.eta == s.eta);
  CHECK(back.tau == s.tau);
  CHECK(back.T == s.T);
  // tampering with a constraint field must throw on load
  doc["q"] = 1e9;
  CHECK_THROWS_AS(schedule_from_json(doc), ScheduleError);
}

TEST_CASE("svg: empty points yields a no-data annotation") {
  RateFit fit;
  std::string svg = loglog_svg({}, fit, "empty");
  CHECK(svg.find("no data") != std::string::npos);
  CHECK(svg.find("<svg") != std::string::npos);
}

TEST_CASE("svg: fitted and guide lines carry numeric slopes, inf points footnoted") {
  RateFit fit;
  fit.valid = true;
  fit.slope = -0.5;
  fit.intercept = 0.0;
  fit.target_exponent = 0.5;
  std::vector<std::pair<double, double>> pts{
      {10, 0.3}, {100, 0.1}, {1000, std::numeric_limits<double>::infinity()}};
  std::string svg = loglog_svg(pts, fit, "demo");
  CHECK(svg.find("fit slope = -0.5") != std::string::npos);
  CHECK(svg.find("target slope = -0.5") != std::string::npos);
  CHECK(svg.find("1 non-finite point(s) omitted") != std::string::npos);
  CHECK(svg.find("circle") != std::string::npos);
}

TEST_CASE("dataset csv: header columns and one row per sample") {
  NoiseModel none;
  none.kind = NoiseKind::none;
  none.moment = MomentBound{2.0, 0.0};
  Problem p = Problem::robust_regression(2, 3, 5, none, 0.0);
  std::string csv = dataset_csv(p);
  CHECK(csv.rfind("x_1,x_2,y\n", 0) == 0);
  std::size_t rows = 0;
  for (char c : csv)
    if (c == '\n') ++rows;
  CHECK(rows == 4);  // header + 3 samples
}

TEST_CASE("contrast default config pins the infinite-variance quadratic setting") {
  RunConfig cfg = parse_config_text(R"({"kind":"contrast","algorithm":"sgd-clipped"})");
  CHECK(cfg.problem.family == ProblemFamily::quadratic);
  CHECK(cfg.problem.noise_kind == NoiseKind::pareto_additive);
  CHECK(cfg.problem.tail_shape == doctest::Approx(1.8));
  CHECK(cfg.alpha == doctest::Approx(1.5));
}
