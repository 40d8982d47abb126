#ifndef HEAVYTAIL_CONFIG_HPP
#define HEAVYTAIL_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "heavytail/problem.hpp"
#include "heavytail/schedule.hpp"

namespace heavytail {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemConfig {
  ProblemFamily family = ProblemFamily::robust_regression;
  int d = 8;
  long long n = 256;
  double condition = 10.0;  // quadratic only
  double label_noise_scale = 0.1;
  NoiseKind noise_kind = NoiseKind::gaussian_additive;
  double tail_shape = 3.0;
  double noise_scale = 1.0;
  double g = 0.0;  // declared G; 0 means resolve empirically when needed
};

struct ConclabConfig {
  std::vector<std::string> checks = {"clip-bias",        "clip-second-moment",
                                     "bernstein-scalar", "pinelis-vector",
                                     "uniform-convergence", "adagrad-sums"};
  std::vector<double> tau_grid = {0.5, 1.0, 2.0, 4.0, 8.0};
  long long n_mc = 1000000;
  std::vector<double> deltas = {0.1, 0.05, 0.01};
  long long n_trials = 10000;
  long long mds_n = 1000;
  long long uniform_conv_n_fresh = 100000;
  long long sum_check_sequences = 1000;
};

struct RunConfig {
  std::string kind;  // run | sweep | conclab | gengap | contrast
  Algorithm algorithm = Algorithm::sgd_clipped;
  double alpha = 2.0;
  ProblemConfig problem;
  // schedule constants; negative p/eta mean "use default"
  double p = -1.0, q = 1.0, s = 1.0, r = 1.0, g0 = 1.0, eta = -1.0;
  long long T = 4096;
  std::vector<long long> T_grid = {256, 512, 1024, 2048, 4096, 8192};
  std::vector<long long> n_grid = {64, 128, 256, 512, 1024, 2048, 4096};
  int n_seeds = 32;
  double delta = 0.1;
  std::uint64_t seed = 42;
  long long record_every = 0;  // 0 = auto
  long long n_fresh = 1000000;
  double slope_tolerance = 0.15;
  ConclabConfig conclab;
  // runtime-only knobs, excluded from the config echo
  std::string out_dir = "out";
  int threads = 0;
};

// Validates against the published schema (docs/config.schema.json); errors
// name the JSON pointer of the offending field, unknown keys are rejected.
RunConfig parse_config(const nlohmann::json& root);
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Fully resolved config with defaults filled in; round-trips through
// parse_config and excludes runtime-only knobs so outputs stay byte-stable.
nlohmann::json config_echo(const RunConfig& config);

// Builds the configured problem (dataset seeded from config.seed unless a
// caller supplies a replacement data seed).
Problem build_problem(const RunConfig& config, std::uint64_t data_seed = 0);

}  // namespace heavytail

#endif
