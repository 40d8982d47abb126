#include "heavytail/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace heavytail {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& ptr,
                    const std::set<std::string>& allowed) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key()))
      throw ConfigError("unknown key at " + ptr + "/" + item.key());
  }
}

const json* find(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double get_number(const json& obj, const std::string& ptr, const std::string& key,
                  double fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) throw ConfigError(ptr + "/" + key + " must be a number");
  return v->get<double>();
}

long long get_integer(const json& obj, const std::string& ptr, const std::string& key,
                      long long fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) throw ConfigError(ptr + "/" + key + " must be an integer");
  return v->get<long long>();
}

std::string get_string(const json& obj, const std::string& ptr, const std::string& key,
                       const std::string& fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_string()) throw ConfigError(ptr + "/" + key + " must be a string");
  return v->get<std::string>();
}

template <typename T>
std::vector<T> get_array(const json& obj, const std::string& ptr, const std::string& key,
                         std::vector<T> fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_array()) throw ConfigError(ptr + "/" + key + " must be an array");
  std::vector<T> out;
  for (const auto& e : *v) {
    if (!e.is_number()) throw ConfigError(ptr + "/" + key + " must hold numbers");
    out.push_back(e.get<T>());
  }
  if (out.empty()) throw ConfigError(ptr + "/" + key + " must be non-empty");
  return out;
}

ProblemConfig parse_problem(const json& obj, const std::string& ptr) {
  reject_unknown(obj, ptr,
                 {"family", "d", "n", "condition", "label_noise_scale", "noise"});
  ProblemConfig pc;
  try {
    pc.family = family_from_string(get_string(obj, ptr, "family", "robust-regression"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(ptr + "/family: " + e.what());
  }
  pc.d = static_cast<int>(get_integer(obj, ptr, "d", pc.d));
  if (pc.d < 1) throw ConfigError(ptr + "/d must be >= 1");
  pc.n = get_integer(obj, ptr, "n", pc.n);
  if (pc.n < 1) throw ConfigError(ptr + "/n must be >= 1");
  pc.condition = get_number(obj, ptr, "condition", pc.condition);
  if (!(pc.condition >= 1.0)) throw ConfigError(ptr + "/condition must be >= 1");
  pc.label_noise_scale = get_number(obj, ptr, "label_noise_scale", pc.label_noise_scale);
  if (pc.label_noise_scale < 0.0)
    throw ConfigError(ptr + "/label_noise_scale must be >= 0");
  if (const json* noise = find(obj, "noise")) {
    std::string nptr = ptr + "/noise";
    reject_unknown(*noise, nptr, {"kind", "tail_shape", "scale", "g"});
    try {
      pc.noise_kind = noise_kind_from_string(
          get_string(*noise, nptr, "kind", "gaussian-additive"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(nptr + "/kind: " + e.what());
    }
    pc.tail_shape = get_number(*noise, nptr, "tail_shape", pc.tail_shape);
    pc.noise_scale = get_number(*noise, nptr, "scale", pc.noise_scale);
    pc.g = get_number(*noise, nptr, "g", pc.g);
    if (!(pc.noise_scale > 0.0)) throw ConfigError(nptr + "/scale must be > 0");
    if (pc.g < 0.0) throw ConfigError(nptr + "/g must be >= 0");
  }
  return pc;
}

ConclabConfig parse_conclab(const json& obj, const std::string& ptr) {
  reject_unknown(obj, ptr,
                 {"checks", "tau_grid", "n_mc", "deltas", "n_trials", "mds_n",
                  "uniform_conv_n_fresh", "sum_check_sequences"});
  ConclabConfig cc;
  if (const json* checks = find(obj, "checks")) {
    if (!checks->is_array()) throw ConfigError(ptr + "/checks must be an array");
    cc.checks.clear();
    const std::set<std::string> known = {
        "clip-bias",        "clip-second-moment",  "bernstein-scalar",
        "pinelis-vector",   "uniform-convergence", "adagrad-sums"};
    for (const auto& e : *checks) {
      if (!e.is_string() || !known.count(e.get<std::string>()))
        throw ConfigError(ptr + "/checks holds an unknown check name");
      cc.checks.push_back(e.get<std::string>());
    }
  }
  cc.tau_grid = get_array<double>(obj, ptr, "tau_grid", cc.tau_grid);
  cc.n_mc = get_integer(obj, ptr, "n_mc", cc.n_mc);
  if (cc.n_mc < 10000) throw ConfigError(ptr + "/n_mc must be >= 10000");
  cc.deltas = get_array<double>(obj, ptr, "deltas", cc.deltas);
  for (double d : cc.deltas) {
    if (!(d > 0.0) || !(d < 1.0)) throw ConfigError(ptr + "/deltas must lie in (0,1)");
  }
  cc.n_trials = get_integer(obj, ptr, "n_trials", cc.n_trials);
  if (cc.n_trials < 100) throw ConfigError(ptr + "/n_trials must be >= 100");
  cc.mds_n = get_integer(obj, ptr, "mds_n", cc.mds_n);
  if (cc.mds_n < 1) throw ConfigError(ptr + "/mds_n must be >= 1");
  cc.uniform_conv_n_fresh =
      get_integer(obj, ptr, "uniform_conv_n_fresh", cc.uniform_conv_n_fresh);
  if (cc.uniform_conv_n_fresh < 1)
    throw ConfigError(ptr + "/uniform_conv_n_fresh must be >= 1");
  cc.sum_check_sequences =
      get_integer(obj, ptr, "sum_check_sequences", cc.sum_check_sequences);
  if (cc.sum_check_sequences < 1) throw ConfigError(ptr + "/sum_check_sequences must be >= 1");
  return cc;
}

}  // namespace

RunConfig parse_config(const json& root) {
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(root, "",
                 {"kind", "algorithm", "alpha", "problem", "schedule", "T", "T_grid",
                  "n_grid", "n_seeds", "delta", "seed", "record_every", "n_fresh",
                  "slope_tolerance", "conclab", "out_dir", "threads"});
  RunConfig cfg;
  cfg.kind = get_string(root, "", "kind", "");
  const std::set<std::string> kinds = {"run", "sweep", "conclab", "gengap", "contrast"};
  if (!kinds.count(cfg.kind))
    throw ConfigError("/kind must be one of run|sweep|conclab|gengap|contrast");

  if (cfg.kind != "conclab") {
    std::string alg = get_string(root, "", "algorithm", "");
    if (alg.empty()) throw ConfigError("/algorithm is required");
    try {
      cfg.algorithm = algorithm_from_string(alg);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("/algorithm: ") + e.what());
    }
  }

  cfg.alpha = get_number(root, "", "alpha", cfg.alpha);
  if (!(cfg.alpha > 1.0) || !(cfg.alpha <= 2.0))
    throw ConfigError("/alpha: alpha must lie in (1,2]");

  if (const json* prob = find(root, "problem")) cfg.problem = parse_problem(*prob, "/problem");
  if (cfg.kind == "contrast" && !find(root, "problem")) {
    // default contrast setting: quadratic under infinite-variance noise
    cfg.problem.family = ProblemFamily::quadratic;
    cfg.problem.noise_kind = NoiseKind::pareto_additive;
    cfg.problem.tail_shape = 1.8;
    cfg.alpha = get_number(root, "", "alpha", 1.5);
    if (!(cfg.alpha > 1.0) || !(cfg.alpha <= 2.0))
      throw ConfigError("/alpha: alpha must lie in (1,2]");
  }

  if (const json* sch = find(root, "schedule")) {
    reject_unknown(*sch, "/schedule", {"p", "q", "s", "r", "g0", "eta"});
    cfg.p = get_number(*sch, "/schedule", "p", cfg.p);
    cfg.q = get_number(*sch, "/schedule", "q", cfg.q);
    cfg.s = get_number(*sch, "/schedule", "s", cfg.s);
    cfg.r = get_number(*sch, "/schedule", "r", cfg.r);
    cfg.g0 = get_number(*sch, "/schedule", "g0", cfg.g0);
    cfg.eta = get_number(*sch, "/schedule", "eta", cfg.eta);
    if (!(cfg.q > 0.0)) throw ConfigError("/schedule/q must be > 0");
    if (!(cfg.s > 0.0)) throw ConfigError("/schedule/s must be > 0");
    if (!(cfg.r > 0.0)) throw ConfigError("/schedule/r must be > 0");
    if (!(cfg.g0 > 0.0)) throw ConfigError("/schedule/g0 must be > 0");
  }

  cfg.T = get_integer(root, "", "T", cfg.T);
  if (cfg.T < 1) throw ConfigError("/T must be >= 1");
  cfg.T_grid = get_array<long long>(root, "", "T_grid", cfg.T_grid);
  cfg.n_grid = get_array<long long>(root, "", "n_grid", cfg.n_grid);
  cfg.n_seeds = static_cast<int>(get_integer(root, "", "n_seeds", cfg.n_seeds));
  if (cfg.n_seeds < 1) throw ConfigError("/n_seeds must be >= 1");
  cfg.delta = get_number(root, "", "delta", cfg.delta);
  if (!(cfg.delta > 0.0) || !(cfg.delta < 1.0))
    throw ConfigError("/delta must lie in (0,1)");
  const json* sd = find(root, "seed");
  if (sd) {
    if (!sd->is_number_unsigned() && !sd->is_number_integer())
      throw ConfigError("/seed must be a nonnegative integer");
    cfg.seed = sd->get<std::uint64_t>();
  }
  cfg.record_every = get_integer(root, "", "record_every", cfg.record_every);
  if (cfg.record_every < 0) throw ConfigError("/record_every must be >= 0");
  cfg.n_fresh = get_integer(root, "", "n_fresh", cfg.n_fresh);
  if (cfg.n_fresh < 1) throw ConfigError("/n_fresh must be >= 1");
  cfg.slope_tolerance = get_number(root, "", "slope_tolerance", cfg.slope_tolerance);
  if (!(cfg.slope_tolerance > 0.0)) throw ConfigError("/slope_tolerance must be > 0");
  if (const json* cc = find(root, "conclab")) cfg.conclab = parse_conclab(*cc, "/conclab");
  cfg.out_dir = get_string(root, "", "out_dir", cfg.out_dir);
  cfg.threads = static_cast<int>(get_integer(root, "", "threads", cfg.threads));
  if (cfg.threads < 0) throw ConfigError("/threads must be >= 0");

  // cross-field checks the schedule module will rely on
  if (cfg.problem.noise_kind == NoiseKind::pareto_additive ||
      cfg.problem.noise_kind == NoiseKind::sampling) {
    if (!(cfg.problem.tail_shape > cfg.alpha))
      throw ConfigError("/problem/noise/tail_shape must exceed alpha");
  }
  return cfg;
}

RunConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not well-formed JSON: ") + e.what());
  }
  return parse_config(root);
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

nlohmann::json config_echo(const RunConfig& cfg) {
  json problem = {
      {"family", to_string(cfg.problem.family)},
      {"d", cfg.problem.d},
      {"n", cfg.problem.n},
      {"condition", cfg.problem.condition},
      {"label_noise_scale", cfg.problem.label_noise_scale},
      {"noise",
       {{"kind", to_string(cfg.problem.noise_kind)},
        {"tail_shape", cfg.problem.tail_shape},
        {"scale", cfg.problem.noise_scale},
        {"g", cfg.problem.g}}},
  };
  json schedule = {{"q", cfg.q}, {"s", cfg.s}, {"r", cfg.r}, {"g0", cfg.g0}};
  if (cfg.p > 0.0) schedule["p"] = cfg.p;
  if (cfg.eta > 0.0) schedule["eta"] = cfg.eta;
  json out = {
      {"kind", cfg.kind},
      {"alpha", cfg.alpha},
      {"problem", problem},
      {"schedule", schedule},
      {"T", cfg.T},
      {"T_grid", cfg.T_grid},
      {"n_grid", cfg.n_grid},
      {"n_seeds", cfg.n_seeds},
      {"delta", cfg.delta},
      {"seed", cfg.seed},
      {"record_every", cfg.record_every},
      {"n_fresh", cfg.n_fresh},
      {"slope_tolerance", cfg.slope_tolerance},
  };
  if (cfg.kind != "conclab") out["algorithm"] = to_string(cfg.algorithm);
  if (cfg.kind == "conclab") {
    out["conclab"] = {{"checks", cfg.conclab.checks},
                      {"tau_grid", cfg.conclab.tau_grid},
                      {"n_mc", cfg.conclab.n_mc},
                      {"deltas", cfg.conclab.deltas},
                      {"n_trials", cfg.conclab.n_trials},
                      {"mds_n", cfg.conclab.mds_n},
                      {"uniform_conv_n_fresh", cfg.conclab.uniform_conv_n_fresh},
                      {"sum_check_sequences", cfg.conclab.sum_check_sequences}};
  }
  return out;
}

Problem build_problem(const RunConfig& cfg, std::uint64_t data_seed) {
  NoiseModel noise;
  noise.kind = cfg.problem.noise_kind;
  noise.tail_shape = cfg.problem.tail_shape;
  noise.scale = cfg.problem.noise_scale;
  noise.moment = MomentBound{cfg.alpha, cfg.problem.g};
  if (cfg.problem.family == ProblemFamily::quadratic)
    return Problem::quadratic(cfg.problem.d, cfg.problem.condition, noise);
  return Problem::robust_regression(cfg.problem.d, static_cast<int>(cfg.problem.n),
                                    cfg.seed, noise, cfg.problem.label_noise_scale,
                                    data_seed);
}

}  // namespace heavytail
