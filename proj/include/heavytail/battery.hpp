#ifndef HEAVYTAIL_BATTERY_HPP
#define HEAVYTAIL_BATTERY_HPP

#include <json.hpp>

#include "heavytail/config.hpp"

namespace heavytail {

// The default concentration-check battery behind the `conclab` subcommand:
// clipping bias and centered-second-moment bounds on two mean-shifted radial
// Pareto distributions, martingale coverage for the scalar and vector
// inequalities at each configured delta, the uniform-convergence bound value
// plus a sampled ball check, and the deterministic summation inequalities on
// random nonnegative sequences. Returns one JSON object per check.
nlohmann::json run_conclab_battery(const RunConfig& config, int threads);

}  // namespace heavytail

#endif
