#ifndef HEAVYTAIL_IO_HPP
#define HEAVYTAIL_IO_HPP

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "heavytail/config.hpp"
#include "heavytail/harness.hpp"
#include "heavytail/optimizer.hpp"

namespace heavytail {

inline constexpr const char* kToolVersion = "heavytail-opt 0.1.0";

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Round-trip-exact float text (17 significant digits) so deterministic output
// is testable byte-for-byte.
std::string format_double(double v);

std::string trajectory_csv(const TrialRecord& record);
void write_text_file(const std::string& path, const std::string& content);
void write_trajectory_csv(const TrialRecord& record, const std::string& path);
void write_json_file(const nlohmann::json& doc, const std::string& path);

// Audit dump of the training set, columns x_1..x_d,y.
std::string dataset_csv(const Problem& problem);
void write_dataset_csv(const Problem& problem, const std::string& path);

nlohmann::json schedule_to_json(const Schedule& schedule);
Schedule schedule_from_json(const nlohmann::json& doc);  // re-validates constraints

nlohmann::json rate_fit_to_json(const RateFit& fit);
nlohmann::json environment_stamp(std::uint64_t seed);

nlohmann::json sweep_summary(const RunConfig& config, const SweepResult& result);
nlohmann::json run_summary(const RunConfig& config, const TrialRecord& record);
nlohmann::json contrast_summary(const RunConfig& config, const ContrastResult& result);
nlohmann::json gengap_summary(const RunConfig& config, const GenGapResult& result);

// Log-log scatter with the fitted line and a target-slope guide line; finite
// points only, with a footnote when any were omitted, or a "no data"
// annotation when nothing is plottable.
std::string loglog_svg(const std::vector<std::pair<double, double>>& points,
                       const RateFit& fit, const std::string& title);
void write_loglog_svg(const std::vector<std::pair<double, double>>& points,
                      const RateFit& fit, const std::string& title,
                      const std::string& path);

void ensure_directory(const std::string& path);

}  // namespace heavytail

#endif
