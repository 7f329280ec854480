#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "turbo/agent_model.hpp"
#include "turbo/filter.hpp"
#include "turbo/particles.hpp"

namespace turbo {

enum class FilterKind { kEkf, kMpf, kTf1, kTf2, kPf };

std::string to_string(FilterKind kind);
/// Throws ConfigError on unknown names.
FilterKind parse_filter_kind(const std::string& name);

enum class ReportFormat { kCsv, kJson };

ReportFormat parse_report_format(const std::string& name);

struct RunConfig {
  FilterKind filter = FilterKind::kTf1;
  std::size_t n_p = 100;
  std::size_t n_it = 1;
  std::size_t t_steps = 300;
  std::size_t n_runs = 50;
  std::uint64_t base_seed = 1;
  AgentParams model;
  WeightOptions det_factors;
  std::size_t threads = 0;  // 0 = hardware concurrency
  std::string out;          // empty = stdout
  ReportFormat format = ReportFormat::kCsv;

  /// Throws ConfigError.
  void validate() const;
};

/// Overrides fields of `config` with the keys present in a flat JSON object.
/// Unknown keys and wrongly typed values throw ConfigError.
void apply_config_json(RunConfig& config, const std::string& json_text);

struct RunReport {
  RunConfig config;
  double rmse_l = 0.0;
  double rmse_n = 0.0;
  double et_total_s = 0.0;     // median filter-loop time of one run
  double et_per_step_s = 0.0;  // et_total_s / t_steps
  std::size_t n_aborted = 0;
  std::string version;
};

/// Per-step estimation errors of one run, one column per step.
struct RunErrors {
  Matrix err_l;
  Matrix err_n;
};

struct Rmse {
  double l = 0.0;
  double n = 0.0;
};

/// sqrt of the squared error norms pooled over runs and steps. Throws
/// EmptyInput when there is nothing to average.
Rmse compute_rmse(const std::vector<RunErrors>& runs);

/// Seeds used by run r: trajectory and filter draw from independent streams.
std::uint64_t run_seed(std::uint64_t base_seed, std::size_t r);
std::uint64_t trajectory_seed(std::uint64_t base_seed, std::size_t r);
std::uint64_t filter_seed(std::uint64_t base_seed, std::size_t r);

std::unique_ptr<Filter> make_filter(const RunConfig& config, const ClgModel& model,
                                    std::uint64_t seed);

/// Wall time in seconds of `body` on a monotonic clock.
double time_call(const std::function<void()>& body);

/// Runs `body` once untimed, then `repeats` timed calls; returns the median.
double measure_execution_time(const std::function<void()>& body, std::size_t repeats);

double median(std::vector<double> values);

RunReport run_monte_carlo(const RunConfig& config);

void emit_report(std::ostream& out, const std::vector<RunReport>& reports, ReportFormat format);
/// Writes to `path`; throws IoError if the file cannot be written.
void emit_report(const std::string& path, const std::vector<RunReport>& reports,
                 ReportFormat format);

const char* version_string();

}  // namespace turbo
