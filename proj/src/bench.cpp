#include "turbo/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "turbo/ekf.hpp"
#include "turbo/error.hpp"
#include "turbo/mpf.hpp"
#include "turbo/sir.hpp"
#include "turbo/turbo_filter.hpp"

#ifndef TURBO_VERSION
#define TURBO_VERSION "unknown"
#endif

namespace turbo {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::kConfigError, what);
}

template <typename T>
T get_as(const json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    config_error("config key '" + key + "' has the wrong type");
  }
}

std::size_t get_count(const json& value, const std::string& key) {
  if (!value.is_number_integer() || value.get<long long>() < 0) {
    config_error("config key '" + key + "' must be a non-negative integer");
  }
  return value.get<std::size_t>();
}

template <int N>
Eigen::Matrix<double, N, 1> get_fixed(const json& value, const std::string& key) {
  const auto v = get_as<std::vector<double>>(value, key);
  if (v.size() != static_cast<std::size_t>(N)) {
    config_error("config key '" + key + "' must hold " + std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) out(i) = v[static_cast<std::size_t>(i)];
  return out;
}

bool is_abort(ErrorCode code) {
  switch (code) {
    case ErrorCode::kAllZeroWeights:
    case ErrorCode::kSingularMatrix:
    case ErrorCode::kNotPsd:
    case ErrorCode::kNonDifferentiablePoint:
      return true;
    default:
      return false;
  }
}

struct RunOutcome {
  std::optional<RunErrors> errors;
  double seconds = 0.0;
};

RunOutcome run_once(const RunConfig& config, const ClgModel& model, std::size_t r) {
  const Trajectory truth = simulate(model, config.t_steps, trajectory_seed(config.base_seed, r));
  const ClgDims& d = model.dims();
  RunErrors errors{Matrix(d.d_l, static_cast<Eigen::Index>(config.t_steps)),
                   Matrix(d.d_n, static_cast<Eigen::Index>(config.t_steps))};
  RunOutcome outcome;
  try {
    auto filter = make_filter(config, model, filter_seed(config.base_seed, r));
    std::vector<StepEstimate> estimates(config.t_steps);
    outcome.seconds = time_call([&] {
      for (std::size_t l = 0; l < config.t_steps; ++l) {
        estimates[l] = filter->step(l, truth.measurement(l));
      }
    });
    for (std::size_t l = 0; l < config.t_steps; ++l) {
      const Vector x = truth.state(l);
      const auto col = static_cast<Eigen::Index>(l);
      errors.err_l.col(col) = estimates[l].x_lin - x.head(d.d_l);
      errors.err_n.col(col) = estimates[l].x_non - x.tail(d.d_n);
    }
  } catch (const Error& e) {
    if (!is_abort(e.code())) throw;
    return outcome;
  }
  if (!errors.err_l.allFinite() || !errors.err_n.allFinite()) return outcome;
  outcome.errors = std::move(errors);
  return outcome;
}

void write_number(std::ostream& out, double v) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
}

}  // namespace

std::string to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::kEkf: return "ekf";
    case FilterKind::kMpf: return "mpf";
    case FilterKind::kTf1: return "tf1";
    case FilterKind::kTf2: return "tf2";
    case FilterKind::kPf: return "pf";
  }
  return "unknown";
}

FilterKind parse_filter_kind(const std::string& name) {
  for (FilterKind k : {FilterKind::kEkf, FilterKind::kMpf, FilterKind::kTf1, FilterKind::kTf2,
                       FilterKind::kPf}) {
    if (to_string(k) == name) return k;
  }
  config_error("unknown filter '" + name + "' (expected ekf, mpf, tf1, tf2 or pf)");
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  config_error("unknown format '" + name + "' (expected csv or json)");
}

void RunConfig::validate() const {
  if (n_runs < 1) config_error("n_runs must be >= 1");
  if (t_steps < 1) config_error("t_steps must be >= 1");
  const bool particles = filter != FilterKind::kEkf;
  if (particles && n_p < 1) config_error("n_p must be >= 1");
  const bool turbo = filter == FilterKind::kTf1 || filter == FilterKind::kTf2;
  if (turbo && n_it < 1) config_error("n_it must be >= 1");
  try {
    model.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
}

void apply_config_json(RunConfig& config, const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) config_error("config must be a JSON object");

  AgentParams& m = config.model;
  for (const auto& [key, value] : root.items()) {
    if (key == "filter") config.filter = parse_filter_kind(get_as<std::string>(value, key));
    else if (key == "n_p") config.n_p = get_count(value, key);
    else if (key == "n_it") config.n_it = get_count(value, key);
    else if (key == "t_steps") config.t_steps = get_count(value, key);
    else if (key == "n_runs") config.n_runs = get_count(value, key);
    else if (key == "base_seed") config.base_seed = get_as<std::uint64_t>(value, key);
    else if (key == "threads") config.threads = get_count(value, key);
    else if (key == "out") config.out = get_as<std::string>(value, key);
    else if (key == "format") config.format = parse_report_format(get_as<std::string>(value, key));
    else if (key == "det_factors") {
      const bool on = get_as<bool>(value, key);
      config.det_factors.include_det_ms = on;
      config.det_factors.include_det_pm = on;
    }
    else if (key == "include_det_ms") config.det_factors.include_det_ms = get_as<bool>(value, key);
    else if (key == "include_det_pm") config.det_factors.include_det_pm = get_as<bool>(value, key);
    else if (key == "rho") m.rho = get_as<double>(value, key);
    else if (key == "t_s") m.t_s = get_as<double>(value, key);
    else if (key == "sigma_p") m.sigma_p = get_as<double>(value, key);
    else if (key == "sigma_ep") m.sigma_ep = get_as<double>(value, key);
    else if (key == "sigma_ev") m.sigma_ev = get_as<double>(value, key);
    else if (key == "a0") m.a0 = get_as<double>(value, key);
    else if (key == "d0") m.d0 = get_as<double>(value, key);
    else if (key == "a0_tilde") m.a0_tilde = get_as<double>(value, key);
    else if (key == "v0") m.v0 = get_as<double>(value, key);
    else if (key == "p_init") m.p_init = get_fixed<2>(value, key);
    else if (key == "v_init") m.v_init = get_fixed<2>(value, key);
    else if (key == "init_std") m.init_std = get_fixed<4>(value, key);
    else config_error("unknown config key '" + key + "'");
  }
}

Rmse compute_rmse(const std::vector<RunErrors>& runs) {
  double sum_l = 0.0;
  double sum_n = 0.0;
  Eigen::Index count = 0;
  for (const auto& r : runs) {
    if (r.err_l.cols() != r.err_n.cols()) {
      throw Error(ErrorCode::kDimensionMismatch, "error sequences differ in length");
    }
    sum_l += r.err_l.squaredNorm();
    sum_n += r.err_n.squaredNorm();
    count += r.err_l.cols();
  }
  if (count == 0) throw Error(ErrorCode::kEmptyInput, "no errors to average");
  const double c = static_cast<double>(count);
  return {std::sqrt(sum_l / c), std::sqrt(sum_n / c)};
}

std::uint64_t run_seed(std::uint64_t base_seed, std::size_t r) { return split_seed(base_seed, r); }

std::uint64_t trajectory_seed(std::uint64_t base_seed, std::size_t r) {
  return split_seed(run_seed(base_seed, r), 0);
}

std::uint64_t filter_seed(std::uint64_t base_seed, std::size_t r) {
  return split_seed(run_seed(base_seed, r), 1);
}

std::unique_ptr<Filter> make_filter(const RunConfig& config, const ClgModel& model,
                                    std::uint64_t seed) {
  const auto n_p = static_cast<Eigen::Index>(config.n_p);
  switch (config.filter) {
    case FilterKind::kEkf:
      return std::make_unique<Ekf>(model);
    case FilterKind::kMpf:
      return std::make_unique<Mpf>(model, n_p, seed);
    case FilterKind::kPf:
      return std::make_unique<SirPf>(model, n_p, seed);
    case FilterKind::kTf1:
    case FilterKind::kTf2: {
      TurboOptions options;
      options.schedule =
          config.filter == FilterKind::kTf1 ? Schedule::kEkfFirst : Schedule::kPfFirst;
      options.n_particles = n_p;
      options.n_iterations = config.n_it;
      options.weights = config.det_factors;
      return std::make_unique<TurboFilter>(model, options, seed);
    }
  }
  config_error("unhandled filter kind");
}

double time_call(const std::function<void()>& body) {
  const auto start = std::chrono::steady_clock::now();
  body();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(stop - start).count();
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "median of an empty sample");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                   values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(values.begin(),
                                     values.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

double measure_execution_time(const std::function<void()>& body, std::size_t repeats) {
  body();  // warm-up
  std::vector<double> times;
  times.reserve(std::max<std::size_t>(repeats, 1));
  for (std::size_t i = 0; i < std::max<std::size_t>(repeats, 1); ++i) {
    times.push_back(time_call(body));
  }
  return median(std::move(times));
}

RunReport run_monte_carlo(const RunConfig& config) {
  config.validate();
  const AgentModel model(config.model);

  // Warm-up pass on run 0; its timing and errors are discarded.
  run_once(config, model, 0);

  std::vector<RunOutcome> outcomes(config.n_runs);
  std::size_t threads = config.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, config.n_runs);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t r = next++; r < config.n_runs; r = next++) {
      try {
        outcomes[r] = run_once(config, model, r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  RunReport report;
  report.config = config;
  report.version = version_string();
  std::vector<RunErrors> kept;
  std::vector<double> times;
  for (auto& o : outcomes) {
    if (!o.errors) {
      ++report.n_aborted;
      continue;
    }
    kept.push_back(std::move(*o.errors));
    times.push_back(o.seconds);
  }
  if (kept.empty()) {
    report.rmse_l = report.rmse_n = std::numeric_limits<double>::quiet_NaN();
    report.et_total_s = report.et_per_step_s = std::numeric_limits<double>::quiet_NaN();
    return report;
  }
  const Rmse rmse = compute_rmse(kept);
  report.rmse_l = rmse.l;
  report.rmse_n = rmse.n;
  report.et_total_s = median(std::move(times));
  report.et_per_step_s = report.et_total_s / static_cast<double>(config.t_steps);
  return report;
}

void emit_report(std::ostream& out, const std::vector<RunReport>& reports, ReportFormat format) {
  if (format == ReportFormat::kCsv) {
    out << "filter,n_p,n_it,t_steps,n_runs,base_seed,rmse_l,rmse_n,et_total_s,et_per_step_s,"
           "n_aborted\n";
    for (const auto& r : reports) {
      const RunConfig& c = r.config;
      out << to_string(c.filter) << ',' << c.n_p << ',' << c.n_it << ',' << c.t_steps << ','
          << c.n_runs << ',' << c.base_seed << ',';
      write_number(out, r.rmse_l);
      out << ',';
      write_number(out, r.rmse_n);
      out << ',';
      write_number(out, r.et_total_s);
      out << ',';
      write_number(out, r.et_per_step_s);
      out << ',' << r.n_aborted << '\n';
    }
  } else {
    json rows = json::array();
    for (const auto& r : reports) {
      const RunConfig& c = r.config;
      rows.push_back({{"filter", to_string(c.filter)},
                      {"n_p", c.n_p},
                      {"n_it", c.n_it},
                      {"t_steps", c.t_steps},
                      {"n_runs", c.n_runs},
                      {"base_seed", c.base_seed},
                      {"rmse_l", r.rmse_l},
                      {"rmse_n", r.rmse_n},
                      {"et_total_s", r.et_total_s},
                      {"et_per_step_s", r.et_per_step_s},
                      {"n_aborted", r.n_aborted},
                      {"version", r.version}});
    }
    out << rows.dump(2) << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoError, "failed writing report");
}

void emit_report(const std::string& path, const std::vector<RunReport>& reports,
                 ReportFormat format) {
  std::ofstream file(path);
  if (!file) throw Error(ErrorCode::kIoError, "cannot open '" + path + "' for writing");
  emit_report(file, reports, format);
}

const char* version_string() { return TURBO_VERSION; }

}  // namespace turbo
