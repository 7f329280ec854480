// Monte Carlo benchmark driver for the agent tracking model.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "turbo/bench.hpp"
#include "turbo/error.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitAllAborted = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw turbo::Error(turbo::ErrorCode::kConfigError, "cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Turbo filtering Monte Carlo benchmark"};

  std::string config_path, filter, format;
  std::size_t n_p = 0, n_it = 0, steps = 0, runs = 0, threads = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> sweep;
  bool det_factors = false;
  std::string out;

  app.add_option("--config", config_path, "flat JSON config file");
  auto* o_filter = app.add_option("--filter", filter, "ekf|mpf|tf1|tf2|pf");
  auto* o_np = app.add_option("--np", n_p, "number of particles");
  auto* o_nit = app.add_option("--nit", n_it, "turbo iterations per step");
  auto* o_steps = app.add_option("--steps", steps, "steps per run");
  auto* o_runs = app.add_option("--runs", runs, "Monte Carlo runs");
  auto* o_seed = app.add_option("--seed", seed, "base seed");
  app.add_option("--sweep-np", sweep, "list of particle counts")->delimiter(',');
  auto* o_det = app.add_flag("--det-factors", det_factors, "keep the determinant weight factors");
  auto* o_threads = app.add_option("--threads", threads, "worker threads (0 = all cores)");
  auto* o_out = app.add_option("--out", out, "report path (default stdout)");
  auto* o_format = app.add_option("--format", format, "csv|json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  std::vector<turbo::RunReport> reports;
  try {
    turbo::RunConfig config;
    if (!config_path.empty()) turbo::apply_config_json(config, read_file(config_path));
    if (*o_filter) config.filter = turbo::parse_filter_kind(filter);
    if (*o_np) config.n_p = n_p;
    if (*o_nit) config.n_it = n_it;
    if (*o_steps) config.t_steps = steps;
    if (*o_runs) config.n_runs = runs;
    if (*o_seed) config.base_seed = seed;
    if (*o_det) config.det_factors = {det_factors, det_factors};
    if (*o_threads) config.threads = threads;
    if (*o_out) config.out = out;
    if (*o_format) config.format = turbo::parse_report_format(format);

    if (sweep.empty()) sweep.push_back(config.n_p);
    for (std::size_t np : sweep) {
      turbo::RunConfig c = config;
      c.n_p = np;
      c.validate();
      reports.push_back(turbo::run_monte_carlo(c));
    }

    if (config.out.empty()) {
      turbo::emit_report(std::cout, reports, config.format);
    } else {
      turbo::emit_report(config.out, reports, config.format);
    }
  } catch (const turbo::Error& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return e.code() == turbo::ErrorCode::kConfigError ? kExitConfig : 1;
  }

  for (const auto& r : reports) {
    if (r.n_aborted == r.config.n_runs) {
      std::cerr << "bench: every run aborted for n_p=" << r.config.n_p << '\n';
      return kExitAllAborted;
    }
  }
  return 0;
}
