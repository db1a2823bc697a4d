// Batch front end: transform / run / tdpt / bath / sweep subcommands.
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "gplvc/runner.hpp"

namespace fs = std::filesystem;
using namespace gplvc;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides,
                      const std::string& out_dir) {
  RunConfig cfg = parse_config(apply_overrides(slurp(path), overrides));
  if (!out_dir.empty()) cfg.output_directory = out_dir;
  return cfg;
}

int dispatch(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vibronic-coupling dynamics near conical intersections"};
  app.require_subcommand(1);

  std::string config_path, out_dir, lvc_path;
  std::vector<std::string> overrides, sweep_configs;
  int jobs = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides [output])");
    sub->add_option("--override", overrides, "section.key=value, repeatable");
  };

  auto* cmd_run = app.add_subcommand("run", "propagate and write series/snapshots");
  add_common(cmd_run);
  auto* cmd_tdpt = app.add_subcommand("tdpt", "perturbative channel estimates to CSV");
  add_common(cmd_tdpt);
  auto* cmd_bath = app.add_subcommand("bath", "tabulate the discretized bath");
  add_common(cmd_bath);

  auto* cmd_transform = app.add_subcommand("transform", "raw LVC table to subsystem-bath form");
  cmd_transform->add_option("--lvc", lvc_path, "LVC table file")->required();
  cmd_transform->add_option("--out", out_dir, "output directory")->required();

  auto* cmd_sweep = app.add_subcommand("sweep", "run several configs, outputs per config stem");
  cmd_sweep->add_option("--configs", sweep_configs, "config files")->required();
  cmd_sweep->add_option("--out", out_dir, "parent output directory")->required();
  cmd_sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd_sweep->add_option("--override", overrides, "section.key=value applied to every config");

  CLI11_PARSE(app, argc, argv);

  if (cmd_run->parsed())
    return dispatch([&] { gplvc::run(load_config(config_path, overrides, out_dir)); });
  if (cmd_tdpt->parsed())
    return dispatch([&] { run_tdpt(load_config(config_path, overrides, out_dir)); });
  if (cmd_bath->parsed())
    return dispatch([&] { run_bath_tabulation(load_config(config_path, overrides, out_dir)); });
  if (cmd_transform->parsed())
    return dispatch([&] { run_transform(lvc_path, out_dir); });

  if (cmd_sweep->parsed()) {
    // Independent configs on a small worker pool; one output directory each.
    std::vector<int> results(sweep_configs.size(), 0);
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    const int n_workers = std::min<size_t>(jobs, sweep_configs.size());
    for (int w = 0; w < n_workers; ++w)
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < sweep_configs.size(); i = next.fetch_add(1)) {
          const std::string stem = fs::path(sweep_configs[i]).stem().string();
          const std::string dir = (fs::path(out_dir) / stem).string();
          results[i] = dispatch(
              [&] { gplvc::run(load_config(sweep_configs[i], overrides, dir)); });
        }
      });
    for (auto& t : pool) t.join();
    int rc = 0;
    for (size_t i = 0; i < results.size(); ++i)
      if (results[i] != 0) {
        std::cerr << "sweep: " << sweep_configs[i] << " failed with code " << results[i] << "\n";
        rc = std::max(rc, results[i]);
      }
    return rc;
  }
  return 0;
}
