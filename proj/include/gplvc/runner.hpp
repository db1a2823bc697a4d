#pragma once

#include <iosfwd>

#include "gplvc/config.hpp"

namespace gplvc {

// Executes a run and writes series.csv, snapshot_<t>.grid files and run.meta
// into cfg.output_directory. Deterministic: identical inputs produce
// byte-identical outputs.
void run(const RunConfig& cfg);

// Writers (also used directly by tests).
void write_series_csv(const std::string& path, const TimeSeries& s);
void write_snapshot_grid(const std::string& path, const DensityGrid& g);
std::string format_double(double v);  // 12 significant digits, deterministic

// Subcommand helpers. Each returns warnings it would print.
void run_transform(const std::string& lvc_path, const std::string& out_dir);
void run_tdpt(const RunConfig& cfg);
void run_bath_tabulation(const RunConfig& cfg);

}  // namespace gplvc
