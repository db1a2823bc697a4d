#include "gplvc/runner.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gplvc/effective_modes.hpp"
#include "gplvc/tdpt.hpp"

namespace fs = std::filesystem;

namespace gplvc {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_series_csv(const std::string& path, const TimeSeries& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,P_D,pop_adi_1,pop_adi_2,trace,energy\n";
  for (size_t i = 0; i < s.size(); ++i)
    out << format_double(s.times[i]) << ',' << format_double(s.P_D[i]) << ','
        << format_double(s.pop_adi_1[i]) << ',' << format_double(s.pop_adi_2[i]) << ','
        << format_double(s.trace[i]) << ',' << format_double(s.energy[i]) << "\n";
}

void write_snapshot_grid(const std::string& path, const DensityGrid& g) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << g.grid.nx << ' ' << g.grid.ny << ' ' << format_double(g.grid.xmin) << ' '
      << format_double(g.grid.xmax) << ' ' << format_double(g.grid.ymin) << ' '
      << format_double(g.grid.ymax) << "\n";
  for (int j = 0; j < g.grid.ny; ++j) {
    for (int i = 0; i < g.grid.nx; ++i) {
      if (i) out << ' ';
      out << format_double(g.values(j, i));
    }
    out << "\n";
  }
}

namespace {

std::string snapshot_name(double t) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "snapshot_%g.grid", t);
  return buf;
}

DiscretizedHamiltonian build_hamiltonian(const RunConfig& cfg) {
  if (cfg.scheme == Scheme::HoBasis) return build_diabatic(cfg.subsystem, cfg.basis);
  if (cfg.representation == Representation::AdiabaticNoGp)
    return build_adiabatic_no_gp(cfg.subsystem, cfg.grid);
  return build_diabatic(cfg.subsystem, cfg.grid);
}

void write_meta(const RunConfig& cfg, const std::vector<std::string>& warnings,
                const std::vector<std::string>& notes) {
  std::ofstream out(fs::path(cfg.output_directory) / "run.meta");
  out << "# resolved configuration\n";
  out << "version = " << GPLVC_VERSION << "\n\n";
  out << config_echo(cfg);
  if (!notes.empty()) {
    out << "\n# run notes\n";
    for (const auto& n : notes) out << "# " << n << "\n";
  }
  if (!warnings.empty()) {
    out << "\n# warnings\n";
    for (const auto& w : warnings) out << "# " << w << "\n";
  }
}

}  // namespace

void run(const RunConfig& cfg) {
  fs::create_directories(cfg.output_directory);
  const DiscretizedHamiltonian H = build_hamiltonian(cfg);
  const DensityState s0 = prepare_initial_state(H);

  std::vector<std::string> warnings = H.warnings;
  std::vector<std::string> notes;
  TimeSeries series;
  std::vector<DensityGrid> snapshots;
  const GridSpec snap_grid = cfg.scheme == Scheme::Grid ? H.grid : GridSpec{};

  if (cfg.mode == RunMode::Closed) {
    auto res = propagate_closed(H, s0, cfg.plan, &snap_grid);
    series = std::move(res.series);
    snapshots = std::move(res.snapshots);
  } else {
    Tcl2Options opts;
    opts.dt = cfg.plan.rk4_dt;
    auto res = propagate_tcl2(cfg.model(), H, s0, cfg.plan, opts, &snap_grid);
    series = std::move(res.series);
    snapshots = std::move(res.snapshots);
    for (const auto& w : res.warnings) warnings.push_back(w);
    notes.push_back("tcl2 eigenbasis size = " + std::to_string(res.n_states));
    notes.push_back("tcl2 captured initial mass = " + format_double(res.captured_mass));
    notes.push_back("tcl2 min density eigenvalue = " + format_double(res.min_rho_eigenvalue));
  }

  write_series_csv((fs::path(cfg.output_directory) / "series.csv").string(), series);
  for (const auto& g : snapshots)
    write_snapshot_grid((fs::path(cfg.output_directory) / snapshot_name(g.time)).string(), g);
  write_meta(cfg, warnings, notes);
}

void run_transform(const std::string& lvc_path, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const LvcParameters lvc = read_lvc_file(lvc_path);
  const auto r = lvc_to_system_bath(lvc);

  std::ofstream out(fs::path(out_dir) / "model.cfg");
  const auto& p = r.model.subsystem;
  auto f = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "# subsystem-bath form of " << fs::path(lvc_path).filename().string() << "\n";
  out << "[model]\n";
  out << "omega_x = " << f(p.Omega_X) << "\nomega_y = " << f(p.Omega_Y) << "\n";
  out << "x0 = " << f(p.X0) << "\ny0 = " << f(p.Y0) << "\n";
  out << "delta = " << f(p.Delta) << "\n";
  out << "c_x = " << f(p.C_X) << "\nc_y = " << f(p.C_Y) << "\n";
  out << "delta12 = " << f(p.Delta12) << "\n";
  if (r.model.bath.n_modes() > 0) {
    const std::string bath_path = (fs::path(out_dir) / "model.bath").string();
    write_bath_file(bath_path, r.model.bath);
    out << "\n[bath]\nbath_file = " << bath_path << "\n";
  }
}

void run_tdpt(const RunConfig& cfg) {
  fs::create_directories(cfg.output_directory);
  const auto times_v = cfg.plan.output_times();
  Vec times = Eigen::Map<const Vec>(times_v.data(), times_v.size());

  const auto c1a = channel_1a(cfg.subsystem);
  const auto c1b = channel_1b(cfg.subsystem);
  const auto c1c = channel_1c(cfg.subsystem);
  const Vec p1a = c1a.evaluate(times), p1b = c1b.evaluate(times), p1c = c1c.evaluate(times);
  Vec pb = Vec::Zero(times.size());
  const bool has_bath =
      cfg.bath.n_modes() > 0 && cfg.bath.lambda_Y.cwiseAbs().maxCoeff() > 0;
  if (has_bath) {
    const auto cb = channel_bath_2nd(cfg.subsystem, cfg.bath, cfg.plan.t_final);
    pb = cb.evaluate(times);
  }

  std::ofstream out(fs::path(cfg.output_directory) / "channels.csv");
  out << "t,channel_1a,channel_1b,channel_1c,channel_bath_2nd\n";
  for (int i = 0; i < times.size(); ++i)
    out << format_double(times[i]) << ',' << format_double(p1a[i]) << ','
        << format_double(p1b[i]) << ',' << format_double(p1c[i]) << ','
        << format_double(pb[i]) << "\n";
}

void run_bath_tabulation(const RunConfig& cfg) {
  if (cfg.bath.n_modes() == 0)
    throw ConfigError("bath subcommand needs a [bath] section (or an lvc_file with a bath)");
  fs::create_directories(cfg.output_directory);
  std::ofstream out(fs::path(cfg.output_directory) / "bath.csv");
  out << "j,Omega,lambda_X,lambda_Y\n";
  for (int j = 0; j < cfg.bath.n_modes(); ++j)
    out << (j + 1) << ',' << format_double(cfg.bath.Omega[j]) << ','
        << format_double(cfg.bath.lambda_X[j]) << ',' << format_double(cfg.bath.lambda_Y[j])
        << "\n";
  write_bath_file((fs::path(cfg.output_directory) / "bath.tab").string(), cfg.bath);
}

}  // namespace gplvc
