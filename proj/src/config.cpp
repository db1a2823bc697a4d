#include "gplvc/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gplvc/effective_modes.hpp"

namespace gplvc {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& v, int line) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    if (!std::isfinite(d)) throw std::invalid_argument("not finite");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("expected a number, got '" + v + "'", line);
  }
}

int parse_int(const std::string& v, int line) {
  const double d = parse_number(v, line);
  const int i = static_cast<int>(std::llround(d));
  if (std::abs(d - i) > 0) throw ConfigError("expected an integer, got '" + v + "'", line);
  return i;
}

std::vector<double> parse_number_list(const std::string& v, int line) {
  std::vector<double> out;
  std::istringstream is(v);
  std::string tok;
  while (is >> tok) out.push_back(parse_number(tok, line));
  return out;
}

}  // namespace

std::string apply_overrides(std::string text, const std::vector<std::string>& overrides) {
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    const auto dot = ov.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw ConfigError("override must look like section.key=value: '" + ov + "'");
    const std::string section = ov.substr(0, dot);
    const std::string key = ov.substr(dot + 1, eq - dot - 1);
    const std::string value = ov.substr(eq + 1);
    text += "\n[" + section + "]\n" + key + " = " + value + "\n";
  }
  return text;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  bool saw_grid = false, saw_basis = false, saw_bath = false;
  bool rep_set = false, mode_set = false;
  OhmicSpec ohmic;
  bool ohmic_touched = false;

  std::istringstream is(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("malformed section header '" + s + "'", line);
      section = s.substr(1, s.size() - 2);
      if (section != "model" && section != "grid" && section != "basis" && section != "run" &&
          section != "bath" && section != "output")
        throw ConfigError("unknown section [" + section + "]", line);
      if (section == "grid") saw_grid = true;
      if (section == "basis") saw_basis = true;
      if (section == "bath") saw_bath = true;
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value, got '" + s + "'", line);
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (section.empty()) throw ConfigError("key '" + key + "' outside any section", line);
    if (val.empty()) throw ConfigError("key '" + key + "' has no value", line);

    if (section == "model") {
      auto& p = cfg.subsystem;
      if (key == "omega_x") {
        p.Omega_X = parse_number(val, line);
        if (!(p.Omega_X > 0)) throw ConfigError("omega_x must be strictly positive", line);
      } else if (key == "omega_y") {
        p.Omega_Y = parse_number(val, line);
        if (!(p.Omega_Y > 0)) throw ConfigError("omega_y must be strictly positive", line);
      } else if (key == "x0")
        p.X0 = parse_number(val, line);
      else if (key == "y0")
        p.Y0 = parse_number(val, line);
      else if (key == "delta")
        p.Delta = parse_number(val, line);
      else if (key == "c_x")
        p.C_X = parse_number(val, line);
      else if (key == "c_y")
        p.C_Y = parse_number(val, line);
      else if (key == "delta12")
        p.Delta12 = parse_number(val, line);
      else if (key == "lvc_file") {
        if (!std::filesystem::exists(val))
          throw ConfigError("lvc_file '" + val + "' does not exist", line);
        cfg.lvc_file = val;
      } else
        throw ConfigError("unknown key '" + key + "' in [model]", line);
    } else if (section == "grid") {
      auto& g = cfg.grid;
      if (key == "nx")
        g.nx = parse_int(val, line);
      else if (key == "ny")
        g.ny = parse_int(val, line);
      else if (key == "xmin")
        g.xmin = parse_number(val, line);
      else if (key == "xmax")
        g.xmax = parse_number(val, line);
      else if (key == "ymin")
        g.ymin = parse_number(val, line);
      else if (key == "ymax")
        g.ymax = parse_number(val, line);
      else
        throw ConfigError("unknown key '" + key + "' in [grid]", line);
    } else if (section == "basis") {
      auto& b = cfg.basis;
      if (key == "n_max_x")
        b.n_max_x = parse_int(val, line);
      else if (key == "n_max_y")
        b.n_max_y = parse_int(val, line);
      else if (key == "n_total_max")
        b.n_total_max = parse_int(val, line);
      else if (key == "center_x")
        b.center.x() = parse_number(val, line);
      else if (key == "center_y")
        b.center.y() = parse_number(val, line);
      else if (key == "freq_x")
        b.freq_x = parse_number(val, line);
      else if (key == "freq_y")
        b.freq_y = parse_number(val, line);
      else
        throw ConfigError("unknown key '" + key + "' in [basis]", line);
    } else if (section == "run") {
      auto& pl = cfg.plan;
      if (key == "representation") {
        rep_set = true;
        if (val == "with-gp")
          cfg.representation = Representation::DiabaticWithGp;
        else if (val == "no-gp")
          cfg.representation = Representation::AdiabaticNoGp;
        else
          throw ConfigError("representation must be with-gp or no-gp", line);
      } else if (key == "mode") {
        mode_set = true;
        if (val == "closed")
          cfg.mode = RunMode::Closed;
        else if (val == "open")
          cfg.mode = RunMode::Open;
        else
          throw ConfigError("mode must be closed or open", line);
      } else if (key == "propagator") {
        if (val == "eigenbasis-exact")
          pl.propagator = Propagator::EigenbasisExact;
        else if (val == "split-step")
          pl.propagator = Propagator::SplitStep;
        else
          throw ConfigError("propagator must be eigenbasis-exact or split-step", line);
      } else if (key == "t_final") {
        pl.t_final = parse_number(val, line);
        if (!(pl.t_final > 0)) throw ConfigError("t_final must be positive", line);
      } else if (key == "dt_output") {
        pl.dt_output = parse_number(val, line);
        if (!(pl.dt_output > 0)) throw ConfigError("dt_output must be positive", line);
      } else if (key == "split_step_dt") {
        pl.split_step_dt = parse_number(val, line);
        if (!(pl.split_step_dt > 0) || pl.split_step_dt > 0.002)
          throw ConfigError("split_step_dt must be in (0, 0.002]", line);
      } else if (key == "rk4_dt") {
        pl.rk4_dt = parse_number(val, line);
        if (!(pl.rk4_dt > 0) || pl.rk4_dt > 0.01)
          throw ConfigError("rk4_dt must be in (0, 0.01]", line);
      } else if (key == "snapshots") {
        pl.snapshot_times = parse_number_list(val, line);
      } else
        throw ConfigError("unknown key '" + key + "' in [run]", line);
    } else if (section == "bath") {
      if (key == "xi") {
        ohmic.xi = parse_number(val, line);
        if (ohmic.xi < 0) throw ConfigError("xi must be >= 0", line);
        ohmic_touched = true;
      } else if (key == "omega_c") {
        ohmic.Omega_c = parse_number(val, line);
        if (!(ohmic.Omega_c > 0)) throw ConfigError("omega_c must be positive", line);
        ohmic_touched = true;
      } else if (key == "n_modes") {
        ohmic.n_modes = parse_int(val, line);
        if (ohmic.n_modes < 1) throw ConfigError("n_modes must be >= 1", line);
        ohmic_touched = true;
      } else if (key == "omega_max") {
        ohmic.Omega_max = parse_number(val, line);
        ohmic_touched = true;
      } else if (key == "couple_to") {
        if (val == "X" || val == "x")
          ohmic.couple_to = CouplingAxis::X;
        else if (val == "Y" || val == "y")
          ohmic.couple_to = CouplingAxis::Y;
        else
          throw ConfigError("couple_to must be X or Y", line);
        ohmic_touched = true;
      } else if (key == "temperature") {
        ohmic.temperature = parse_number(val, line);
        if (ohmic.temperature < 0) throw ConfigError("temperature must be >= 0", line);
        ohmic_touched = true;
      } else if (key == "bath_file") {
        if (!std::filesystem::exists(val))
          throw ConfigError("bath_file '" + val + "' does not exist", line);
        cfg.bath_file = val;
      } else
        throw ConfigError("unknown key '" + key + "' in [bath]", line);
    } else if (section == "output") {
      if (key == "directory")
        cfg.output_directory = val;
      else
        throw ConfigError("unknown key '" + key + "' in [output]", line);
    }
  }

  if (saw_grid && saw_basis) throw ConfigError("give either [grid] or [basis], not both");
  cfg.scheme = saw_basis ? Scheme::HoBasis : Scheme::Grid;
  (void)rep_set;
  (void)mode_set;

  if (cfg.lvc_file) {
    if (ohmic_touched || cfg.bath_file)
      throw ConfigError("lvc_file already determines the bath; drop the [bath] section");
    const LvcParameters lvc = read_lvc_file(*cfg.lvc_file);
    const auto r = lvc_to_system_bath(lvc);
    cfg.subsystem = r.model.subsystem;
    cfg.bath = r.model.bath;
  } else if (cfg.bath_file) {
    if (ohmic_touched)
      throw ConfigError("give either Ohmic parameters or bath_file in [bath], not both");
    cfg.bath = read_bath_file(*cfg.bath_file);
  } else if (ohmic_touched) {
    cfg.ohmic = ohmic;
    cfg.bath = discretize_ohmic(ohmic);
  }

  if (cfg.mode == RunMode::Open && cfg.bath.n_modes() == 0)
    throw ConfigError("mode = open requires a [bath] section (or an lvc_file with a bath)");
  if (cfg.representation == Representation::AdiabaticNoGp && cfg.scheme == Scheme::HoBasis)
    throw ConfigError("the no-gp representation requires the [grid] scheme");

  const auto diags = validate(cfg.model());
  if (has_errors(diags))
    throw ConfigError("invalid model: " + diags.front().field + " " + diags.front().message);
  return cfg;
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string config_echo(const RunConfig& cfg) {
  std::ostringstream os;
  os << "[model]\n";
  const auto& p = cfg.subsystem;
  os << "omega_x = " << fmt17(p.Omega_X) << "\n";
  os << "omega_y = " << fmt17(p.Omega_Y) << "\n";
  os << "x0 = " << fmt17(p.X0) << "\n";
  os << "y0 = " << fmt17(p.Y0) << "\n";
  os << "delta = " << fmt17(p.Delta) << "\n";
  os << "c_x = " << fmt17(p.C_X) << "\n";
  os << "c_y = " << fmt17(p.C_Y) << "\n";
  os << "delta12 = " << fmt17(p.Delta12) << "\n";
  if (cfg.lvc_file) os << "# resolved from lvc_file = " << *cfg.lvc_file << "\n";
  if (cfg.scheme == Scheme::Grid) {
    os << "\n[grid]\n";
    os << "nx = " << cfg.grid.nx << "\nny = " << cfg.grid.ny << "\n";
    os << "xmin = " << fmt17(cfg.grid.xmin) << "\nxmax = " << fmt17(cfg.grid.xmax) << "\n";
    os << "ymin = " << fmt17(cfg.grid.ymin) << "\nymax = " << fmt17(cfg.grid.ymax) << "\n";
  } else {
    os << "\n[basis]\n";
    os << "n_max_x = " << cfg.basis.n_max_x << "\nn_max_y = " << cfg.basis.n_max_y << "\n";
    os << "n_total_max = " << cfg.basis.n_total_max << "\n";
    os << "center_x = " << fmt17(cfg.basis.center.x()) << "\n";
    os << "center_y = " << fmt17(cfg.basis.center.y()) << "\n";
    os << "freq_x = " << fmt17(cfg.basis.freq_x) << "\nfreq_y = " << fmt17(cfg.basis.freq_y)
       << "\n";
  }
  os << "\n[run]\n";
  os << "representation = " << to_string(cfg.representation) << "\n";
  os << "mode = " << (cfg.mode == RunMode::Closed ? "closed" : "open") << "\n";
  os << "propagator = "
     << (cfg.plan.propagator == Propagator::EigenbasisExact ? "eigenbasis-exact" : "split-step")
     << "\n";
  os << "t_final = " << fmt17(cfg.plan.t_final) << "\n";
  os << "dt_output = " << fmt17(cfg.plan.dt_output) << "\n";
  os << "split_step_dt = " << fmt17(cfg.plan.split_step_dt) << "\n";
  os << "rk4_dt = " << fmt17(cfg.plan.rk4_dt) << "\n";
  if (!cfg.plan.snapshot_times.empty()) {
    os << "snapshots =";
    for (double t : cfg.plan.snapshot_times) os << " " << fmt17(t);
    os << "\n";
  }
  if (cfg.ohmic) {
    os << "\n[bath]\n";
    os << "xi = " << fmt17(cfg.ohmic->xi) << "\n";
    os << "omega_c = " << fmt17(cfg.ohmic->Omega_c) << "\n";
    os << "n_modes = " << cfg.ohmic->n_modes << "\n";
    os << "omega_max = "
       << fmt17(cfg.ohmic->Omega_max > 0 ? cfg.ohmic->Omega_max : 3.0 * cfg.ohmic->Omega_c)
       << "\n";
    os << "couple_to = " << (cfg.ohmic->couple_to == CouplingAxis::X ? "X" : "Y") << "\n";
    os << "temperature = " << fmt17(cfg.ohmic->temperature) << "\n";
  } else if (cfg.bath.n_modes() > 0) {
    os << "\n[bath]\n# explicit table, " << cfg.bath.n_modes() << " modes\n";
    os << "temperature = " << fmt17(cfg.bath.temperature) << "\n";
  }
  os << "\n[output]\ndirectory = " << cfg.output_directory << "\n";
  return os.str();
}

LvcParameters read_lvc_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open LVC file '" + path + "'");
  LvcParameters lvc;
  std::vector<double> om, ka, kt, cc;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    std::istringstream ls(s);
    std::string tag;
    ls >> tag;
    if (tag == "delta") {
      if (!(ls >> lvc.delta)) throw ConfigError("bad delta line", line);
    } else if (tag == "mode") {
      double w, k1, k2, c;
      if (!(ls >> w >> k1 >> k2 >> c)) throw ConfigError("bad mode line", line);
      om.push_back(w);
      ka.push_back(k1);
      kt.push_back(k2);
      cc.push_back(c);
    } else {
      throw ConfigError("unknown LVC table tag '" + tag + "'", line);
    }
  }
  lvc.n_modes = static_cast<int>(om.size());
  lvc.omega = Eigen::Map<Vec>(om.data(), om.size());
  lvc.kappa = Eigen::Map<Vec>(ka.data(), ka.size());
  lvc.kappa_tilde = Eigen::Map<Vec>(kt.data(), kt.size());
  lvc.c = Eigen::Map<Vec>(cc.data(), cc.size());
  const auto diags = validate(lvc);
  if (has_errors(diags))
    throw ConfigError("invalid LVC table: " + diags.front().field + " " + diags.front().message);
  return lvc;
}

void write_lvc_file(const std::string& path, const LvcParameters& lvc) {
  std::ofstream out(path);
  out << "# raw LVC model: delta line plus one mode line per coordinate\n";
  out << "delta " << fmt17(lvc.delta) << "\n";
  for (int j = 0; j < lvc.n_modes; ++j)
    out << "mode " << fmt17(lvc.omega[j]) << " " << fmt17(lvc.kappa[j]) << " "
        << fmt17(lvc.kappa_tilde[j]) << " " << fmt17(lvc.c[j]) << "\n";
}

BathParameters read_bath_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open bath file '" + path + "'");
  std::vector<double> om, lx, ly;
  double temperature = 0;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    std::istringstream ls(s);
    std::string tag;
    ls >> tag;
    if (tag == "temperature") {
      if (!(ls >> temperature)) throw ConfigError("bad temperature line", line);
    } else if (tag == "mode") {
      double w, a, b;
      if (!(ls >> w >> a >> b)) throw ConfigError("bad mode line", line);
      om.push_back(w);
      lx.push_back(a);
      ly.push_back(b);
    } else {
      throw ConfigError("unknown bath table tag '" + tag + "'", line);
    }
  }
  BathParameters bath;
  bath.Omega = Eigen::Map<Vec>(om.data(), om.size());
  bath.lambda_X = Eigen::Map<Vec>(lx.data(), lx.size());
  bath.lambda_Y = Eigen::Map<Vec>(ly.data(), ly.size());
  bath.temperature = temperature;
  return bath;
}

void write_bath_file(const std::string& path, const BathParameters& bath) {
  std::ofstream out(path);
  out << "# discrete bath: temperature line plus one mode line (Omega lambda_X lambda_Y)\n";
  out << "temperature " << fmt17(bath.temperature) << "\n";
  for (int j = 0; j < bath.n_modes(); ++j)
    out << "mode " << fmt17(bath.Omega[j]) << " " << fmt17(bath.lambda_X[j]) << " "
        << fmt17(bath.lambda_Y[j]) << "\n";
}

}  // namespace gplvc
