#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gplvc/runner.hpp"

using namespace gplvc;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(
[model]
omega_x = 2.0
omega_y = 2.0
x0 = 1.5
c_y = 3.0

[run]
representation = with-gp
mode = closed
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path temp_dir(const std::string& tag) {
  const fs::path d = fs::temp_directory_path() / ("gplvc_test_" + tag);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("a minimal config parses and fills defaults") {
  const RunConfig cfg = parse_config(kMinimal);
  CHECK(cfg.subsystem.Omega_X == 2.0);
  CHECK(cfg.subsystem.C_Y == 3.0);
  CHECK(cfg.subsystem.Y0 == 0.0);  // defaulted
  CHECK(cfg.scheme == Scheme::Grid);
  CHECK(cfg.grid.nx == 64);
  CHECK(cfg.plan.t_final == 100.0);
  CHECK(cfg.plan.dt_output == 0.5);
  CHECK(cfg.mode == RunMode::Closed);
}

TEST_CASE("the echo round trip is idempotent") {
  const RunConfig cfg = parse_config(kMinimal);
  const std::string echo = config_echo(cfg);
  const RunConfig cfg2 = parse_config(echo);
  CHECK(config_echo(cfg2) == echo);
  // echo completeness: every defaulted parameter appears
  CHECK(echo.find("dt_output") != std::string::npos);
  CHECK(echo.find("split_step_dt") != std::string::npos);
  CHECK(echo.find("y0") != std::string::npos);
}

TEST_CASE("config errors carry line numbers and key names") {
  const std::string bad = "[model]\nomega_x = -2\n";
  try {
    parse_config(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line_number == 2);
    CHECK(std::string(e.what()).find("omega_x") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_config("[model]\nnot_a_key = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[nope]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[model]\nomega_x == 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("omega_x = 2\n"), ConfigError);  // outside a section

  // open mode without a bath
  std::string open_cfg = std::string(kMinimal);
  open_cfg.replace(open_cfg.find("mode = closed"), 13, "mode = open  ");
  CHECK_THROWS_AS(parse_config(open_cfg), ConfigError);
}

TEST_CASE("overrides rewrite keys before parsing") {
  const std::string text = apply_overrides(kMinimal, {"run.t_final=7", "grid.nx=16"});
  const RunConfig cfg = parse_config(text);
  CHECK(cfg.plan.t_final == 7.0);
  CHECK(cfg.grid.nx == 16);
  CHECK_THROWS_AS(apply_overrides(kMinimal, {"bogus"}), ConfigError);
}

TEST_CASE("the fig8 preset parses to the captioned bath") {
  const fs::path preset = fs::path(GPLVC_PRESET_DIR) / "fig8_xi030.cfg";
  REQUIRE(fs::exists(preset));
  const RunConfig cfg = parse_config(slurp(preset));
  REQUIRE(cfg.ohmic.has_value());
  CHECK(cfg.ohmic->couple_to == CouplingAxis::Y);
  CHECK(cfg.ohmic->Omega_c == 3.5);
  CHECK(cfg.ohmic->n_modes == 100);
  CHECK(cfg.ohmic->temperature == 0.0);
  CHECK(cfg.ohmic->xi == 0.3);
  CHECK(cfg.mode == RunMode::Open);
  CHECK(cfg.bath.n_modes() == 100);
  CHECK(cfg.bath.Omega[99] == doctest::Approx(10.5));
}

TEST_CASE("preset fidelity across the shipped catalogue") {
  struct Expect {
    const char* file;
    double cx, cy, d12, xi;
    bool open;
  };
  const Expect table[] = {
      {"fig2_gp.cfg", 0, 3, 0, 0, false},     {"fig5_cx2.cfg", 2, 4, 0, 0, false},
      {"fig6.cfg", 2, 6, 0, 0, false},        {"fig7_d12_040.cfg", 0, 3, 0.4, 0, false},
      {"fig9b.cfg", 0, 3, 0, 0.015, true},    {"fig10_xi0015.cfg", 0, 3, 0, 0.015, true},
  };
  for (const auto& e : table) {
    const RunConfig cfg = parse_config(slurp(fs::path(GPLVC_PRESET_DIR) / e.file));
    CHECK(cfg.subsystem.C_X == e.cx);
    CHECK(cfg.subsystem.C_Y == e.cy);
    CHECK(cfg.subsystem.Delta12 == e.d12);
    CHECK(cfg.subsystem.Omega_X == 2.0);
    CHECK(cfg.subsystem.X0 == 1.5);
    CHECK((cfg.mode == RunMode::Open) == e.open);
    if (e.open) CHECK(cfg.ohmic->xi == e.xi);
  }
}

TEST_CASE("a tiny closed run writes deterministic artifacts") {
  const fs::path dir = temp_dir("run");
  std::string text(kMinimal);
  text += "\n[grid]\nnx = 16\nny = 16\nxmin = -6\nxmax = 6\nymin = -6\nymax = 6\n";
  text += "\n[run]\nt_final = 2.0\ndt_output = 0.5\nsnapshots = 1.0\n";
  text += "\n[output]\ndirectory = " + (dir / "a").string() + "\n";
  RunConfig cfg = parse_config(text);
  run(cfg);
  CHECK(fs::exists(dir / "a" / "series.csv"));
  CHECK(fs::exists(dir / "a" / "snapshot_1.grid"));
  CHECK(fs::exists(dir / "a" / "run.meta"));

  // header and column count
  std::ifstream in(dir / "a" / "series.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,P_D,pop_adi_1,pop_adi_2,trace,energy");

  // snapshot header line
  std::ifstream sg(dir / "a" / "snapshot_1.grid");
  int nx, ny;
  double xmin, xmax, ymin, ymax;
  sg >> nx >> ny >> xmin >> xmax >> ymin >> ymax;
  CHECK(nx == 16);
  CHECK(ny == 16);
  CHECK(xmax - xmin == doctest::Approx(12.0));

  // byte-identical rerun
  cfg.output_directory = (dir / "b").string();
  run(cfg);
  CHECK(slurp(dir / "a" / "series.csv") == slurp(dir / "b" / "series.csv"));
  CHECK(slurp(dir / "a" / "snapshot_1.grid") == slurp(dir / "b" / "snapshot_1.grid"));

  // run.meta echoes every resolved parameter
  const std::string meta = slurp(dir / "a" / "run.meta");
  CHECK(meta.find("version") != std::string::npos);
  CHECK(meta.find("rk4_dt") != std::string::npos);
  CHECK(meta.find("delta12") != std::string::npos);
}

TEST_CASE("transform produces a losslessly reparsable model file") {
  const fs::path dir = temp_dir("transform");
  const fs::path lvc = dir / "two_mode.lvc";
  {
    LvcParameters m;
    m.n_modes = 2;
    m.omega = Vec::Constant(2, 2.0);
    m.kappa = (Vec(2) << 6, 0).finished();
    m.kappa_tilde = (Vec(2) << -6, 0).finished();
    m.c = (Vec(2) << 0, 3).finished();
    write_lvc_file(lvc.string(), m);
  }
  run_transform(lvc.string(), dir.string());
  REQUIRE(fs::exists(dir / "model.cfg"));
  std::string text = slurp(dir / "model.cfg");
  text += "\n[run]\nrepresentation = with-gp\nmode = closed\n";
  const RunConfig cfg = parse_config(text);
  CHECK(cfg.subsystem.Omega_X == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(cfg.subsystem.X0 == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(cfg.subsystem.C_Y == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(cfg.bath.n_modes() == 0);
}

TEST_CASE("lvc-file configs resolve the model and bath together") {
  const fs::path dir = temp_dir("lvcfile");
  const fs::path lvc = dir / "m.lvc";
  LvcParameters m;
  m.n_modes = 3;
  m.omega = (Vec(3) << 2.0, 2.0, 1.0).finished();
  m.kappa = (Vec(3) << 6, 0, 0.1).finished();
  m.kappa_tilde = (Vec(3) << -6, 0, -0.1).finished();
  m.c = (Vec(3) << 0, 3, 0.05).finished();
  write_lvc_file(lvc.string(), m);
  std::string text = "[model]\nlvc_file = " + lvc.string() +
                     "\n[run]\nrepresentation = with-gp\nmode = open\n";
  const RunConfig cfg = parse_config(text);
  CHECK(cfg.bath.n_modes() == 1);
  CHECK(cfg.subsystem.Omega_X > 0);
  // combining lvc_file with an ohmic section is rejected
  text += "[bath]\nxi = 0.1\n";
  CHECK_THROWS_AS(parse_config(text), ConfigError);
}

TEST_CASE("tdpt and bath subcommand writers") {
  const fs::path dir = temp_dir("tdpt");
  std::string text(kMinimal);
  text += "\n[run]\nt_final = 10\ndt_output = 1\n";
  text += "\n[bath]\nxi = 0.1\nomega_c = 3.5\nn_modes = 20\ncouple_to = Y\n";
  text += "\n[output]\ndirectory = " + dir.string() + "\n";
  // closed mode with a bath section is fine for tdpt/bath tabulation
  RunConfig cfg = parse_config(text);
  run_tdpt(cfg);
  run_bath_tabulation(cfg);
  const std::string csv = slurp(dir / "channels.csv");
  CHECK(csv.find("t,channel_1a,channel_1b,channel_1c,channel_bath_2nd") == 0);
  const std::string bath = slurp(dir / "bath.csv");
  CHECK(bath.find("j,Omega,lambda_X,lambda_Y") == 0);
  CHECK(fs::exists(dir / "bath.tab"));
  const BathParameters round = read_bath_file((dir / "bath.tab").string());
  CHECK(round.n_modes() == 20);
  CHECK((round.Omega - cfg.bath.Omega).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the real binary runs end to end with overrides") {
  const fs::path dir = temp_dir("bin");
  const std::string cmd = std::string(GPLVC_BIN) + " run --config " + GPLVC_PRESET_DIR +
                          "/fig2_gp.cfg --out " + (dir / "r").string() +
                          " --override grid.nx=16 --override grid.ny=16" +
                          " --override run.t_final=1.0 > /dev/null 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(dir / "r" / "series.csv"));

  const std::string bad = std::string(GPLVC_BIN) + " run --config " + GPLVC_PRESET_DIR +
                          "/fig2_gp.cfg --out " + (dir / "x").string() +
                          " --override model.omega_x=-1 > /dev/null 2>&1";
  const int rc = std::system(bad.c_str());
  CHECK(WEXITSTATUS(rc) == 2);
}
