#pragma once

#include <map>
#include <optional>

#include "gplvc/open_dynamics.hpp"

namespace gplvc {

enum class RunMode { Closed, Open };

// Fully resolved batch-run description. Parsed from the sectioned key-value
// config format; every field has a deterministic value after parsing (echoed
// verbatim into run.meta).
struct RunConfig {
  // [model] — inline subsystem parameters or a raw LVC table file
  SubsystemParameters subsystem;
  std::optional<std::string> lvc_file;

  // [grid] / [basis]
  Scheme scheme = Scheme::Grid;
  GridSpec grid;
  HoBasisSpec basis;

  // [run]
  Representation representation = Representation::DiabaticWithGp;
  RunMode mode = RunMode::Closed;
  PropagationPlan plan;

  // [bath] — Ohmic spec or explicit table file
  std::optional<OhmicSpec> ohmic;
  std::optional<std::string> bath_file;
  BathParameters bath;  // resolved

  // [output]
  std::string output_directory = ".";

  // Fully resolved model (after optional LVC transformation).
  SystemBathModel model() const { return {subsystem, bath}; }
};

// Parses config text. Unknown sections or keys are hard errors with line
// numbers; missing required keys and type mismatches likewise.
RunConfig parse_config(const std::string& text);

// `key=value` with key of the form section.key, applied before parsing.
std::string apply_overrides(std::string text, const std::vector<std::string>& overrides);

// Serialization used by run.meta and the transform subcommand.
std::string config_echo(const RunConfig& cfg);

// LVC table file: `delta <v>` line plus one `mode <omega> <kappa> <kappa_tilde> <c>`
// line per mode. '#' starts a comment.
LvcParameters read_lvc_file(const std::string& path);
void write_lvc_file(const std::string& path, const LvcParameters& lvc);

// Bath table file: `temperature <v>` plus `mode <Omega> <lambda_X> <lambda_Y>` lines.
BathParameters read_bath_file(const std::string& path);
void write_bath_file(const std::string& path, const BathParameters& bath);

}  // namespace gplvc
