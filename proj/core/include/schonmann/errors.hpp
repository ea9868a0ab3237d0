#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace schonmann {

// Incompatible geometry (mismatched boxes, window outside interior, ...).
struct dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A request exceeds a hard implementation limit (e.g. exact-enumeration cap).
struct capacity_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Attempt to update a site that is clamped or outside the free volume.
struct clamp_violation : std::logic_error {
  using std::logic_error::logic_error;
};

// Operation called with a parameter combination it does not support.
struct unsupported_parameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Coupling-from-the-past gave up before the extremal chains met.
struct non_coalescence : std::runtime_error {
  uint64_t sweeps_reached;
  explicit non_coalescence(uint64_t sweeps)
      : std::runtime_error("coupling-from-the-past did not coalesce within " +
                           std::to_string(sweeps) + " sweeps"),
        sweeps_reached(sweeps) {}
};

// Malformed run configuration; carries the 1-based offending line.
struct config_error : std::runtime_error {
  int line;
  config_error(int line_no, const std::string& what)
      : std::runtime_error("config line " + std::to_string(line_no) + ": " + what),
        line(line_no) {}
};

}  // namespace schonmann
