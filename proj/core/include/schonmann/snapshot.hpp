#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "schonmann/lattice.hpp"

namespace schonmann {

// "ising-snapshot v1": one header line
//   n=<n> beta=<float> h=<float> seed=<u64>
// followed by 2n+1 rows of '+'/'-' characters (interior spins only, row
// y = n printed first, x increasing within a row), each newline-terminated.
// Floats are written in shortest round-trip form, so
// write(read(s)) == s byte for byte.
struct SpinSnapshot {
  SpinConfig config;
  double beta = 0.0;
  double h = 0.0;
  uint64_t seed = 0;
};

void write_spin_snapshot(std::ostream& os, const SpinConfig& config,
                         double beta, double h, uint64_t seed);
SpinSnapshot read_spin_snapshot(std::istream& is);

std::string spin_snapshot_string(const SpinConfig& config, double beta,
                                 double h, uint64_t seed);
SpinSnapshot spin_snapshot_from_string(const std::string& text);

// Shortest round-trip decimal form of a double (locale-independent, '.'
// decimal separator); shared by the snapshot formats and CSV emitters.
std::string format_double(double v);

}  // namespace schonmann
