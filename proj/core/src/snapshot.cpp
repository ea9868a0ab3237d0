#include "schonmann/snapshot.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

namespace schonmann {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double_token(const std::string& tok, const char* what) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    throw dimension_error(std::string("snapshot: bad ") + what + " value '" +
                          tok + "'");
  return v;
}

uint64_t parse_u64_token(const std::string& tok, const char* what) {
  uint64_t v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    throw dimension_error(std::string("snapshot: bad ") + what + " value '" +
                          tok + "'");
  return v;
}

std::string expect_keyed(std::istringstream& ss, const std::string& key) {
  std::string tok;
  if (!(ss >> tok) || tok.rfind(key + "=", 0) != 0)
    throw dimension_error("snapshot: expected '" + key + "=' field");
  return tok.substr(key.size() + 1);
}

}  // namespace

void write_spin_snapshot(std::ostream& os, const SpinConfig& config,
                         double beta, double h, uint64_t seed) {
  const int n = config.box().half_width();
  os << "n=" << n << " beta=" << format_double(beta) << " h="
     << format_double(h) << " seed=" << seed << "\n";
  for (int y = n; y >= -n; --y) {
    for (int x = -n; x <= n; ++x)
      os << (config.spin(Site{x, y}) > 0 ? '+' : '-');
    os << "\n";
  }
}

SpinSnapshot read_spin_snapshot(std::istream& is) {
  std::string header;
  if (!std::getline(is, header))
    throw dimension_error("snapshot: missing header line");
  std::istringstream ss(header);
  const int n = static_cast<int>(parse_u64_token(expect_keyed(ss, "n"), "n"));
  const double beta = parse_double_token(expect_keyed(ss, "beta"), "beta");
  const double h = parse_double_token(expect_keyed(ss, "h"), "h");
  const uint64_t seed = parse_u64_token(expect_keyed(ss, "seed"), "seed");

  SpinSnapshot snap{SpinConfig(Box(n)), beta, h, seed};
  const int side = 2 * n + 1;
  for (int y = n; y >= -n; --y) {
    std::string row;
    if (!std::getline(is, row))
      throw dimension_error("snapshot: truncated spin rows");
    if (static_cast<int>(row.size()) != side)
      throw dimension_error("snapshot: row length mismatch");
    for (int x = -n; x <= n; ++x) {
      const char c = row[x + n];
      if (c != '+' && c != '-')
        throw dimension_error("snapshot: spins must be '+' or '-'");
      snap.config.set_spin(Site{x, y}, c == '+' ? int8_t{1} : int8_t{-1});
    }
  }
  return snap;
}

std::string spin_snapshot_string(const SpinConfig& config, double beta,
                                 double h, uint64_t seed) {
  std::ostringstream os;
  write_spin_snapshot(os, config, beta, h, seed);
  return os.str();
}

SpinSnapshot spin_snapshot_from_string(const std::string& text) {
  std::istringstream is(text);
  return read_spin_snapshot(is);
}

}  // namespace schonmann
