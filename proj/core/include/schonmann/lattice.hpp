#pragma once

#include <compare>
#include <cstdint>
#include <vector>

#include "schonmann/errors.hpp"

namespace schonmann {

struct Site {
  int x = 0;
  int y = 0;
  auto operator<=>(const Site&) const = default;
};

// Square volume [-n,n]^2 with a one-site boundary ring.  Interior sites are
// indexed row-major: index = (y+n)*(2n+1) + (x+n), a bijection with
// [0, (2n+1)^2).  Ring sites (exactly one coordinate at +-(n+1); corners are
// not nearest neighbors of anything and are excluded) get their own
// deterministic indexing in scan order.
class Box {
 public:
  explicit Box(int half_width);

  int half_width() const { return n_; }
  int side() const { return 2 * n_ + 1; }
  int site_count() const { return side() * side(); }
  int ring_count() const { return 4 * side(); }

  bool contains(Site s) const {
    return s.x >= -n_ && s.x <= n_ && s.y >= -n_ && s.y <= n_;
  }
  bool on_ring(Site s) const {
    const bool ax = (s.x == n_ + 1 || s.x == -n_ - 1);
    const bool ay = (s.y == n_ + 1 || s.y == -n_ - 1);
    return ax != ay && s.x >= -n_ - 1 && s.x <= n_ + 1 && s.y >= -n_ - 1 &&
           s.y <= n_ + 1;
  }

  int index_of(Site s) const;
  Site site_at(int index) const;

  int ring_index_of(Site s) const;
  std::vector<Site> ring_sites() const;

  bool operator==(const Box&) const = default;

 private:
  int n_;
};

enum class SiteRole : uint8_t {
  free_site,  // part of the volume, updated by dynamics
  clamped,    // part of the volume, frozen to its value
  exterior,   // masked out: acts as boundary data (shapes general volumes)
};

// +-1 assignment on a box plus its boundary ring, with per-site roles.
// Stored as a padded (2n+3)^2 grid so neighbor access is branch-free; the
// four padded corners are never read.  Value type: workers copy, shared
// instances are read-only.
class SpinConfig {
 public:
  explicit SpinConfig(const Box& box, int8_t interior = +1, int8_t ring = +1);

  const Box& box() const { return box_; }

  int8_t spin(Site s) const { return grid_[pad_index(s)]; }
  void set_spin(Site s, int8_t v);

  SiteRole role(Site s) const { return role_[box_.index_of(s)]; }
  bool is_free(Site s) const { return role(s) == SiteRole::free_site; }

  void clamp(Site s, int8_t v);
  void set_exterior(Site s, int8_t v);
  void set_ring_uniform(int8_t v);

  // Sites belonging to the volume proper (free or clamped, not masked out).
  std::vector<Site> volume_sites() const;
  std::vector<Site> free_sites() const;
  int free_count() const;

  SpinConfig flipped() const;

  bool spins_equal(const SpinConfig& other) const {
    return grid_ == other.grid_;
  }
  bool same_frame(const SpinConfig& other) const {
    return box_ == other.box_ && role_ == other.role_;
  }

  // raw access for hot kernels
  int pad_side() const { return box_.side() + 2; }
  int pad_index(Site s) const {
    return (s.y + box_.half_width() + 1) * pad_side() +
           (s.x + box_.half_width() + 1);
  }
  int8_t* grid_data() { return grid_.data(); }
  const int8_t* grid_data() const { return grid_.data(); }
  const SiteRole* role_data() const { return role_.data(); }

 private:
  Box box_;
  std::vector<int8_t> grid_;    // padded (side+2)^2
  std::vector<SiteRole> role_;  // interior, row-major
};

// Pointwise partial order over all sites (interior and ring).
bool leq(const SpinConfig& a, const SpinConfig& b);

// Regions of interest on the lattice: line windows, a truncated half-line,
// exponentially opening cones, or explicit site sets.
class Region {
 public:
  enum class Kind { line_segment, half_line, cone, explicit_sites };

  static Region line_segment(int a, int b);
  static Region half_line();  // (-inf,-1] x {0}, truncated to the box
  static Region cone(double theta, int offset);
  static Region explicit_sites(std::vector<Site> sites);

  Kind kind() const { return kind_; }
  double theta() const { return theta_; }
  int offset() const { return offset_; }

  bool contains(Site s, const Box& box) const;
  // Deterministic (x,y)-sorted in-box site list; empty if disjoint from box.
  std::vector<Site> sites(const Box& box) const;

 private:
  Region() = default;
  Kind kind_ = Kind::explicit_sites;
  int a_ = 0, b_ = -1;
  double theta_ = 0.0;
  int offset_ = 0;
  std::vector<Site> explicit_;
};

// A finite one-sided word w_{-n}..w_{-1} plus a symbol class for everything
// further left.  word.front() is the deepest symbol w_{-n}, word.back() is
// w_{-1}.
struct PastWindow {
  enum class Tail { all_plus, all_minus, explicit_tail };

  std::vector<int8_t> word;
  Tail tail = Tail::all_plus;
  std::vector<int8_t> tail_word;  // used when tail == explicit_tail;
                                  // tail_word.back() is w_{-(n+1)}

  // Symbol at site -depth (depth >= 1); falls through to the tail beyond the
  // word.  Explicit tails must cover the requested depth.
  int8_t symbol_at(int depth) const;

  static PastWindow from_string(const std::string& plus_minus,
                                Tail tail = Tail::all_plus);
  std::string word_string() const;
};

}  // namespace schonmann
