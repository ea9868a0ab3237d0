#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "schonmann/ising.hpp"
#include "schonmann/lattice.hpp"
#include "schonmann/rng.hpp"

namespace schonmann {

struct Bond {
  Site a, b;  // canonical: a < b lexicographically
  auto operator<=>(const Bond&) const = default;
};

// Nearest-neighbor bonds with at least one endpoint in the volume, sorted
// lexicographically.  For a plain box the volume is [-n,n]^2; masked frames
// restrict it to their non-exterior sites.  Immutable and shareable.
class BondTable {
 public:
  explicit BondTable(const Box& box);
  static BondTable for_volume(const SpinConfig& frame);

  const Box& box() const { return box_; }
  size_t size() const { return bonds_.size(); }
  const Bond& bond(size_t i) const { return bonds_[i]; }
  const std::vector<Bond>& bonds() const { return bonds_; }
  int index_of(const Bond& b) const;

  bool in_volume(Site s) const;

 private:
  BondTable() : box_(0) {}
  Box box_;
  std::vector<Bond> bonds_;
  std::vector<uint8_t> volume_mask_;  // interior sites, row-major
};

// Open/closed assignment on the bond table; everything beyond the table is
// implicitly open (wired exterior).
struct BondConfig {
  std::shared_ptr<const BondTable> table;
  std::vector<uint8_t> open;

  explicit BondConfig(std::shared_ptr<const BondTable> t)
      : table(std::move(t)), open(table->size(), 0) {}

  const Box& box() const { return table->box(); }
};

// Connected components of the open-bond graph.  The wired exterior (ring,
// masked-out sites, and everything beyond) is one virtual node; clusters
// touching it are flagged.  Labels are canonical: the smallest interior site
// index in the cluster.
class ClusterLabeling {
 public:
  int label_of(Site s) const;
  bool touches_wired(int label) const;
  int cluster_count() const { return static_cast<int>(roots_.size()); }
  const std::vector<int>& labels() const { return roots_; }  // canonical list

 private:
  friend ClusterLabeling label_clusters(const BondConfig&);
  Box box_{0};
  std::vector<int> site_label_;     // per interior site; -1 for non-volume
  std::vector<int> roots_;          // sorted canonical labels
  std::vector<uint8_t> wired_flag_; // parallel to roots_
};

ClusterLabeling label_clusters(const BondConfig& bonds);

// Bond half of the Edwards-Sokal two-step procedure: every table bond whose
// endpoint spins agree opens independently with probability p_bond; bonds
// between disagreeing spins stay closed.  One uniform is consumed per table
// bond regardless of alignment.
BondConfig es_bond_step(const SpinConfig& spins, double p_bond, Rng& rng);

// Color half: clusters touching the wired exterior become +1, every other
// cluster gets an independent fair sign (one uniform per non-wired cluster,
// in canonical label order).
SpinConfig es_color_step(const BondConfig& bonds, Rng& rng);

// Bond step at p = 1 - e^{-2 beta} followed by the color step; preserves the
// plus-boundary measure.  Requires h = 0 and a fully free configuration.
void swendsen_wang_sweep(ChainState& state, const ModelParams& params);

// True iff some region site's cluster reaches the wired exterior (the
// finite-volume stand-in for an infinite cluster).
bool connected_to_exterior(const BondConfig& bonds, const Region& region);

// Planar duality at the bond level: p* = (2-2p)/(2-p).  The coupling form
// goes through the bond map, beta* = -log(tanh(beta))/2; returns +inf when
// the dual coupling diverges.
double dual_p(double p);
double dual_beta(double beta);

inline double bond_probability(double beta) { return 1.0 - std::exp(-2.0 * beta); }

// "rc-snapshot v1": header `n=<n> p=<float> seed=<u64>`, then one line per
// bond `x1,y1 x2,y2 0|1` in table (lexicographic) order.
void write_bond_snapshot(std::ostream& os, const BondConfig& bonds, double p,
                         uint64_t seed);
struct BondSnapshot {
  BondConfig bonds;
  double p = 0.0;
  uint64_t seed = 0;
};
BondSnapshot read_bond_snapshot(std::istream& is);

}  // namespace schonmann
