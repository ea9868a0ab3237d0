#include "schonmann/cluster.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "schonmann/snapshot.hpp"

namespace schonmann {

namespace {

Bond make_bond(Site a, Site b) {
  if (b < a) std::swap(a, b);
  return Bond{a, b};
}

// union-find with path compression and union by size
struct UnionFind {
  std::vector<int> parent;
  std::vector<int> size;

  explicit UnionFind(int n) : parent(n), size(n, 1) {
    for (int i = 0; i < n; ++i) parent[i] = i;
  }
  int find(int x) {
    int root = x;
    while (parent[root] != root) root = parent[root];
    while (parent[x] != root) {
      const int next = parent[x];
      parent[x] = root;
      x = next;
    }
    return root;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size[a] < size[b]) std::swap(a, b);
    parent[b] = a;
    size[a] += size[b];
  }
};

}  // namespace

BondTable::BondTable(const Box& box) : box_(box) {
  volume_mask_.assign(box.site_count(), 1);
  const int n = box.half_width();
  for (int y = -n; y <= n; ++y) {
    for (int x = -n; x <= n; ++x) {
      const Site s{x, y};
      // +x/+y direction covers every in-volume pair once; the -x/-y cross
      // bonds are handled from the outside endpoint's perspective below.
      bonds_.push_back(make_bond(s, Site{x + 1, y}));
      bonds_.push_back(make_bond(s, Site{x, y + 1}));
      if (x == -n) bonds_.push_back(make_bond(s, Site{x - 1, y}));
      if (y == -n) bonds_.push_back(make_bond(s, Site{x, y - 1}));
    }
  }
  std::sort(bonds_.begin(), bonds_.end());
  bonds_.erase(std::unique(bonds_.begin(), bonds_.end()), bonds_.end());
}

BondTable BondTable::for_volume(const SpinConfig& frame) {
  BondTable t;
  t.box_ = frame.box();
  t.volume_mask_.assign(t.box_.site_count(), 0);
  for (Site s : frame.volume_sites()) t.volume_mask_[t.box_.index_of(s)] = 1;

  for (Site s : frame.volume_sites()) {
    for (Site d : {Site{1, 0}, Site{-1, 0}, Site{0, 1}, Site{0, -1}}) {
      const Site q{s.x + d.x, s.y + d.y};
      t.bonds_.push_back(make_bond(s, q));
    }
  }
  std::sort(t.bonds_.begin(), t.bonds_.end());
  t.bonds_.erase(std::unique(t.bonds_.begin(), t.bonds_.end()),
                 t.bonds_.end());
  return t;
}

int BondTable::index_of(const Bond& b) const {
  const auto it = std::lower_bound(bonds_.begin(), bonds_.end(), b);
  if (it == bonds_.end() || *it != b)
    throw dimension_error("bond not in table");
  return static_cast<int>(it - bonds_.begin());
}

bool BondTable::in_volume(Site s) const {
  return box_.contains(s) && volume_mask_[box_.index_of(s)] != 0;
}

ClusterLabeling label_clusters(const BondConfig& bonds) {
  const BondTable& table = *bonds.table;
  const Box& box = table.box();
  const int sites = box.site_count();
  const int exterior_node = sites;  // virtual wired node
  UnionFind uf(sites + 1);

  // non-volume interior sites belong to the wired exterior
  for (int i = 0; i < sites; ++i)
    if (!table.in_volume(box.site_at(i))) uf.unite(i, exterior_node);

  for (size_t i = 0; i < table.size(); ++i) {
    if (!bonds.open[i]) continue;
    const Bond& b = table.bond(i);
    const int na =
        table.in_volume(b.a) ? box.index_of(b.a) : exterior_node;
    const int nb =
        table.in_volume(b.b) ? box.index_of(b.b) : exterior_node;
    uf.unite(na, nb);
  }

  ClusterLabeling out;
  out.box_ = box;
  out.site_label_.assign(sites, -1);

  // canonical label = smallest member site index
  std::vector<int> canonical(sites + 1, std::numeric_limits<int>::max());
  for (int i = 0; i < sites; ++i) {
    if (!table.in_volume(box.site_at(i))) continue;
    const int root = uf.find(i);
    canonical[root] = std::min(canonical[root], i);
  }
  const int exterior_root = uf.find(exterior_node);

  std::map<int, bool> clusters;  // canonical label -> wired flag
  for (int i = 0; i < sites; ++i) {
    if (!table.in_volume(box.site_at(i))) continue;
    const int root = uf.find(i);
    out.site_label_[i] = canonical[root];
    clusters[canonical[root]] = (root == exterior_root);
  }
  for (const auto& [label, wired] : clusters) {
    out.roots_.push_back(label);
    out.wired_flag_.push_back(wired ? 1 : 0);
  }
  return out;
}

int ClusterLabeling::label_of(Site s) const {
  const int label = site_label_[box_.index_of(s)];
  if (label < 0) throw dimension_error("site is not part of the volume");
  return label;
}

bool ClusterLabeling::touches_wired(int label) const {
  const auto it = std::lower_bound(roots_.begin(), roots_.end(), label);
  if (it == roots_.end() || *it != label)
    throw dimension_error("unknown cluster label");
  return wired_flag_[it - roots_.begin()] != 0;
}

BondConfig es_bond_step(const SpinConfig& spins, double p_bond, Rng& rng) {
  if (p_bond < 0.0 || p_bond > 1.0)
    throw dimension_error("bond probability must lie in [0,1]");
  auto table = std::make_shared<BondTable>(BondTable::for_volume(spins));
  BondConfig out(table);
  for (size_t i = 0; i < table->size(); ++i) {
    const Bond& b = table->bond(i);
    const double u = rng.uniform();  // consumed for every bond
    const bool aligned = spins.spin(b.a) == spins.spin(b.b);
    out.open[i] = (aligned && u < p_bond) ? 1 : 0;
  }
  return out;
}

SpinConfig es_color_step(const BondConfig& bonds, Rng& rng) {
  const BondTable& table = *bonds.table;
  const Box& box = table.box();
  const ClusterLabeling labels = label_clusters(bonds);

  // fair signs drawn in canonical label order
  std::map<int, int8_t> color;
  for (int label : labels.labels())
    color[label] = labels.touches_wired(label) ? int8_t{1} : rng.fair_sign();

  SpinConfig out(box, +1, +1);
  for (int i = 0; i < box.site_count(); ++i) {
    const Site s = box.site_at(i);
    if (table.in_volume(s))
      out.set_spin(s, color[labels.label_of(s)]);
    else
      out.set_exterior(s, +1);  // masked-out sites stay wired boundary data
  }
  return out;
}

void swendsen_wang_sweep(ChainState& state, const ModelParams& params) {
  if (params.h != 0.0)
    throw unsupported_parameter(
        "swendsen-wang updates require h = 0 (field breaks the "
        "cluster-coloring symmetry)");
  if (state.config.free_count() != state.config.box().site_count())
    throw clamp_violation(
        "swendsen-wang updates support only fully free configurations");
  const double p = bond_probability(params.beta);
  BondConfig bonds = es_bond_step(state.config, p, state.rng);
  state.config = es_color_step(bonds, state.rng);
  ++state.sweep_count;
}

bool connected_to_exterior(const BondConfig& bonds, const Region& region) {
  const ClusterLabeling labels = label_clusters(bonds);
  for (Site s : region.sites(bonds.box())) {
    if (!bonds.table->in_volume(s)) continue;
    if (labels.touches_wired(labels.label_of(s))) return true;
  }
  return false;
}

double dual_p(double p) {
  if (p < 0.0 || p > 1.0)
    throw dimension_error("dual_p: probability must lie in [0,1]");
  return (2.0 - 2.0 * p) / (2.0 - p);
}

double dual_beta(double beta) {
  if (!(beta > 0.0)) throw dimension_error("dual_beta: beta must be > 0");
  const double closed_dual = 1.0 - dual_p(bond_probability(beta));
  if (closed_dual <= 0.0) return std::numeric_limits<double>::infinity();
  return -0.5 * std::log(closed_dual);
}

void write_bond_snapshot(std::ostream& os, const BondConfig& bonds, double p,
                         uint64_t seed) {
  os << "n=" << bonds.box().half_width() << " p=" << format_double(p)
     << " seed=" << seed << "\n";
  for (size_t i = 0; i < bonds.table->size(); ++i) {
    const Bond& b = bonds.table->bond(i);
    os << b.a.x << "," << b.a.y << " " << b.b.x << "," << b.b.y << " "
       << (bonds.open[i] ? 1 : 0) << "\n";
  }
}

BondSnapshot read_bond_snapshot(std::istream& is) {
  std::string header;
  if (!std::getline(is, header))
    throw dimension_error("bond snapshot: missing header");
  int n = 0;
  double p = 0.0;
  uint64_t seed = 0;
  {
    std::istringstream ss(header);
    std::string tok;
    if (!(ss >> tok) || tok.rfind("n=", 0) != 0)
      throw dimension_error("bond snapshot: expected n=");
    n = std::stoi(tok.substr(2));
    if (!(ss >> tok) || tok.rfind("p=", 0) != 0)
      throw dimension_error("bond snapshot: expected p=");
    p = std::stod(tok.substr(2));
    if (!(ss >> tok) || tok.rfind("seed=", 0) != 0)
      throw dimension_error("bond snapshot: expected seed=");
    seed = std::stoull(tok.substr(5));
  }
  auto table = std::make_shared<BondTable>(Box(n));
  BondSnapshot snap{BondConfig(table), p, seed};
  for (size_t i = 0; i < table->size(); ++i) {
    std::string line;
    if (!std::getline(is, line))
      throw dimension_error("bond snapshot: truncated bond list");
    std::istringstream ss(line);
    Bond b;
    char comma;
    int open = 0;
    if (!(ss >> b.a.x >> comma >> b.a.y >> b.b.x) || comma != ',')
      throw dimension_error("bond snapshot: malformed bond line");
    ss >> comma >> b.b.y >> open;
    if (comma != ',' || (open != 0 && open != 1))
      throw dimension_error("bond snapshot: malformed bond line");
    if (table->bond(i) != b)
      throw dimension_error("bond snapshot: bonds out of order");
    snap.bonds.open[i] = static_cast<uint8_t>(open);
  }
  return snap;
}

}  // namespace schonmann
