#include "schonmann/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace schonmann {

Box::Box(int half_width) : n_(half_width) {
  if (half_width < 0) throw dimension_error("box half-width must be >= 0");
}

int Box::index_of(Site s) const {
  if (!contains(s))
    throw dimension_error("site (" + std::to_string(s.x) + "," +
                          std::to_string(s.y) + ") outside box interior");
  return (s.y + n_) * side() + (s.x + n_);
}

Site Box::site_at(int index) const {
  if (index < 0 || index >= site_count())
    throw dimension_error("site index out of range");
  return Site{index % side() - n_, index / side() - n_};
}

int Box::ring_index_of(Site s) const {
  if (!on_ring(s)) throw dimension_error("site not on boundary ring");
  // scan order: y from -(n+1) to n+1, x from -(n+1) to n+1
  if (s.y == -n_ - 1) return s.x + n_;                  // bottom edge
  if (s.y == n_ + 1) return 3 * side() + s.x + n_;      // top edge
  const int row = s.y + n_;                             // middle rows
  return side() + 2 * row + (s.x == -n_ - 1 ? 0 : 1);
}

std::vector<Site> Box::ring_sites() const {
  std::vector<Site> out;
  out.reserve(ring_count());
  for (int y = -n_ - 1; y <= n_ + 1; ++y)
    for (int x = -n_ - 1; x <= n_ + 1; ++x)
      if (on_ring(Site{x, y})) out.push_back(Site{x, y});
  return out;
}

SpinConfig::SpinConfig(const Box& box, int8_t interior, int8_t ring)
    : box_(box),
      grid_(static_cast<size_t>(box.side() + 2) * (box.side() + 2), ring),
      role_(static_cast<size_t>(box.site_count()), SiteRole::free_site) {
  for (int y = -box_.half_width(); y <= box_.half_width(); ++y)
    for (int x = -box_.half_width(); x <= box_.half_width(); ++x)
      grid_[pad_index(Site{x, y})] = interior;
}

void SpinConfig::set_spin(Site s, int8_t v) {
  if (v != 1 && v != -1) throw dimension_error("spin must be +1 or -1");
  if (!box_.contains(s) && !box_.on_ring(s))
    throw dimension_error("site outside box frame");
  grid_[pad_index(s)] = v;
}

void SpinConfig::clamp(Site s, int8_t v) {
  set_spin(s, v);
  role_[box_.index_of(s)] = SiteRole::clamped;
}

void SpinConfig::set_exterior(Site s, int8_t v) {
  set_spin(s, v);
  role_[box_.index_of(s)] = SiteRole::exterior;
}

void SpinConfig::set_ring_uniform(int8_t v) {
  if (v != 1 && v != -1) throw dimension_error("spin must be +1 or -1");
  for (Site s : box_.ring_sites()) grid_[pad_index(s)] = v;
}

std::vector<Site> SpinConfig::volume_sites() const {
  std::vector<Site> out;
  for (int i = 0; i < box_.site_count(); ++i)
    if (role_[i] != SiteRole::exterior) out.push_back(box_.site_at(i));
  return out;
}

std::vector<Site> SpinConfig::free_sites() const {
  std::vector<Site> out;
  for (int i = 0; i < box_.site_count(); ++i)
    if (role_[i] == SiteRole::free_site) out.push_back(box_.site_at(i));
  return out;
}

int SpinConfig::free_count() const {
  int c = 0;
  for (SiteRole r : role_)
    if (r == SiteRole::free_site) ++c;
  return c;
}

SpinConfig SpinConfig::flipped() const {
  SpinConfig out = *this;
  for (auto& v : out.grid_) v = static_cast<int8_t>(-v);
  return out;
}

bool leq(const SpinConfig& a, const SpinConfig& b) {
  if (a.box() != b.box())
    throw dimension_error("leq: configurations live on different boxes");
  const int n = a.box().half_width();
  for (int y = -n; y <= n; ++y)
    for (int x = -n; x <= n; ++x)
      if (a.spin(Site{x, y}) > b.spin(Site{x, y})) return false;
  for (Site s : a.box().ring_sites())
    if (a.spin(s) > b.spin(s)) return false;
  return true;
}

Region Region::line_segment(int a, int b) {
  if (a > b) throw dimension_error("line segment needs a <= b");
  Region r;
  r.kind_ = Kind::line_segment;
  r.a_ = a;
  r.b_ = b;
  return r;
}

Region Region::half_line() {
  Region r;
  r.kind_ = Kind::half_line;
  return r;
}

Region Region::cone(double theta, int offset) {
  if (!(theta > 0)) throw dimension_error("cone aperture theta must be > 0");
  if (offset < 0) throw dimension_error("cone offset must be >= 0");
  Region r;
  r.kind_ = Kind::cone;
  r.theta_ = theta;
  r.offset_ = offset;
  return r;
}

Region Region::explicit_sites(std::vector<Site> sites) {
  Region r;
  r.kind_ = Kind::explicit_sites;
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  r.explicit_ = std::move(sites);
  return r;
}

bool Region::contains(Site s, const Box& box) const {
  if (!box.contains(s)) return false;
  switch (kind_) {
    case Kind::line_segment:
      return s.y == 0 && s.x >= a_ && s.x <= b_;
    case Kind::half_line:
      return s.y == 0 && s.x <= -1;
    case Kind::cone:
      // x >= offset and |y| <= e^{theta x}; exp may saturate to +inf, which
      // compares correctly.
      return s.x >= offset_ &&
             static_cast<double>(std::abs(s.y)) <=
                 std::exp(theta_ * static_cast<double>(s.x));
    case Kind::explicit_sites:
      return std::binary_search(explicit_.begin(), explicit_.end(), s);
  }
  return false;
}

std::vector<Site> Region::sites(const Box& box) const {
  std::vector<Site> out;
  const int n = box.half_width();
  for (int x = -n; x <= n; ++x)
    for (int y = -n; y <= n; ++y)
      if (contains(Site{x, y}, box)) out.push_back(Site{x, y});
  return out;  // already (x,y)-sorted by loop order
}

int8_t PastWindow::symbol_at(int depth) const {
  const int len = static_cast<int>(word.size());
  if (depth < 1) throw dimension_error("past depth must be >= 1");
  if (depth <= len) return word[len - depth];
  switch (tail) {
    case Tail::all_plus:
      return +1;
    case Tail::all_minus:
      return -1;
    case Tail::explicit_tail: {
      const int tdepth = depth - len;
      const int tlen = static_cast<int>(tail_word.size());
      if (tdepth > tlen)
        throw dimension_error("explicit tail shorter than requested depth");
      return tail_word[tlen - tdepth];
    }
  }
  throw dimension_error("bad tail kind");
}

PastWindow PastWindow::from_string(const std::string& plus_minus, Tail tail) {
  PastWindow w;
  w.tail = tail;
  w.word.reserve(plus_minus.size());
  for (char c : plus_minus) {
    if (c == '+')
      w.word.push_back(+1);
    else if (c == '-')
      w.word.push_back(-1);
    else
      throw dimension_error("past word characters must be '+' or '-'");
  }
  return w;
}

std::string PastWindow::word_string() const {
  std::string s;
  s.reserve(word.size());
  for (int8_t v : word) s.push_back(v > 0 ? '+' : '-');
  return s;
}

}  // namespace schonmann
