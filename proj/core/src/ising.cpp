#include "schonmann/ising.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace schonmann {

namespace {

constexpr Site kDirections[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};

double field_coefficient(const ModelParams& params) {
  return params.field_sign == FieldSign::paper_literal ? params.h : -params.h;
}

bool in_volume(const SpinConfig& c, Site s) {
  return c.box().contains(s) && c.role(s) != SiteRole::exterior;
}

}  // namespace

double hamiltonian(const SpinConfig& config, const ModelParams& params) {
  const Box& box = config.box();
  const int n = box.half_width();
  const double hc = field_coefficient(params);
  double bonds = 0.0;
  double field = 0.0;
  for (int y = -n; y <= n; ++y) {
    for (int x = -n; x <= n; ++x) {
      const Site s{x, y};
      if (!in_volume(config, s)) continue;
      const double w = config.spin(s);
      field += w;
      // volume-volume bonds once each (canonical +x/+y direction)
      for (Site d : {Site{1, 0}, Site{0, 1}}) {
        const Site t{s.x + d.x, s.y + d.y};
        if (in_volume(config, t)) bonds += w * config.spin(t);
      }
      // cross bonds to boundary data (ring or masked-out sites)
      for (Site d : kDirections) {
        const Site t{s.x + d.x, s.y + d.y};
        if (!in_volume(config, t)) bonds += w * config.spin(t);
      }
    }
  }
  return -params.beta * bonds + hc * field;
}

double heat_bath_prob_plus(int neighbor_sum, const ModelParams& params) {
  const double hc = field_coefficient(params);
  return 1.0 / (1.0 + std::exp(-2.0 * (params.beta * neighbor_sum - hc)));
}

void heat_bath_update(SpinConfig& config, Site site, double u,
                      const ModelParams& params) {
  if (!config.box().contains(site))
    throw dimension_error("heat-bath update outside box interior");
  if (config.role(site) != SiteRole::free_site)
    throw clamp_violation("heat-bath update on a clamped or masked site");
  const int p = config.pad_index(site);
  const int stride = config.pad_side();
  const int8_t* g = config.grid_data();
  const int sum = g[p - 1] + g[p + 1] + g[p - stride] + g[p + stride];
  config.grid_data()[p] =
      (u < heat_bath_prob_plus(sum, params)) ? int8_t{1} : int8_t{-1};
}

SpinConfig heat_bath_updated(const SpinConfig& config, Site site, double u,
                             const ModelParams& params) {
  SpinConfig out = config;
  heat_bath_update(out, site, u, params);
  return out;
}

size_t sweep_uniform_count(const Box& box) {
  return static_cast<size_t>(box.site_count());
}

void fill_sweep_uniforms(Rng& rng, std::span<double> out) {
  for (double& u : out) u = rng.uniform();
}

void sweep_with(SpinConfig& config, const ModelParams& params,
                std::span<const double> uniforms) {
  const Box& box = config.box();
  const int side = box.side();
  if (uniforms.size() != sweep_uniform_count(box))
    throw dimension_error("sweep uniform buffer has wrong size");

  double table[5];
  for (int i = 0; i < 5; ++i)
    table[i] = heat_bath_prob_plus(2 * i - 4, params);

  const int stride = config.pad_side();
  int8_t* g = config.grid_data();
  const SiteRole* roles = config.role_data();

  for (int parity = 0; parity < 2; ++parity) {
    for (int iy = 0; iy < side; ++iy) {
      const int row = iy * side;
      const int prow = (iy + 1) * stride;
      for (int ix = (parity ^ (iy & 1)); ix < side; ix += 2) {
        const int idx = row + ix;
        if (roles[idx] != SiteRole::free_site) continue;
        const int p = prow + ix + 1;
        const int sum = g[p - 1] + g[p + 1] + g[p - stride] + g[p + stride];
        g[p] = (uniforms[idx] < table[(sum + 4) >> 1]) ? int8_t{1} : int8_t{-1};
      }
    }
  }
}

void sweep(ChainState& state, const ModelParams& params) {
  thread_local std::vector<double> buffer;
  buffer.resize(sweep_uniform_count(state.config.box()));
  fill_sweep_uniforms(state.rng, buffer);
  sweep_with(state.config, params, buffer);
  ++state.sweep_count;
}

// --- exact enumeration ------------------------------------------------------

ExactDistribution::ExactDistribution(const SpinConfig& base,
                                     const ModelParams& params)
    : base_(base), params_(params), free_(base.free_sites()) {
  const int f = static_cast<int>(free_.size());
  if (f > kEnumerationFreeSiteCap)
    throw capacity_error("exact enumeration supports at most " +
                         std::to_string(kEnumerationFreeSiteCap) +
                         " free sites, got " + std::to_string(f));

  const size_t states = size_t{1} << f;
  std::vector<double> energy(states);

  // Gray-code walk: one spin flip per step, O(1) energy update.
  SpinConfig work = base_;
  for (Site s : free_) work.set_spin(s, -1);
  double H = hamiltonian(work, params_);
  energy[0] = H;

  const double hc = field_coefficient(params_);
  const int stride = work.pad_side();
  int8_t* g = work.grid_data();
  std::vector<int> pad(free_.size());
  for (size_t i = 0; i < free_.size(); ++i) pad[i] = work.pad_index(free_[i]);

  uint32_t gray = 0;
  for (size_t s = 1; s < states; ++s) {
    const int bit = std::countr_zero(s);
    const int p = pad[bit];
    const int8_t w = g[p];
    const int sum = g[p - 1] + g[p + 1] + g[p - stride] + g[p + stride];
    H += 2.0 * w * (params_.beta * sum) - 2.0 * hc * w;
    g[p] = static_cast<int8_t>(-w);
    gray ^= uint32_t{1} << bit;
    energy[gray] = H;
  }

  const double emin = *std::min_element(energy.begin(), energy.end());
  long double z = 0.0L;
  prob_.resize(states);
  for (size_t i = 0; i < states; ++i) {
    prob_[i] = std::exp(-(energy[i] - emin));
    z += prob_[i];
  }
  cumulative_.resize(states);
  long double acc = 0.0L;
  for (size_t i = 0; i < states; ++i) {
    prob_[i] = static_cast<double>(prob_[i] / z);
    acc += prob_[i];
    cumulative_[i] = static_cast<double>(acc);
  }
  cumulative_.back() = 1.0;
}

SpinConfig ExactDistribution::realize(uint32_t state) const {
  SpinConfig out = base_;
  for (size_t i = 0; i < free_.size(); ++i)
    out.set_spin(free_[i], (state >> i) & 1 ? int8_t{1} : int8_t{-1});
  return out;
}

uint32_t ExactDistribution::encode(const SpinConfig& config) const {
  uint32_t state = 0;
  for (size_t i = 0; i < free_.size(); ++i)
    if (config.spin(free_[i]) > 0) state |= uint32_t{1} << i;
  return state;
}

double ExactDistribution::marginal_plus(Site site) const {
  const auto it = std::find(free_.begin(), free_.end(), site);
  if (it == free_.end()) {
    // fixed site: deterministic marginal
    if (!base_.box().contains(site) && !base_.box().on_ring(site))
      throw dimension_error("marginal site outside box frame");
    return base_.spin(site) > 0 ? 1.0 : 0.0;
  }
  const size_t bit = static_cast<size_t>(it - free_.begin());
  long double sum = 0.0L;
  for (size_t s = 0; s < prob_.size(); ++s)
    if ((s >> bit) & 1) sum += prob_[s];
  return static_cast<double>(sum);
}

double ExactDistribution::cylinder_prob(
    std::span<const std::pair<Site, int8_t>> fixed_spins) const {
  uint32_t mask = 0, want = 0;
  for (const auto& [site, value] : fixed_spins) {
    const auto it = std::find(free_.begin(), free_.end(), site);
    if (it == free_.end()) {
      if (base_.spin(site) != value) return 0.0;
      continue;
    }
    const uint32_t bit = uint32_t{1} << (it - free_.begin());
    mask |= bit;
    if (value > 0) want |= bit;
  }
  long double sum = 0.0L;
  for (size_t s = 0; s < prob_.size(); ++s)
    if ((static_cast<uint32_t>(s) & mask) == want) sum += prob_[s];
  return static_cast<double>(sum);
}

double ExactDistribution::event_prob(
    const std::function<bool(const SpinConfig&)>& event) const {
  long double sum = 0.0L;
  for (size_t s = 0; s < prob_.size(); ++s)
    if (event(realize(static_cast<uint32_t>(s)))) sum += prob_[s];
  return static_cast<double>(sum);
}

uint32_t ExactDistribution::sample_index(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return static_cast<uint32_t>(
      std::min<size_t>(it - cumulative_.begin(), cumulative_.size() - 1));
}

SpinConfig ExactDistribution::sample(Rng& rng) const {
  return realize(sample_index(rng));
}

ExactDistribution enumerate_measure(const SpinConfig& base,
                                    const ModelParams& params) {
  return ExactDistribution(base, params);
}

// --- coupling from the past -------------------------------------------------

namespace {

SpinConfig with_free_sites(const SpinConfig& frame, int8_t value) {
  SpinConfig out = frame;
  for (Site s : frame.free_sites()) out.set_spin(s, value);
  return out;
}

int epoch_count(uint64_t horizon) {  // horizon is a power of two
  return std::countr_zero(horizon);
}

}  // namespace

CftpResult cftp_sample(const SpinConfig& frame, const ModelParams& params,
                       uint64_t seed, const CftpOptions& options) {
  if (frame.free_count() == 0) return {frame, 0};

  const SpinConfig upper_init = with_free_sites(frame, +1);
  const SpinConfig lower_init = with_free_sites(frame, -1);
  std::vector<double> buffer(sweep_uniform_count(frame.box()));

  for (uint64_t horizon = 1; horizon <= options.max_sweeps; horizon *= 2) {
    SpinConfig upper = upper_init;
    SpinConfig lower = lower_init;
    const int top_epoch = epoch_count(horizon);
    for (int e = top_epoch; e >= 0; --e) {
      Rng epoch_rng(mix_seed(seed, static_cast<uint64_t>(e)));
      const uint64_t sweeps_in_epoch =
          (e == 0) ? 1 : (uint64_t{1} << (e - 1));
      for (uint64_t i = 0; i < sweeps_in_epoch; ++i) {
        fill_sweep_uniforms(epoch_rng, buffer);
        sweep_with(upper, params, buffer);
        sweep_with(lower, params, buffer);
      }
    }
    if (upper.spins_equal(lower)) return {upper, horizon};
  }
  throw non_coalescence(options.max_sweeps);
}

// --- conditioned draws ------------------------------------------------------

namespace {

constexpr uint64_t kBurnInStreamTag = 0x6275726e;  // distinct from epoch tags

SpinConfig burn_in_draw(const SpinConfig& frame, const ModelParams& params,
                        uint64_t seed, int burn_sweeps) {
  SpinConfig config = with_free_sites(frame, +1);
  Rng rng(mix_seed(seed, kBurnInStreamTag));
  std::vector<double> buffer(sweep_uniform_count(frame.box()));
  for (int i = 0; i < burn_sweeps; ++i) {
    fill_sweep_uniforms(rng, buffer);
    sweep_with(config, params, buffer);
  }
  return config;
}

}  // namespace

int resolve_burn_in(const Box& box, const SamplerOptions& options) {
  if (options.burn_in_sweeps > 0) return options.burn_in_sweeps;
  return 64 + 2 * box.side();
}

SpinConfig draw_conditioned(const SpinConfig& frame, const ModelParams& params,
                            uint64_t seed, const SamplerOptions& options,
                            DrawStats* stats) {
  if (frame.free_count() == 0) return frame;

  SampleMethod method = options.method;
  if (method == SampleMethod::auto_select) {
    method = frame.box().site_count() <= 121 ? SampleMethod::cftp
                                             : SampleMethod::burn_in;
  }

  if (method == SampleMethod::cftp) {
    try {
      CftpOptions copt;
      copt.max_sweeps = options.cftp_max_sweeps;
      CftpResult res = cftp_sample(frame, params, seed, copt);
      if (stats) {
        ++stats->cftp_draws;
        stats->max_coalescence_sweeps =
            std::max(stats->max_coalescence_sweeps, res.coalescence_sweeps);
      }
      return std::move(res.config);
    } catch (const non_coalescence&) {
      if (!options.allow_fallback) throw;
      if (stats) stats->approximate = true;
    }
  }

  if (stats) ++stats->burn_in_draws;
  return burn_in_draw(frame, params, seed,
                      resolve_burn_in(frame.box(), options));
}

PlusPhaseSampler::PlusPhaseSampler(int half_width, const ModelParams& params,
                                   uint64_t seed,
                                   const SamplerOptions& options)
    : frame_(Box(half_width), +1, +1),
      params_(params),
      seed_(seed),
      options_(options) {
  if (half_width < 1)
    throw dimension_error("plus-phase sampler needs half-width >= 1");
}

SpinConfig PlusPhaseSampler::next() {
  const uint64_t draw_seed = mix_seed(seed_, draw_index_++);
  return draw_conditioned(frame_, params_, draw_seed, options_, &stats_);
}

}  // namespace schonmann
