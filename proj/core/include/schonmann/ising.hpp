#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "schonmann/lattice.hpp"
#include "schonmann/rng.hpp"

namespace schonmann {

enum class FieldSign {
  paper_literal,  // +h sum(w_x) inside the energy: positive h favors -1
  conventional,   // -h sum(w_x): positive h favors +1
};

struct ModelParams {
  double beta = 0.0;
  double h = 0.0;
  FieldSign field_sign = FieldSign::paper_literal;
};

// critical coupling of the square-lattice model, ln(1+sqrt 2)/2
inline const double beta_critical = std::log(1.0 + std::sqrt(2.0)) / 2.0;

// Energy of a configuration: -beta [ sum_{x~y, both in volume} w_x w_y
// + sum_{x in volume, y outside} w_x s_y ] + h sum_{x in volume} w_x,
// with the sign of the field term controlled by field_sign.  Clamped sites
// count as ordinary volume sites; exterior-masked sites count as boundary.
double hamiltonian(const SpinConfig& config, const ModelParams& params);

// P(w_x = +1 | neighbor sum S): 1/(1 + e^{-2(beta S - h)}) in the
// paper_literal convention, 1/(1 + e^{-2(beta S + h)}) in the conventional
// one.  S ranges over {-4,-2,0,2,4}.
double heat_bath_prob_plus(int neighbor_sum, const ModelParams& params);

// Single-site Gibbs update with an externally supplied uniform.  Using the
// same u on two ordered configurations preserves the order.
void heat_bath_update(SpinConfig& config, Site site, double u,
                      const ModelParams& params);
SpinConfig heat_bath_updated(const SpinConfig& config, Site site, double u,
                             const ModelParams& params);

// One checkerboard pass (all even-parity sites in index order, then all odd)
// driven by a caller-owned uniform buffer with one entry per interior site,
// indexed by interior site index.  Clamped/exterior entries are ignored but
// still reserved, so consumption never depends on the clamp pattern.
void sweep_with(SpinConfig& config, const ModelParams& params,
                std::span<const double> uniforms);

// Uniform buffer layout contract for a sweep.
size_t sweep_uniform_count(const Box& box);
void fill_sweep_uniforms(Rng& rng, std::span<double> out);

struct ChainState {
  SpinConfig config;
  uint64_t sweep_count = 0;
  Rng rng;

  ChainState(SpinConfig initial, uint64_t seed)
      : config(std::move(initial)), rng(seed) {}
};

// Advances the chain by one sweep; replaying from (seed, sweep_count = 0)
// reproduces states bit-exactly.
void sweep(ChainState& state, const ModelParams& params);

// --- exact finite-volume distribution (the oracle for every sampler) ------

inline constexpr int kEnumerationFreeSiteCap = 22;

class ExactDistribution {
 public:
  // Enumerates all assignments of the free sites of `base` (boundary ring,
  // clamps and exterior mask held fixed).  Throws capacity_error when the
  // free-site count exceeds kEnumerationFreeSiteCap.
  ExactDistribution(const SpinConfig& base, const ModelParams& params);

  int free_count() const { return static_cast<int>(free_.size()); }
  const std::vector<Site>& free_sites() const { return free_; }
  const std::vector<double>& table() const { return prob_; }

  // state encoding: bit i set <=> free_sites()[i] carries +1
  double prob(uint32_t state) const { return prob_[state]; }
  SpinConfig realize(uint32_t state) const;
  uint32_t encode(const SpinConfig& config) const;

  double marginal_plus(Site site) const;
  double cylinder_prob(
      std::span<const std::pair<Site, int8_t>> fixed_spins) const;
  double event_prob(const std::function<bool(const SpinConfig&)>& event) const;

  uint32_t sample_index(Rng& rng) const;
  SpinConfig sample(Rng& rng) const;

 private:
  SpinConfig base_;
  ModelParams params_;
  std::vector<Site> free_;
  std::vector<double> prob_;
  std::vector<double> cumulative_;
};

ExactDistribution enumerate_measure(const SpinConfig& base,
                                    const ModelParams& params);

// --- perfect sampling and conditioned draws --------------------------------

struct CftpOptions {
  uint64_t max_sweeps = uint64_t{1} << 20;
};

struct CftpResult {
  SpinConfig config;
  uint64_t coalescence_sweeps = 0;  // epoch horizon at which chains had met
};

// Monotone coupling-from-the-past for the measure determined by `frame`
// (boundary ring, clamps, exterior mask).  Free-site values in `frame` are
// ignored.  Epoch horizons double (1,2,4,...); the uniforms of epoch e are
// regenerated from mix_seed(seed, e), so deeper restarts reuse shallower
// randomness exactly.  Throws non_coalescence past max_sweeps.
CftpResult cftp_sample(const SpinConfig& frame, const ModelParams& params,
                       uint64_t seed, const CftpOptions& options = {});

enum class SampleMethod { auto_select, cftp, burn_in };

struct SamplerOptions {
  SampleMethod method = SampleMethod::auto_select;
  int burn_in_sweeps = 0;            // 0 = heuristic from box size
  uint64_t cftp_max_sweeps = uint64_t{1} << 14;
  bool allow_fallback = true;        // burn-in fallback on non-coalescence
};

struct DrawStats {
  uint64_t cftp_draws = 0;
  uint64_t burn_in_draws = 0;
  uint64_t max_coalescence_sweeps = 0;
  bool approximate = false;  // true once any draw fell back to burn-in
};

int resolve_burn_in(const Box& box, const SamplerOptions& options);

// One independent draw from the conditional measure of `frame`.  All
// randomness derives from `seed`; with equal seeds, two frames that differ
// only in ordered clamp values yield pointwise-ordered draws.
SpinConfig draw_conditioned(const SpinConfig& frame, const ModelParams& params,
                            uint64_t seed, const SamplerOptions& options = {},
                            DrawStats* stats = nullptr);

// i.i.d. draws from the plus-boundary measure on [-n,n]^2.
class PlusPhaseSampler {
 public:
  PlusPhaseSampler(int half_width, const ModelParams& params, uint64_t seed,
                   const SamplerOptions& options = {});

  SpinConfig next();
  uint64_t draws() const { return draw_index_; }
  const DrawStats& stats() const { return stats_; }

 private:
  SpinConfig frame_;
  ModelParams params_;
  uint64_t seed_;
  SamplerOptions options_;
  uint64_t draw_index_ = 0;
  DrawStats stats_;
};

}  // namespace schonmann
