#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "schonmann/ising.hpp"
#include "schonmann/lattice.hpp"
#include "schonmann/stats.hpp"

namespace schonmann {

// Sampling + scheduling knobs shared by the Monte Carlo estimators.
struct EstimatorOptions {
  SamplerOptions sampler;
  unsigned workers = 1;
};

// Spins on a line window [lo,hi] x {0}; `sites` lists the kept coordinates
// (the full interval unless decimated).
struct LineConfig {
  int lo = 0;
  int hi = -1;
  std::vector<int> sites;
  std::vector<int8_t> spins;

  bool keeps(int x) const;
  int8_t spin_at(int x) const;
};

// Restriction of a 2d configuration to [a,b] x {0}.
LineConfig project(const SpinConfig& config, int a, int b);

// Keeps sites x with floor-mod (x mod (k+l)) in [0, l-1]: blocks of l
// consecutive sites separated by gaps of k, indexed by original coordinates.
LineConfig decimate(const LineConfig& line, int l, int k);

// Plus-boundary box with line sites -cond_len..-1 clamped to the tail-extended
// past window.
SpinConfig conditioned_frame(int box_n, const PastWindow& past, int cond_len,
                             int8_t boundary = +1);

struct GEstimate {
  EstimateWithCI value;  // P(eta_0 = +1 | conditioning)
  PastWindow past;
  int box_n = 0;
  int cond_len = 0;
  bool approximate = false;  // some draw fell back from perfect sampling

  double p_plus() const { return value.value; }
  double p_minus() const { return 1.0 - value.value; }  // complement by construction
};

// One-sided conditional frequency of +1 at the origin given the past window
// clamped on -cond_len..-1 of the line.  All randomness derives from `seed`,
// so two calls differing only in the tail symbol share their uniforms and the
// minus-tail estimate is pathwise below the plus-tail one.
GEstimate estimate_g(const PastWindow& past, const ModelParams& params,
                     int box_n, int cond_len, uint64_t samples, uint64_t seed,
                     const EstimatorOptions& options = {});

struct GGapEstimate {
  GEstimate minus_tail;
  GEstimate plus_tail;
  EstimateWithCI gap;           // paired mean of (hi == +) - (lo == +)
  uint64_t order_violations = 0;  // pathwise order failures; must stay 0
};

// Co-scheduled +-tail pair on shared uniforms for a given word.
GGapEstimate estimate_g_gap(const std::vector<int8_t>& word,
                            const ModelParams& params, int box_n, int cond_len,
                            uint64_t samples, uint64_t seed,
                            const EstimatorOptions& options = {});

enum class WordSource { exhaustive, sampled_from_projection };

struct VarkEstimate {
  int k = 0;
  double raw_max = 0.0;          // max gap over examined words
  EstimateWithCI lower_bound;    // after monotone-in-k envelope
  uint64_t words_examined = 0;
  std::string argmax_word;
  uint64_t order_violations = 0;
};

// Certified lower bound on the variation coefficient at depth k: max over
// examined length-k words of the +-tail gap (extremal tails beyond -k).
// Exhaustive enumeration for k <= 10; otherwise words are drawn from the
// simulated plus-phase projection.
VarkEstimate estimate_vark(const ModelParams& params, int k, WordSource source,
                           uint64_t word_count, int box_n,
                           uint64_t samples_per_word, uint64_t seed,
                           const EstimatorOptions& options = {});

// Range \[k_min, k_max]\ with shared seeds and the running-min envelope that
// keeps the reported bounds non-increasing in k.
std::vector<VarkEstimate> estimate_vark_curve(
    const ModelParams& params, int k_min, int k_max, WordSource source,
    uint64_t word_count, int box_n, uint64_t samples_per_word, uint64_t seed,
    const EstimatorOptions& options = {});

// Exact probability of a line cylinder event {eta_x = v for (x,v) in event}
// under the finite-volume measure of `base` (enumeration oracle; capacity
// capped like enumerate_measure).
double line_cylinder_oracle(
    const SpinConfig& base, const ModelParams& params,
    std::span<const std::pair<int, int8_t>> line_event);

}  // namespace schonmann
