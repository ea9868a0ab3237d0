#include "schonmann/projection.hpp"

#include <algorithm>
#include <cmath>

#include "schonmann/parallel.hpp"

namespace schonmann {

bool LineConfig::keeps(int x) const {
  return std::binary_search(sites.begin(), sites.end(), x);
}

int8_t LineConfig::spin_at(int x) const {
  const auto it = std::lower_bound(sites.begin(), sites.end(), x);
  if (it == sites.end() || *it != x)
    throw dimension_error("line site " + std::to_string(x) + " not kept");
  return spins[it - sites.begin()];
}

LineConfig project(const SpinConfig& config, int a, int b) {
  if (a > b) throw dimension_error("projection window needs a <= b");
  const int n = config.box().half_width();
  if (a < -n || b > n)
    throw dimension_error("projection window outside box interior");
  LineConfig out;
  out.lo = a;
  out.hi = b;
  out.sites.reserve(b - a + 1);
  out.spins.reserve(b - a + 1);
  for (int x = a; x <= b; ++x) {
    out.sites.push_back(x);
    out.spins.push_back(config.spin(Site{x, 0}));
  }
  return out;
}

namespace {

int floor_mod(int x, int m) {
  const int r = x % m;
  return r < 0 ? r + m : r;
}

}  // namespace

LineConfig decimate(const LineConfig& line, int l, int k) {
  if (l < 1) throw dimension_error("decimation block length l must be >= 1");
  if (k < 0) throw dimension_error("decimation gap k must be >= 0");
  LineConfig out;
  out.lo = line.lo;
  out.hi = line.hi;
  const int period = l + k;
  for (size_t i = 0; i < line.sites.size(); ++i) {
    if (floor_mod(line.sites[i], period) < l) {
      out.sites.push_back(line.sites[i]);
      out.spins.push_back(line.spins[i]);
    }
  }
  return out;
}

SpinConfig conditioned_frame(int box_n, const PastWindow& past, int cond_len,
                             int8_t boundary) {
  if (cond_len < static_cast<int>(past.word.size()))
    throw dimension_error("past word longer than the conditioning window");
  if (box_n < cond_len)
    throw dimension_error("box half-width must cover the conditioning window");
  SpinConfig frame(Box(box_n), boundary, boundary);
  for (int depth = 1; depth <= cond_len; ++depth)
    frame.clamp(Site{-depth, 0}, past.symbol_at(depth));
  return frame;
}

namespace {

struct DrawOutcome {
  uint8_t plus = 0;
  uint8_t approximate = 0;
};

struct PairOutcome {
  uint8_t lo_plus = 0;
  uint8_t hi_plus = 0;
  uint8_t approximate = 0;
};

}  // namespace

GEstimate estimate_g(const PastWindow& past, const ModelParams& params,
                     int box_n, int cond_len, uint64_t samples, uint64_t seed,
                     const EstimatorOptions& options) {
  const SpinConfig frame = conditioned_frame(box_n, past, cond_len);
  const auto outcomes = parallel_map<DrawOutcome>(
      samples, options.workers, [&](size_t i) {
        DrawStats stats;
        const SpinConfig draw = draw_conditioned(
            frame, params, mix_seed(seed, i), options.sampler, &stats);
        DrawOutcome out;
        out.plus = draw.spin(Site{0, 0}) > 0 ? 1 : 0;
        out.approximate = stats.approximate ? 1 : 0;
        return out;
      });

  uint64_t plus = 0;
  bool approx = false;
  for (const DrawOutcome& o : outcomes) {
    plus += o.plus;
    approx = approx || o.approximate;
  }

  GEstimate est;
  est.value = binomial_estimate(plus, samples, seed);
  est.past = past;
  est.box_n = box_n;
  est.cond_len = cond_len;
  est.approximate = approx;
  return est;
}

GGapEstimate estimate_g_gap(const std::vector<int8_t>& word,
                            const ModelParams& params, int box_n, int cond_len,
                            uint64_t samples, uint64_t seed,
                            const EstimatorOptions& options) {
  PastWindow lo_past{word, PastWindow::Tail::all_minus, {}};
  PastWindow hi_past{word, PastWindow::Tail::all_plus, {}};
  const SpinConfig lo_frame = conditioned_frame(box_n, lo_past, cond_len);
  const SpinConfig hi_frame = conditioned_frame(box_n, hi_past, cond_len);

  const auto outcomes = parallel_map<PairOutcome>(
      samples, options.workers, [&](size_t i) {
        const uint64_t draw_seed = mix_seed(seed, i);
        DrawStats stats;
        const SpinConfig lo = draw_conditioned(lo_frame, params, draw_seed,
                                               options.sampler, &stats);
        const SpinConfig hi = draw_conditioned(hi_frame, params, draw_seed,
                                               options.sampler, &stats);
        PairOutcome out;
        out.lo_plus = lo.spin(Site{0, 0}) > 0 ? 1 : 0;
        out.hi_plus = hi.spin(Site{0, 0}) > 0 ? 1 : 0;
        out.approximate = stats.approximate ? 1 : 0;
        return out;
      });

  uint64_t lo_plus = 0, hi_plus = 0, disagree = 0, violations = 0;
  bool approx = false;
  for (const PairOutcome& o : outcomes) {
    lo_plus += o.lo_plus;
    hi_plus += o.hi_plus;
    if (o.hi_plus > o.lo_plus) ++disagree;
    if (o.lo_plus > o.hi_plus) ++violations;
    approx = approx || o.approximate;
  }

  GGapEstimate est;
  est.minus_tail.value = binomial_estimate(lo_plus, samples, seed);
  est.minus_tail.past = lo_past;
  est.minus_tail.box_n = box_n;
  est.minus_tail.cond_len = cond_len;
  est.minus_tail.approximate = approx;
  est.plus_tail = est.minus_tail;
  est.plus_tail.value = binomial_estimate(hi_plus, samples, seed);
  est.plus_tail.past = hi_past;
  est.gap = binomial_estimate(disagree, samples, seed);
  est.gap.value -= static_cast<double>(violations) / samples;
  est.order_violations = violations;
  return est;
}

namespace {

std::vector<int8_t> word_from_bits(uint64_t bits, int k) {
  std::vector<int8_t> word(k);
  for (int j = 0; j < k; ++j)
    word[j] = (bits >> j) & 1 ? int8_t{1} : int8_t{-1};
  return word;
}

std::string word_to_string(const std::vector<int8_t>& word) {
  std::string s;
  for (int8_t v : word) s.push_back(v > 0 ? '+' : '-');
  return s;
}

}  // namespace

VarkEstimate estimate_vark(const ModelParams& params, int k, WordSource source,
                           uint64_t word_count, int box_n,
                           uint64_t samples_per_word, uint64_t seed,
                           const EstimatorOptions& options) {
  if (k < 0) throw dimension_error("variation depth k must be >= 0");
  if (k > box_n)
    throw dimension_error("variation depth k must not exceed the box");

  std::vector<std::vector<int8_t>> words;
  if (source == WordSource::exhaustive) {
    if (k > 10)
      throw capacity_error(
          "exhaustive word enumeration supported for k <= 10");
    words.reserve(size_t{1} << k);
    for (uint64_t bits = 0; bits < (uint64_t{1} << k); ++bits)
      words.push_back(word_from_bits(bits, k));
  } else {
    PlusPhaseSampler sampler(box_n, params, mix_seed(seed, 0x77312d5),
                             options.sampler);
    for (uint64_t i = 0; i < word_count; ++i) {
      const SpinConfig config = sampler.next();
      const LineConfig line = project(config, -k, -1);
      words.emplace_back(line.spins.begin(), line.spins.end());
    }
  }

  VarkEstimate est;
  est.k = k;
  est.words_examined = words.size();
  double best = -1.0;
  for (size_t w = 0; w < words.size(); ++w) {
    const GGapEstimate gap = estimate_g_gap(words[w], params, box_n, box_n,
                                            samples_per_word,
                                            mix_seed(seed, w), options);
    est.order_violations += gap.order_violations;
    if (gap.gap.value > best) {
      best = gap.gap.value;
      est.lower_bound = gap.gap;
      est.argmax_word = word_to_string(words[w]);
    }
  }
  est.raw_max = best;
  return est;
}

std::vector<VarkEstimate> estimate_vark_curve(
    const ModelParams& params, int k_min, int k_max, WordSource source,
    uint64_t word_count, int box_n, uint64_t samples_per_word, uint64_t seed,
    const EstimatorOptions& options) {
  if (k_min > k_max) throw dimension_error("vark curve needs k_min <= k_max");
  std::vector<VarkEstimate> curve;
  double envelope = 1.0;
  for (int k = k_min; k <= k_max; ++k) {
    VarkEstimate est =
        estimate_vark(params, k, source, word_count, box_n, samples_per_word,
                      mix_seed(seed, static_cast<uint64_t>(k)), options);
    // sup over a shrinking constraint set cannot grow with k
    envelope = std::min(envelope, est.raw_max);
    est.lower_bound.value = envelope;
    curve.push_back(std::move(est));
  }
  return curve;
}

double line_cylinder_oracle(
    const SpinConfig& base, const ModelParams& params,
    std::span<const std::pair<int, int8_t>> line_event) {
  const ExactDistribution dist = enumerate_measure(base, params);
  std::vector<std::pair<Site, int8_t>> fixed;
  fixed.reserve(line_event.size());
  for (const auto& [x, v] : line_event) fixed.emplace_back(Site{x, 0}, v);
  return dist.cylinder_prob(fixed);
}

}  // namespace schonmann
