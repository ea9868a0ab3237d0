#include "schonmann/mixing.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <tuple>

#include "schonmann/parallel.hpp"

namespace schonmann {

std::pair<double, double> RunProbability::log_prefix(int k) const {
  if (k < 1 || k > static_cast<int>(factors.size()))
    throw dimension_error("run prefix length out of range");
  double log_p = 0.0;
  double var = 0.0;
  for (int i = 0; i < k; ++i) {
    const EstimateWithCI& f = factors[i].estimate;
    log_p += std::log(f.value);
    var += (f.std_err / f.value) * (f.std_err / f.value);
  }
  return {log_p, std::sqrt(var)};
}

RunProbability estimate_run_probability(const ModelParams& params, int8_t sign,
                                        int n, int box_n,
                                        uint64_t samples_per_factor,
                                        uint64_t seed,
                                        const EstimatorOptions& options,
                                        int8_t boundary_sign) {
  if (n < 1) throw dimension_error("run length must be >= 1");
  if (box_n < 2 * n)
    throw dimension_error("box half-width must be at least twice the run");

  RunProbability out;
  out.sign = sign;
  out.run_length = n;

  for (int k = 1; k <= n; ++k) {
    SpinConfig frame(Box(box_n), boundary_sign, boundary_sign);
    for (int j = 1; j < k; ++j) frame.clamp(Site{-j, 0}, sign);
    const uint64_t factor_seed = mix_seed(seed, static_cast<uint64_t>(k));

    const auto hits = parallel_map<uint8_t>(
        samples_per_factor, options.workers, [&](size_t i) {
          const SpinConfig draw = draw_conditioned(
              frame, params, mix_seed(factor_seed, i), options.sampler);
          return static_cast<uint8_t>(draw.spin(Site{-k, 0}) == sign);
        });

    uint64_t successes = 0;
    for (uint8_t h : hits) successes += h;

    RunFactor factor;
    factor.depth = k;
    factor.underflow = (successes == 0);
    if (factor.underflow) {
      // floor keeps the telescoping product finite; flagged for the caller
      factor.estimate = binomial_estimate(1, samples_per_factor + 1, factor_seed);
    } else {
      factor.estimate = binomial_estimate(successes, samples_per_factor,
                                          factor_seed);
    }
    out.factors.push_back(factor);
  }

  auto [log_p, log_se] = out.log_prefix(n);
  out.log_value = log_p;
  out.log_se = log_se;
  out.product.value = std::exp(log_p);
  out.product.std_err = out.product.value * log_se;
  out.product.ci_low = std::max(0.0, out.product.value - 1.96 * out.product.std_err);
  out.product.ci_high = std::min(1.0, out.product.value + 1.96 * out.product.std_err);
  out.product.samples = samples_per_factor;
  out.product.seed = seed;
  return out;
}

RateEstimate fit_theta(std::span<const RatePoint> points) {
  if (points.size() < 4)
    throw dimension_error("rate fit needs at least 4 points");
  std::vector<double> xs, ys, sigmas;
  for (const RatePoint& p : points) {
    if (!std::isfinite(p.log_prob))
      throw dimension_error("rate fit: non-finite log probability");
    xs.push_back(static_cast<double>(p.n));
    ys.push_back(p.log_prob);
    sigmas.push_back(p.se);
  }
  const LinearFit fit = least_squares(xs, ys, sigmas);

  RateEstimate est;
  est.points.assign(points.begin(), points.end());
  est.theta_raw = -fit.slope;
  est.theta = std::max(0.0, est.theta_raw);
  est.theta_se = fit.slope_se;
  est.intercept = fit.intercept;
  est.r2 = fit.r2;
  est.residuals = fit.residuals;
  return est;
}

double rho_max(double theta) {
  if (theta < 0.0) throw dimension_error("rho_max needs theta >= 0");
  return 1.0 - std::exp(-theta);
}

DominationReport check_prop_domi(const ModelParams& params, int box_n,
                                 int max_run, uint64_t samples_per_factor,
                                 uint64_t seed,
                                 const EstimatorOptions& options) {
  if (!(params.beta > beta_critical))
    throw unsupported_parameter(
        "domination contrast needs beta above the critical coupling");
  if (max_run < 5)
    throw dimension_error("domination contrast needs runs up to length >= 5");

  auto rate_from_runs = [&](int8_t sign, uint64_t stream) {
    const RunProbability runs = estimate_run_probability(
        params, sign, max_run, box_n, samples_per_factor,
        mix_seed(seed, stream), options);
    std::vector<RatePoint> pts;
    for (int k = 2; k <= max_run; ++k) {
      auto [log_p, se] = runs.log_prefix(k);
      pts.push_back(RatePoint{k, log_p, se});
    }
    RateEstimate est = fit_theta(pts);
    est.run_sign = sign;
    return est;
  };

  DominationReport report;
  report.theta_plus = rate_from_runs(-1, 1);   // minus runs decay at theta_plus
  report.theta_minus = rate_from_runs(+1, 2);  // plus runs decay at theta_minus

  const double delta = report.theta_plus.theta_raw - report.theta_minus.theta_raw;
  const double se = std::sqrt(report.theta_plus.theta_se * report.theta_plus.theta_se +
                              report.theta_minus.theta_se * report.theta_minus.theta_se);
  report.test = one_sided_z_test(delta, se);
  report.rho_witness =
      0.5 * (rho_max(report.theta_minus.theta) + rho_max(report.theta_plus.theta));
  return report;
}

std::vector<uint32_t> increasing_event_masks(int w) {
  if (w < 1 || w > 4)
    throw capacity_error("exhaustive event enumeration supports 1 <= w <= 4");
  const int patterns = 1 << w;
  std::vector<uint32_t> out;
  for (uint32_t mask = 0; mask < (uint32_t{1} << patterns); ++mask) {
    bool up_closed = true;
    for (int p = 0; p < patterns && up_closed; ++p) {
      if (!(mask >> p & 1)) continue;
      for (int j = 0; j < w; ++j) {
        const int q = p | (1 << j);
        if (!(mask >> q & 1)) {
          up_closed = false;
          break;
        }
      }
    }
    if (up_closed) out.push_back(mask);
  }
  return out;
}

namespace {

struct PatternPair {
  uint8_t lo = 0;
  uint8_t hi = 0;
};

MixingCurve sandwich_curve(const ModelParams& params,
                           std::span<const int> gaps, int w, int box_n,
                           uint64_t samples, uint64_t seed,
                           const EstimatorOptions& options,
                           const std::string& region, double theta_cone,
                           const std::function<std::vector<Site>(int)>&
                               support_for_gap) {
  if (w < 1 || w > 4)
    throw capacity_error("exhaustive event supremum supports 1 <= w <= 4");
  const std::vector<uint32_t> events = increasing_event_masks(w);

  // all-minus vs all-plus past on [-box_n, -1] x {0}
  SpinConfig lo_frame(Box(box_n), +1, +1);
  SpinConfig hi_frame(Box(box_n), +1, +1);
  for (int x = 1; x <= box_n; ++x) {
    lo_frame.clamp(Site{-x, 0}, -1);
    hi_frame.clamp(Site{-x, 0}, +1);
  }

  MixingCurve curve;
  curve.region = region;
  curve.theta_cone = theta_cone;
  curve.w = w;

  for (size_t gi = 0; gi < gaps.size(); ++gi) {
    const int gap = gaps[gi];
    const std::vector<Site> support = support_for_gap(gap);
    MixingPoint point;
    point.gap = gap;
    point.support_size = static_cast<int>(support.size());
    if (support.empty()) {
      // support degenerated out of the box: coefficient is 0 by convention
      curve.points.push_back(point);
      continue;
    }

    const uint64_t gap_seed = mix_seed(seed, gi);
    const auto pairs = parallel_map<PatternPair>(
        samples, options.workers, [&](size_t i) {
          const uint64_t draw_seed = mix_seed(gap_seed, i);
          const SpinConfig lo =
              draw_conditioned(lo_frame, params, draw_seed, options.sampler);
          const SpinConfig hi =
              draw_conditioned(hi_frame, params, draw_seed, options.sampler);
          PatternPair pp;
          for (size_t j = 0; j < support.size(); ++j) {
            if (lo.spin(support[j]) > 0) pp.lo |= uint8_t{1} << j;
            if (hi.spin(support[j]) > 0) pp.hi |= uint8_t{1} << j;
          }
          return pp;
        });

    const int patterns = 1 << support.size();
    std::vector<uint64_t> lo_counts(patterns, 0), hi_counts(patterns, 0);
    uint64_t violations = 0;
    for (const PatternPair& pp : pairs) {
      ++lo_counts[pp.lo];
      ++hi_counts[pp.hi];
      if ((pp.lo & pp.hi) != pp.lo) ++violations;  // lo must be a sub-pattern
    }

    double best = 0.0;
    uint32_t best_event = 0;
    for (uint32_t event : events) {
      double diff = 0.0;
      for (int p = 0; p < patterns; ++p) {
        if (event >> p & 1)
          diff += (static_cast<double>(hi_counts[p]) -
                   static_cast<double>(lo_counts[p]));
      }
      diff /= static_cast<double>(samples);
      if (diff > best) {
        best = diff;
        best_event = event;
      }
    }

    // paired-difference error bar for the maximizing event
    uint64_t disagree = 0;
    for (const PatternPair& pp : pairs) {
      const bool in_hi = best_event >> pp.hi & 1;
      const bool in_lo = best_event >> pp.lo & 1;
      if (in_hi != in_lo) ++disagree;
    }
    const double d = static_cast<double>(disagree) / samples;

    point.coefficient = best;
    point.se = std::sqrt(d * (1.0 - d) / static_cast<double>(samples));
    point.order_violations = violations;
    curve.points.push_back(point);
  }
  return curve;
}

}  // namespace

MixingCurve estimate_phi_mixing(const ModelParams& params,
                                std::span<const int> gaps, int w, int box_n,
                                uint64_t samples, uint64_t seed,
                                const EstimatorOptions& options) {
  const Box box(box_n);
  auto support = [&](int gap) {
    std::vector<Site> sites;
    for (int j = 0; j < w; ++j) {
      const Site s{gap + j, 0};
      if (box.contains(s)) sites.push_back(s);
    }
    return sites;
  };
  return sandwich_curve(params, gaps, w, box_n, samples, seed, options, "line",
                        0.0, support);
}

MixingCurve estimate_cone_mixing(const ModelParams& params, double theta,
                                 std::span<const int> gaps, int w, int box_n,
                                 uint64_t samples, uint64_t seed,
                                 const EstimatorOptions& options) {
  const Box box(box_n);
  auto support = [&](int gap) {
    const Region cone = Region::cone(theta, gap);
    std::vector<Site> sites = cone.sites(box);
    if (sites.empty() && gap <= box_n)
      throw dimension_error("cone region is empty inside the box");
    std::sort(sites.begin(), sites.end(), [](Site a, Site b) {
      return std::tuple(a.x, std::abs(a.y), a.y) <
             std::tuple(b.x, std::abs(b.y), b.y);
    });
    if (static_cast<int>(sites.size()) > w) sites.resize(w);
    std::sort(sites.begin(), sites.end());
    return sites;
  };
  return sandwich_curve(params, gaps, w, box_n, samples, seed, options, "cone",
                        theta, support);
}

TwoSidedReport two_sided_probe(const ModelParams& params, int n, int N,
                               int box_n, uint64_t samples, uint64_t seed,
                               const EstimatorOptions& options) {
  if (n < 1 || N < n)
    throw dimension_error("collar parameters need N >= n >= 1");
  if (box_n < N)
    throw dimension_error("box half-width must cover the collar");
  if (!(params.beta > beta_critical))
    throw unsupported_parameter(
        "two-sided contrast needs beta above the critical coupling");

  SpinConfig one_frame(Box(box_n), +1, +1);
  SpinConfig two_frame(Box(box_n), +1, +1);
  for (int x = n + 1; x <= N; ++x) {
    one_frame.clamp(Site{-x, 0}, -1);
    two_frame.clamp(Site{-x, 0}, -1);
    two_frame.clamp(Site{x, 0}, -1);
  }

  auto magnetization = [&](const SpinConfig& frame) {
    const auto spins = parallel_map<int8_t>(
        samples, options.workers, [&](size_t i) {
          const SpinConfig draw = draw_conditioned(
              frame, params, mix_seed(seed, i), options.sampler);
          return draw.spin(Site{0, 0});
        });
    int64_t sum = 0;
    for (int8_t s : spins) sum += s;
    return sign_mean_estimate(sum, samples, seed);
  };

  TwoSidedReport report;
  report.n = n;
  report.N = N;
  report.one_sided = magnetization(one_frame);
  report.two_sided = magnetization(two_frame);
  return report;
}

}  // namespace schonmann
