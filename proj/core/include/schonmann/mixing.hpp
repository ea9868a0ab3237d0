#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "schonmann/projection.hpp"

namespace schonmann {

struct RunFactor {
  int depth = 0;             // the k in P(eta_{-k} = sign | run of k-1)
  EstimateWithCI estimate;
  bool underflow = false;    // zero hits; floored at 1/(samples+1)
};

struct RunProbability {
  int8_t sign = -1;
  int run_length = 0;
  std::vector<RunFactor> factors;
  EstimateWithCI product;    // delta-method error bar
  double log_value = 0.0;
  double log_se = 0.0;

  // cumulative product for the first k factors (log scale, with its se);
  // gives the whole run-probability curve from one telescoping pass
  std::pair<double, double> log_prefix(int k) const;
};

// nu(eta = sign on [-n,-1]) under the `boundary_sign` finite-volume measure,
// estimated as a telescoping product of clamped conditional one-site
// probabilities (direct hits on long runs are exponentially rare).
RunProbability estimate_run_probability(const ModelParams& params, int8_t sign,
                                        int n, int box_n,
                                        uint64_t samples_per_factor,
                                        uint64_t seed,
                                        const EstimatorOptions& options = {},
                                        int8_t boundary_sign = +1);

struct RatePoint {
  int n = 0;
  double log_prob = 0.0;
  double se = 0.0;
};

struct RateEstimate {
  int8_t run_sign = -1;
  std::vector<RatePoint> points;
  double theta = 0.0;      // clamped at 0
  double theta_raw = 0.0;  // fitted -slope, may be negative under noise
  double theta_se = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::vector<double> residuals;
};

// Least-squares decay rate of -log nu(n) vs n.  Needs >= 4 finite points.
RateEstimate fit_theta(std::span<const RatePoint> points);

// Largest dominated Bernoulli density for a given run-decay rate.
double rho_max(double theta);

struct DominationReport {
  RateEstimate theta_plus;   // minus-run rate under the plus measure
  RateEstimate theta_minus;  // plus-run rate under the plus measure
  ZTest test;                // H1: theta_plus > theta_minus
  double rho_witness = 0.0;  // a density between the two domination bounds
};

// Estimates both one-symbol run rates and tests the strict ordering
// theta_minus < theta_plus.  Requires beta > beta_critical.
DominationReport check_prop_domi(const ModelParams& params, int box_n,
                                 int max_run, uint64_t samples_per_factor,
                                 uint64_t seed,
                                 const EstimatorOptions& options = {});

struct MixingPoint {
  int gap = 0;
  double coefficient = 0.0;
  double se = 0.0;
  int support_size = 0;
  uint64_t order_violations = 0;
};

struct MixingCurve {
  std::string region;      // "line" or "cone"
  double theta_cone = 0.0;  // 0 when not applicable
  int w = 0;
  std::vector<MixingPoint> points;
};

// For each gap: max over increasing cylinder events on a w-site future
// support of |nu(B | all-plus past) - nu(B | all-minus past)|, the FKG
// sandwich bound for one-sided mixing toward monotone events.  The past is
// clamped on [-box_n, -1] x {0}; events are enumerated exhaustively (w <= 4).
MixingCurve estimate_phi_mixing(const ModelParams& params,
                                std::span<const int> gaps, int w, int box_n,
                                uint64_t samples, uint64_t seed,
                                const EstimatorOptions& options = {});

// Same sandwich estimator with the support taken from the cone region
// {x >= gap, |y| <= e^{theta x}}: the w cone sites closest to the apex in
// (x, |y|, y) order, so supports are genuinely two-dimensional for w >= 2
// and reduce to the line site at w = 1.
MixingCurve estimate_cone_mixing(const ModelParams& params, double theta,
                                 std::span<const int> gaps, int w, int box_n,
                                 uint64_t samples, uint64_t seed,
                                 const EstimatorOptions& options = {});

struct TwoSidedReport {
  int n = 0;
  int N = 0;
  EstimateWithCI one_sided;  // origin magnetization, minus collar on the left
  EstimateWithCI two_sided;  // minus collars on both sides
};

// Origin magnetization under one-sided vs two-sided minus collars
// {n < |x| <= N} x {0}.  Shares per-draw seeds across the two conditionings.
TwoSidedReport two_sided_probe(const ModelParams& params, int n, int N,
                               int box_n, uint64_t samples, uint64_t seed,
                               const EstimatorOptions& options = {});

// Exhaustive list of increasing events over w binary sites, encoded as
// bitmasks over the 2^w spin patterns (pattern bit j set = site j is +1).
std::vector<uint32_t> increasing_event_masks(int w);

}  // namespace schonmann
