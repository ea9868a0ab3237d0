#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace schonmann {

// Point estimate with normal-approximation error bar.  Every Monte Carlo
// estimator returns one of these; `seed` records the stream that produced it.
struct EstimateWithCI {
  double value = 0.0;
  double std_err = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  uint64_t samples = 0;
  uint64_t seed = 0;
};

// Binomial proportion k/n with Wald interval clipped to [0,1].
EstimateWithCI binomial_estimate(uint64_t successes, uint64_t trials,
                                 uint64_t seed, double z = 1.96);

// Mean of +-1 observations (magnetization-style estimate).
EstimateWithCI sign_mean_estimate(int64_t sum, uint64_t trials, uint64_t seed,
                                  double z = 1.96);

double normal_cdf(double x);

// Upper regularized incomplete gamma Q(a, x); basis for chi-square tails.
double gamma_q(double a, double x);

// P(X > x) for chi-square with df degrees of freedom.
double chi_square_sf(double x, double df);

struct ChiSquareResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  int cells_used = 0;  // after pooling
};

// Goodness-of-fit against expected probabilities.  Cells with expected count
// below `min_expected` are pooled into a single bucket so the asymptotic
// chi-square reference stays valid.
ChiSquareResult chi_square_gof(std::span<const uint64_t> counts,
                               std::span<const double> probs,
                               double min_expected = 5.0);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;  // propagated from point sigmas when given,
                          // otherwise residual-based
  double r2 = 0.0;
  std::vector<double> residuals;
};

LinearFit least_squares(std::span<const double> xs, std::span<const double> ys,
                        std::span<const double> sigmas = {});

struct ZTest {
  double z = 0.0;
  double p_value = 1.0;  // one-sided, H1: delta > 0
  bool reject = false;
};

ZTest one_sided_z_test(double delta, double se, double alpha = 0.05);

// Slope-based monotone trend test on points with error bars.
// H1: slope < 0 (decreasing).
ZTest decreasing_trend_test(std::span<const double> xs,
                            std::span<const double> ys,
                            std::span<const double> sigmas,
                            double alpha = 0.05);

}  // namespace schonmann
