#include "schonmann/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace schonmann {

EstimateWithCI binomial_estimate(uint64_t successes, uint64_t trials,
                                 uint64_t seed, double z) {
  if (trials == 0) throw std::invalid_argument("binomial estimate needs trials > 0");
  EstimateWithCI e;
  e.samples = trials;
  e.seed = seed;
  e.value = static_cast<double>(successes) / static_cast<double>(trials);
  e.std_err = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(trials));
  e.ci_low = std::max(0.0, e.value - z * e.std_err);
  e.ci_high = std::min(1.0, e.value + z * e.std_err);
  return e;
}

EstimateWithCI sign_mean_estimate(int64_t sum, uint64_t trials, uint64_t seed,
                                  double z) {
  if (trials == 0) throw std::invalid_argument("mean estimate needs trials > 0");
  EstimateWithCI e;
  e.samples = trials;
  e.seed = seed;
  const double n = static_cast<double>(trials);
  e.value = static_cast<double>(sum) / n;
  const double var = std::max(0.0, 1.0 - e.value * e.value);
  e.std_err = std::sqrt(var / n);
  e.ci_low = e.value - z * e.std_err;
  e.ci_high = e.value + z * e.std_err;
  return e;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// series expansion of P(a,x), valid for x < a+1
double gamma_p_series(double a, double x) {
  const double gln = std::lgamma(a);
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - gln);
}

// continued fraction for Q(a,x), valid for x >= a+1
double gamma_q_cf(double a, double x) {
  const double gln = std::lgamma(a);
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - gln) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q domain error");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi_square_sf(double x, double df) { return gamma_q(df / 2.0, x / 2.0); }

ChiSquareResult chi_square_gof(std::span<const uint64_t> counts,
                               std::span<const double> probs,
                               double min_expected) {
  if (counts.size() != probs.size() || counts.empty())
    throw std::invalid_argument("chi_square_gof: size mismatch");
  const double total = static_cast<double>(
      std::accumulate(counts.begin(), counts.end(), uint64_t{0}));
  if (total <= 0) throw std::invalid_argument("chi_square_gof: no samples");

  std::vector<size_t> order(counts.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return probs[a] > probs[b]; });

  ChiSquareResult r;
  double pool_exp = 0.0;
  double pool_obs = 0.0;
  double kept_last_exp = 0.0, kept_last_obs = 0.0;
  bool have_kept = false;
  for (size_t idx : order) {
    const double expct = probs[idx] * total;
    const double obs = static_cast<double>(counts[idx]);
    if (expct >= min_expected) {
      if (have_kept) {
        r.statistic += (kept_last_obs - kept_last_exp) *
                       (kept_last_obs - kept_last_exp) / kept_last_exp;
        ++r.cells_used;
      }
      kept_last_exp = expct;
      kept_last_obs = obs;
      have_kept = true;
    } else {
      pool_exp += expct;
      pool_obs += obs;
    }
  }
  if (pool_exp > 0.0) {
    if (pool_exp >= min_expected || !have_kept) {
      r.statistic += (pool_obs - pool_exp) * (pool_obs - pool_exp) / pool_exp;
      ++r.cells_used;
      if (have_kept) {
        r.statistic += (kept_last_obs - kept_last_exp) *
                       (kept_last_obs - kept_last_exp) / kept_last_exp;
        ++r.cells_used;
      }
    } else {
      // merge the undersized pool into the smallest kept cell
      kept_last_exp += pool_exp;
      kept_last_obs += pool_obs;
      r.statistic += (kept_last_obs - kept_last_exp) *
                     (kept_last_obs - kept_last_exp) / kept_last_exp;
      ++r.cells_used;
    }
  } else if (have_kept) {
    r.statistic += (kept_last_obs - kept_last_exp) *
                   (kept_last_obs - kept_last_exp) / kept_last_exp;
    ++r.cells_used;
  }

  r.df = std::max(1, r.cells_used - 1);
  r.p_value = r.cells_used > 1 ? chi_square_sf(r.statistic, r.df) : 1.0;
  return r;
}

LinearFit least_squares(std::span<const double> xs, std::span<const double> ys,
                        std::span<const double> sigmas) {
  const size_t n = xs.size();
  if (n != ys.size() || n < 2)
    throw std::invalid_argument("least_squares: need >= 2 matching points");
  for (double y : ys)
    if (!std::isfinite(y))
      throw std::invalid_argument("least_squares: non-finite ordinate");

  const double xbar = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double ybar = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  if (sxx == 0.0) throw std::invalid_argument("least_squares: degenerate xs");

  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = ybar - f.slope * xbar;

  double ss_res = 0.0, ss_tot = 0.0;
  f.residuals.resize(n);
  for (size_t i = 0; i < n; ++i) {
    f.residuals[i] = ys[i] - (f.intercept + f.slope * xs[i]);
    ss_res += f.residuals[i] * f.residuals[i];
    ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
  }
  f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;

  if (!sigmas.empty()) {
    if (sigmas.size() != n)
      throw std::invalid_argument("least_squares: sigma size mismatch");
    // slope = sum c_i y_i with c_i = (x_i - xbar)/sxx
    double var = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double c = (xs[i] - xbar) / sxx;
      var += c * c * sigmas[i] * sigmas[i];
    }
    f.slope_se = std::sqrt(var);
  } else if (n > 2) {
    f.slope_se = std::sqrt(ss_res / (n - 2) / sxx);
  } else {
    f.slope_se = 0.0;
  }
  return f;
}

ZTest one_sided_z_test(double delta, double se, double alpha) {
  ZTest t;
  if (se <= 0.0) {
    t.z = delta > 0 ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
    t.p_value = delta > 0 ? 0.0 : 1.0;
  } else {
    t.z = delta / se;
    t.p_value = 1.0 - normal_cdf(t.z);
  }
  t.reject = t.p_value < alpha;
  return t;
}

ZTest decreasing_trend_test(std::span<const double> xs,
                            std::span<const double> ys,
                            std::span<const double> sigmas, double alpha) {
  const LinearFit f = least_squares(xs, ys, sigmas);
  return one_sided_z_test(-f.slope, f.slope_se, alpha);
}

}  // namespace schonmann
