#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "prepost/numeric.hpp"

namespace prepost {

namespace {

// log Gamma(a + b) - log Gamma(a). For large a the direct lgamma difference
// cancels catastrophically, so expand Stirling's series around a.
double log_gamma_ratio(double a, double b) {
  if (a < 20.0) return std::lgamma(a + b) - std::lgamma(a);
  const auto stirling_tail = [](double x) {
    const double x2 = x * x;
    return 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x2) + 1.0 / (1260.0 * x * x2 * x2) -
           1.0 / (1680.0 * x * x2 * x2 * x2);
  };
  // lnG(x) = (x - 1/2) ln x - x + ln(2 pi)/2 + tail(x)
  const double apb = a + b;
  return (apb - 0.5) * std::log1p(b / a) + b * std::log(a) - b + stirling_tail(apb) - stirling_tail(a);
}

double log_beta(double a, double b) {
  if (a < b) std::swap(a, b);
  // a >= b
  return std::lgamma(b) - log_gamma_ratio(a, b);
}

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 100000;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericError("incomplete beta continued fraction did not converge");
}

// I_x(a, b) given x, 1 - x and their logs computed accurately by the caller.
double incomplete_beta_impl(double a, double b, double x, double one_minus_x, double log_x,
                            double log_1mx) {
  if (x <= 0.0) return 0.0;
  if (one_minus_x <= 0.0) return 1.0;
  const double log_front = a * log_x + b * log_1mx - log_beta(a, b);
  const double front = std::exp(log_front);
  // Near x = 1 with a large and b small, the direct fraction converges
  // slowly and loses accuracy, while the reflected one takes a few terms.
  const bool reflect_fast = b <= 1.0 && a > 100.0 && a * one_minus_x < 10.0;
  if (x < (a + 1.0) / (a + b + 2.0) && !reflect_fast) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, one_minus_x) / b;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete beta: a, b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("incomplete beta: x outside [0, 1]");
  return incomplete_beta_impl(a, b, x, 1.0 - x, std::log(x), std::log1p(-x));
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("student_t_two_sided_p: df must be positive");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  // p = I_x(df/2, 1/2), x = df / (df + t^2)
  const double t2 = t * t;
  const double ratio = t2 / df;
  const double x = 1.0 / (1.0 + ratio);
  const double one_minus_x = ratio / (1.0 + ratio);
  const double log_x = -std::log1p(ratio);
  const double log_1mx = std::log(ratio) - std::log1p(ratio);
  const double p = incomplete_beta_impl(0.5 * df, 0.5, x, one_minus_x, log_x, log_1mx);
  return std::clamp(p, 0.0, 1.0);
}

namespace {

double student_t_density(double t, double df) {
  const double log_norm = log_gamma_ratio(0.5 * df, 0.5) - 0.5 * std::log(df * std::numbers::pi);
  return std::exp(log_norm - 0.5 * (df + 1.0) * std::log1p(t * t / df));
}

// Acklam's rational approximation to the standard normal upper quantile.
double normal_upper_quantile(double q) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  const double p = 1.0 - q;  // lower-tail probability
  if (p < 0.02425) {
    const double r = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
           ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
  }
  if (p > 1.0 - 0.02425) {
    const double r = std::sqrt(-2.0 * std::log(q));
    return -(((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
           ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
  }
  const double s = p - 0.5;
  const double r = s * s;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * s /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double student_t_critical(double alpha, double df) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("student_t_critical: alpha outside (0, 1)");
  if (!(df > 0.0)) throw std::invalid_argument("student_t_critical: df must be positive");

  thread_local double cached_alpha = -1.0;
  thread_local double cached_df = -1.0;
  thread_local double cached_value = 0.0;
  if (alpha == cached_alpha && df == cached_df) return cached_value;

  // Cornish-Fisher start, then safeguarded Newton on p(c) - alpha.
  const double z = normal_upper_quantile(0.5 * alpha);
  const double z3 = z * z * z;
  double c = z + (z3 + z) / (4.0 * df) + (5.0 * z3 * z * z + 16.0 * z3 + 3.0 * z) / (96.0 * df * df);
  double lo = 0.0;
  double hi = std::max(2.0 * c, 1.0);
  while (student_t_two_sided_p(hi, df) > alpha) {
    lo = hi;
    hi *= 2.0;
  }
  if (!(c > lo && c < hi)) c = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double g = student_t_two_sided_p(c, df) - alpha;
    if (g > 0.0) {
      lo = c;
    } else {
      hi = c;
    }
    const double step = g / (2.0 * student_t_density(c, df));
    double next = c + step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - c) <= 1e-14 * std::max(1.0, c)) {
      c = next;
      break;
    }
    c = next;
  }
  cached_alpha = alpha;
  cached_df = df;
  cached_value = c;
  return c;
}

}  // namespace prepost
