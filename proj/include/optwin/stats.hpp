#pragma once

// Special functions and quantiles of the Student t and Fisher F distributions.
//
// Everything here is a pure function of its arguments; all of it is safe to
// call concurrently.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace optwin::stats {

namespace detail {

inline void require(bool ok, const char* what) {
  if (!ok) throw std::domain_error(what);
}

// Stirling series for ln Gamma(x), x >= 10. Truncation error < 1e-17 there.
inline double ln_gamma_stirling(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv * (1.0 / 12.0 +
             inv2 * (-1.0 / 360.0 +
                     inv2 * (1.0 / 1260.0 +
                             inv2 * (-1.0 / 1680.0 +
                                     inv2 * (1.0 / 1188.0 +
                                             inv2 * (-691.0 / 360360.0 + inv2 * (1.0 / 156.0)))))));
  return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) + series;
}

}  // namespace detail

/// Natural log of the gamma function for x > 0.
inline double ln_gamma(double x) {
  detail::require(x > 0.0 && std::isfinite(x), "ln_gamma: x must be positive and finite");
  if (x >= 10.0) return detail::ln_gamma_stirling(x);
  // Shift up with Gamma(x) = Gamma(x + k) / (x (x+1) ... (x+k-1)).
  double product = 1.0;
  double shifted = x;
  while (shifted < 10.0) {
    product *= shifted;
    shifted += 1.0;
  }
  return detail::ln_gamma_stirling(shifted) - std::log(product);
}

/// ln B(a, b).
inline double ln_beta(double a, double b) {
  return ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
}

namespace detail {

// Continued fraction for the incomplete beta (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 100000;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("reg_incomplete_beta: continued fraction did not converge");
}

// I_x(a, b) given both x and y = 1 - x, so callers can pass an accurate
// complement when x is close to 1.
inline double ibeta(double a, double b, double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front =
      a * std::log(x) + b * std::log(y) - ln_beta(a, b);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

// Complement 1 - I_x(a, b) without cancellation.
inline double ibetac(double a, double b, double x, double y) {
  return ibeta(b, a, y, x);
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double reg_incomplete_beta(double a, double b, double x) {
  detail::require(a > 0.0 && b > 0.0, "reg_incomplete_beta: a and b must be positive");
  detail::require(x >= 0.0 && x <= 1.0, "reg_incomplete_beta: x must lie in [0, 1]");
  return detail::ibeta(a, b, x, 1.0 - x);
}

// ---------------------------------------------------------------------------
// Normal distribution (used for initial guesses and by STEPD).

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

/// Standard normal quantile (Acklam's rational approximation plus one Halley step).
inline double normal_ppf(double p) {
  detail::require(p > 0.0 && p < 1.0, "normal_ppf: p must lie in (0, 1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

// ---------------------------------------------------------------------------
// Student t.

inline double t_pdf(double t, double df) {
  detail::require(df > 0.0, "t_pdf: df must be positive");
  const double log_norm = ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df) -
                          0.5 * std::log(df * std::numbers::pi);
  return std::exp(log_norm - 0.5 * (df + 1.0) * std::log1p(t * t / df));
}

inline double t_cdf(double t, double df) {
  detail::require(df > 0.0, "t_cdf: df must be positive");
  if (t == 0.0) return 0.5;
  const double t2 = t * t;
  const double denom = df + t2;
  // Upper tail mass P(|T| > |t|) = I_{df/(df+t^2)}(df/2, 1/2).
  double two_tail;
  if (t2 < df) {
    two_tail = detail::ibetac(0.5, 0.5 * df, t2 / denom, df / denom);
  } else {
    two_tail = detail::ibeta(0.5 * df, 0.5, df / denom, t2 / denom);
  }
  return t > 0.0 ? 1.0 - 0.5 * two_tail : 0.5 * two_tail;
}

// ---------------------------------------------------------------------------
// Fisher F.

inline double f_pdf(double x, double d1, double d2) {
  detail::require(d1 > 0.0 && d2 > 0.0, "f_pdf: degrees of freedom must be positive");
  if (x < 0.0) return 0.0;
  if (x == 0.0) {
    if (d1 < 2.0) return std::numeric_limits<double>::infinity();
    return d1 == 2.0 ? 1.0 : 0.0;
  }
  const double s = d1 * x + d2;
  const double log_pdf = 0.5 * d1 * std::log(d1 * x / s) + 0.5 * d2 * std::log(d2 / s) -
                         std::log(x) - ln_beta(0.5 * d1, 0.5 * d2);
  return std::exp(log_pdf);
}

inline double f_cdf(double x, double d1, double d2) {
  detail::require(d1 > 0.0 && d2 > 0.0, "f_cdf: degrees of freedom must be positive");
  if (x <= 0.0) return 0.0;
  const double s = d1 * x + d2;
  return detail::ibeta(0.5 * d1, 0.5 * d2, d1 * x / s, d2 / s);
}

// ---------------------------------------------------------------------------
// Quantiles.

namespace detail {

// Safeguarded Newton on a monotone CDF: Newton steps that leave the current
// bracket fall back to bisection.
template <typename Cdf, typename Pdf>
double invert_cdf(Cdf cdf, Pdf pdf, double target, double lo, double hi, double guess) {
  double x = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
  for (int iter = 0; iter < 400; ++iter) {
    const double err = cdf(x) - target;
    if (std::fabs(err) <= 1e-14) return x;
    if (err < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::fabs(x)) return x;
    const double density = pdf(x);
    double next = density > 0.0 ? x - err / density : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

// Grows hi until cdf(hi) >= target.
template <typename Cdf>
double expand_upper(Cdf cdf, double target, double start) {
  double hi = start;
  while (cdf(hi) < target) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw std::runtime_error("quantile bracket overflow");
  }
  return hi;
}

}  // namespace detail

/// Quantile of Student's t: returns q with t_cdf(q, df) == confidence.
inline double t_ppf(double confidence, double df) {
  detail::require(confidence > 0.0 && confidence < 1.0, "t_ppf: confidence must lie in (0, 1)");
  detail::require(df > 0.0 && std::isfinite(df), "t_ppf: df must be positive");
  if (confidence == 0.5) return 0.0;
  if (confidence < 0.5) return -t_ppf(1.0 - confidence, df);

  const auto cdf = [df](double t) { return t_cdf(t, df); };
  const auto pdf = [df](double t) { return t_pdf(t, df); };
  // Cornish-Fisher expansion around the normal quantile.
  const double z = normal_ppf(confidence);
  const double z3 = z * z * z;
  const double guess = z + (z3 + z) / (4.0 * df) +
                       (5.0 * z3 * z * z + 16.0 * z3 + 3.0 * z) / (96.0 * df * df);
  const double hi = detail::expand_upper(cdf, confidence, std::max(2.0 * guess, 1.0));
  return detail::invert_cdf(cdf, pdf, confidence, 0.0, hi, guess);
}

/// Quantile of the F distribution: returns q with f_cdf(q, d1, d2) == confidence.
inline double f_ppf(double confidence, double d1, double d2) {
  detail::require(confidence > 0.0 && confidence < 1.0, "f_ppf: confidence must lie in (0, 1)");
  detail::require(d1 > 0.0 && d2 > 0.0 && std::isfinite(d1) && std::isfinite(d2),
                  "f_ppf: degrees of freedom must be positive");
  const auto cdf = [d1, d2](double x) { return f_cdf(x, d1, d2); };
  const auto pdf = [d1, d2](double x) { return f_pdf(x, d1, d2); };

  // Paulson's cube-root normal approximation as the starting point.
  double guess = 1.0;
  {
    const double z = normal_ppf(confidence);
    const double a = 2.0 / (9.0 * d1);
    const double b = 2.0 / (9.0 * d2);
    const double qa = (1.0 - b) * (1.0 - b) - z * z * b;
    const double qb = -2.0 * (1.0 - a) * (1.0 - b);
    const double qc = (1.0 - a) * (1.0 - a) - z * z * a;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (qa > 0.0 && disc >= 0.0) {
      const double root = z >= 0.0 ? (-qb + std::sqrt(disc)) / (2.0 * qa)
                                   : (-qb - std::sqrt(disc)) / (2.0 * qa);
      if (root > 0.0) guess = root * root * root;
    }
  }
  const double hi = detail::expand_upper(cdf, confidence, std::max(2.0 * guess, 1.0));
  return detail::invert_cdf(cdf, pdf, confidence, 0.0, hi, guess);
}

}  // namespace optwin::stats
