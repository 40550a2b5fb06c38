#pragma once

// Independent reference implementations used only by tests.

#include <cmath>
#include <cstddef>
#include <deque>
#include <numeric>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "optwin/cut_table.hpp"

namespace oracle {

inline double t_density(double t, double df) {
  const double c = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) - 0.5 * std::log(df * M_PI);
  return std::exp(c - 0.5 * (df + 1.0) * std::log1p(t * t / df));
}

inline double f_density(double x, double d1, double d2) {
  if (x <= 0.0) return 0.0;
  const double lb = std::lgamma(0.5 * d1) + std::lgamma(0.5 * d2) - std::lgamma(0.5 * (d1 + d2));
  const double lx = 0.5 * d1 * std::log(d1 * x) + 0.5 * d2 * std::log(d2) - 0.5 * (d1 + d2) * std::log(d1 * x + d2);
  return std::exp(lx - lb) / x;
}

/// CDF of Student's t by tanh-sinh quadrature of the density over [0, |t|].
inline double t_cdf(double t, double df) {
  static thread_local boost::math::quadrature::tanh_sinh<double> q;
  const double a = std::fabs(t);
  if (a == 0.0) return 0.5;
  const double half = q.integrate([df](double u) { return t_density(u, df); }, 0.0, a, 1e-14);
  return t > 0 ? 0.5 + half : 0.5 - half;
}

/// CDF of the F distribution by quadrature; the smaller of the two tails is
/// integrated directly (via 1/X ~ F(d2, d1) for the upper tail).
inline double f_cdf(double x, double d1, double d2) {
  static thread_local boost::math::quadrature::tanh_sinh<double> q;
  if (x <= 0.0) return 0.0;
  if (x <= 1.0) return q.integrate([=](double u) { return f_density(u, d1, d2); }, 0.0, x, 1e-14);
  const double upper = q.integrate([=](double u) { return f_density(u, d2, d1); }, 0.0, 1.0 / x, 1e-14);
  return 1.0 - upper;
}

/// Bisection inverse of a monotone CDF on [lo, hi].
template <typename Cdf>
double bisect_ppf(Cdf cdf, double p, double lo, double hi) {
  for (int i = 0; i < 200 && hi - lo > 1e-13 * (1.0 + std::fabs(lo)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct NaiveMoments {
  double mean = 0.0;
  double std = 0.0;
};

/// Two-pass mean and sample std of w[from, to).
inline NaiveMoments naive_moments(const std::deque<double>& w, std::size_t from, std::size_t to) {
  const double n = static_cast<double>(to - from);
  double s = 0.0;
  for (std::size_t i = from; i < to; ++i) s += w[i];
  NaiveMoments m;
  m.mean = s / n;
  if (to - from < 2) return m;
  double ss = 0.0;
  for (std::size_t i = from; i < to; ++i) ss += (w[i] - m.mean) * (w[i] - m.mean);
  m.std = std::sqrt(ss / (n - 1.0));
  return m;
}

/// Straight transcription of the per-element procedure that recomputes every
/// statistic from the stored window. Shares only the cut table.
class NaiveOptwin {
 public:
  NaiveOptwin(const optwin::OptwinConfig& cfg, const optwin::CutTable& table) : cfg_(cfg), table_(table) {}

  bool add(double x) {
    w_.push_back(x);
    if (w_.size() > cfg_.w_max) w_.pop_front();
    if (w_.size() < cfg_.w_min) return false;
    const auto& row = table_.row(w_.size());
    const std::size_t k = row.nu_split;
    const NaiveMoments h = naive_moments(w_, 0, k);
    const NaiveMoments n = naive_moments(w_, k, w_.size());
    if (cfg_.one_sided && n.mean < h.mean) return false;
    const double sh = h.std + cfg_.eta;
    const double sn = n.std + cfg_.eta;
    bool drift = (sn * sn) / (sh * sh) > row.f_crit;
    if (!drift) {
      const double t = (h.mean - n.mean) /
                       std::sqrt(sh * sh / static_cast<double>(k) + sn * sn / static_cast<double>(w_.size() - k));
      drift = std::fabs(t) > row.t_crit;
    }
    if (drift) {
      if (cfg_.keep_new_window_on_reset) {
        w_.erase(w_.begin(), w_.begin() + static_cast<std::ptrdiff_t>(k));
      } else {
        w_.clear();
      }
    }
    return drift;
  }

  [[nodiscard]] std::size_t size() const { return w_.size(); }

 private:
  optwin::OptwinConfig cfg_;
  const optwin::CutTable& table_;
  std::deque<double> w_;
};

}  // namespace oracle
