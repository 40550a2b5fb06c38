#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <stdexcept>
#include <string>

#include "optwin/baselines/ddm.hpp"
#include "optwin/detection.hpp"
#include "optwin/stats.hpp"

namespace optwin {

struct StepdConfig {
  std::size_t window = 30;
  double alpha_drift = 0.003;
  double alpha_warning = 0.05;
};

/// Statistical Test of Equal Proportions.
///
/// Compares the error proportion of the last `window` outcomes against all
/// older outcomes since the last reset with a continuity-corrected
/// two-proportion z statistic. Only a higher recent error rate counts.
class StepdDetector final : public Detector {
 public:
  explicit StepdDetector(StepdConfig cfg = {}) : cfg_(cfg) {
    if (cfg_.window < 1) throw std::invalid_argument("STEPD window must be positive");
    if (!(cfg_.alpha_drift > 0.0 && cfg_.alpha_drift <= cfg_.alpha_warning && cfg_.alpha_warning < 1.0)) {
      throw std::invalid_argument("STEPD levels must satisfy 0 < drift <= warning < 1");
    }
  }

  /// z statistic for `older_errors` of `n_older` vs `recent_errors` of `n_recent`,
  /// clamped at 0 when the recent error rate is not higher.
  static double statistic(double older_errors, double n_older, double recent_errors, double n_recent) {
    const double p_old = older_errors / n_older;
    const double p_recent = recent_errors / n_recent;
    const double p = (older_errors + recent_errors) / (n_older + n_recent);
    const double inv = 1.0 / n_older + 1.0 / n_recent;
    const double denom = std::sqrt(p * (1.0 - p) * inv);
    if (!(denom > 0.0)) return 0.0;
    const double z = (p_recent - p_old - 0.5 * inv) / denom;
    return z > 0.0 ? z : 0.0;
  }

  Detection add(double error) override {
    detail::require_binary(error, "STEPD");
    recent_.push_back(error != 0.0);
    recent_errors_ += error;
    if (recent_.size() > cfg_.window) {
      const double moved = recent_.front() ? 1.0 : 0.0;
      recent_.pop_front();
      recent_errors_ -= moved;
      older_errors_ += moved;
      ++older_n_;
    }
    last_z_ = 0.0;
    if (older_n_ < cfg_.window) return Detection::none();

    last_z_ = statistic(older_errors_, static_cast<double>(older_n_), recent_errors_,
                        static_cast<double>(recent_.size()));
    const double p_value = 1.0 - stats::normal_cdf(last_z_);
    if (p_value < cfg_.alpha_drift) {
      reset();
      return Detection::drift();
    }
    if (p_value < cfg_.alpha_warning) return Detection::warning();
    return Detection::none();
  }

  void reset() override {
    recent_.clear();
    recent_errors_ = 0.0;
    older_errors_ = 0.0;
    older_n_ = 0;
    last_z_ = 0.0;
  }

  [[nodiscard]] std::string name() const override { return "STEPD"; }
  [[nodiscard]] bool binary_only() const noexcept override { return true; }

  /// z statistic computed on the last add() (0 while warming up).
  [[nodiscard]] double last_statistic() const noexcept { return last_z_; }
  [[nodiscard]] std::size_t recent_size() const noexcept { return recent_.size(); }
  [[nodiscard]] std::size_t older_size() const noexcept { return older_n_; }

 private:
  StepdConfig cfg_;
  std::deque<bool> recent_;
  double recent_errors_ = 0.0;
  double older_errors_ = 0.0;
  std::size_t older_n_ = 0;
  double last_z_ = 0.0;
};

}  // namespace optwin
