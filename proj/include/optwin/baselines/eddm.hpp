#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "optwin/baselines/ddm.hpp"
#include "optwin/detection.hpp"

namespace optwin {

struct EddmConfig {
  std::size_t min_errors = 30;
  double warning_level = 0.95;  ///< alpha
  double drift_level = 0.90;    ///< beta
};

/// Early Drift Detection Method.
///
/// Tracks the mean p' and std s' of the distance between consecutive errors
/// and their running maximum of p' + 2 s'. A shrinking ratio
/// (p' + 2 s') / (p'_max + 2 s'_max) means errors are arriving closer together.
class EddmDetector final : public Detector {
 public:
  explicit EddmDetector(EddmConfig cfg = {}) : cfg_(cfg) {
    if (!(cfg_.drift_level > 0.0 && cfg_.drift_level <= cfg_.warning_level && cfg_.warning_level <= 1.0)) {
      throw std::invalid_argument("EDDM levels must satisfy 0 < drift <= warning <= 1");
    }
  }

  Detection add(double error) override {
    detail::require_binary(error, "EDDM");
    ++n_;
    if (error == 0.0) return Detection::none();

    ++errors_;
    const double distance = static_cast<double>(n_ - last_error_);
    last_error_ = n_;
    const double old_mean = mean_;
    mean_ += (distance - mean_) / static_cast<double>(errors_);
    m2_ += (distance - mean_) * (distance - old_mean);
    const double sd = std::sqrt(m2_ / static_cast<double>(errors_));
    const double level = mean_ + 2.0 * sd;

    if (level > max_level_) {
      max_level_ = level;
      max_mean_ = mean_;
      max_sd_ = sd;
      return Detection::none();
    }
    if (errors_ < cfg_.min_errors) return Detection::none();
    ratio_ = level / max_level_;
    if (ratio_ < cfg_.drift_level) {
      reset();
      return Detection::drift();
    }
    if (ratio_ < cfg_.warning_level) return Detection::warning();
    return Detection::none();
  }

  void reset() override {
    n_ = 0;
    last_error_ = 0;
    errors_ = 0;
    mean_ = 0.0;
    m2_ = 0.0;
    max_level_ = 0.0;
    max_mean_ = 0.0;
    max_sd_ = 0.0;
    ratio_ = 1.0;
  }

  [[nodiscard]] std::string name() const override { return "EDDM"; }
  [[nodiscard]] bool binary_only() const noexcept override { return true; }

  [[nodiscard]] std::size_t errors() const noexcept { return errors_; }
  [[nodiscard]] double mean_distance() const noexcept { return mean_; }
  [[nodiscard]] double max_level() const noexcept { return max_level_; }
  [[nodiscard]] double max_mean() const noexcept { return max_mean_; }
  [[nodiscard]] double max_sd() const noexcept { return max_sd_; }
  /// Ratio at the last error that did not set a new maximum.
  [[nodiscard]] double ratio() const noexcept { return ratio_; }

 private:
  EddmConfig cfg_;
  std::size_t n_ = 0;
  std::size_t last_error_ = 0;
  std::size_t errors_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double max_level_ = 0.0;
  double max_mean_ = 0.0;
  double max_sd_ = 0.0;
  double ratio_ = 1.0;
};

}  // namespace optwin
