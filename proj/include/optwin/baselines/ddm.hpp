#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

#include "optwin/detection.hpp"

namespace optwin {

namespace detail {
inline bool is_binary(double x) noexcept { return x == 0.0 || x == 1.0; }
inline void require_binary(double x, const char* who) {
  if (!is_binary(x)) throw std::domain_error(std::string(who) + " accepts only 0/1 error indicators");
}
}  // namespace detail

struct DdmConfig {
  std::size_t min_instances = 30;
  double warning_factor = 2.0;
  double drift_factor = 3.0;
};

/// Drift Detection Method: tracks the error rate p and its binomial std s and
/// signals when p + s rises well above the smallest p_min + s_min seen.
class DdmDetector final : public Detector {
 public:
  explicit DdmDetector(DdmConfig cfg = {}) : cfg_(cfg) {
    if (!(cfg_.warning_factor > 0.0 && cfg_.drift_factor >= cfg_.warning_factor)) {
      throw std::invalid_argument("DDM factors must satisfy 0 < warning <= drift");
    }
    reset();
  }

  Detection add(double error) override {
    detail::require_binary(error, "DDM");
    ++n_;
    p_ += (error - p_) / static_cast<double>(n_);
    s_ = std::sqrt(p_ * (1.0 - p_) / static_cast<double>(n_));
    if (n_ < cfg_.min_instances) return Detection::none();

    if (p_ + s_ <= p_min_ + s_min_) {
      p_min_ = p_;
      s_min_ = s_;
    }
    // Strict comparisons: with p_min = s_min = 0 an error-free stream stays quiet.
    if (p_ + s_ > p_min_ + cfg_.drift_factor * s_min_) {
      reset();
      return Detection::drift();
    }
    if (p_ + s_ > p_min_ + cfg_.warning_factor * s_min_) return Detection::warning();
    return Detection::none();
  }

  void reset() override {
    n_ = 0;
    p_ = 1.0;
    s_ = 0.0;
    p_min_ = std::numeric_limits<double>::max();
    s_min_ = std::numeric_limits<double>::max();
  }

  [[nodiscard]] std::string name() const override { return "DDM"; }
  [[nodiscard]] bool binary_only() const noexcept override { return true; }

  [[nodiscard]] std::size_t count() const noexcept { return n_; }
  [[nodiscard]] double error_rate() const noexcept { return p_; }
  [[nodiscard]] double error_std() const noexcept { return s_; }
  [[nodiscard]] double p_min() const noexcept { return p_min_; }
  [[nodiscard]] double s_min() const noexcept { return s_min_; }

 private:
  DdmConfig cfg_;
  std::size_t n_ = 0;
  double p_ = 1.0;
  double s_ = 0.0;
  double p_min_ = 0.0;
  double s_min_ = 0.0;
};

}  // namespace optwin
