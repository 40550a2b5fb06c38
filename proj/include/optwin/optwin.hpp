#pragma once

#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>

#include "optwin/cut_table.hpp"
#include "optwin/detection.hpp"
#include "optwin/rolling_window.hpp"

namespace optwin {

/// Outcome of the two OPTWIN tests on one window split.
struct SplitTestResult {
  bool drift = false;
  DriftTest test = DriftTest::TTest;
  double t_statistic = 0.0;
  double f_ratio = 0.0;
};

/// Runs the F-test (variance increase) then the Welch t-test on the given
/// sub-window moments. Shared by the detector and by reference checks.
inline SplitTestResult test_split(const SubWindowMoments& hist, const SubWindowMoments& recent,
                                  const CutRow& row, const OptwinConfig& cfg) {
  SplitTestResult r;
  const double sd_hist = hist.std + cfg.eta;
  const double sd_new = recent.std + cfg.eta;
  const double var_hist = sd_hist * sd_hist;
  const double var_new = sd_new * sd_new;
  r.f_ratio = var_new / var_hist;
  const double se = std::sqrt(var_hist / static_cast<double>(hist.count) +
                              var_new / static_cast<double>(recent.count));
  r.t_statistic = se > 0.0 ? (hist.mean - recent.mean) / se : 0.0;

  const bool gate = !cfg.one_sided || recent.mean >= hist.mean;
  if (!gate) return r;
  if (r.f_ratio > row.f_crit) {
    r.drift = true;
    r.test = DriftTest::FTest;
  } else if (std::fabs(r.t_statistic) > row.t_crit) {
    r.drift = true;
    r.test = DriftTest::TTest;
  }
  return r;
}

/// OPTWIN drift detector.
///
/// Keeps a sliding window of at most w_max values. Once the window holds
/// w_min values, each step splits it at the precomputed optimal point and
/// flags a drift when the recent part has a significantly larger variance
/// (F-test) or a significantly different mean (Welch t-test). O(1) per element.
class OptwinDetector final : public Detector {
 public:
  /// Builds a private table for `cfg`.
  explicit OptwinDetector(const OptwinConfig& cfg)
      : OptwinDetector(cfg, std::make_shared<const CutTable>(CutTable::build(cfg))) {}

  /// Shares a prebuilt table; its (delta, rho, w_min, w_max) must match `cfg`.
  OptwinDetector(const OptwinConfig& cfg, std::shared_ptr<const CutTable> table)
      : cfg_(cfg), table_(std::move(table)), window_(cfg.w_max) {
    cfg_.validate();
    if (!table_ || !table_->matches(cfg_)) {
      throw std::invalid_argument("OptwinDetector: cut table does not match configuration");
    }
  }

  Detection add(double x) override {
    if (window_.full()) window_.evict_oldest();
    window_.push(x);
    const std::size_t length = window_.size();
    if (length < cfg_.w_min) return Detection::none();

    const CutRow& row = table_->row(length);
    window_.set_split(row.nu_split);
    const SplitTestResult r = test_split(window_.hist_moments(), window_.new_moments(), row, cfg_);
    if (!r.drift) return Detection::none();

    DriftDetail detail{r.test, r.t_statistic, r.f_ratio, row.nu_split, length};
    if (cfg_.keep_new_window_on_reset) {
      window_.drop_oldest(row.nu_split);
      window_.set_split(0);
    } else {
      window_.clear();
    }
    return Detection::drift(detail);
  }

  void reset() override { window_.clear(); }

  [[nodiscard]] std::string name() const override {
    std::ostringstream os;
    os << "OPTWIN rho=" << cfg_.rho;
    return os.str();
  }

  [[nodiscard]] const OptwinConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] const CutTable& table() const noexcept { return *table_; }
  [[nodiscard]] const RollingWindow& window() const noexcept { return window_; }

 private:
  OptwinConfig cfg_;
  std::shared_ptr<const CutTable> table_;
  RollingWindow window_;
};

}  // namespace optwin
