#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "optwin/detection.hpp"

namespace optwin {

struct AdwinConfig {
  double delta = 0.002;
  std::size_t max_buckets = 5;      ///< M: buckets per row before merging
  std::size_t min_window = 10;      ///< no cut checks below this many elements
  std::size_t min_sub_window = 5;   ///< each side of a cut needs this many elements
};

/// ADWIN adaptive windowing over an exponential histogram.
///
/// Row r holds buckets summarizing 2^r elements; when a row exceeds M buckets
/// its two oldest merge into row r + 1. Each step scans the O(log |W|) bucket
/// boundaries as candidate cuts and drops the oldest buckets while some cut
/// separates sub-windows whose means differ by more than
///
///   eps = sqrt(2 / m * var_W * ln(2 / d')) + 2 / (3 m) * ln(2 / d'),
///
/// with m = 1 / (1 / n0 + 1 / n1) and d' = delta / |W|.
class AdwinDetector final : public Detector {
 public:
  struct Bucket {
    double count = 0.0;
    double sum = 0.0;
    double sum_sq = 0.0;
  };

  explicit AdwinDetector(AdwinConfig cfg = {}) : cfg_(cfg) {
    if (!(cfg_.delta > 0.0 && cfg_.delta < 1.0)) throw std::invalid_argument("ADWIN delta must lie in (0, 1)");
    if (cfg_.max_buckets < 2) throw std::invalid_argument("ADWIN needs at least 2 buckets per row");
  }

  Detection add(double x) override {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("ADWIN input must lie in [0, 1]");
    insert(x);
    compress();
    last_cut_checks_ = 0;
    last_scan_passes_ = 0;
    bool changed = false;
    while (width() > static_cast<double>(cfg_.min_window) && find_cut()) {
      drop_oldest_bucket();
      changed = true;
    }
    total_cut_checks_ += last_cut_checks_;
    return changed ? Detection::drift() : Detection::none();
  }

  void reset() override {
    rows_.clear();
    total_ = {};
  }

  [[nodiscard]] std::string name() const override { return "ADWIN"; }

  [[nodiscard]] std::size_t window_length() const noexcept {
    return static_cast<std::size_t>(total_.count);
  }
  [[nodiscard]] double width() const noexcept { return total_.count; }
  [[nodiscard]] double mean() const noexcept { return total_.count > 0 ? total_.sum / total_.count : 0.0; }
  [[nodiscard]] double variance() const noexcept {
    if (total_.count <= 0) return 0.0;
    const double m = mean();
    const double v = total_.sum_sq / total_.count - m * m;
    return v > 0.0 ? v : 0.0;
  }
  [[nodiscard]] std::size_t bucket_count() const noexcept {
    std::size_t n = 0;
    for (const auto& r : rows_) n += r.size();
    return n;
  }
  [[nodiscard]] std::size_t row_count() const noexcept { return rows_.size(); }
  [[nodiscard]] const std::deque<Bucket>& row(std::size_t r) const { return rows_.at(r); }
  /// Candidate cuts examined during the last add().
  [[nodiscard]] std::size_t last_cut_checks() const noexcept { return last_cut_checks_; }
  [[nodiscard]] std::size_t total_cut_checks() const noexcept { return total_cut_checks_; }
  /// Boundary scans during the last add(); each dropped bucket triggers a rescan.
  [[nodiscard]] std::size_t last_scan_passes() const noexcept { return last_scan_passes_; }

 private:
  void insert(double x) {
    if (rows_.empty()) rows_.emplace_back();
    rows_[0].push_back({1.0, x, x * x});
    total_.count += 1.0;
    total_.sum += x;
    total_.sum_sq += x * x;
  }

  void compress() {
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (rows_[r].size() <= cfg_.max_buckets) break;
      const Bucket a = rows_[r].front();
      rows_[r].pop_front();
      const Bucket b = rows_[r].front();
      rows_[r].pop_front();
      if (r + 1 == rows_.size()) rows_.emplace_back();
      rows_[r + 1].push_back({a.count + b.count, a.sum + b.sum, a.sum_sq + b.sum_sq});
    }
  }

  // Scans boundaries from the oldest bucket forward. Returns true at the first
  // boundary whose mean difference exceeds the bound.
  bool find_cut() {
    ++last_scan_passes_;
    const double n = total_.count;
    const double var = variance();
    const double log_term = std::log(2.0 * n / cfg_.delta);
    const double min_side = static_cast<double>(cfg_.min_sub_window);
    double n0 = 0.0;
    double s0 = 0.0;
    for (std::size_t r = rows_.size(); r-- > 0;) {
      for (const Bucket& b : rows_[r]) {
        n0 += b.count;
        s0 += b.sum;
        const double n1 = n - n0;
        if (n1 <= 0.0) return false;
        ++last_cut_checks_;
        if (n0 < min_side || n1 < min_side) continue;
        const double diff = s0 / n0 - (total_.sum - s0) / n1;
        const double m = 1.0 / (1.0 / n0 + 1.0 / n1);
        const double eps = std::sqrt(2.0 / m * var * log_term) + 2.0 / (3.0 * m) * log_term;
        if (std::fabs(diff) > eps) return true;
      }
    }
    return false;
  }

  void drop_oldest_bucket() {
    auto& last = rows_.back();
    const Bucket b = last.front();
    last.pop_front();
    total_.count -= b.count;
    total_.sum -= b.sum;
    total_.sum_sq -= b.sum_sq;
    while (!rows_.empty() && rows_.back().empty()) rows_.pop_back();
  }

  AdwinConfig cfg_;
  std::vector<std::deque<Bucket>> rows_;  // rows_[r] ordered oldest -> newest
  Bucket total_;
  std::size_t last_cut_checks_ = 0;
  std::size_t last_scan_passes_ = 0;
  std::size_t total_cut_checks_ = 0;
};

}  // namespace optwin
