#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace optwin {

/// Categorical Naive Bayes with Laplace smoothing (pseudo-count 1).
class NaiveBayes {
 public:
  NaiveBayes(std::vector<std::size_t> cardinalities, std::size_t classes)
      : cards_(std::move(cardinalities)), classes_(classes) {
    if (classes_ < 2) throw std::invalid_argument("NaiveBayes needs at least two classes");
    std::size_t off = 0;
    for (std::size_t c : cards_) {
      if (c == 0) throw std::invalid_argument("NaiveBayes attribute cardinality must be positive");
      offsets_.push_back(off);
      off += c;
    }
    stride_ = off;
    reset();
  }

  void reset() {
    seen_ = 0;
    class_counts_.assign(classes_, 0.0);
    value_counts_.assign(classes_ * stride_, 0.0);
  }

  void learn(std::span<const std::uint8_t> x, std::size_t label) {
    check(x);
    if (label >= classes_) throw std::out_of_range("NaiveBayes label out of range");
    ++seen_;
    class_counts_[label] += 1.0;
    double* row = &value_counts_[label * stride_];
    for (std::size_t a = 0; a < cards_.size(); ++a) row[offsets_[a] + x[a]] += 1.0;
  }

  /// Posterior class probabilities.
  [[nodiscard]] std::vector<double> predict_proba(std::span<const std::uint8_t> x) const {
    check(x);
    std::vector<double> logp(classes_);
    const double n = static_cast<double>(seen_);
    double best = -INFINITY;
    for (std::size_t c = 0; c < classes_; ++c) {
      const double nc = class_counts_[c];
      double lp = std::log((nc + 1.0) / (n + static_cast<double>(classes_)));
      const double* row = &value_counts_[c * stride_];
      for (std::size_t a = 0; a < cards_.size(); ++a) {
        lp += std::log((row[offsets_[a] + x[a]] + 1.0) / (nc + static_cast<double>(cards_[a])));
      }
      logp[c] = lp;
      if (lp > best) best = lp;
    }
    double z = 0.0;
    for (double& v : logp) {
      v = std::exp(v - best);
      z += v;
    }
    for (double& v : logp) v /= z;
    return logp;
  }

  /// Most probable class; ties go to the lowest index.
  [[nodiscard]] std::size_t predict(std::span<const std::uint8_t> x) const {
    const auto p = predict_proba(x);
    std::size_t arg = 0;
    for (std::size_t c = 1; c < p.size(); ++c) {
      if (p[c] > p[arg]) arg = c;
    }
    return arg;
  }

  [[nodiscard]] std::size_t seen() const noexcept { return seen_; }
  [[nodiscard]] std::size_t classes() const noexcept { return classes_; }

 private:
  void check(std::span<const std::uint8_t> x) const {
    if (x.size() != cards_.size()) throw std::invalid_argument("NaiveBayes attribute count mismatch");
    for (std::size_t a = 0; a < x.size(); ++a) {
      if (x[a] >= cards_[a]) throw std::out_of_range("NaiveBayes attribute value out of range");
    }
  }

  std::vector<std::size_t> cards_;
  std::vector<std::size_t> offsets_;
  std::size_t stride_ = 0;
  std::size_t classes_;
  std::size_t seen_ = 0;
  std::vector<double> class_counts_;
  std::vector<double> value_counts_;  // [class][attribute value]
};

}  // namespace optwin
