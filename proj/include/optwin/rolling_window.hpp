#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace optwin {

/// Neumaier-compensated running sum. Supports removal by adding the negation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  void subtract(double x) noexcept { add(-x); }
  [[nodiscard]] double value() const noexcept { return sum_ + compensation_; }
  [[nodiscard]] double head() const noexcept { return sum_; }
  [[nodiscard]] double tail() const noexcept { return compensation_; }
  void clear() noexcept { sum_ = compensation_ = 0.0; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// Count, mean and sample standard deviation (divisor n - 1) of a window slice.
/// A single-element slice has std 0.
struct SubWindowMoments {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;
};

/// Running count / sum / sum of squares of values offset by a fixed shift.
class MomentAccumulator {
 public:
  void add(double shifted) noexcept {
    ++count_;
    sum_.add(shifted);
    const double sq = shifted * shifted;
    sum_sq_.add(sq);
    sum_sq_.add(std::fma(shifted, shifted, -sq));
  }
  void remove(double shifted) noexcept {
    --count_;
    sum_.subtract(shifted);
    const double sq = shifted * shifted;
    sum_sq_.subtract(sq);
    sum_sq_.subtract(std::fma(shifted, shifted, -sq));
  }
  void clear() noexcept {
    count_ = 0;
    sum_.clear();
    sum_sq_.clear();
  }
  [[nodiscard]] std::size_t count() const noexcept { return count_; }

  [[nodiscard]] SubWindowMoments moments(double shift) const noexcept {
    return combine(*this, MomentAccumulator{}, shift);
  }

  /// Moments of the union of two disjoint accumulators sharing one shift.
  [[nodiscard]] static SubWindowMoments combine(const MomentAccumulator& a,
                                                const MomentAccumulator& b,
                                                double shift) noexcept {
    SubWindowMoments m;
    m.count = a.count_ + b.count_;
    if (m.count == 0) return m;
    const double n = static_cast<double>(m.count);
    CompensatedSum s = a.sum_;
    s.add(b.sum_.head());
    s.add(b.sum_.tail());
    m.mean = shift + s.value() / n;
    if (m.count > 1) {
      CompensatedSum s2 = a.sum_sq_;
      s2.add(b.sum_sq_.head());
      s2.add(b.sum_sq_.tail());
      // n * s2 - s * s in double-double so a zero spread far from the shift
      // comes out as zero rather than sqrt(eps) noise.
      const double sh = s.head(), sl = s.tail();
      const double q2h = s2.head(), q2l = s2.tail();
      const double nq = n * q2h;
      const double nq_lo = std::fma(n, q2h, -nq) + n * q2l;
      const double ss = sh * sh;
      const double ss_lo = std::fma(sh, sh, -ss) + 2.0 * sh * sl + sl * sl;
      const double num = (nq - ss) + (nq_lo - ss_lo);
      const double var = num / (n * (n - 1.0));
      m.std = var > 0.0 ? std::sqrt(var) : 0.0;
    }
    return m;
  }

 private:
  std::size_t count_ = 0;
  CompensatedSum sum_;
  CompensatedSum sum_sq_;
};

/// Bounded circular buffer with O(1) push / evict and O(1) moments for the
/// whole window and for the two sub-windows on either side of a movable split.
///
/// Index 0 is the oldest element. Elements [0, split) form the "hist"
/// sub-window and [split, size) the "new" sub-window. Values are accumulated
/// relative to the first value pushed into an empty window, which keeps the
/// sum-of-squares formula well conditioned for data far from zero.
class RollingWindow {
 public:
  explicit RollingWindow(std::size_t capacity) : buffer_(capacity) {
    if (capacity == 0) throw std::invalid_argument("RollingWindow: capacity must be positive");
  }

  [[nodiscard]] std::size_t capacity() const noexcept { return buffer_.size(); }
  [[nodiscard]] std::size_t size() const noexcept { return size_; }
  [[nodiscard]] bool empty() const noexcept { return size_ == 0; }
  [[nodiscard]] bool full() const noexcept { return size_ == buffer_.size(); }
  [[nodiscard]] std::size_t split() const noexcept { return split_; }

  [[nodiscard]] double operator[](std::size_t i) const noexcept {
    return buffer_[physical(i)];
  }
  [[nodiscard]] double at(std::size_t i) const {
    if (i >= size_) throw std::out_of_range("RollingWindow::at: index out of range");
    return (*this)[i];
  }

  /// Appends to the "new" end.
  void push(double x) {
    if (full()) throw std::length_error("RollingWindow::push: window is full");
    if (empty()) shift_ = x;
    buffer_[physical(size_)] = x;
    ++size_;
    new_.add(x - shift_);
  }

  /// Removes and returns the oldest element.
  double evict_oldest() {
    if (empty()) throw std::out_of_range("RollingWindow::evict_oldest: window is empty");
    const double x = buffer_[head_];
    if (split_ > 0) {
      hist_.remove(x - shift_);
      --split_;
    } else {
      new_.remove(x - shift_);
    }
    head_ = (head_ + 1) % buffer_.size();
    --size_;
    if (empty()) clear();
    return x;
  }

  /// Drops the `count` oldest elements.
  void drop_oldest(std::size_t count) {
    if (count > size_) throw std::out_of_range("RollingWindow::drop_oldest: count exceeds size");
    for (std::size_t i = 0; i < count; ++i) evict_oldest();
  }

  void clear() noexcept {
    head_ = size_ = split_ = 0;
    shift_ = 0.0;
    hist_.clear();
    new_.clear();
  }

  /// Moves the hist/new boundary, transferring one element per position moved.
  void set_split(std::size_t split) {
    if (split > size_) throw std::out_of_range("RollingWindow::set_split: split exceeds size");
    while (split_ < split) {
      const double v = (*this)[split_] - shift_;
      new_.remove(v);
      hist_.add(v);
      ++split_;
    }
    while (split_ > split) {
      --split_;
      const double v = (*this)[split_] - shift_;
      hist_.remove(v);
      new_.add(v);
    }
  }

  [[nodiscard]] SubWindowMoments hist_moments() const noexcept { return hist_.moments(shift_); }
  [[nodiscard]] SubWindowMoments new_moments() const noexcept { return new_.moments(shift_); }
  [[nodiscard]] SubWindowMoments moments() const noexcept {
    return MomentAccumulator::combine(hist_, new_, shift_);
  }

  /// Moments of elements [from, to). O(1) for the full window and for either
  /// side of the current split, O(to - from) otherwise.
  [[nodiscard]] SubWindowMoments moments(std::size_t from, std::size_t to) const {
    if (!(from < to && to <= size_)) {
      throw std::out_of_range("RollingWindow::moments: require 0 <= from < to <= size");
    }
    if (from == 0 && to == size_) return moments();
    if (from == 0 && to == split_) return hist_moments();
    if (from == split_ && to == size_) return new_moments();

    SubWindowMoments m;
    m.count = to - from;
    const double n = static_cast<double>(m.count);
    CompensatedSum sum;
    for (std::size_t i = from; i < to; ++i) sum.add((*this)[i]);
    m.mean = sum.value() / n;
    if (m.count > 1) {
      CompensatedSum sq;
      for (std::size_t i = from; i < to; ++i) {
        const double d = (*this)[i] - m.mean;
        sq.add(d * d);
      }
      m.std = std::sqrt(sq.value() / (n - 1.0));
    }
    return m;
  }

 private:
  [[nodiscard]] std::size_t physical(std::size_t logical) const noexcept {
    const std::size_t p = head_ + logical;
    return p >= buffer_.size() ? p - buffer_.size() : p;
  }

  std::vector<double> buffer_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
  std::size_t split_ = 0;
  double shift_ = 0.0;
  MomentAccumulator hist_;
  MomentAccumulator new_;
};

}  // namespace optwin
