#pragma once

// Precomputed optimal-split table for the OPTWIN detector.
//
// For a window of length L split into a "hist" part of n_hist elements and a
// "new" part of n_new = L - n_hist elements, the smallest mean shift (in units
// of sigma_hist) that a Welch t-test can certify, once sigma_new is bounded by
// an F-test, is
//
//   bound = t_ppf(d', df) * sqrt(1 / n_hist + f_ppf(d', n_hist - 1, n_new - 1) / n_new)
//
// with d' = delta^(1/4) and df the Welch-Satterthwaite degrees of freedom under
// that variance bound. For each L the table stores the largest split whose
// bound does not exceed the robustness rho, together with the critical values
// the detector needs at run time.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "optwin/stats.hpp"

namespace optwin {

struct OptwinConfig {
  double delta = 0.99;          ///< confidence level, (0, 1)
  double rho = 0.1;             ///< robustness, > 0
  std::size_t w_max = 25000;    ///< maximum window length
  std::size_t w_min = 30;       ///< minimum window length before testing
  double eta = 1e-5;            ///< added to both standard deviations
  bool one_sided = true;        ///< only flag when the new mean is not below the old one
  bool keep_new_window_on_reset = false;

  void validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("rho must be positive");
    if (w_min < 30) throw std::invalid_argument("w_min must be at least 30");
    if (w_max < w_min) throw std::invalid_argument("w_max must be >= w_min");
    if (w_max > 0x7fffffffu) throw std::invalid_argument("w_max too large");
    if (!(eta >= 0.0)) throw std::invalid_argument("eta must be non-negative");
  }

  /// Per-test confidence covering the four tests (two in the split, two online).
  [[nodiscard]] double delta_prime() const { return std::pow(delta, 0.25); }
};

/// Critical values for one candidate split.
struct SplitBound {
  double f_crit = 0.0;
  double df = 0.0;
  double t_crit = 0.0;
  double robustness = 0.0;
};

/// Welch-Satterthwaite degrees of freedom when sigma_new^2 = f_crit * sigma_hist^2.
inline double welch_df(double n_hist, double n_new, double f_crit) {
  const double a = 1.0 / n_hist;
  const double b = f_crit / n_new;
  return (a + b) * (a + b) / (a * a / (n_hist - 1.0) + b * b / (n_new - 1.0));
}

inline double robustness_from(double n_hist, double n_new, double t_crit, double f_crit) {
  return t_crit * std::sqrt(1.0 / n_hist + f_crit / n_new);
}

/// Evaluates the bound for sub-window sizes (which may be fractional for the
/// nu = 0.5 fallback on odd lengths). Both sizes must be >= 2.
inline SplitBound split_bound(double n_hist, double n_new, double delta_prime) {
  if (!(n_hist >= 2.0 && n_new >= 2.0)) {
    throw std::domain_error("split_bound: both sub-windows need at least 2 elements");
  }
  SplitBound b;
  b.f_crit = stats::f_ppf(delta_prime, n_hist - 1.0, n_new - 1.0);
  b.df = welch_df(n_hist, n_new, b.f_crit);
  b.t_crit = stats::t_ppf(delta_prime, b.df);
  b.robustness = robustness_from(n_hist, n_new, b.t_crit, b.f_crit);
  return b;
}

/// Smallest certifiable robustness when a window of `length` is split at
/// fraction `nu`. Diverges as either side shrinks towards 2 elements.
inline double split_robustness(double nu, std::size_t length, double delta_prime) {
  if (!(nu > 0.0 && nu < 1.0)) throw std::domain_error("split_robustness: nu must lie in (0, 1)");
  const double L = static_cast<double>(length);
  double n_hist = nu * L;
  // k / L * L may be off by an ulp; keep integral splits integral.
  const double nearest = std::round(n_hist);
  if (std::fabs(n_hist - nearest) <= 1e-9 * L) n_hist = nearest;
  return split_bound(n_hist, L - n_hist, delta_prime).robustness;
}

/// Reference search: evaluates every integral split k in [2, L - 2] and returns
/// the largest k / L whose bound is <= rho, or nullopt if none qualifies.
inline std::optional<double> optimal_cut(std::size_t length, double rho, double delta_prime) {
  if (length < 4) return std::nullopt;
  for (std::size_t k = length - 2; k >= 2; --k) {
    const double n_hist = static_cast<double>(k);
    if (split_bound(n_hist, static_cast<double>(length - k), delta_prime).robustness <= rho) {
      return n_hist / static_cast<double>(length);
    }
  }
  return std::nullopt;
}

struct CutRow {
  double nu = 0.5;
  std::uint32_t nu_split = 0;
  double t_crit = 0.0;
  double f_crit = 0.0;
  double df = 0.0;
  /// Robustness certified at this row's split. On fallback rows (nu = 0.5)
  /// this is the temporary robustness used until the window reaches w_proof.
  double rho_temp = 0.0;
  bool fallback = true;

  bool operator==(const CutRow&) const = default;
};

namespace detail {

// Largest integral split with bound <= rho, assuming the bound is unimodal in
// k (verified against optimal_cut in tests). `hint_new` is the new-window size
// chosen for the previous length.
class SplitSearch {
 public:
  SplitSearch(std::size_t length, double rho, double delta_prime)
      : length_(length), rho_(rho), delta_prime_(delta_prime) {}

  std::optional<std::size_t> largest(std::optional<std::size_t> hint_new) {
    const std::size_t lo = 2;
    const std::size_t hi = length_ - 2;
    if (hint_new && *hint_new >= 2 && *hint_new + 2 <= length_) {
      std::size_t k = length_ - *hint_new;
      if (ok(k)) {
        while (k + 1 <= hi && ok(k + 1)) ++k;
        return k;
      }
      // Failing at the hint: the admissible interval lies below (usual) or
      // the hint sits left of it; short scan down, else full search.
      for (std::size_t step = 1; step <= 8 && step + lo <= k; ++step) {
        if (ok(k - step)) return k - step;
      }
    }
    // Full search: locate the minimum, then the right edge of the admissible set.
    std::size_t a = lo;
    std::size_t b = hi;
    while (b - a > 2) {
      const std::size_t m1 = a + (b - a) / 3;
      const std::size_t m2 = b - (b - a) / 3;
      if (value(m1) < value(m2)) {
        b = m2 - 1;
      } else {
        a = m1 + 1;
      }
    }
    std::size_t argmin = a;
    for (std::size_t k = a + 1; k <= b; ++k) {
      if (value(k) < value(argmin)) argmin = k;
    }
    if (!ok(argmin)) return std::nullopt;
    std::size_t good = argmin;
    std::size_t bad = hi + 1;
    while (bad - good > 1) {
      const std::size_t mid = good + (bad - good) / 2;
      if (ok(mid)) {
        good = mid;
      } else {
        bad = mid;
      }
    }
    return good;
  }

 private:
  double value(std::size_t k) {
    return split_bound(static_cast<double>(k), static_cast<double>(length_ - k), delta_prime_)
        .robustness;
  }
  bool ok(std::size_t k) { return value(k) <= rho_; }

  std::size_t length_;
  double rho_;
  double delta_prime_;
};

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw std::runtime_error("cut table: truncated file");
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  pos += sizeof(T);
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace detail

/// Immutable per-length table of splits and critical values.
///
/// Binary layout (all fields little-endian):
///
///   header, 32 bytes:
///     char[4] "OPTW" | u16 version (=1) | u16 w_min | u32 w_max | u32 w_proof
///     | f64 delta | f64 rho
///   one 20-byte row per L in [w_min, w_max]:
///     u32 split (bit 31 set on nu = 0.5 fallback rows) | f64 t_crit | f64 f_crit
///
/// nu, df and rho_temp are functions of (L, split, fallback, t_crit, f_crit)
/// and are recomputed on load with the same arithmetic used to build them.
class CutTable {
 public:
  static constexpr char kMagic[4] = {'O', 'P', 'T', 'W'};
  static constexpr std::uint16_t kVersion = 1;
  static constexpr std::size_t kHeaderBytes = 32;
  static constexpr std::size_t kRowBytes = 20;

  static CutTable build(const OptwinConfig& cfg) {
    cfg.validate();
    CutTable table;
    table.delta_ = cfg.delta;
    table.rho_ = cfg.rho;
    table.w_min_ = cfg.w_min;
    table.w_max_ = cfg.w_max;
    table.w_proof_ = cfg.w_max + 1;
    table.rows_.reserve(cfg.w_max - cfg.w_min + 1);
    const double dp = cfg.delta_prime();
    std::optional<std::size_t> hint_new;
    for (std::size_t L = cfg.w_min; L <= cfg.w_max; ++L) {
      detail::SplitSearch search(L, cfg.rho, dp);
      const auto k = search.largest(hint_new);
      if (k) {
        hint_new = L - *k;
        if (table.w_proof_ > cfg.w_max) table.w_proof_ = L;
        table.rows_.push_back(make_row(L, *k, false, dp));
      } else {
        table.rows_.push_back(make_row(L, L / 2, true, dp));
      }
    }
    return table;
  }

  [[nodiscard]] double delta() const noexcept { return delta_; }
  [[nodiscard]] double rho() const noexcept { return rho_; }
  [[nodiscard]] std::size_t w_min() const noexcept { return w_min_; }
  [[nodiscard]] std::size_t w_max() const noexcept { return w_max_; }
  /// First length with a solved split; w_max + 1 if there is none.
  [[nodiscard]] std::size_t w_proof() const noexcept { return w_proof_; }
  [[nodiscard]] std::size_t size() const noexcept { return rows_.size(); }
  [[nodiscard]] const std::vector<CutRow>& rows() const noexcept { return rows_; }

  [[nodiscard]] const CutRow& row(std::size_t length) const {
    if (length < w_min_ || length > w_max_) throw std::out_of_range("CutTable::row: length out of range");
    return rows_[length - w_min_];
  }

  [[nodiscard]] bool matches(const OptwinConfig& cfg) const noexcept {
    return cfg.delta == delta_ && cfg.rho == rho_ && cfg.w_min == w_min_ && cfg.w_max == w_max_;
  }

  [[nodiscard]] std::string serialize() const {
    if (w_min_ > 0xFFFFu) throw std::length_error("cut table: w_min does not fit the file header");
    std::string out;
    out.reserve(kHeaderBytes + kRowBytes * rows_.size());
    out.append(kMagic, 4);
    detail::put_le<std::uint16_t>(out, kVersion);
    detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(w_min_));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(w_max_));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(w_proof_));
    detail::put_le<double>(out, delta_);
    detail::put_le<double>(out, rho_);
    for (const auto& r : rows_) {
      detail::put_le<std::uint32_t>(out, r.nu_split | (r.fallback ? kFallbackBit : 0u));
      detail::put_le<double>(out, r.t_crit);
      detail::put_le<double>(out, r.f_crit);
    }
    return out;
  }

  static CutTable deserialize(const std::string& bytes) {
    if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0) {
      throw std::runtime_error("cut table: bad magic");
    }
    std::size_t pos = 4;
    if (detail::get_le<std::uint16_t>(bytes, pos) != kVersion) {
      throw std::runtime_error("cut table: unsupported version");
    }
    CutTable table;
    table.w_min_ = detail::get_le<std::uint16_t>(bytes, pos);
    table.w_max_ = detail::get_le<std::uint32_t>(bytes, pos);
    table.w_proof_ = detail::get_le<std::uint32_t>(bytes, pos);
    table.delta_ = detail::get_le<double>(bytes, pos);
    table.rho_ = detail::get_le<double>(bytes, pos);
    if (table.w_max_ < table.w_min_ || table.w_min_ < 4) throw std::runtime_error("cut table: bad header");
    const std::size_t n = table.w_max_ - table.w_min_ + 1;
    if (bytes.size() != kHeaderBytes + n * kRowBytes) throw std::runtime_error("cut table: size mismatch");
    table.rows_.reserve(n);
    for (std::size_t L = table.w_min_; L <= table.w_max_; ++L) {
      const auto split = detail::get_le<std::uint32_t>(bytes, pos);
      const double t_crit = detail::get_le<double>(bytes, pos);
      const double f_crit = detail::get_le<double>(bytes, pos);
      const bool fallback = (split & kFallbackBit) != 0;
      const std::uint32_t k = split & ~kFallbackBit;
      if (k < 2 || k + 2 > L) throw std::runtime_error("cut table: split out of range");
      table.rows_.push_back(derive_row(L, k, fallback, t_crit, f_crit));
    }
    return table;
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    const std::string bytes = serialize();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
  }

  static CutTable load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize(buf.str());
  }

  /// CSV with header L,nu,nu_split,t_crit,f_crit,df,rho_temp.
  void write_csv(std::ostream& out) const {
    out << "L,nu,nu_split,t_crit,f_crit,df,rho_temp\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const auto& r = rows_[i];
      out << (w_min_ + i) << ',' << r.nu << ',' << r.nu_split << ',' << r.t_crit << ','
          << r.f_crit << ',' << r.df << ',' << r.rho_temp << '\n';
    }
  }

  bool operator==(const CutTable&) const = default;

 private:
  static constexpr std::uint32_t kFallbackBit = 0x80000000u;

  static CutRow make_row(std::size_t L, std::size_t k, bool fallback, double delta_prime) {
    const double len = static_cast<double>(L);
    const double n_hist = fallback ? 0.5 * len : static_cast<double>(k);
    const SplitBound b = split_bound(n_hist, len - n_hist, delta_prime);
    return derive_row(L, static_cast<std::uint32_t>(k), fallback, b.t_crit, b.f_crit);
  }

  static CutRow derive_row(std::size_t L, std::uint32_t k, bool fallback, double t_crit, double f_crit) {
    const double len = static_cast<double>(L);
    const double n_hist = fallback ? 0.5 * len : static_cast<double>(k);
    const double n_new = len - n_hist;
    CutRow r;
    r.fallback = fallback;
    r.nu = fallback ? 0.5 : static_cast<double>(k) / len;
    r.nu_split = k;
    r.t_crit = t_crit;
    r.f_crit = f_crit;
    r.df = welch_df(n_hist, n_new, f_crit);
    r.rho_temp = robustness_from(n_hist, n_new, t_crit, f_crit);
    return r;
  }

  CutTable() = default;

  double delta_ = 0.0;
  double rho_ = 0.0;
  std::size_t w_min_ = 0;
  std::size_t w_max_ = 0;
  std::size_t w_proof_ = 0;
  std::vector<CutRow> rows_;
};

}  // namespace optwin
