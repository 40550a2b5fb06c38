#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "optwin/baselines/ddm.hpp"
#include "optwin/baselines/ecdd_grid_data.hpp"
#include "optwin/detection.hpp"
#include "optwin/random.hpp"

namespace optwin {

/// One calibrated control limit: L such that a stationary Bernoulli(p_hat)
/// stream raises a false alarm every `arl0` steps on average.
struct EcddGridPoint {
  double p_hat = 0.0;
  double lambda = 0.0;
  double arl0 = 0.0;
  double limit = 0.0;
};

/// Lookup grid for L(p_hat, lambda, ARL0); linear in p_hat, exact in
/// (lambda, arl0), clamped at the ends of the p_hat range.
class EcddGrid {
 public:
  EcddGrid() = default;
  explicit EcddGrid(std::vector<EcddGridPoint> points) : points_(std::move(points)) {
    std::sort(points_.begin(), points_.end(), [](const EcddGridPoint& a, const EcddGridPoint& b) {
      if (a.lambda != b.lambda) return a.lambda < b.lambda;
      if (a.arl0 != b.arl0) return a.arl0 < b.arl0;
      return a.p_hat < b.p_hat;
    });
  }

  /// The grid shipped with the library.
  static const EcddGrid& builtin() {
    static const EcddGrid grid = [] {
      std::vector<EcddGridPoint> pts;
      for (const auto& r : ecdd_data::kGrid) pts.push_back({r[0], r[1], r[2], r[3]});
      return EcddGrid(std::move(pts));
    }();
    return grid;
  }

  [[nodiscard]] bool supports(double lambda, double arl0) const {
    return std::any_of(points_.begin(), points_.end(),
                       [&](const EcddGridPoint& p) { return p.lambda == lambda && p.arl0 == arl0; });
  }

  [[nodiscard]] double limit(double p_hat, double lambda, double arl0) const {
    const EcddGridPoint* lo = nullptr;
    const EcddGridPoint* hi = nullptr;
    for (const auto& p : points_) {
      if (p.lambda != lambda || p.arl0 != arl0) continue;
      if (p.p_hat <= p_hat) lo = &p;
      if (p.p_hat >= p_hat && hi == nullptr) hi = &p;
    }
    if (!lo && !hi) throw std::invalid_argument("ECDD grid has no entry for this lambda / ARL0");
    if (!lo) return hi->limit;
    if (!hi || hi == lo) return lo->limit;
    const double w = (p_hat - lo->p_hat) / (hi->p_hat - lo->p_hat);
    return lo->limit + w * (hi->limit - lo->limit);
  }

  [[nodiscard]] const std::vector<EcddGridPoint>& points() const noexcept { return points_; }

  void write_csv(std::ostream& out) const {
    out << "p_hat,lambda,arl0,L\n";
    std::ostringstream os;
    os.precision(10);
    for (const auto& p : points_) os << p.p_hat << ',' << p.lambda << ',' << p.arl0 << ',' << p.limit << '\n';
    out << os.str();
  }

  static EcddGrid read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("p_hat,lambda,arl0,L", 0) != 0) {
      throw std::runtime_error("ECDD grid: missing header");
    }
    std::vector<EcddGridPoint> pts;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::istringstream ls(line);
      EcddGridPoint p;
      char c1 = 0, c2 = 0, c3 = 0;
      if (!(ls >> p.p_hat >> c1 >> p.lambda >> c2 >> p.arl0 >> c3 >> p.limit) || c1 != ',' || c2 != ',' ||
          c3 != ',') {
        throw std::runtime_error("ECDD grid: bad row at line " + std::to_string(lineno));
      }
      pts.push_back(p);
    }
    return EcddGrid(std::move(pts));
  }

 private:
  std::vector<EcddGridPoint> points_;
};

struct EcddConfig {
  double lambda = 0.2;
  double arl0 = 400.0;
  std::size_t burn_in = 30;
  double warning_fraction = 0.5;
  /// Fixed control limit; when absent L is looked up from the grid at p_hat.
  std::optional<double> control_limit;
};

/// EWMA for Concept Drift Detection.
///
///   Z_t = (1 - lambda) Z_{t-1} + lambda x_t,  Z_0 = 0
///   sigma_Z = sqrt(p(1 - p) lambda / (2 - lambda) (1 - (1 - lambda)^(2t)))
///
/// with p the running error rate since the last reset. Drift when
/// Z_t > p + L sigma_Z, warning above p + warning_fraction L sigma_Z.
class EcddDetector final : public Detector {
 public:
  explicit EcddDetector(EcddConfig cfg = {}, const EcddGrid& grid = EcddGrid::builtin())
      : cfg_(cfg), grid_(&grid) {
    if (!(cfg_.lambda > 0.0 && cfg_.lambda <= 1.0)) throw std::invalid_argument("ECDD lambda must lie in (0, 1]");
    if (!(cfg_.warning_fraction > 0.0 && cfg_.warning_fraction <= 1.0)) {
      throw std::invalid_argument("ECDD warning fraction must lie in (0, 1]");
    }
    if (cfg_.control_limit) {
      if (!(*cfg_.control_limit > 0.0)) throw std::invalid_argument("ECDD control limit must be positive");
    } else if (!grid_->supports(cfg_.lambda, cfg_.arl0)) {
      throw std::invalid_argument("ECDD grid has no calibration for this lambda / ARL0");
    }
  }

  Detection add(double error) override {
    detail::require_binary(error, "ECDD");
    ++t_;
    p_hat_ += (error - p_hat_) / static_cast<double>(t_);
    z_ = (1.0 - cfg_.lambda) * z_ + cfg_.lambda * error;
    decay_ *= (1.0 - cfg_.lambda) * (1.0 - cfg_.lambda);
    if (t_ < cfg_.burn_in) return Detection::none();

    const double sigma =
        std::sqrt(p_hat_ * (1.0 - p_hat_) * cfg_.lambda / (2.0 - cfg_.lambda) * (1.0 - decay_));
    const double limit = cfg_.control_limit ? *cfg_.control_limit : grid_->limit(p_hat_, cfg_.lambda, cfg_.arl0);
    if (z_ > p_hat_ + limit * sigma) {
      reset();
      return Detection::drift();
    }
    if (z_ > p_hat_ + cfg_.warning_fraction * limit * sigma) return Detection::warning();
    return Detection::none();
  }

  void reset() override {
    t_ = 0;
    p_hat_ = 0.0;
    z_ = 0.0;
    decay_ = 1.0;
  }

  [[nodiscard]] std::string name() const override { return "ECDD"; }
  [[nodiscard]] bool binary_only() const noexcept override { return true; }

  [[nodiscard]] double z() const noexcept { return z_; }
  [[nodiscard]] double p_hat() const noexcept { return p_hat_; }
  [[nodiscard]] std::size_t steps() const noexcept { return t_; }

 private:
  EcddConfig cfg_;
  const EcddGrid* grid_;
  std::size_t t_ = 0;
  double p_hat_ = 0.0;
  double z_ = 0.0;
  double decay_ = 1.0;
};

/// Mean steps between alarms of ECDD with a fixed limit on a stationary
/// Bernoulli(p) stream of `steps` elements drawn from `seed`.
inline double ecdd_run_length(double p, double lambda, double limit, std::size_t steps, std::uint64_t seed) {
  EcddConfig cfg;
  cfg.lambda = lambda;
  cfg.control_limit = limit;
  EcddDetector det(cfg);
  Rng rng(seed);
  std::size_t alarms = 0;
  for (std::size_t i = 0; i < steps; ++i) {
    if (det.add(rng.bernoulli(p) ? 1.0 : 0.0).is_drift()) ++alarms;
  }
  return alarms == 0 ? static_cast<double>(steps) : static_cast<double>(steps) / static_cast<double>(alarms);
}

struct EcddCalibration {
  double limit = 0.0;
  double run_length = 0.0;
};

/// Bisects L until the Monte Carlo run length is within `tolerance` (relative)
/// of `arl0`. Every evaluation reuses the same random stream, so the estimate
/// varies with L only.
inline EcddCalibration calibrate_ecdd_limit(double p, double lambda, double arl0, std::uint64_t seed,
                                            double runs = 4000.0, double tolerance = 0.05) {
  const auto steps = static_cast<std::size_t>(runs * arl0);
  double lo = 0.0;
  double hi = 8.0;
  EcddCalibration best{hi, ecdd_run_length(p, lambda, hi, steps, seed)};
  for (int iter = 0; iter < 40 && hi - lo > 1e-4; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double arl = ecdd_run_length(p, lambda, mid, steps, seed);
    if (std::fabs(arl - arl0) < std::fabs(best.run_length - arl0)) best = {mid, arl};
    if (std::fabs(arl - arl0) <= tolerance * arl0) return {mid, arl};
    if (arl < arl0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return best;
}

}  // namespace optwin
