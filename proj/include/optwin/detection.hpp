#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace optwin {

enum class Verdict { NoChange, Warning, Drift };

inline std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::NoChange:
      return "none";
    case Verdict::Warning:
      return "warning";
    case Verdict::Drift:
      return "drift";
  }
  return "unknown";
}

/// Which OPTWIN test fired.
enum class DriftTest { FTest, TTest };

/// Statistics at the step where OPTWIN flagged a drift.
struct DriftDetail {
  DriftTest test = DriftTest::TTest;
  double t_statistic = 0.0;
  double f_ratio = 0.0;
  std::size_t nu_split = 0;
  std::size_t window_length = 0;
};

/// Per-element output of every detector.
struct Detection {
  Verdict verdict = Verdict::NoChange;
  std::optional<DriftDetail> detail;

  [[nodiscard]] bool is_drift() const noexcept { return verdict == Verdict::Drift; }
  [[nodiscard]] bool is_warning() const noexcept { return verdict == Verdict::Warning; }

  static Detection none() { return {}; }
  static Detection warning() { return {Verdict::Warning, std::nullopt}; }
  static Detection drift(std::optional<DriftDetail> detail = std::nullopt) {
    return {Verdict::Drift, detail};
  }
};

/// Common interface of all drift detectors.
///
/// Instances are single-writer; share nothing mutable between threads.
class Detector {
 public:
  virtual ~Detector() = default;

  /// Feeds one element and returns the verdict for this step.
  virtual Detection add(double x) = 0;
  virtual void reset() = 0;
  [[nodiscard]] virtual std::string name() const = 0;
  /// True if the detector only accepts 0/1 error indicators.
  [[nodiscard]] virtual bool binary_only() const noexcept { return false; }
};

}  // namespace optwin
