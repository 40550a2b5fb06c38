#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "optwin/detection.hpp"
#include "optwin/naive_bayes.hpp"

namespace optwin {

enum class ResetPolicy {
  None,              ///< detector runs but the model is never touched
  ResetOnDrift,      ///< fresh model after each drift
  WarningBackground  ///< train a background model from the first warning; swap it in on drift
};

inline ResetPolicy reset_policy_from_string(const std::string& s) {
  if (s == "none") return ResetPolicy::None;
  if (s == "reset") return ResetPolicy::ResetOnDrift;
  if (s == "warning") return ResetPolicy::WarningBackground;
  throw std::invalid_argument("unknown reset policy '" + s + "'");
}

struct PrequentialResult {
  std::vector<std::uint8_t> errors;
  std::vector<std::size_t> drifts;
  std::vector<std::size_t> warnings;
  std::size_t correct = 0;

  [[nodiscard]] double accuracy() const noexcept {
    return errors.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(errors.size());
  }
};

/// Test-then-train over `instances` (each with members `x` and `label`).
/// Per instance: predict, record the 0/1 error, feed it to `detector` (may be
/// null), react per `policy`, then learn the instance.
template <typename Instance>
PrequentialResult prequential_run(std::span<const Instance> instances, NaiveBayes& model, Detector* detector,
                                  ResetPolicy policy = ResetPolicy::ResetOnDrift) {
  PrequentialResult out;
  out.errors.reserve(instances.size());
  std::optional<NaiveBayes> background;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const Instance& inst = instances[i];
    const std::span<const std::uint8_t> x(inst.x.data(), inst.x.size());
    const bool error = model.predict(x) != static_cast<std::size_t>(inst.label);
    out.errors.push_back(error ? 1 : 0);
    if (!error) ++out.correct;

    if (detector != nullptr) {
      const Detection d = detector->add(error ? 1.0 : 0.0);
      if (d.is_drift()) {
        out.drifts.push_back(i);
        if (policy == ResetPolicy::WarningBackground && background) {
          model = std::move(*background);
        } else if (policy != ResetPolicy::None) {
          model.reset();
        }
        background.reset();
      } else if (d.is_warning()) {
        out.warnings.push_back(i);
        if (policy == ResetPolicy::WarningBackground && !background) {
          background.emplace(model);
          background->reset();
        }
      } else {
        background.reset();
      }
    }

    model.learn(x, inst.label);
    if (background) background->learn(x, inst.label);
  }
  return out;
}

}  // namespace optwin
