#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "optwin/random.hpp"
#include "optwin/streams.hpp"

namespace optwin {

enum class StaggerSize : std::uint8_t { Small, Medium, Large };
enum class StaggerColor : std::uint8_t { Red, Green, Blue };
enum class StaggerShape : std::uint8_t { Circle, Square, Triangle };

/// x = {size, color, shape}, each coded 0..2.
struct StaggerInstance {
  std::array<std::uint8_t, 3> x{};
  std::uint8_t label = 0;

  [[nodiscard]] StaggerSize size() const noexcept { return static_cast<StaggerSize>(x[0]); }
  [[nodiscard]] StaggerColor color() const noexcept { return static_cast<StaggerColor>(x[1]); }
  [[nodiscard]] StaggerShape shape() const noexcept { return static_cast<StaggerShape>(x[2]); }
};

inline constexpr std::array<std::size_t, 3> kStaggerCardinalities{3, 3, 3};

/// Concepts: 1 = small and red, 2 = green or circle, 3 = medium or large.
inline bool stagger_label(int concept_id, const std::array<std::uint8_t, 3>& x) {
  const auto size = static_cast<StaggerSize>(x[0]);
  const auto color = static_cast<StaggerColor>(x[1]);
  const auto shape = static_cast<StaggerShape>(x[2]);
  switch (concept_id) {
    case 1:
      return size == StaggerSize::Small && color == StaggerColor::Red;
    case 2:
      return color == StaggerColor::Green || shape == StaggerShape::Circle;
    case 3:
      return size == StaggerSize::Medium || size == StaggerSize::Large;
    default:
      throw std::invalid_argument("STAGGER concept must be 1, 2 or 3");
  }
}

struct StaggerStream {
  std::vector<StaggerInstance> instances;
  GroundTruth truth;
};

/// Uniform i.i.d. attributes labelled by the scheduled concept; every
/// schedule boundary is a sudden drift.
inline StaggerStream stagger_stream(const std::vector<std::pair<int, std::size_t>>& schedule, std::uint64_t seed) {
  if (schedule.empty()) throw std::invalid_argument("STAGGER schedule must not be empty");
  std::size_t total = 0;
  for (const auto& [concept_id, len] : schedule) {
    if (concept_id < 1 || concept_id > 3) throw std::invalid_argument("STAGGER concept must be 1, 2 or 3");
    if (len == 0) throw std::invalid_argument("STAGGER segment lengths must be positive");
    total += len;
  }
  StaggerStream out;
  out.instances.reserve(total);
  Rng rng(seed);
  std::size_t pos = 0;
  for (std::size_t s = 0; s < schedule.size(); ++s) {
    if (s > 0) out.truth.positions.push_back(pos);
    const auto [concept_id, len] = schedule[s];
    for (std::size_t i = 0; i < len; ++i) {
      StaggerInstance inst;
      for (auto& a : inst.x) a = static_cast<std::uint8_t>(rng.index(3));
      inst.label = stagger_label(concept_id, inst.x) ? 1 : 0;
      out.instances.push_back(inst);
    }
    pos += len;
  }
  return out;
}

/// Concepts 1, 2, 3, 1, 2, ... with `segment` instances each.
inline std::vector<std::pair<int, std::size_t>> stagger_rotating_schedule(std::size_t segments, std::size_t segment) {
  std::vector<std::pair<int, std::size_t>> s;
  for (std::size_t i = 0; i < segments; ++i) s.emplace_back(static_cast<int>(i % 3) + 1, segment);
  return s;
}

}  // namespace optwin
