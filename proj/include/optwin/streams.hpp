#pragma once

// Synthetic drift streams: piecewise-stationary segments joined by sudden or
// gradual (linear ramp) transitions.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "optwin/random.hpp"

namespace optwin {

struct Distribution {
  enum class Kind { Bernoulli, Gaussian, UniformSet };

  Kind kind = Kind::Bernoulli;
  double p = 0.5;
  double mean = 0.0;
  double sd = 1.0;
  std::vector<double> values;

  static Distribution bernoulli(double p) { return {Kind::Bernoulli, p, 0.0, 1.0, {}}; }
  static Distribution gaussian(double mean, double sd) { return {Kind::Gaussian, 0.5, mean, sd, {}}; }
  static Distribution uniform_set(std::vector<double> v) {
    return {Kind::UniformSet, 0.5, 0.0, 1.0, std::move(v)};
  }

  double sample(Rng& rng) const {
    switch (kind) {
      case Kind::Bernoulli:
        return rng.bernoulli(p) ? 1.0 : 0.0;
      case Kind::Gaussian:
        return rng.normal(mean, sd);
      case Kind::UniformSet:
        return values[rng.index(values.size())];
    }
    return 0.0;
  }

  /// True if every draw is 0 or 1.
  [[nodiscard]] bool binary() const {
    if (kind == Kind::Bernoulli) return true;
    if (kind == Kind::Gaussian) return false;
    for (double v : values) {
      if (v != 0.0 && v != 1.0) return false;
    }
    return true;
  }

  void validate() const {
    switch (kind) {
      case Kind::Bernoulli:
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("bernoulli p must lie in [0, 1]");
        break;
      case Kind::Gaussian:
        if (!(sd >= 0.0)) throw std::invalid_argument("gaussian sd must be non-negative");
        break;
      case Kind::UniformSet:
        if (values.empty()) throw std::invalid_argument("uniform set must not be empty");
        break;
    }
  }
};

struct Transition {
  enum class Kind { Sudden, Gradual };
  Kind kind = Kind::Sudden;
  std::size_t width = 0;

  static Transition sudden() { return {}; }
  static Transition gradual(std::size_t width) { return {Kind::Gradual, width}; }
};

struct Segment {
  Distribution dist;
  std::size_t length = 0;
};

/// Declarative stream description. transitions[i] joins segments i and i + 1.
struct StreamSpec {
  std::vector<Segment> segments;
  std::vector<Transition> transitions;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t total_length() const {
    std::size_t n = 0;
    for (const auto& s : segments) n += s.length;
    return n;
  }

  [[nodiscard]] bool binary() const {
    for (const auto& s : segments) {
      if (!s.dist.binary()) return false;
    }
    return true;
  }

  /// Widest gradual transition (0 if all are sudden).
  [[nodiscard]] std::size_t max_gradual_width() const {
    std::size_t w = 0;
    for (const auto& t : transitions) {
      if (t.kind == Transition::Kind::Gradual) w = std::max(w, t.width);
    }
    return w;
  }

  void validate() const {
    if (segments.empty()) throw std::invalid_argument("stream spec needs at least one segment");
    for (const auto& s : segments) {
      if (s.length == 0) throw std::invalid_argument("segment lengths must be positive");
      s.dist.validate();
    }
    if (transitions.size() + 1 != segments.size()) {
      throw std::invalid_argument("stream spec needs one transition per segment boundary");
    }
    for (std::size_t i = 0; i < transitions.size(); ++i) {
      const auto& t = transitions[i];
      if (t.kind != Transition::Kind::Gradual) continue;
      if (t.width == 0) throw std::invalid_argument("gradual width must be positive");
      if (t.width >= std::min(segments[i].length, segments[i + 1].length)) {
        throw std::invalid_argument("gradual width must be below both adjacent segment lengths");
      }
    }
  }
};

/// Start index of each new concept (start of the ramp for gradual transitions).
struct GroundTruth {
  std::vector<std::size_t> positions;
};

struct GeneratedStream {
  std::vector<double> values;
  GroundTruth truth;
  /// Segment whose distribution produced each value.
  std::vector<std::uint32_t> source;
};

/// Draws the stream described by `spec`. Inside a gradual transition of width
/// w starting at b, element b + j comes from the new segment with probability
/// (j + 0.5) / w.
inline GeneratedStream generate(const StreamSpec& spec) {
  spec.validate();
  GeneratedStream out;
  const std::size_t n = spec.total_length();
  out.values.reserve(n);
  out.source.reserve(n);
  Rng rng(spec.seed);
  std::size_t start = 0;
  for (std::size_t s = 0; s < spec.segments.size(); ++s) {
    const auto& seg = spec.segments[s];
    std::size_t ramp = 0;
    if (s > 0) {
      out.truth.positions.push_back(start);
      const auto& t = spec.transitions[s - 1];
      if (t.kind == Transition::Kind::Gradual) ramp = t.width;
    }
    for (std::size_t j = 0; j < seg.length; ++j) {
      std::size_t from = s;
      if (j < ramp) {
        const double p_new = (static_cast<double>(j) + 0.5) / static_cast<double>(ramp);
        if (!rng.bernoulli(p_new)) from = s - 1;
      }
      out.values.push_back(spec.segments[from].dist.sample(rng));
      out.source.push_back(static_cast<std::uint32_t>(from));
    }
    start += seg.length;
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON form:
//   {"seed": 7,
//    "segments": [{"dist": "bernoulli", "p": 0.2, "len": 20000},
//                 {"dist": "gaussian", "mean": 0.5, "sd": 0.05, "len": 20000},
//                 {"dist": "uniform_set", "values": [0, 1], "len": 100}],
//    "transitions": ["sudden", {"type": "gradual", "width": 1000}]}
// A single transition entry applies to every boundary; omitted means sudden.

inline Distribution distribution_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("dist").get<std::string>();
  if (kind == "bernoulli") return Distribution::bernoulli(j.at("p").get<double>());
  if (kind == "gaussian") {
    return Distribution::gaussian(j.at("mean").get<double>(), j.at("sd").get<double>());
  }
  if (kind == "uniform_set") return Distribution::uniform_set(j.at("values").get<std::vector<double>>());
  throw std::invalid_argument("unknown distribution '" + kind + "'");
}

inline Transition transition_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "sudden") return Transition::sudden();
    throw std::invalid_argument("unknown transition '" + s + "'");
  }
  const std::string type = j.at("type").get<std::string>();
  if (type == "sudden") return Transition::sudden();
  if (type == "gradual") return Transition::gradual(j.at("width").get<std::size_t>());
  throw std::invalid_argument("unknown transition '" + type + "'");
}

inline StreamSpec stream_spec_from_json(const nlohmann::json& j) {
  StreamSpec spec;
  spec.seed = j.value("seed", std::uint64_t{0});
  for (const auto& s : j.at("segments")) {
    spec.segments.push_back({distribution_from_json(s), s.at("len").get<std::size_t>()});
  }
  const std::size_t boundaries = spec.segments.empty() ? 0 : spec.segments.size() - 1;
  if (j.contains("transitions")) {
    const auto& t = j.at("transitions");
    if (!t.is_array()) throw std::invalid_argument("transitions must be an array");
    if (t.size() == 1) {
      spec.transitions.assign(boundaries, transition_from_json(t[0]));
    } else {
      for (const auto& e : t) spec.transitions.push_back(transition_from_json(e));
    }
  } else {
    spec.transitions.assign(boundaries, Transition::sudden());
  }
  spec.validate();
  return spec;
}

}  // namespace optwin
