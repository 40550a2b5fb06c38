#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "optwin/detection.hpp"

namespace optwin {

struct MatchConfig {
  std::size_t window = 1000;  ///< D: a detection in [g, g + D] can match truth g
};

struct EvalReport {
  std::size_t runs = 1;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::vector<std::size_t> delays;

  [[nodiscard]] double precision() const noexcept {
    return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  [[nodiscard]] double recall() const noexcept {
    return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  [[nodiscard]] double f1() const noexcept {
    const double p = precision();
    const double r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
  [[nodiscard]] double mean_delay() const noexcept {
    if (delays.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t d : delays) s += static_cast<double>(d);
    return s / static_cast<double>(delays.size());
  }
  [[nodiscard]] double fp_per_run() const noexcept {
    return runs == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(runs);
  }
};

/// Greedy one-to-one matching: each truth g takes the earliest unmatched
/// detection in [g, g + D].
inline EvalReport match_detections(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& detections,
                                   const MatchConfig& cfg = {}) {
  if (cfg.window == 0) throw std::invalid_argument("match window must be positive");
  if (!std::is_sorted(truth.begin(), truth.end()) || !std::is_sorted(detections.begin(), detections.end())) {
    throw std::invalid_argument("truth and detections must be sorted ascending");
  }
  EvalReport r;
  std::vector<bool> used(detections.size(), false);
  std::size_t start = 0;
  for (std::size_t g : truth) {
    while (start < detections.size() && (used[start] || detections[start] < g)) ++start;
    bool matched = false;
    for (std::size_t j = start; j < detections.size() && detections[j] <= g + cfg.window; ++j) {
      if (used[j]) continue;
      used[j] = true;
      r.delays.push_back(detections[j] - g);
      matched = true;
      break;
    }
    if (matched) {
      ++r.tp;
    } else {
      ++r.fn;
    }
  }
  r.fp = detections.size() - r.tp;
  return r;
}

/// Micro-average: counts and delays are pooled.
inline EvalReport aggregate(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("aggregate needs at least one report");
  EvalReport out;
  out.runs = 0;
  for (const auto& r : reports) {
    out.runs += r.runs;
    out.tp += r.tp;
    out.fp += r.fp;
    out.fn += r.fn;
    out.delays.insert(out.delays.end(), r.delays.begin(), r.delays.end());
  }
  return out;
}

using ReportKey = std::pair<std::string, std::string>;  // (experiment, detector)

inline std::string format_number(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

/// CSV `experiment,detector,delay,fp_per_run,precision,recall,f1`, sorted by key.
inline void write_report(const std::map<ReportKey, EvalReport>& reports, std::ostream& out) {
  out << "experiment,detector,delay,fp_per_run,precision,recall,f1\n";
  for (const auto& [key, r] : reports) {
    out << key.first << ',' << key.second << ',' << format_number(r.mean_delay()) << ','
        << format_number(r.fp_per_run()) << ',' << format_number(r.precision()) << ','
        << format_number(r.recall()) << ',' << format_number(r.f1()) << '\n';
  }
}

/// Per-run trace `step,verdict` listing every non-NoChange step.
inline void write_trace(const std::vector<std::pair<std::size_t, Verdict>>& events, std::ostream& out) {
  out << "step,verdict\n";
  for (const auto& [step, v] : events) out << step << ',' << to_string(v) << '\n';
}

}  // namespace optwin
