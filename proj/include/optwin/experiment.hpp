#pragma once

// Experiment runner behind `optwin run`.
//
// Config (JSON):
//   {"seeds": 30, "seed_base": 1, "output": "report.csv",
//    "trace_dir": "traces",                      (optional)
//    "accuracy_output": "accuracy.csv",          (optional, prequential runs)
//    "detectors": [{"type": "optwin", "rho": 0.5}, {"type": "ddm"}, ...],
//    "experiments": [
//      {"name": "sudden_binary", "match_window": 1000,
//       "stream": {"type": "synthetic", "segments": [...], "transitions": ["sudden"]}},
//      {"name": "stagger", "stream": {"type": "stagger", "segments": 5, "segment_length": 20000,
//                                     "reset_policy": "reset"}},
//      {"name": "errors", "stream": {"type": "csv", "path": "e.csv", "column": "0",
//                                    "truth": [20000]}}]}
//
// Detector types: optwin (delta, rho, w_max, w_min, one_sided, keep_new_window,
// table), adwin (delta), ddm, eddm, stepd (window), ecdd (lambda, arl0), none.
// Run i of experiment e draws its stream from Rng::derive(Rng::derive(seed_base, e).next(), i),
// so every detector sees the same streams.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "optwin/baselines/adwin.hpp"
#include "optwin/baselines/ddm.hpp"
#include "optwin/baselines/ecdd.hpp"
#include "optwin/baselines/eddm.hpp"
#include "optwin/baselines/stepd.hpp"
#include "optwin/csv_stream.hpp"
#include "optwin/eval.hpp"
#include "optwin/optwin.hpp"
#include "optwin/prequential.hpp"
#include "optwin/stagger.hpp"
#include "optwin/streams.hpp"

namespace optwin {

/// Invalid configuration (maps to exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Detector that never fires; stands in for "no detector".
class NullDetector final : public Detector {
 public:
  Detection add(double) override { return Detection::none(); }
  void reset() override {}
  [[nodiscard]] std::string name() const override { return "none"; }
};

struct DetectorSpec {
  std::string type;
  std::string label;  ///< report column value
  OptwinConfig optwin;
  std::optional<std::string> table_path;
  AdwinConfig adwin;
  StepdConfig stepd;
  EcddConfig ecdd;

  [[nodiscard]] bool binary_only() const {
    return type == "ddm" || type == "eddm" || type == "stepd" || type == "ecdd";
  }
};

struct StreamSource {
  enum class Kind { Synthetic, Stagger, Csv };
  Kind kind = Kind::Synthetic;
  StreamSpec synthetic;
  std::vector<std::pair<int, std::size_t>> schedule;
  ResetPolicy policy = ResetPolicy::ResetOnDrift;
  std::string csv_path;
  std::string csv_column = "0";
  std::vector<std::size_t> csv_truth;
};

struct ExperimentSpec {
  std::string name;
  StreamSource stream;
  MatchConfig match;
};

struct ExperimentConfig {
  std::vector<ExperimentSpec> experiments;
  std::vector<DetectorSpec> detectors;
  std::size_t seeds = 1;
  std::uint64_t seed_base = 0;
  std::string output = "report.csv";
  std::optional<std::string> trace_dir;
  std::optional<std::string> accuracy_output;
};

namespace detail {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

inline std::string number_label(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

inline DetectorSpec parse_detector(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type")) throw ConfigError("each detector needs a 'type'");
  DetectorSpec d;
  d.type = get_or<std::string>(j, "type", "");
  if (d.type == "optwin") {
    d.optwin.delta = get_or(j, "delta", d.optwin.delta);
    d.optwin.rho = get_or(j, "rho", d.optwin.rho);
    d.optwin.w_max = get_or(j, "w_max", d.optwin.w_max);
    d.optwin.w_min = get_or(j, "w_min", d.optwin.w_min);
    d.optwin.one_sided = get_or(j, "one_sided", d.optwin.one_sided);
    d.optwin.keep_new_window_on_reset = get_or(j, "keep_new_window", d.optwin.keep_new_window_on_reset);
    if (j.contains("table")) d.table_path = get_or<std::string>(j, "table", "");
    try {
      d.optwin.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("optwin: ") + e.what());
    }
    d.label = "OPTWIN_rho" + number_label(d.optwin.rho);
  } else if (d.type == "adwin") {
    d.adwin.delta = get_or(j, "delta", d.adwin.delta);
    if (!(d.adwin.delta > 0.0 && d.adwin.delta < 1.0)) throw ConfigError("adwin: delta must lie in (0, 1)");
    d.label = "ADWIN";
  } else if (d.type == "ddm") {
    d.label = "DDM";
  } else if (d.type == "eddm") {
    d.label = "EDDM";
  } else if (d.type == "stepd") {
    d.stepd.window = get_or(j, "window", d.stepd.window);
    if (d.stepd.window == 0) throw ConfigError("stepd: window must be positive");
    d.label = "STEPD";
  } else if (d.type == "ecdd") {
    d.ecdd.lambda = get_or(j, "lambda", d.ecdd.lambda);
    d.ecdd.arl0 = get_or(j, "arl0", d.ecdd.arl0);
    if (!EcddGrid::builtin().supports(d.ecdd.lambda, d.ecdd.arl0)) {
      throw ConfigError("ecdd: no calibrated control limit for this lambda / arl0");
    }
    d.label = "ECDD";
  } else if (d.type == "none") {
    d.label = "none";
  } else {
    throw ConfigError("unknown detector type '" + d.type + "'");
  }
  d.label = get_or<std::string>(j, "name", d.label);
  return d;
}

inline StreamSource parse_stream(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("'stream' must be an object");
  StreamSource s;
  const std::string type = get_or<std::string>(j, "type", "synthetic");
  if (type == "synthetic") {
    s.kind = StreamSource::Kind::Synthetic;
    try {
      s.synthetic = stream_spec_from_json(j);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("stream: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("stream: ") + e.what());
    }
  } else if (type == "stagger") {
    s.kind = StreamSource::Kind::Stagger;
    if (j.contains("schedule")) {
      try {
        for (const auto& e : j.at("schedule")) s.schedule.emplace_back(e.at(0).get<int>(), e.at(1).get<std::size_t>());
      } catch (const nlohmann::json::exception&) {
        throw ConfigError("stagger: schedule entries must be [concept, length]");
      }
    } else {
      s.schedule = stagger_rotating_schedule(get_or<std::size_t>(j, "segments", 5),
                                             get_or<std::size_t>(j, "segment_length", 20000));
    }
    if (s.schedule.empty()) throw ConfigError("stagger: empty schedule");
    for (const auto& [c, len] : s.schedule) {
      if (c < 1 || c > 3 || len == 0) throw ConfigError("stagger: concepts are 1..3 with positive lengths");
    }
    try {
      s.policy = reset_policy_from_string(get_or<std::string>(j, "reset_policy", "reset"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("stagger: ") + e.what());
    }
  } else if (type == "csv") {
    s.kind = StreamSource::Kind::Csv;
    if (!j.contains("path")) throw ConfigError("csv: 'path' is required");
    s.csv_path = get_or<std::string>(j, "path", "");
    if (j.contains("column")) {
      const auto& c = j.at("column");
      s.csv_column = c.is_number_unsigned() ? std::to_string(c.get<std::size_t>()) : get_or<std::string>(j, "column", "0");
    }
    s.csv_truth = get_or(j, "truth", std::vector<std::size_t>{});
    if (!std::is_sorted(s.csv_truth.begin(), s.csv_truth.end())) throw ConfigError("csv: truth must be sorted");
  } else {
    throw ConfigError("unknown stream type '" + type + "'");
  }
  return s;
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  if (j.contains("seeds")) {
    const auto& s = j.at("seeds");
    if (!s.is_number_integer() || s.get<long long>() < 1) throw ConfigError("'seeds' must be a positive integer");
    cfg.seeds = s.get<std::size_t>();
  }
  cfg.seed_base = detail::get_or<std::uint64_t>(j, "seed_base", 0);
  cfg.output = detail::get_or<std::string>(j, "output", cfg.output);
  if (j.contains("trace_dir")) cfg.trace_dir = detail::get_or<std::string>(j, "trace_dir", "");
  if (j.contains("accuracy_output")) cfg.accuracy_output = detail::get_or<std::string>(j, "accuracy_output", "");

  if (!j.contains("detectors") || !j.at("detectors").is_array() || j.at("detectors").empty()) {
    throw ConfigError("'detectors' must be a non-empty array");
  }
  for (const auto& d : j.at("detectors")) cfg.detectors.push_back(detail::parse_detector(d));
  {
    std::vector<std::string> labels;
    for (const auto& d : cfg.detectors) labels.push_back(d.label);
    std::sort(labels.begin(), labels.end());
    if (std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
      throw ConfigError("detector names must be unique (use 'name' to disambiguate)");
    }
  }

  if (!j.contains("experiments") || !j.at("experiments").is_array() || j.at("experiments").empty()) {
    throw ConfigError("'experiments' must be a non-empty array");
  }
  for (const auto& e : j.at("experiments")) {
    ExperimentSpec x;
    x.name = detail::get_or<std::string>(e, "name", "");
    if (x.name.empty()) throw ConfigError("each experiment needs a 'name'");
    if (!e.contains("stream")) throw ConfigError("experiment '" + x.name + "' needs a 'stream'");
    x.stream = detail::parse_stream(e.at("stream"));
    std::size_t width = 0;
    if (x.stream.kind == StreamSource::Kind::Synthetic) width = x.stream.synthetic.max_gradual_width();
    x.match.window = detail::get_or<std::size_t>(e, "match_window", 1000 + width);
    if (x.match.window == 0) throw ConfigError("match_window must be positive");
    const bool binary = x.stream.kind != StreamSource::Kind::Synthetic || x.stream.synthetic.binary();
    for (const auto& d : cfg.detectors) {
      if (d.binary_only() && !binary && x.stream.kind == StreamSource::Kind::Synthetic) {
        throw ConfigError("detector " + d.label + " needs a binary stream but experiment '" + x.name +
                          "' is not binary");
      }
    }
    cfg.experiments.push_back(std::move(x));
  }
  {
    std::vector<std::string> names;
    for (const auto& e : cfg.experiments) names.push_back(e.name);
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
      throw ConfigError("experiment names must be unique");
    }
  }
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_experiment_config(j);
}

/// Outcome of one (experiment, detector, seed) cell.
struct CellResult {
  EvalReport report;
  std::size_t correct = 0;
  std::size_t instances = 0;
  std::vector<std::pair<std::size_t, Verdict>> events;
};

struct RunOutput {
  std::map<ReportKey, EvalReport> reports;
  std::map<ReportKey, double> accuracy;  ///< prequential experiments only
  std::map<std::tuple<std::string, std::string, std::size_t>, std::vector<std::pair<std::size_t, Verdict>>> traces;
};

/// Builds each distinct OPTWIN table once and shares it between cells.
class TableCache {
 public:
  std::shared_ptr<const CutTable> get(const DetectorSpec& d) {
    std::ostringstream key;
    key.precision(17);
    key << d.optwin.delta << '|' << d.optwin.rho << '|' << d.optwin.w_min << '|' << d.optwin.w_max << '|'
        << d.table_path.value_or("");
    std::lock_guard lock(mu_);
    auto& slot = tables_[key.str()];
    if (!slot) {
      if (d.table_path) {
        auto t = std::make_shared<const CutTable>(CutTable::load(*d.table_path));
        if (!t->matches(d.optwin)) throw ConfigError("table '" + *d.table_path + "' does not match detector config");
        slot = t;
      } else {
        slot = std::make_shared<const CutTable>(CutTable::build(d.optwin));
      }
    }
    return slot;
  }

 private:
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<const CutTable>> tables_;
};

inline std::unique_ptr<Detector> make_detector(const DetectorSpec& d, TableCache& tables) {
  if (d.type == "optwin") return std::make_unique<OptwinDetector>(d.optwin, tables.get(d));
  if (d.type == "adwin") return std::make_unique<AdwinDetector>(d.adwin);
  if (d.type == "ddm") return std::make_unique<DdmDetector>();
  if (d.type == "eddm") return std::make_unique<EddmDetector>();
  if (d.type == "stepd") return std::make_unique<StepdDetector>(d.stepd);
  if (d.type == "ecdd") return std::make_unique<EcddDetector>(d.ecdd);
  return std::make_unique<NullDetector>();
}

inline std::uint64_t run_seed(std::uint64_t seed_base, std::size_t experiment, std::size_t run) {
  return Rng::derive(Rng::derive(seed_base, experiment).next(), run).next();
}

inline CellResult run_cell(const ExperimentSpec& e, std::size_t experiment_index, const DetectorSpec& d,
                           std::size_t run, std::uint64_t seed_base, TableCache& tables) {
  CellResult out;
  auto det = make_detector(d, tables);
  const std::uint64_t seed = run_seed(seed_base, experiment_index, run);
  std::vector<std::size_t> drifts;
  std::vector<std::size_t> truth;
  auto feed = [&](std::size_t i, double x) {
    const Detection v = det->add(x);
    if (v.verdict != Verdict::NoChange) out.events.emplace_back(i, v.verdict);
    if (v.is_drift()) drifts.push_back(i);
  };
  switch (e.stream.kind) {
    case StreamSource::Kind::Synthetic: {
      StreamSpec spec = e.stream.synthetic;
      spec.seed = seed;
      const GeneratedStream s = generate(spec);
      truth = s.truth.positions;
      for (std::size_t i = 0; i < s.values.size(); ++i) feed(i, s.values[i]);
      break;
    }
    case StreamSource::Kind::Stagger: {
      const StaggerStream s = stagger_stream(e.stream.schedule, seed);
      truth = s.truth.positions;
      NaiveBayes nb(std::vector<std::size_t>(kStaggerCardinalities.begin(), kStaggerCardinalities.end()), 2);
      Detector* dp = d.type == "none" ? nullptr : det.get();
      const auto r = prequential_run<StaggerInstance>(s.instances, nb, dp, e.stream.policy);
      drifts = r.drifts;
      for (std::size_t i : r.drifts) out.events.emplace_back(i, Verdict::Drift);
      for (std::size_t i : r.warnings) out.events.emplace_back(i, Verdict::Warning);
      std::sort(out.events.begin(), out.events.end());
      out.correct = r.correct;
      out.instances = r.errors.size();
      break;
    }
    case StreamSource::Kind::Csv: {
      truth = e.stream.csv_truth;
      CsvStreamReader reader(e.stream.csv_path, e.stream.csv_column);
      std::size_t i = 0;
      while (auto v = reader.next()) {
        if (d.binary_only() && *v != 0.0 && *v != 1.0) {
          throw ConfigError("detector " + d.label + " needs 0/1 values; '" + e.stream.csv_path + "' line " +
                            std::to_string(reader.line()) + " is not binary");
        }
        feed(i++, *v);
      }
      break;
    }
  }
  out.report = match_detections(truth, drifts, e.match);
  return out;
}

/// Runs every (experiment, detector, seed) cell on `jobs` threads. Results
/// are merged in a fixed order, so output does not depend on `jobs`.
inline RunOutput run_experiments(const ExperimentConfig& cfg, std::size_t jobs = 1) {
  struct Cell {
    std::size_t e, d, run;
  };
  std::vector<Cell> cells;
  for (std::size_t e = 0; e < cfg.experiments.size(); ++e) {
    // CSV streams are fixed data; one pass per detector.
    const std::size_t runs = cfg.experiments[e].stream.kind == StreamSource::Kind::Csv ? 1 : cfg.seeds;
    for (std::size_t d = 0; d < cfg.detectors.size(); ++d) {
      for (std::size_t r = 0; r < runs; ++r) cells.push_back({e, d, r});
    }
  }
  std::vector<CellResult> results(cells.size());
  TableCache tables;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        const Cell& c = cells[i];
        results[i] = run_cell(cfg.experiments[c.e], c.e, cfg.detectors[c.d], c.run, cfg.seed_base, tables);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(cells.size());
      }
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, cells.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  RunOutput out;
  std::map<ReportKey, std::vector<EvalReport>> grouped;
  std::map<ReportKey, std::pair<std::size_t, std::size_t>> acc;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    const ExperimentSpec& e = cfg.experiments[c.e];
    const ReportKey key{e.name, cfg.detectors[c.d].label};
    grouped[key].push_back(results[i].report);
    if (e.stream.kind == StreamSource::Kind::Stagger) {
      acc[key].first += results[i].correct;
      acc[key].second += results[i].instances;
    }
    out.traces[{key.first, key.second, c.run}] = std::move(results[i].events);
  }
  for (const auto& [key, reps] : grouped) out.reports[key] = aggregate(reps);
  for (const auto& [key, ca] : acc) {
    out.accuracy[key] = ca.second == 0 ? 0.0 : static_cast<double>(ca.first) / static_cast<double>(ca.second);
  }
  return out;
}

/// Writes via a sibling temporary file and renames it into place, so a
/// failed write never leaves a partial file at `path`.
inline void write_file_atomically(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    try {
      body(out);
      out.flush();
      if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
    } catch (...) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw;
    }
  }
  std::filesystem::rename(tmp, path);
}

inline void write_accuracy(const std::map<ReportKey, double>& acc, std::ostream& out) {
  out << "experiment,detector,accuracy\n";
  for (const auto& [key, a] : acc) out << key.first << ',' << key.second << ',' << format_number(a) << '\n';
}

}  // namespace optwin
