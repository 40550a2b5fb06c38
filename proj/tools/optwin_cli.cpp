// optwin: command-line front end.
//
//   optwin precompute   --rho 0.1 --out table.bin
//   optwin table-export --table table.bin --out table.csv
//   optwin run          --config exp.json [--out report.csv] [--jobs 4] [--seed-base 7]
//   optwin bench        --detector optwin --n 1000000
//   optwin calibrate-ecdd --out grid.csv [--header grid.hpp]
//
// Exit codes: 0 success, 2 configuration / usage error, 1 runtime error.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "optwin/baselines/ecdd.hpp"
#include "optwin/experiment.hpp"

namespace fs = std::filesystem;
using namespace optwin;

namespace {

struct TableArgs {
  double delta = 0.99;
  double rho = 0.1;
  std::size_t w_max = 25000;
  std::size_t w_min = 30;

  OptwinConfig config() const {
    OptwinConfig c;
    c.delta = delta;
    c.rho = rho;
    c.w_max = w_max;
    c.w_min = w_min;
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    return c;
  }
};

void add_table_options(CLI::App* cmd, TableArgs& a) {
  cmd->add_option("--delta", a.delta, "confidence level")->capture_default_str();
  cmd->add_option("--rho", a.rho, "robustness")->capture_default_str();
  cmd->add_option("--w-max", a.w_max, "maximum window length")->capture_default_str();
  cmd->add_option("--w-min", a.w_min, "minimum window length")->capture_default_str();
}

/// Applies OPTWIN_OUTPUT_DIR, which replaces the directory of `path`.
fs::path output_path(const std::string& path) {
  fs::path p(path);
  if (const char* dir = std::getenv("OPTWIN_OUTPUT_DIR"); dir != nullptr && *dir != '\0') {
    return fs::path(dir) / p.filename();
  }
  return p;
}

int cmd_precompute(const TableArgs& a, const std::string& out) {
  const OptwinConfig cfg = a.config();
  const auto t0 = std::chrono::steady_clock::now();
  const CutTable table = CutTable::build(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::string bytes = table.serialize();
  const fs::path path = output_path(out);
  write_file_atomically(path, [&](std::ostream& os) { os.write(bytes.data(), static_cast<std::streamsize>(bytes.size())); });
  std::cout << "rows " << table.size() << "\n";
  if (table.w_proof() > table.w_max()) {
    std::cout << "w_proof none (every row uses the nu = 0.5 fallback)\n";
  } else {
    std::cout << "w_proof " << table.w_proof() << "\n";
  }
  std::cout << "bytes " << bytes.size() << "\n";
  std::cout << "build_seconds " << secs << "\n";
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

int cmd_table_export(const TableArgs& a, const std::string& table_path, const std::string& out) {
  const CutTable table = table_path.empty() ? CutTable::build(a.config()) : CutTable::load(table_path);
  if (out.empty() || out == "-") {
    table.write_csv(std::cout);
    return 0;
  }
  const fs::path path = output_path(out);
  write_file_atomically(path, [&](std::ostream& os) { table.write_csv(os); });
  std::cerr << "wrote " << path.string() << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out, std::size_t jobs,
            std::optional<std::uint64_t> seed_base) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  if (seed_base) cfg.seed_base = *seed_base;
  if (!out.empty()) cfg.output = out;
  const fs::path report = output_path(cfg.output);
  const RunOutput res = run_experiments(cfg, jobs);

  write_file_atomically(report, [&](std::ostream& os) { write_report(res.reports, os); });
  std::cout << "wrote " << report.string() << "\n";
  if (cfg.accuracy_output && !res.accuracy.empty()) {
    const fs::path acc = output_path(*cfg.accuracy_output);
    write_file_atomically(acc, [&](std::ostream& os) { write_accuracy(res.accuracy, os); });
    std::cout << "wrote " << acc.string() << "\n";
  }
  if (cfg.trace_dir) {
    fs::path dir = *cfg.trace_dir;
    if (const char* env = std::getenv("OPTWIN_OUTPUT_DIR"); env != nullptr && *env != '\0') {
      dir = fs::path(env) / dir.filename();
    }
    for (const auto& [key, events] : res.traces) {
      const auto& [exp, det, run] = key;
      write_file_atomically(dir / (exp + "__" + det + "__" + std::to_string(run) + ".csv"),
                            [&](std::ostream& os) { write_trace(events, os); });
    }
  }
  return 0;
}

std::unique_ptr<Detector> bench_detector(const std::string& name, const TableArgs& a) {
  if (name == "optwin") return std::make_unique<OptwinDetector>(a.config());
  if (name == "adwin") return std::make_unique<AdwinDetector>();
  if (name == "ddm") return std::make_unique<DdmDetector>();
  if (name == "eddm") return std::make_unique<EddmDetector>();
  if (name == "stepd") return std::make_unique<StepdDetector>();
  if (name == "ecdd") return std::make_unique<EcddDetector>();
  throw ConfigError("unknown detector '" + name + "'");
}

struct BenchResult {
  double seconds = 0.0;
  std::size_t drifts = 0;
};

BenchResult time_detector(Detector& det, const std::vector<double>& data) {
  BenchResult r;
  const auto t0 = std::chrono::steady_clock::now();
  for (double x : data) r.drifts += det.add(x).is_drift() ? 1 : 0;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

int cmd_bench(const std::string& name, const TableArgs& a, std::size_t n, const std::string& input,
              std::uint64_t seed_base, std::size_t repeats) {
  if (n < 100000) throw ConfigError("--n must be at least 100000");
  if (input != "bernoulli" && input != "constant") throw ConfigError("--input must be bernoulli or constant");
  // Build the table outside the timed region.
  auto det = bench_detector(name, a);
  Rng rng(seed_base);
  std::vector<double> data(2 * n);
  for (double& x : data) x = input == "constant" ? 0.0 : (rng.bernoulli(0.2) ? 1.0 : 0.0);
  const std::vector<double> first(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(n));

  BenchResult best_n{1e300, 0};
  BenchResult best_2n{1e300, 0};
  for (std::size_t r = 0; r < repeats; ++r) {
    det->reset();
    const auto rn = time_detector(*det, first);
    if (rn.seconds < best_n.seconds) best_n = rn;
    det->reset();
    const auto r2 = time_detector(*det, data);
    if (r2.seconds < best_2n.seconds) best_2n = r2;
  }
  std::printf("detector %s\n", det->name().c_str());
  std::printf("n %zu seconds %.6f ns_per_element %.2f drifts %zu\n", n, best_n.seconds,
              1e9 * best_n.seconds / static_cast<double>(n), best_n.drifts);
  std::printf("n %zu seconds %.6f ns_per_element %.2f drifts %zu\n", 2 * n, best_2n.seconds,
              1e9 * best_2n.seconds / static_cast<double>(2 * n), best_2n.drifts);
  std::printf("ratio %.4f\n", best_2n.seconds / best_n.seconds);
  return 0;
}

int cmd_calibrate_ecdd(const std::string& out, const std::string& header, std::uint64_t seed_base, double runs) {
  std::vector<EcddGridPoint> pts;
  const double lambda = 0.2;
  std::size_t id = 0;
  for (double arl0 : {100.0, 400.0, 1000.0}) {
    for (int i = 1; i <= 10; ++i) {
      const double p = 0.05 * i;
      const auto c = calibrate_ecdd_limit(p, lambda, arl0, Rng::derive(seed_base, id++).next(), runs);
      std::fprintf(stderr, "p_hat %.2f arl0 %.0f L %.5f observed %.1f\n", p, arl0, c.limit, c.run_length);
      pts.push_back({p, lambda, arl0, c.limit});
    }
  }
  const EcddGrid grid(pts);
  write_file_atomically(output_path(out), [&](std::ostream& os) { grid.write_csv(os); });
  if (!header.empty()) {
    write_file_atomically(header, [&](std::ostream& os) {
      os << "#pragma once\n\n// Generated by `optwin calibrate-ecdd`; rows are {p_hat, lambda, arl0, L}.\n\n"
         << "namespace optwin::ecdd_data {\n\ninline constexpr double kGrid[][4] = {\n";
      char buf[128];
      for (const auto& p : grid.points()) {
        std::snprintf(buf, sizeof buf, "    {%.2f, %.2f, %.0f, %.6f},\n", p.p_hat, p.lambda, p.arl0, p.limit);
        os << buf;
      }
      os << "};\n\n}  // namespace optwin::ecdd_data\n";
    });
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OPTWIN concept drift detection toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out;
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed_base;
  app.add_option("--config", config_path, "experiment config (JSON)");
  app.add_option("--out", out, "output path");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed-base", seed_base, "base seed");
  app.fallthrough();

  TableArgs table_args;
  auto* pre = app.add_subcommand("precompute", "build and serialize a cut table");
  add_table_options(pre, table_args);

  auto* exp = app.add_subcommand("table-export", "write a cut table as CSV");
  std::string table_path;
  exp->add_option("--table", table_path, "serialized table (built from the options if absent)");
  add_table_options(exp, table_args);

  auto* run = app.add_subcommand("run", "run experiments and write a report");

  auto* bench = app.add_subcommand("bench", "time a detector on n and 2n elements");
  std::string bench_name = "optwin";
  std::size_t bench_n = 1000000;
  std::string bench_input = "bernoulli";
  std::size_t repeats = 3;
  bench->add_option("--detector", bench_name, "optwin|adwin|ddm|eddm|stepd|ecdd")->capture_default_str();
  bench->add_option("--n", bench_n, "elements (>= 100000)")->capture_default_str();
  bench->add_option("--input", bench_input, "bernoulli|constant")->capture_default_str();
  bench->add_option("--repeats", repeats, "timing repeats (minimum is kept)")->capture_default_str();
  add_table_options(bench, table_args);

  auto* cal = app.add_subcommand("calibrate-ecdd", "Monte Carlo calibration of the ECDD control limits");
  std::string header;
  double runs = 4000.0;
  cal->add_option("--header", header, "also write a C++ header with the grid");
  cal->add_option("--runs", runs, "expected alarms per evaluation")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*pre) {
      if (out.empty()) throw ConfigError("precompute needs --out");
      return cmd_precompute(table_args, out);
    }
    if (*exp) return cmd_table_export(table_args, table_path, out);
    if (*run) {
      if (config_path.empty()) throw ConfigError("run needs --config");
      return cmd_run(config_path, out, jobs, seed_base);
    }
    if (*bench) return cmd_bench(bench_name, table_args, bench_n, bench_input, seed_base.value_or(0), repeats);
    if (*cal) {
      if (out.empty()) throw ConfigError("calibrate-ecdd needs --out");
      return cmd_calibrate_ecdd(out, header, seed_base.value_or(11), runs);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
