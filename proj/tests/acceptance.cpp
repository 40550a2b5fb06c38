// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Each criterion also has a wall-clock limit.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "optwin/experiment.hpp"

using namespace optwin;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::shared_ptr<const CutTable> table_for(double rho) {
  OptwinConfig c;
  c.rho = rho;
  return std::make_shared<const CutTable>(CutTable::build(c));
}

OptwinConfig config_for(double rho) {
  OptwinConfig c;
  c.rho = rho;
  return c;
}

std::vector<double> sudden_stream(Distribution a, Distribution b, std::size_t n1, std::size_t n2, std::uint64_t seed,
                                  std::vector<std::size_t>* truth = nullptr) {
  StreamSpec s;
  s.segments = {{std::move(a), n1}, {std::move(b), n2}};
  s.transitions = {Transition::sudden()};
  s.seed = seed;
  auto g = generate(s);
  if (truth != nullptr) *truth = g.truth.positions;
  return std::move(g.values);
}

EvalReport score_optwin(double rho, const std::shared_ptr<const CutTable>& table, Distribution a, Distribution b,
                        std::uint64_t seed_id) {
  std::vector<EvalReport> reps;
  for (std::uint64_t s = 0; s < 30; ++s) {
    std::vector<std::size_t> truth;
    const auto v = sudden_stream(a, b, 20000, 20000, Rng::derive(seed_id, s).next(), &truth);
    OptwinDetector d(config_for(rho), table);
    std::vector<std::size_t> det;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (d.add(v[i]).is_drift()) det.push_back(i);
    }
    reps.push_back(match_detections(truth, det, {1000}));
  }
  return aggregate(reps);
}

// 1 -----------------------------------------------------------------------
Outcome quantiles() {
  double worst_t = 0.0, worst_f = 0.0;
  const double conf[10] = {0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99, 0.9975};
  for (int i = 0; i < 10; ++i) {
    for (int k = 0; k < 20; ++k) {
      const double df = std::pow(10.0, 4.0 * k / 19.0);
      const double d2 = std::pow(10.0, 4.0 * ((k * 7) % 20) / 19.0);
      worst_t = std::max(worst_t, std::fabs(oracle::t_cdf(stats::t_ppf(conf[i], df), df) - conf[i]));
      worst_f = std::max(worst_f, std::fabs(oracle::f_cdf(stats::f_ppf(conf[i], df, d2), df, d2) - conf[i]));
    }
  }
  const double t = stats::t_ppf(0.975, 10.0);
  const double f = stats::f_ppf(0.95, 10.0, 10.0);
  const bool ok = worst_t <= 1e-8 && worst_f <= 1e-8 && std::fabs(t - 2.228139) <= 1e-5 && std::fabs(f - 2.978237) <= 1e-5;
  return {ok, fmt("200 t and 200 F points, max |CDF - c| t %.2e F %.2e (tol 1e-8); t_ppf(0.975,10)=%.6f f_ppf(0.95,10,10)=%.6f",
                  worst_t, worst_f, t, f)};
}

// 2 -----------------------------------------------------------------------
Outcome fp_bound() {
  bool ok = true;
  std::string detail = "mean flags per run (limit 0.5):";
  for (double rho : {0.1, 0.5, 1.0}) {
    const auto table = table_for(rho);
    std::size_t flags = 0;
    for (std::uint64_t s = 0; s < 30; ++s) {
      OptwinDetector d(config_for(rho), table);
      Rng rng = Rng::derive(2, s);
      for (int i = 0; i < 10000; ++i) flags += d.add(rng.bernoulli(0.2) ? 1.0 : 0.0).is_drift() ? 1 : 0;
    }
    const double per_run = static_cast<double>(flags) / 30.0;
    ok = ok && per_run <= 0.5;
    detail += fmt(" rho=%.1f %.3f", rho, per_run);
  }
  return {ok, detail};
}

// 3 -----------------------------------------------------------------------
Outcome sudden_binary() {
  const auto r = score_optwin(0.5, table_for(0.5), Distribution::bernoulli(0.2), Distribution::bernoulli(0.5), 3);
  const bool ok = r.recall() == 1.0 && r.fp_per_run() <= 0.2 && r.mean_delay() <= 150.0;
  return {ok, fmt("rho=0.5 recall %.3f (need 1), FP/run %.3f (limit 0.2), mean delay %.1f (limit 150)", r.recall(),
                  r.fp_per_run(), r.mean_delay())};
}

// 4 -----------------------------------------------------------------------
Outcome sudden_gaussian() {
  bool ok = true;
  std::string detail;
  for (double rho : {0.1, 0.5, 1.0}) {
    const auto r = score_optwin(rho, table_for(rho), Distribution::gaussian(0.2, 0.05), Distribution::gaussian(0.5, 0.05), 4);
    ok = ok && r.recall() == 1.0 && r.fp == 0 && r.mean_delay() <= 10.0;
    detail += fmt("rho=%.1f recall %.3f FP %zu delay %.2f; ", rho, r.recall(), r.fp, r.mean_delay());
  }
  return {ok, detail + "(need recall 1, FP 0, delay <= 10)"};
}

// 5 -----------------------------------------------------------------------
Outcome variance_only() {
  bool ok = true;
  std::string detail = "OPTWIN within 2|W| (need >= 29/30):";
  std::vector<std::vector<double>> streams;
  for (std::uint64_t s = 0; s < 30; ++s) {
    streams.push_back(sudden_stream(Distribution::uniform_set({0.3, 0.5, 0.7}), Distribution::uniform_set({0.0, 1.0}),
                                    10000, 5000, Rng::derive(5, s).next()));
  }
  for (double rho : {0.1, 0.5, 1.0}) {
    const auto table = table_for(rho);
    int hits = 0;
    for (const auto& v : streams) {
      OptwinDetector d(config_for(rho), table);
      std::size_t w = 0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i == 10000) w = d.window().size() + 1;
        if (d.add(v[i]).is_drift() && i >= 10000) {
          hits += (i - 10000) <= 2 * w ? 1 : 0;
          break;
        }
      }
    }
    ok = ok && hits >= 29;
    detail += fmt(" rho=%.1f %d/30", rho, hits);
  }
  // DDM sees the stream as 0/1 errors drawn with probability equal to each value.
  int ddm_fired = 0;
  for (std::uint64_t s = 0; s < 30; ++s) {
    DdmDetector ddm;
    Rng rng = Rng::derive(55, s);
    bool fired = false;
    for (std::size_t i = 0; i < streams[s].size(); ++i) {
      const bool drift = ddm.add(rng.bernoulli(streams[s][i]) ? 1.0 : 0.0).is_drift();
      fired = fired || (drift && i >= 10000);
    }
    ddm_fired += fired ? 1 : 0;
  }
  ok = ok && ddm_fired == 0;
  return {ok, detail + fmt("; DDM fired within 5000 post-change steps in %d/30 seeds (need 0)", ddm_fired)};
}

// 6 -----------------------------------------------------------------------
// Fills a fresh detector with N(0, 1) until its window holds `length`
// values, then feeds `after` draws and returns the 1-based step of the first
// drift (0 if none within `limit`).
long first_flag(OptwinDetector& d, Rng& rng, std::size_t length, double mean, double sd, long limit) {
  for (int guard = 0; d.window().size() < length && guard < 1000000; ++guard) d.add(rng.normal());
  for (long j = 1; j <= limit; ++j) {
    if (d.add(mean + sd * rng.normal()).is_drift()) return j;
  }
  return 0;
}

int count_within(const std::shared_ptr<const CutTable>& table, double rho, std::uint64_t seed_id, std::size_t length,
                 double mean, double sd, long bound) {
  int ok = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    OptwinDetector d(config_for(rho), table);
    Rng rng = Rng::derive(seed_id, s);
    ok += first_flag(d, rng, length, mean, sd, bound) > 0 ? 1 : 0;
  }
  return ok;
}

Outcome fn_bounds() {
  // Constructed shifts are twice the threshold; the counts at exactly the
  // threshold are printed for reference only.
  constexpr std::size_t kL = 4000;
  bool ok = true;
  std::string detail;
  for (double rho : {0.1, 0.5, 1.0}) {
    const auto table = table_for(rho);
    const CutRow& row = table->row(kL);
    const long b2 = static_cast<long>(static_cast<double>(kL - row.nu_split) * 1.1);
    const int p2 = count_within(table, rho, 6, kL, 2.0 * rho, 1.0, b2);
    const int p2_edge = count_within(table, rho, 6, kL, rho, 1.0, b2);
    const long b4 = static_cast<long>(static_cast<double>(row.nu_split) * 1.1);
    const int p4 = count_within(table, rho, 66, kL, 0.0, std::sqrt(2.0 * row.f_crit), b4);
    const int p4_edge = count_within(table, rho, 66, kL, 0.0, std::sqrt(row.f_crit), b4);
    ok = ok && p2 >= 95 && p4 >= 95;
    detail += fmt("rho=%.1f mean %d/100 (at 1x %d) variance %d/100 (at 1x %d); ", rho, p2, p2_edge, p4, p4_edge);
  }
  const auto table = table_for(0.1);
  constexpr std::size_t kShort = 1000;
  const CutRow& row = table->row(kShort);
  const long b3 = static_cast<long>(static_cast<double>(kShort - kShort / 2) * 1.1);
  const int p3 = count_within(table, 0.1, 7, kShort, 2.0 * row.rho_temp, 1.0, b3);
  const int p3_edge = count_within(table, 0.1, 7, kShort, row.rho_temp, 1.0, b3);
  ok = ok && p3 >= 95 && row.fallback;
  detail += fmt("below w_proof (rho=0.1, |W|=1000) %d/100 (at 1x %d); need >= 95 each", p3, p3_edge);
  return {ok, detail};
}

// 7 -----------------------------------------------------------------------
std::vector<double> mixed_stream(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<double> v;
  while (v.size() < n) {
    const std::size_t len = 20 + rng.index(1500);
    const auto kind = rng.index(3);
    const double p = rng.uniform(), mu = rng.uniform(), sd = 0.2 * rng.uniform();
    for (std::size_t i = 0; i < len && v.size() < n; ++i) {
      if (kind == 0) v.push_back(rng.bernoulli(p) ? 1.0 : 0.0);
      else if (kind == 1) v.push_back(rng.normal(mu, sd));
      else v.push_back(mu);
    }
  }
  return v;
}

Outcome oracle_equivalence() {
  const double rhos[3] = {0.1, 0.5, 1.0};
  std::shared_ptr<const CutTable> tables[3] = {table_for(0.1), table_for(0.5), table_for(1.0)};
  std::size_t drifts = 0, mismatches = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    OptwinConfig c = config_for(rhos[s % 3]);
    c.keep_new_window_on_reset = s % 2 == 1;
    OptwinDetector d(c, tables[s % 3]);
    oracle::NaiveOptwin ref(c, *tables[s % 3]);
    for (double x : mixed_stream(Rng::derive(7, s).next(), 5000)) {
      const bool got = d.add(x).is_drift();
      mismatches += got != ref.add(x) ? 1 : 0;
      drifts += got ? 1 : 0;
    }
  }
  return {mismatches == 0, fmt("20 streams x 5000 steps, %zu drifts, %zu decision mismatches", drifts, mismatches)};
}

// 8 -----------------------------------------------------------------------
Outcome table_size() {
  const auto table = table_for(0.1);
  const std::size_t bytes = table->serialize().size();
  return {bytes <= 500000 && table->size() == 24971,
          fmt("%zu rows, %zu bytes serialized (limit 500000), w_proof %zu", table->size(), bytes, table->w_proof())};
}

// 9 -----------------------------------------------------------------------
Outcome complexity() {
  auto table = table_for(0.1);
  Rng rng(9);
  std::vector<double> data(2000000);
  for (double& x : data) x = rng.bernoulli(0.2) ? 1.0 : 0.0;
  auto time_first = [&](std::size_t n) {
    double best = 1e300;
    for (int r = 0; r < 5; ++r) {
      OptwinDetector d(config_for(0.1), table);
      std::size_t sink = 0;
      const auto t0 = std::chrono::steady_clock::now();
      for (std::size_t i = 0; i < n; ++i) sink += d.add(data[i]).is_drift() ? 1 : 0;
      best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      if (sink == ~std::size_t{0}) std::puts("");
    }
    return best;
  };
  const double t1 = time_first(1000000);
  const double t2 = time_first(2000000);
  const double ratio = t2 / t1;

  // ADWIN: one boundary scan per element on a stationary stream.
  double worst_stationary = 0.0;
  {
    AdwinDetector a;
    Rng r(19);
    for (int i = 0; i < 1000000; ++i) {
      a.add(r.bernoulli(0.2) ? 1.0 : 0.0);
      const double w = static_cast<double>(a.window_length());
      if (w >= 2) worst_stationary = std::max(worst_stationary, static_cast<double>(a.last_cut_checks()) / std::log2(w));
    }
  }
  // Drifting stream: bounded per scan pass.
  double worst_pass = 0.0;
  {
    AdwinDetector a;
    Rng r(29);
    for (int i = 0; i < 1000000; ++i) {
      a.add(r.bernoulli((i / 20000) % 2 == 0 ? 0.2 : 0.5) ? 1.0 : 0.0);
      const double w = static_cast<double>(a.window_length());
      if (w >= 2 && a.last_scan_passes() > 0) {
        worst_pass = std::max(worst_pass, static_cast<double>(a.last_cut_checks()) /
                                              (static_cast<double>(a.last_scan_passes()) * std::log2(w + 1.0)));
      }
    }
  }
  constexpr double c = 6.0;
  const bool ok = ratio >= 1.8 && ratio <= 2.2 && worst_stationary <= c && worst_pass <= c;
  return {ok, fmt("OPTWIN %.1f ns/element, 2n/n time ratio %.3f (need [1.8, 2.2]); ADWIN max checks/log2|W| %.2f "
                  "stationary, %.2f per scan on drifting stream (c = %.0f)",
                  1e9 * t1 / 1e6, ratio, worst_stationary, worst_pass, c)};
}

// 10 ----------------------------------------------------------------------
Outcome stagger() {
  const auto table = table_for(0.1);
  const std::vector<std::size_t> cards(kStaggerCardinalities.begin(), kStaggerCardinalities.end());
  double none = 0, opt = 0, ddm = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto st = stagger_stream(stagger_rotating_schedule(5, 20000), Rng::derive(10, s).next());
    NaiveBayes a(cards, 2), b(cards, 2), c(cards, 2);
    OptwinDetector od(config_for(0.1), table);
    DdmDetector dd;
    none += prequential_run<StaggerInstance>(st.instances, a, nullptr).accuracy();
    opt += prequential_run<StaggerInstance>(st.instances, b, &od).accuracy();
    ddm += prequential_run<StaggerInstance>(st.instances, c, &dd).accuracy();
  }
  none /= 10;
  opt /= 10;
  ddm /= 10;
  const bool ok = opt >= 0.95 && none <= 0.75 && std::fabs(opt - ddm) <= 0.02;
  return {ok, fmt("NB+OPTWIN %.4f (need >= 0.95), NB alone %.4f (need <= 0.75), NB+DDM %.4f (need within 0.02)", opt,
                  none, ddm)};
}

// 11 ----------------------------------------------------------------------
Outcome baseline_sanity() {
  std::size_t ddm_early = 0, eddm_early = 0, ddm_drifts = 0, eddm_drifts = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    Rng rng = Rng::derive(11, s);
    DdmDetector ddm;
    EddmDetector eddm;
    std::size_t since = 0, errors = 0;
    for (int i = 0; i < 6000; ++i) {
      const double p = (i / 1500) % 2 == 0 ? 0.05 : 0.6;
      const double x = rng.bernoulli(p) ? 1.0 : 0.0;
      ++since;
      errors += x == 1.0 ? 1 : 0;
      if (ddm.add(x).is_drift()) {
        ++ddm_drifts;
        ddm_early += since < 30 ? 1 : 0;
        since = 0;
      }
      if (eddm.add(x).is_drift()) {
        ++eddm_drifts;
        eddm_early += errors < 30 ? 1 : 0;
        errors = 0;
      }
    }
  }
  double stepd_max = 0.0;
  for (int period : {2, 3, 5, 10, 15, 30}) {
    StepdDetector st;
    for (int i = 0; i < 3000; ++i) {
      st.add(i % period == 0 ? 1.0 : 0.0);
      stepd_max = std::max(stepd_max, st.last_statistic());
    }
  }
  bool ecdd_ok = true;
  std::string ecdd;
  for (double arl0 : {100.0, 400.0, 1000.0}) {
    for (double p : {0.1, 0.2, 0.3}) {
      EcddConfig c;
      c.arl0 = arl0;
      EcddDetector d(c);
      Rng rng = Rng::derive(111, static_cast<std::uint64_t>(arl0 * 10 + p * 10));
      std::size_t alarms = 0;
      for (int i = 0; i < 1000000; ++i) alarms += d.add(rng.bernoulli(p) ? 1.0 : 0.0).is_drift() ? 1 : 0;
      const double arl = alarms == 0 ? 1e6 : 1e6 / static_cast<double>(alarms);
      ecdd_ok = ecdd_ok && arl >= 0.5 * arl0 && arl <= 2.0 * arl0;
      ecdd += fmt(" %.0f@p%.1f=%.0f", arl0, p, arl);
    }
  }
  const bool ok = ddm_early == 0 && eddm_early == 0 && ddm_drifts > 0 && eddm_drifts > 0 && stepd_max == 0.0 && ecdd_ok;
  return {ok, fmt("DDM early %zu of %zu drifts, EDDM early %zu of %zu, STEPD max statistic %.3g; ECDD ARL0 observed:",
                  ddm_early, ddm_drifts, eddm_early, eddm_drifts, stepd_max) +
                  ecdd + " (need [0.5, 2] x target)"};
}

// 12 ----------------------------------------------------------------------
int run_cli(const std::string& args) {
  const std::string cmd = std::string(OPTWIN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "optwin_acceptance";
  fs::create_directories(dir);
  const fs::path config = dir / "config.json";
  std::ofstream(config) << R"({
    "seeds": 6,
    "detectors": [{"type": "optwin", "rho": 0.5}, {"type": "optwin", "rho": 1.0}, {"type": "adwin"},
                  {"type": "ddm"}, {"type": "eddm"}, {"type": "stepd"}, {"type": "ecdd"}],
    "experiments": [
      {"name": "binary", "stream": {"segments": [{"dist": "bernoulli", "p": 0.2, "len": 20000},
                                                 {"dist": "bernoulli", "p": 0.5, "len": 20000}]}},
      {"name": "gradual", "stream": {"segments": [{"dist": "bernoulli", "p": 0.1, "len": 20000},
                                                  {"dist": "bernoulli", "p": 0.4, "len": 20000}],
                                     "transitions": [{"type": "gradual", "width": 2000}]}},
      {"name": "stagger", "stream": {"type": "stagger", "segments": 3, "segment_length": 10000}}]
  })";
  const fs::path a = dir / "a.csv", b = dir / "b.csv", c = dir / "c.csv";
  for (const auto& p : {a, b, c}) fs::remove(p);
  const int ra = run_cli("run --config " + config.string() + " --out " + a.string());
  const int rb = run_cli("run --config " + config.string() + " --out " + b.string());
  const int rc = run_cli("run --config " + config.string() + " --out " + c.string() + " --jobs 4");
  const std::string sa = slurp(a);
  const bool ok = ra == 0 && rb == 0 && rc == 0 && !sa.empty() && sa == slurp(b) && sa == slurp(c);
  return {ok, fmt("exit codes %d %d %d, %zu-byte report, serial rerun %s, --jobs 4 %s", ra, rb, rc, sa.size(),
                  sa == slurp(b) ? "identical" : "differs", sa == slurp(c) ? "identical" : "differs")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "quantile correctness", 5, quantiles},
      {2, "false-positive bound", 30, fp_bound},
      {3, "sudden binary drift", 60, sudden_binary},
      {4, "sudden non-binary drift", 60, sudden_gaussian},
      {5, "variance-only drift", 30, variance_only},
      {6, "false-negative bounds", 60, fn_bounds},
      {7, "oracle equivalence", 30, oracle_equivalence},
      {8, "table memory", 120, table_size},
      {9, "complexity", 600, complexity},
      {10, "prequential STAGGER", 120, stagger},
      {11, "baseline sanity", 600, baseline_sanity},
      {12, "end-to-end determinism", 600, determinism},
  };
  int passed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.pass && in_time;
    passed += pass ? 1 : 0;
    std::printf("%s %2d %s: %s [%.1f s, limit %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                c.limit_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", passed, criteria.size());
  return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
