#include <algorithm>
#include <sstream>

#include <gtest/gtest.h>

#include "optwin/eval.hpp"
#include "optwin/random.hpp"

using namespace optwin;

TEST(Match, DetectionAfterDrift) {
  const auto r = match_detections({1000}, {1030}, {500});
  EXPECT_EQ(r.tp, 1u);
  EXPECT_EQ(r.fp, 0u);
  EXPECT_EQ(r.fn, 0u);
  EXPECT_EQ(r.delays, std::vector<std::size_t>{30});
}

TEST(Match, DetectionBeforeDrift) {
  const auto r = match_detections({1000}, {500}, {500});
  EXPECT_EQ(r.tp, 0u);
  EXPECT_EQ(r.fp, 1u);
  EXPECT_EQ(r.fn, 1u);
}

TEST(Match, GreedyEarliest) {
  const auto r = match_detections({1000, 2000}, {1010, 1020, 2100}, {500});
  EXPECT_EQ(r.tp, 2u);
  EXPECT_EQ(r.fp, 1u);
  EXPECT_EQ(r.fn, 0u);
  EXPECT_EQ(r.delays, (std::vector<std::size_t>{10, 100}));
}

TEST(Match, WindowBoundaryInclusive) {
  EXPECT_EQ(match_detections({100}, {600}, {500}).tp, 1u);
  EXPECT_EQ(match_detections({100}, {601}, {500}).tp, 0u);
  EXPECT_EQ(match_detections({100}, {100}, {500}).delays, std::vector<std::size_t>{0});
}

TEST(Match, Errors) {
  EXPECT_THROW(match_detections({2, 1}, {}), std::invalid_argument);
  EXPECT_THROW(match_detections({1}, {5, 3}), std::invalid_argument);
  EXPECT_THROW(match_detections({1}, {1}, {0}), std::invalid_argument);
}

TEST(Match, EmptyInputs) {
  const auto r = match_detections({}, {});
  EXPECT_EQ(r.precision(), 0.0);
  EXPECT_EQ(r.recall(), 0.0);
  EXPECT_EQ(r.f1(), 0.0);
  EXPECT_EQ(r.mean_delay(), 0.0);
}

TEST(Match, InvariantsOnRandomInputs) {
  Rng rng(31);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<std::size_t> truth, det;
    const std::size_t nt = rng.index(6), nd = rng.index(12);
    for (std::size_t i = 0; i < nt; ++i) truth.push_back(rng.index(10000));
    for (std::size_t i = 0; i < nd; ++i) det.push_back(rng.index(10000));
    std::sort(truth.begin(), truth.end());
    std::sort(det.begin(), det.end());
    const MatchConfig cfg{1 + rng.index(2000)};
    const auto r = match_detections(truth, det, cfg);
    ASSERT_EQ(r.tp + r.fn, truth.size());
    ASSERT_EQ(r.tp + r.fp, det.size());
    ASSERT_EQ(r.delays.size(), r.tp);
    for (auto d : r.delays) ASSERT_LE(d, cfg.window);
    if (r.tp > 0) {
      ASSERT_GE(r.f1(), std::min(r.precision(), r.recall()) - 1e-15);
      ASSERT_LE(r.f1(), std::max(r.precision(), r.recall()) + 1e-15);
    }
  }
}

TEST(Aggregate, Examples) {
  const auto a = match_detections({1000, 2000}, {1010, 1500, 2100}, {500});
  const auto twice = aggregate({a, a});
  EXPECT_EQ(twice.precision(), a.precision());
  EXPECT_EQ(twice.recall(), a.recall());
  EXPECT_EQ(twice.f1(), a.f1());
  EXPECT_EQ(twice.runs, 2u);
  EXPECT_EQ(twice.fp_per_run(), 1.0);

  const auto hit = match_detections({10}, {12}, {5});
  const auto miss = match_detections({}, {3}, {5});
  EXPECT_EQ(aggregate({hit, miss}).precision(), 0.5);

  const auto one = aggregate({a});
  EXPECT_EQ(one.tp, a.tp);
  EXPECT_EQ(one.fp, a.fp);
  EXPECT_EQ(one.fn, a.fn);
  EXPECT_EQ(one.delays, a.delays);
  EXPECT_THROW(aggregate({}), std::invalid_argument);
}

TEST(Report, EmptyAndSingle) {
  std::ostringstream empty;
  write_report({}, empty);
  EXPECT_EQ(empty.str(), "experiment,detector,delay,fp_per_run,precision,recall,f1\n");

  std::map<ReportKey, EvalReport> m;
  m[{"sudden", "ADWIN"}] = match_detections({1000}, {1030}, {500});
  std::ostringstream one;
  write_report(m, one);
  EXPECT_EQ(one.str(), "experiment,detector,delay,fp_per_run,precision,recall,f1\nsudden,ADWIN,30,0,1,1,1\n");
}

TEST(Report, SortedAndDeterministic) {
  std::map<ReportKey, EvalReport> m;
  m[{"b", "X"}] = match_detections({10}, {11, 40}, {5});
  m[{"a", "Y"}] = match_detections({10}, {}, {5});
  m[{"a", "X"}] = match_detections({10}, {13}, {5});
  std::ostringstream first, second;
  write_report(m, first);
  write_report(m, second);
  EXPECT_EQ(first.str(), second.str());
  EXPECT_EQ(first.str(),
            "experiment,detector,delay,fp_per_run,precision,recall,f1\n"
            "a,X,3,0,1,1,1\n"
            "a,Y,0,0,0,0,0\n"
            "b,X,1,1,0.5,1,0.666667\n");
}

TEST(Trace, Format) {
  std::ostringstream os;
  write_trace({{5, Verdict::Warning}, {9, Verdict::Drift}}, os);
  EXPECT_EQ(os.str(), "step,verdict\n5,warning\n9,drift\n");
}
