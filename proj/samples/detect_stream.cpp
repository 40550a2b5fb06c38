// Feeds a Bernoulli error stream whose rate jumps from 0.2 to 0.5 at step
// 20000 into OPTWIN and ADWIN and prints every drift flag.

#include <cstdio>

#include "optwin/baselines/adwin.hpp"
#include "optwin/optwin.hpp"
#include "optwin/streams.hpp"

int main() {
  optwin::StreamSpec spec;
  spec.segments = {{optwin::Distribution::bernoulli(0.2), 20000}, {optwin::Distribution::bernoulli(0.5), 20000}};
  spec.transitions = {optwin::Transition::sudden()};
  spec.seed = 42;
  const auto stream = optwin::generate(spec);

  optwin::OptwinConfig cfg;
  cfg.rho = 0.5;
  optwin::OptwinDetector opt(cfg);
  optwin::AdwinDetector adwin;

  for (std::size_t i = 0; i < stream.values.size(); ++i) {
    const auto d = opt.add(stream.values[i]);
    if (d.is_drift()) {
      std::printf("OPTWIN drift at %zu (%s, |W| = %zu)\n", i,
                  d.detail->test == optwin::DriftTest::FTest ? "f-test" : "t-test", d.detail->window_length);
    }
    if (adwin.add(stream.values[i]).is_drift()) std::printf("ADWIN  drift at %zu\n", i);
  }
  std::printf("true drift at %zu\n", stream.truth.positions.at(0));
}
