// Tunes GHZ-5 on the reference device and compares ALAP with the stitched
// schedule.

#include <cstdio>
#include <iostream>
#include <memory>

#include "timestitch/timestitch.hpp"

using namespace timestitch;

int main() {
  auto dev = std::make_shared<const DeviceModel>(reference_device());
  const auto b = make_benchmark(BenchKind::GHZ_ECHO, 5);

  PipelineOptions opt;
  opt.seed = 42;
  DensityMatrixBackend backend;
  const auto res = run_pipeline(b.circuit, dev, backend, opt);
  std::cout << tuning_report(res);

  const auto alap = run_counts(res.baseline, *dev, 10000, 7);
  const auto tuned = run_counts(res.stitched.schedule, *dev, 10000, 7);
  std::printf("POS alap %.4f  tuned %.4f\n", pos(alap, b.accepted), pos(tuned, b.accepted));
}
