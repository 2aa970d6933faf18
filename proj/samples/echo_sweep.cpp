// Sweeps the X position across a fixed idle window on a detuned qubit and
// prints the X-basis success probability for each split.

#include <cstdio>

#include "timestitch/timestitch.hpp"

using namespace timestitch;

int main() {
  QubitParams q;
  q.detuning_hz = 10e3;
  const DeviceModel dev = line_device(1, q);
  const std::size_t window = 799;
  const auto family = hahn_micro(window, false, true, dev);

  for (std::size_t a = 0; a <= window; a += 40) {
    const auto tc = schedule(family[a], dev, Policy::ALAP);
    const auto p = noisy_distribution(tc, dev);
    std::printf("split %3zu/%3zu  P(0) = %.6f\n", a, window - a, p.count("0") ? p.at("0") : 0.0);
  }
}
