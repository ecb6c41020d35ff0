#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace vortexlab {

// Deterministic random stream. Distributions are hand-rolled on top of the
// raw 64-bit engine output so sequences do not depend on the standard
// library implementation.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // uniform in (0, 1), never exactly 0
  double uniform01() {
    const std::uint64_t r = engine_();
    return (static_cast<double>(r >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // standard normal via Box-Muller
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace vortexlab
