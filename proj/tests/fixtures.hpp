#pragma once

// Synthetic series shared by the unit and acceptance tests.

#include "tvparcor/lattice.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace fixtures {

// Two components; the first is a slowly varying AR(2) with a 24-step cycle,
// the second a noisier AR(2) with the same cycle driven by the first.
inline tvparcor::TimeSeries wind_like(int t_len, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> z;
  const double w = 2.0 * std::numbers::pi / 24.0;
  tvparcor::Matrix x = tvparcor::Matrix::Zero(t_len, 2);
  double a1 = 0, a2 = 0, b1 = 0, b2 = 0;
  for (int t = -300; t < t_len; ++t) {
    const double s = std::max(t, 0) / static_cast<double>(t_len);
    const double r = 0.97 + 0.02 * s;
    const double a = 2.0 * r * std::cos(w) * a1 - r * r * a2 + z(eng);
    const double b = 2.0 * 0.9 * std::cos(w) * b1 - 0.81 * b2 + 0.3 * a1 + z(eng);
    a2 = a1;
    a1 = a;
    b2 = b1;
    b1 = b;
    if (t >= 0) {
      x(t, 0) = a;
      x(t, 1) = b;
    }
  }
  return tvparcor::TimeSeries(x);
}

}  // namespace fixtures
