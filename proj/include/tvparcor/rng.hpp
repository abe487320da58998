#pragma once

// Seed splitting. Every random stream is derived from the user seed plus a
// path of integers naming its role (stage, direction, time index, sample...),
// so results never depend on evaluation order or thread count.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include "tvparcor/linalg.hpp"

namespace tvparcor::rng {

// Stream tags, the first element of every derivation path.
enum class Stream : std::uint64_t {
  StateSamples = 1,
  DicSamples = 2,
  SpectralBands = 3,
  Forecast = 4,
  Simulation = 5,
};

std::mt19937_64 derive(std::uint64_t seed, Stream tag, std::initializer_list<std::uint64_t> path);

/// Fills a vector of independent standard normals.
Vector standard_normal(std::mt19937_64& eng, Eigen::Index n);

}  // namespace tvparcor::rng
