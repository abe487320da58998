#include "tvparcor/rng.hpp"

namespace tvparcor::rng {

namespace {

void push_u64(std::vector<std::uint32_t>& words, std::uint64_t v) {
  words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
  words.push_back(static_cast<std::uint32_t>(v >> 32));
}

}  // namespace

std::mt19937_64 derive(std::uint64_t seed, Stream tag, std::initializer_list<std::uint64_t> path) {
  std::vector<std::uint32_t> words;
  words.reserve(4 + 2 * path.size());
  push_u64(words, seed);
  push_u64(words, static_cast<std::uint64_t>(tag));
  for (auto p : path) push_u64(words, p);
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

Vector standard_normal(std::mt19937_64& eng, Eigen::Index n) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = nd(eng);
  return z;
}

}  // namespace tvparcor::rng
