#include "epsb/rng.hpp"

#include <cmath>

namespace epsb {

namespace {

std::seed_seq make_seq(std::uint64_t seed, std::uint64_t stream) {
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffULL); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  return std::seed_seq{lo(seed), hi(seed), lo(stream), hi(stream), 0x65707362U};
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  auto seq = make_seq(seed, stream);
  engine_.seed(seq);
}

double Rng::exponential(double rate) { return -std::log(uniform()) / rate; }

std::uint64_t Rng::below(std::uint64_t k) {
  // Lemire's multiply-shift with rejection.
  std::uint64_t x = engine_();
  __uint128_t m = static_cast<__uint128_t>(x) * k;
  auto low = static_cast<std::uint64_t>(m);
  if (low < k) {
    const std::uint64_t threshold = (0 - k) % k;
    while (low < threshold) {
      x = engine_();
      m = static_cast<__uint128_t>(x) * k;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace epsb
