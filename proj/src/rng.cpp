#include "logbandit/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace logbandit {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_key(std::uint64_t seed, std::uint64_t purpose, std::uint64_t round) {
  std::uint64_t key = splitmix64(seed);
  key = splitmix64(key ^ (purpose * 0xD1B54A32D192ED03ULL));
  return splitmix64(key ^ (round * 0x8CB92BA72F3D8DD7ULL));
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, StreamPurpose purpose, std::uint64_t round)
    : seed_(seed),
      purpose_(static_cast<std::uint64_t>(purpose)),
      round_(round),
      key_(derive_key(seed, purpose_, round)) {}

void CounterRng::seek(std::uint64_t round) {
  round_ = round;
  key_ = derive_key(seed_, purpose_, round);
  counter_ = 0;
}

std::uint64_t CounterRng::next_u64() {
  const std::uint64_t value = splitmix64(key_ ^ splitmix64(counter_));
  ++counter_;
  return value;
}

double CounterRng::uniform() {
  // 53 random bits, shifted by half an ulp so 0 is never returned.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t CounterRng::below(std::uint64_t n) {
  if (n == 0) {
    throw std::invalid_argument("CounterRng::below: empty range");
  }
  return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
}

Vector uniform_on_sphere(int d, CounterRng& rng) {
  Vector direction(d);
  double norm = 0.0;
  do {
    for (int i = 0; i < d; ++i) direction(i) = rng.normal();
    norm = direction.norm();
  } while (norm == 0.0);
  return direction / norm;
}

Vector uniform_in_ball(int d, CounterRng& rng) {
  const Vector direction = uniform_on_sphere(d, rng);
  const double radius = std::pow(rng.uniform(), 1.0 / d);
  return radius * direction;
}

}  // namespace logbandit
