#include "snake/rng.hpp"

namespace snake {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  return mix64(mix64(master) ^ (tag * 0xd1342543de82ef95ULL + 1));
}

namespace {
std::mt19937_64 seeded(std::uint64_t master, std::uint64_t replica) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(replica), static_cast<std::uint32_t>(replica >> 32),
                    0x5eedu};
  return std::mt19937_64(seq);
}
}  // namespace

Stream::Stream(std::uint64_t master_seed, std::uint64_t replica)
    : master_(master_seed), replica_(replica), engine_(seeded(master_seed, replica)),
      normal_(0.0, 1.0), unit_(0.0, 1.0) {}

double Stream::uniform() { return unit_(engine_); }

double Stream::uniform_open() {
  double u;
  do {
    u = unit_(engine_);
  } while (u <= 0.0);
  return u;
}

double Stream::normal() { return normal_(engine_); }

std::uint64_t Stream::below(std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
}

std::uint64_t Stream::poisson(double mean) {
  if (mean <= 0.0) return 0;
  return std::poisson_distribution<std::uint64_t>(mean)(engine_);
}

}  // namespace snake
