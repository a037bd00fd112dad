#pragma once

#include <cstdint>
#include <random>

namespace snake {

// Mixes a 64-bit value (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

// Derives an independent master seed for a named stage of an experiment.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag);

/// Random stream keyed by (master_seed, replica).
///
/// Streams with distinct keys are treated as independent; the same key always
/// reproduces the same sequence, whatever thread happens to consume it.
class Stream {
 public:
  Stream(std::uint64_t master_seed, std::uint64_t replica);

  double uniform();       // [0, 1)
  double uniform_open();  // (0, 1)
  double normal();
  std::uint64_t below(std::uint64_t n);  // uniform on {0, ..., n-1}
  std::uint64_t poisson(double mean);

  std::mt19937_64& engine() { return engine_; }
  std::uint64_t master_seed() const { return master_; }
  std::uint64_t replica() const { return replica_; }

 private:
  std::uint64_t master_;
  std::uint64_t replica_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> unit_;
};

}  // namespace snake
