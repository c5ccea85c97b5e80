#pragma once
#include <cstdint>
#include <random>

namespace plink::simkit {

// Every stochastic stage of the pipeline draws from its own generator,
// seeded from (master seed, stage id, channel id). Removing or reordering
// stages therefore never perturbs the draws of other stages.
enum class Stage : std::uint64_t {
  kPairEmission = 1,
  kPairSpread = 2,
  kAnalyzer = 3,
  kPathLoss = 4,
  kFiberLoss = 5,
  kFiberJitter = 6,
  kDetectorThin = 7,
  kDetectorJitter = 8,
  kDarkCounts = 9,
  kAfterpulse = 10,
  kUserThin = 11,
  kScenario = 12,
};

std::uint64_t splitmix64(std::uint64_t& state);

// Collapse (seed, stage, channel) into one well-mixed sub-seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt_a, std::uint64_t salt_b = 0);

// Seedable generator with explicit, platform-independent transforms on top
// of the standard-defined mt19937_64 engine.
class SplitRng {
 public:
  SplitRng(std::uint64_t seed, Stage stage, unsigned channel)
      : engine_(derive_seed(seed, static_cast<std::uint64_t>(stage), channel)) {}

  explicit SplitRng(std::uint64_t raw_seed) : engine_(raw_seed) {}

  // Uniform in [0, 1) with 53 bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in (0, 1], safe as a log argument.
  double uniform01_open_low() { return 1.0 - uniform01(); }

  double exponential(double mean);
  double gaussian(double sigma); // zero mean, Box-Muller
  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

} // namespace plink::simkit
