#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "openxor/rng.hpp"
#include "openxor/solvers.hpp"
#include "openxor/xor_core.hpp"

namespace openxor {

inline constexpr std::string_view kGeneratorVersion = "openxor-gen/1 (splitmix64+xoshiro256**)";

struct GenConfig {
  std::size_t n = 2048;
  double checkpoint_density = 0.01;
  std::uint64_t seed = 0;
  std::size_t count = 1;
  std::size_t few_shot_min = 3;
  std::size_t few_shot_max = 5;
  std::size_t few_shot_n = 8;
  std::string id_prefix;  // ids are "<prefix><index, 5 digits>"

  // round(n * density), never negative.
  std::size_t checkpoint_count() const;
  void check() const;  // throws ContractViolation
};

struct Dataset {
  GenConfig config;
  std::vector<Instance> instances;
  std::string generator_version{kGeneratorVersion};
};

// Reverse construction: random bits, random ops, forward simulation, k
// distinct checkpoint positions read off the trace, target = final
// accumulator. Draw order from `rng`: n bits, n ops, k positions (partial
// Fisher-Yates over 1..n), few-shot count, few-shot stream seed.
Instance generate_instance(const GenConfig& config, Xoshiro256& rng, std::string id);

// Instance i draws from Xoshiro256(derive_seed(config.seed, i)), so the
// dataset is identical however instances are scheduled.
Dataset generate_dataset(const GenConfig& config);

// Instances in the regime the search-bound arguments assume: k checkpoints
// evenly spaced every `spacing` positions (n = k * spacing), checkpoint values
// read from a random reverse-constructed trace. With `one_bit_per_segment`,
// each segment carries exactly one 1-bit at a uniform position, so exactly one
// of the 2^k segment-parity patterns is valid.
Instance generate_spaced_instance(std::size_t k, std::size_t spacing, bool one_bit_per_segment,
                                  Xoshiro256& rng, std::string id);

// No single-checkpoint placement defeated the policy on a satisfiable instance.
class ConstructionFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AdversarialOptions {
  std::uint64_t seed = 0;
  // Bits to use instead of random ones (must have length n when given).
  std::optional<std::vector<Bit>> bits;
  std::optional<Bit> target;
};

// Defeats a deterministic step policy with one checkpoint in [n/2, n]: roll the
// policy out for n/2 steps, read acc_{n/2}, and if the policy chose XOR on more
// than 60% of those steps require v = acc_{n/2}, otherwise v = acc_{n/2} XOR 1.
// The earliest position whose rollout violates (p, v) is used; the returned
// instance is satisfiable and the policy's rollout on it does not verify.
// Throws ContractViolation when two identical rollouts differ.
Instance adversarial_against(const DecisionPolicy& policy, std::size_t n,
                             const AdversarialOptions& options = {});

}  // namespace openxor
