#include <bit>
#include <cmath>

#include <fmt/format.h>

#include "openxor/eval.hpp"
#include "openxor/generator.hpp"

namespace openxor::eval {

Interval wilson95(std::size_t successes, std::size_t trials) {
  if (trials == 0) return {0.0, 1.0};
  if (successes > trials) throw ContractViolation("wilson95: successes > trials");
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

void conclude(BoundReport& r) {
  r.rate = r.trials ? static_cast<double>(r.successes) / static_cast<double>(r.trials) : 0.0;
  r.interval = wilson95(r.successes, r.trials);
  r.pass = r.interval.low <= r.bound * r.slack;
}

}  // namespace

BoundReport validate_random_bound(std::size_t k, std::size_t trials, const BoundOptions& options) {
  if (k < 1 || k > 62 || trials < 1) throw ContractViolation("validate_random_bound: need 1 <= k <= 62, trials >= 1");
  BoundReport r;
  r.law = "random";
  r.k = k;
  r.trials = trials;
  r.bound = std::ldexp(1.0, -static_cast<int>(k));
  for (std::size_t i = 0; i < trials; ++i) {
    Xoshiro256 rng(derive_seed(options.seed, i));
    const Instance inst =
        generate_spaced_instance(k, options.spacing, options.one_bit_per_segment, rng, fmt::format("rb{}", i));
    const auto outcome = solve_random(inst, rng);
    r.successes += verify(inst, outcome.ops).checkpoints_passed == k;
  }
  conclude(r);
  return r;
}

BoundReport validate_beam_bound(std::size_t beam_size, std::size_t k, std::size_t trials, BoundOptions options) {
  if (beam_size < 1 || k < 1 || k > 62 || trials < 1) {
    throw ContractViolation("validate_beam_bound: need beam_size >= 1, 1 <= k <= 62, trials >= 1");
  }
  BoundReport r;
  r.law = "beam";
  r.k = k;
  r.beam_size = beam_size;
  r.trials = trials;
  r.bound = std::min(1.0, static_cast<double>(beam_size) * std::ldexp(1.0, -static_cast<int>(k)));
  const BeamConfig config{beam_size, BeamScoring::CheckpointsSatisfied, {}};
  for (std::size_t i = 0; i < trials; ++i) {
    Xoshiro256 rng(derive_seed(options.seed, i));
    const Instance inst =
        generate_spaced_instance(k, options.spacing, options.one_bit_per_segment, rng, fmt::format("bb{}", i));
    r.successes += solve_beam(inst, config).solved();
  }
  conclude(r);
  return r;
}

DensityReport validate_density(const Instance& instance) {
  const std::size_t n = instance.size();
  if (n < 1 || n > 20) throw ContractViolation("validate_density: exhaustive enumeration needs 1 <= n <= 20");
  validate(instance);
  DensityReport r;
  r.n = n;
  r.k = instance.checkpoints.size();
  r.sequences = std::uint64_t{1} << n;

  // Bit i of an op mask is the op at position i+1; bit i of `ones` is b_{i+1}.
  std::uint32_t ones = 0;
  for (std::size_t i = 0; i < n; ++i) ones |= static_cast<std::uint32_t>(instance.bits[i]) << i;
  auto low = [](std::size_t p) { return p >= 32 ? ~0u : (1u << p) - 1u; };

  for (std::uint32_t mask = 0; mask < r.sequences; ++mask) {
    const std::uint32_t active = mask & ones;
    bool ok = true;
    for (const auto& cp : instance.checkpoints) {
      if ((std::popcount(active & low(cp.position)) & 1) != cp.required) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    ++r.valid_checkpoints;
    r.valid_with_target += (std::popcount(active) & 1) == instance.target;
  }
  const double total = static_cast<double>(r.sequences);
  r.fraction_checkpoints = static_cast<double>(r.valid_checkpoints) / total;
  r.fraction_with_target = static_cast<double>(r.valid_with_target) / total;
  r.expected_checkpoints = std::ldexp(1.0, -static_cast<int>(r.k));
  r.expected_with_target = std::ldexp(1.0, -static_cast<int>(r.k + 1));

  r.checkpoint_segments_ok = true;
  std::size_t prev = 0;
  for (const auto& cp : instance.checkpoints) {
    r.checkpoint_segments_ok &= (ones & low(cp.position) & ~low(prev)) != 0;
    prev = cp.position;
  }
  r.target_segment_ok = r.checkpoint_segments_ok && (ones & low(n) & ~low(prev)) != 0;

  // The closed forms only claim anything when their preconditions hold.
  r.pass = (!r.checkpoint_segments_ok || r.fraction_checkpoints == r.expected_checkpoints) &&
           (!r.target_segment_ok || r.fraction_with_target == r.expected_with_target);
  return r;
}

DensityReport validate_density(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 1 || k > n) throw ContractViolation("validate_density: need 1 <= k <= n");
  GenConfig config;
  config.n = n;
  config.checkpoint_density = static_cast<double>(k) / static_cast<double>(n);
  config.seed = seed;
  Xoshiro256 rng(derive_seed(seed, 0));
  Instance inst = generate_instance(config, rng, "density");
  inst.few_shot.clear();
  return validate_density(inst);
}

}  // namespace openxor::eval
