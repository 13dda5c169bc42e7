#include "openxor/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace openxor {

std::size_t GenConfig::checkpoint_count() const {
  const auto k = std::llround(static_cast<double>(n) * checkpoint_density);
  return k < 0 ? 0 : static_cast<std::size_t>(k);
}

void GenConfig::check() const {
  if (n < 1) throw ContractViolation("GenConfig: n must be >= 1");
  if (!(checkpoint_density > 0.0 && checkpoint_density <= 1.0)) {
    throw ContractViolation("GenConfig: checkpoint density must lie in (0, 1]");
  }
  if (few_shot_min > few_shot_max) throw ContractViolation("GenConfig: few_shot_min > few_shot_max");
  if (few_shot_min < 3 || few_shot_max > 5) {
    throw ContractViolation("GenConfig: few-shot count must lie in [3, 5]");
  }
  if (few_shot_n < 1 || few_shot_n > 16) throw ContractViolation("GenConfig: few_shot_n must lie in [1, 16]");
}

namespace {

Instance reverse_construct(std::size_t n, std::size_t k, Xoshiro256& rng, std::string id) {
  Instance inst;
  inst.id = std::move(id);
  inst.bits.resize(n);
  for (auto& b : inst.bits) b = rng.bit();
  std::vector<Op> ops(n);
  for (auto& op : ops) op = rng.bit() ? Op::XOR : Op::NOP;
  const Trace trace = simulate(inst.bits, ops);

  std::vector<std::size_t> positions(n);
  std::iota(positions.begin(), positions.end(), std::size_t{1});
  k = std::min(k, n);
  for (std::size_t j = 0; j < k; ++j) {
    const auto pick = j + static_cast<std::size_t>(rng.below(n - j));
    std::swap(positions[j], positions[pick]);
  }
  positions.resize(k);
  std::sort(positions.begin(), positions.end());
  for (auto p : positions) inst.checkpoints.push_back({p, trace.acc[p]});
  inst.target = trace.acc[n];
  inst.ground_truth = std::move(ops);
  return inst;
}

}  // namespace

Instance generate_instance(const GenConfig& config, Xoshiro256& rng, std::string id) {
  config.check();
  Instance inst = reverse_construct(config.n, config.checkpoint_count(), rng, std::move(id));
  const auto shots =
      config.few_shot_min + static_cast<std::size_t>(rng.below(config.few_shot_max - config.few_shot_min + 1));
  const std::uint64_t shot_seed = rng.next();
  for (std::size_t j = 0; j < shots; ++j) {
    Xoshiro256 shot_rng(derive_seed(shot_seed, j));
    inst.few_shot.push_back(
        reverse_construct(config.few_shot_n, 1, shot_rng, fmt::format("{}/ex{}", inst.id, j + 1)));
  }
  return inst;
}

Dataset generate_dataset(const GenConfig& config) {
  config.check();
  Dataset ds;
  ds.config = config;
  ds.instances.reserve(config.count);
  for (std::size_t i = 0; i < config.count; ++i) {
    Xoshiro256 rng(derive_seed(config.seed, i));
    ds.instances.push_back(generate_instance(config, rng, fmt::format("{}{:05d}", config.id_prefix, i)));
  }
  return ds;
}

Instance generate_spaced_instance(std::size_t k, std::size_t spacing, bool one_bit_per_segment,
                                  Xoshiro256& rng, std::string id) {
  if (k < 1 || spacing < 1) throw ContractViolation("generate_spaced_instance: k and spacing must be >= 1");
  const std::size_t n = k * spacing;
  Instance inst;
  inst.id = std::move(id);
  inst.bits.assign(n, 0);
  if (one_bit_per_segment) {
    for (std::size_t seg = 0; seg < k; ++seg) {
      inst.bits[seg * spacing + static_cast<std::size_t>(rng.below(spacing))] = 1;
    }
  } else {
    for (auto& b : inst.bits) b = rng.bit();
  }
  std::vector<Op> ops(n);
  for (auto& op : ops) op = rng.bit() ? Op::XOR : Op::NOP;
  const Trace trace = simulate(inst.bits, ops);
  for (std::size_t seg = 1; seg <= k; ++seg) {
    inst.checkpoints.push_back({seg * spacing, trace.acc[seg * spacing]});
  }
  inst.target = trace.acc[n];
  inst.ground_truth = std::move(ops);
  return inst;
}

namespace {

std::vector<Op> checked_rollout(const DecisionPolicy& policy, const Instance& inst, std::size_t steps) {
  auto first = rollout(policy, inst, steps);
  auto second = rollout(policy, inst, steps);
  if (first != second) {
    throw ContractViolation(fmt::format("adversarial_against: policy is not deterministic on {}", inst.id));
  }
  return first;
}

}  // namespace

Instance adversarial_against(const DecisionPolicy& policy, std::size_t n, const AdversarialOptions& options) {
  if (n < 2) throw ContractViolation("adversarial_against: n must be >= 2");
  Xoshiro256 rng(options.seed);
  Instance base;
  base.id = fmt::format("adv-{}-{}", n, options.seed);
  if (options.bits) {
    if (options.bits->size() != n) throw ContractViolation("adversarial_against: bits length != n");
    base.bits = *options.bits;
  } else {
    base.bits.resize(n);
    for (auto& b : base.bits) b = rng.bit();
    // Keep every checkpoint value and the target reachable.
    base.bits[n - 1] = 1;
    if (std::find(base.bits.begin(), base.bits.begin() + n / 2, Bit{1}) == base.bits.begin() + n / 2) {
      base.bits[0] = 1;
    }
  }
  base.target = options.target ? *options.target : rng.bit();

  const std::size_t half = n / 2;
  const auto prefix = checked_rollout(policy, base, half);
  const Bit acc_half = simulate(std::span(base.bits).first(half), prefix).acc.back();
  const auto xors = std::count(prefix.begin(), prefix.end(), Op::XOR);
  const bool xor_leaning = static_cast<double>(xors) > 0.6 * static_cast<double>(half);
  const Bit prescribed = xor_leaning ? acc_half : Bit(acc_half ^ 1);

  // Pass 0: prescribed value, checkpoint itself violated. Pass 1: the other
  // value. Pass 2: any placement under which the rollout fails.
  for (int pass = 0; pass < 3; ++pass) {
    for (std::size_t p = std::max<std::size_t>(half, 1); p <= n; ++p) {
      for (Bit v : {prescribed, Bit(prescribed ^ 1)}) {
        if (pass == 0 && v != prescribed) continue;
        if (pass == 1 && v == prescribed) continue;
        Instance inst = base;
        inst.checkpoints = {{p, v}};
        const auto witness = solve_segments(inst);
        if (!witness.solved()) continue;
        const auto ops = checked_rollout(policy, inst, n);
        const auto trace = simulate(inst.bits, ops);
        const bool checkpoint_broken = trace.acc[p] != v;
        if (verify(inst, ops).exact) continue;
        if (pass < 2 && !checkpoint_broken) continue;
        inst.ground_truth = witness.ops;
        return inst;
      }
    }
  }
  throw ConstructionFailed(fmt::format("adversarial_against: no defeating checkpoint found for n={}", n));
}

}  // namespace openxor
