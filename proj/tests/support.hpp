#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "openxor/rng.hpp"
#include "openxor/xor_core.hpp"

namespace testing {

using namespace openxor;

inline std::filesystem::path golden(const std::string& name) {
  return std::filesystem::path(OPENXOR_TEST_DATA) / "golden" / name;
}

inline std::vector<Op> ops_from_mask(std::uint32_t mask, std::size_t n) {
  std::vector<Op> ops(n);
  for (std::size_t i = 0; i < n; ++i) ops[i] = (mask >> i) & 1u ? Op::XOR : Op::NOP;
  return ops;
}

// Brute force over all 2^n sequences, written without simulate/verify:
// acc after p bits is the parity of the selected 1-bits among the first p.
struct Enumeration {
  std::uint64_t valid = 0;
  // Lexicographically smallest valid sequence with NOP < XOR read left to
  // right, i.e. position 1 most significant.
  std::optional<std::vector<Op>> first;
};

inline Enumeration enumerate(const Instance& inst) {
  const std::size_t n = inst.size();
  std::uint32_t ones = 0;
  for (std::size_t i = 0; i < n; ++i) ones |= std::uint32_t{inst.bits[i]} << i;
  Enumeration e;
  std::optional<std::uint32_t> best_key;
  std::uint32_t best_mask = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    const std::uint32_t active = mask & ones;
    bool ok = (std::popcount(active) & 1) == inst.target;
    for (const auto& cp : inst.checkpoints) {
      const std::uint32_t prefix = cp.position >= 32 ? ~0u : (1u << cp.position) - 1u;
      ok = ok && (std::popcount(active & prefix) & 1) == cp.required;
    }
    if (!ok) continue;
    ++e.valid;
    std::uint32_t key = 0;  // bit-reverse so position 1 is most significant
    for (std::size_t i = 0; i < n; ++i) key |= ((mask >> i) & 1u) << (n - 1 - i);
    if (!best_key || key < *best_key) {
      best_key = key;
      best_mask = mask;
    }
  }
  if (best_key) e.first = ops_from_mask(best_mask, n);
  return e;
}

// Arbitrary instance, satisfiable or not: random bits, random checkpoint
// positions and values, random target.
inline Instance random_instance(Xoshiro256& rng, std::size_t n, std::size_t max_k, std::string id = "r") {
  Instance inst;
  inst.id = std::move(id);
  inst.bits.resize(n);
  for (auto& b : inst.bits) b = rng.bit();
  inst.target = rng.bit();
  const std::size_t k = static_cast<std::size_t>(rng.below(max_k + 1));
  std::vector<bool> used(n + 1, false);
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t p = 1 + static_cast<std::size_t>(rng.below(n));
    if (used[p]) continue;
    used[p] = true;
  }
  for (std::size_t p = 1; p <= n; ++p) {
    if (used[p]) inst.checkpoints.push_back({p, rng.bit()});
  }
  return inst;
}

}  // namespace testing
