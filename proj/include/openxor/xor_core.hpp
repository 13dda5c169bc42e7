#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace openxor {

// Raised when a caller breaks an operation's precondition (length mismatch,
// missing ground truth, malformed instance).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

using Bit = std::uint8_t;  // always 0 or 1

enum class Op : std::uint8_t { NOP = 0, XOR = 1 };

std::string_view to_string(Op op);
std::optional<Op> parse_op(std::string_view token);  // case-insensitive

// (position, required): the accumulator after processing `position` bits
// (1-based) must equal `required`.
struct Checkpoint {
  std::size_t position = 0;
  Bit required = 0;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

struct Instance {
  std::string id;
  std::vector<Bit> bits;
  Bit target = 0;
  std::vector<Checkpoint> checkpoints;  // sorted by position, unique
  std::optional<std::vector<Op>> ground_truth;
  std::vector<Instance> few_shot;

  std::size_t size() const { return bits.size(); }

  friend bool operator==(const Instance&, const Instance&) = default;
};

struct Trace {
  std::vector<Bit> acc;  // acc[0] == 0, acc.size() == bits.size() + 1
};

struct VerifyReport {
  std::vector<bool> checkpoint_results;
  bool target_ok = false;
  bool exact = false;
  std::size_t checkpoints_passed = 0;

  // passed / k, or 1 when there are no checkpoints.
  double checkpoint_fraction() const;
};

Trace simulate(std::span<const Bit> bits, std::span<const Op> ops);

VerifyReport verify(const Instance& instance, std::span<const Op> ops);

// Throws ContractViolation describing the first broken structural invariant:
// empty bits, non-binary values, unsorted/duplicate/out-of-range checkpoints,
// or a ground truth that does not verify.
void validate(const Instance& instance);

// Dense lookup: required[p] is the checkpoint value at position p, or -1.
std::vector<std::int8_t> checkpoint_table(const Instance& instance);

}  // namespace openxor
