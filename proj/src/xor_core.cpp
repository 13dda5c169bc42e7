#include "openxor/xor_core.hpp"

#include <fmt/format.h>

namespace openxor {

std::string_view to_string(Op op) { return op == Op::XOR ? "XOR" : "NOP"; }

std::optional<Op> parse_op(std::string_view token) {
  if (token.size() != 3) return std::nullopt;
  auto upper = [](char c) { return (c >= 'a' && c <= 'z') ? char(c - 'a' + 'A') : c; };
  const char t[3] = {upper(token[0]), upper(token[1]), upper(token[2])};
  if (t[0] == 'X' && t[1] == 'O' && t[2] == 'R') return Op::XOR;
  if (t[0] == 'N' && t[1] == 'O' && t[2] == 'P') return Op::NOP;
  return std::nullopt;
}

double VerifyReport::checkpoint_fraction() const {
  if (checkpoint_results.empty()) return 1.0;
  return static_cast<double>(checkpoints_passed) /
         static_cast<double>(checkpoint_results.size());
}

Trace simulate(std::span<const Bit> bits, std::span<const Op> ops) {
  if (bits.size() != ops.size()) {
    throw ContractViolation(fmt::format("simulate: {} bits but {} ops", bits.size(), ops.size()));
  }
  Trace trace;
  trace.acc.resize(bits.size() + 1);
  Bit acc = 0;
  trace.acc[0] = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (ops[i] == Op::XOR) acc ^= bits[i];
    trace.acc[i + 1] = acc;
  }
  return trace;
}

VerifyReport verify(const Instance& instance, std::span<const Op> ops) {
  if (ops.size() != instance.size()) {
    throw ContractViolation(fmt::format("verify({}): expected {} ops, got {}", instance.id,
                                        instance.size(), ops.size()));
  }
  const Trace trace = simulate(instance.bits, ops);
  VerifyReport report;
  report.checkpoint_results.reserve(instance.checkpoints.size());
  for (const auto& cp : instance.checkpoints) {
    const bool ok = cp.position <= instance.size() && trace.acc[cp.position] == cp.required;
    report.checkpoint_results.push_back(ok);
    if (ok) ++report.checkpoints_passed;
  }
  report.target_ok = trace.acc.back() == instance.target;
  report.exact = report.target_ok && report.checkpoints_passed == instance.checkpoints.size();
  return report;
}

void validate(const Instance& instance) {
  const auto& id = instance.id;
  if (instance.bits.empty()) throw ContractViolation(fmt::format("instance {}: no bits", id));
  for (Bit b : instance.bits) {
    if (b > 1) throw ContractViolation(fmt::format("instance {}: non-binary bit", id));
  }
  if (instance.target > 1) throw ContractViolation(fmt::format("instance {}: non-binary target", id));
  std::size_t prev = 0;
  for (const auto& cp : instance.checkpoints) {
    if (cp.position < 1 || cp.position > instance.size()) {
      throw ContractViolation(
          fmt::format("instance {}: checkpoint position {} outside [1, {}]", id, cp.position,
                      instance.size()));
    }
    if (cp.position <= prev) {
      throw ContractViolation(
          fmt::format("instance {}: checkpoints not strictly ascending at {}", id, cp.position));
    }
    if (cp.required > 1) throw ContractViolation(fmt::format("instance {}: non-binary checkpoint", id));
    prev = cp.position;
  }
  if (instance.ground_truth && !verify(instance, *instance.ground_truth).exact) {
    throw ContractViolation(fmt::format("instance {}: ground truth does not verify", id));
  }
  for (const auto& shot : instance.few_shot) {
    validate(shot);
    if (!shot.ground_truth) {
      throw ContractViolation(fmt::format("instance {}: few-shot {} lacks ground truth", id, shot.id));
    }
    if (shot.size() > 16) {
      throw ContractViolation(fmt::format("instance {}: few-shot {} longer than 16", id, shot.id));
    }
  }
}

std::vector<std::int8_t> checkpoint_table(const Instance& instance) {
  std::vector<std::int8_t> table(instance.size() + 1, -1);
  for (const auto& cp : instance.checkpoints) {
    if (cp.position <= instance.size()) table[cp.position] = static_cast<std::int8_t>(cp.required);
  }
  return table;
}

}  // namespace openxor
