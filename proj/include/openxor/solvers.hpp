#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "openxor/rng.hpp"
#include "openxor/xor_core.hpp"

namespace openxor {

// Failed marks a heuristic attempt that produced a full sequence which does
// not verify; the attempt is kept in `ops` so metrics can still be computed.
enum class SolveStatus : std::uint8_t { Solved, Exhausted, Timeout, Failed };

std::string_view to_string(SolveStatus status);
std::optional<SolveStatus> parse_status(std::string_view text);

struct SolveOutcome {
  SolveStatus status = SolveStatus::Exhausted;
  std::vector<Op> ops;  // empty when the method produced no complete attempt
  std::uint64_t nodes_explored = 0;
  double wall_time = 0.0;  // seconds
  std::optional<std::size_t> failed_at;  // first violated checkpoint position, if recorded

  bool solved() const { return status == SolveStatus::Solved; }
};

// What a step-by-step decision procedure sees: the instance, the number of
// ops already applied, the current accumulator and the ops chosen so far.
struct PolicyView {
  const Instance& instance;
  std::size_t pos;
  Bit acc;
  std::span<const Op> prefix;
};

using DecisionPolicy = std::function<Op(const PolicyView&)>;

// Applies `policy` for the first `steps` positions of `instance`.
std::vector<Op> rollout(const DecisionPolicy& policy, const Instance& instance, std::size_t steps);

// XOR whenever the accumulator disagrees with the target, NOP otherwise.
// Checkpoints are ignored.
DecisionPolicy greedy_policy();

inline constexpr std::uint64_t kDefaultMaxSteps = 10'000'000;

// Depth-first search, NOP child before XOR child, pruning on a violated
// checkpoint and on a final target mismatch. Each visited node costs one step;
// reaching max_steps yields Timeout.
SolveOutcome solve_backtracking(const Instance& instance, std::uint64_t max_steps = kDefaultMaxSteps);

// One i.i.d. uniform op sequence.
SolveOutcome solve_random(const Instance& instance, Xoshiro256& rng);

SolveOutcome solve_greedy(const Instance& instance);

enum class BeamScoring : std::uint8_t { CheckpointsSatisfied, PolicyLogProb };

// (log p(XOR), log p(NOP)) for the state (pos, acc) of an instance.
using OpLogProb = std::function<std::pair<double, double>(const Instance&, std::size_t pos, Bit acc)>;

struct BeamConfig {
  std::size_t beam_size = 1;
  BeamScoring scoring = BeamScoring::CheckpointsSatisfied;
  OpLogProb log_prob;  // required for PolicyLogProb
};

// Position-synchronous beam. Children violating the checkpoint (or the target,
// at the last position) they land on are dropped; the best beam_size survivors
// are kept, ties resolved by lexicographic path order with NOP < XOR.
SolveOutcome solve_beam(const Instance& instance, const BeamConfig& config);

// Linear-time exact solver: fixes the parity needed by each segment between
// consecutive constraints with one XOR on the segment's first 1-bit.
SolveOutcome solve_segments(const Instance& instance);

}  // namespace openxor
