#include "openxor/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace openxor {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Solved: return "solved";
    case SolveStatus::Exhausted: return "exhausted";
    case SolveStatus::Timeout: return "timeout";
    case SolveStatus::Failed: return "failed";
  }
  return "unknown";
}

std::optional<SolveStatus> parse_status(std::string_view text) {
  for (auto s : {SolveStatus::Solved, SolveStatus::Exhausted, SolveStatus::Timeout, SolveStatus::Failed}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Soundness gate shared by every solver.
SolveOutcome finish(const Instance& instance, SolveOutcome outcome, Clock::time_point start) {
  outcome.wall_time = seconds_since(start);
  if (outcome.status == SolveStatus::Solved && !verify(instance, outcome.ops).exact) {
    throw std::logic_error(fmt::format("solver returned an invalid solution for {}", instance.id));
  }
  return outcome;
}

// Heuristic attempts: Solved when the sequence verifies, Failed otherwise.
SolveOutcome grade_attempt(const Instance& instance, std::vector<Op> ops, std::uint64_t nodes) {
  SolveOutcome out;
  const auto report = verify(instance, ops);
  out.status = report.exact ? SolveStatus::Solved : SolveStatus::Failed;
  if (!report.exact) {
    for (std::size_t i = 0; i < report.checkpoint_results.size(); ++i) {
      if (!report.checkpoint_results[i]) {
        out.failed_at = instance.checkpoints[i].position;
        break;
      }
    }
    if (!out.failed_at) out.failed_at = instance.size();
  }
  out.ops = std::move(ops);
  out.nodes_explored = nodes;
  return out;
}

}  // namespace

std::vector<Op> rollout(const DecisionPolicy& policy, const Instance& instance, std::size_t steps) {
  steps = std::min(steps, instance.size());
  std::vector<Op> ops;
  ops.reserve(steps);
  Bit acc = 0;
  for (std::size_t pos = 0; pos < steps; ++pos) {
    const Op op = policy(PolicyView{instance, pos, acc, ops});
    if (op == Op::XOR) acc ^= instance.bits[pos];
    ops.push_back(op);
  }
  return ops;
}

DecisionPolicy greedy_policy() {
  return [](const PolicyView& view) { return view.acc != view.instance.target ? Op::XOR : Op::NOP; };
}

SolveOutcome solve_backtracking(const Instance& instance, std::uint64_t max_steps) {
  if (max_steps < 1) throw ContractViolation("solve_backtracking: max_steps must be >= 1");
  const auto start = Clock::now();
  const std::size_t n = instance.size();
  const auto required = checkpoint_table(instance);

  // Explicit stack replacing the recursive Search(pos, acc). `stage` counts
  // how many children of the frame have been entered.
  struct Frame {
    std::size_t pos;
    Bit acc;
    std::uint8_t stage;
  };
  std::vector<Frame> stack;
  stack.reserve(n + 1);
  std::vector<Op> ops(n, Op::NOP);
  std::uint64_t steps = 0;
  bool timed_out = false;
  bool found = false;

  // Entering a node: returns true when the node is a leaf that decides the
  // search (accept) and false when it is rejected; otherwise pushes a frame.
  auto enter = [&](std::size_t pos, Bit acc) -> std::optional<bool> {
    if (steps >= max_steps) {
      timed_out = true;
      return false;
    }
    ++steps;
    // Checked before the base case so a checkpoint at position n is honoured.
    if (required[pos] >= 0 && acc != static_cast<Bit>(required[pos])) return false;
    if (pos == n) return acc == instance.target;
    stack.push_back({pos, acc, 0});
    return std::nullopt;
  };

  if (auto leaf = enter(0, 0)) found = *leaf;
  while (!stack.empty() && !found) {
    Frame& top = stack.back();
    if (top.stage == 2) {
      stack.pop_back();
      continue;
    }
    const Op op = top.stage == 0 ? Op::NOP : Op::XOR;
    ++top.stage;
    ops[top.pos] = op;
    const Bit next_acc = op == Op::XOR ? Bit(top.acc ^ instance.bits[top.pos]) : top.acc;
    if (auto leaf = enter(top.pos + 1, next_acc)) {
      if (*leaf) found = true;
    }
  }

  SolveOutcome out;
  out.nodes_explored = steps;
  if (found) {
    out.status = SolveStatus::Solved;
    out.ops = std::move(ops);
  } else {
    out.status = timed_out ? SolveStatus::Timeout : SolveStatus::Exhausted;
  }
  return finish(instance, std::move(out), start);
}

SolveOutcome solve_random(const Instance& instance, Xoshiro256& rng) {
  const auto start = Clock::now();
  std::vector<Op> ops(instance.size());
  for (auto& op : ops) op = rng.bit() ? Op::XOR : Op::NOP;
  return finish(instance, grade_attempt(instance, std::move(ops), instance.size()), start);
}

SolveOutcome solve_greedy(const Instance& instance) {
  const auto start = Clock::now();
  auto ops = rollout(greedy_policy(), instance, instance.size());
  return finish(instance, grade_attempt(instance, std::move(ops), instance.size()), start);
}

SolveOutcome solve_beam(const Instance& instance, const BeamConfig& config) {
  if (config.beam_size < 1) throw ContractViolation("solve_beam: beam size must be >= 1");
  if (config.scoring == BeamScoring::PolicyLogProb && !config.log_prob) {
    throw ContractViolation("solve_beam: PolicyLogProb scoring needs a log-probability source");
  }
  const auto start = Clock::now();
  const std::size_t n = instance.size();
  const auto required = checkpoint_table(instance);

  struct Entry {
    Bit acc;
    double score;
  };
  struct Link {
    std::uint32_t parent;
    Op op;
  };
  // Beam entries are kept in lexicographic order of their paths, so children
  // generated parent-by-parent, NOP before XOR, come out lexicographically
  // sorted as well.
  std::vector<Entry> beam{{0, 0.0}};
  std::vector<std::vector<Link>> history;
  history.reserve(n);

  struct Candidate {
    std::uint32_t parent;
    Op op;
    Bit acc;
    double score;
  };
  std::vector<Candidate> candidates;
  std::vector<std::uint32_t> order;
  std::uint64_t nodes = 0;

  for (std::size_t pos = 0; pos < n; ++pos) {
    candidates.clear();
    const std::size_t landing = pos + 1;
    for (std::uint32_t i = 0; i < beam.size(); ++i) {
      std::pair<double, double> logp{0.0, 0.0};
      if (config.scoring == BeamScoring::PolicyLogProb) logp = config.log_prob(instance, pos, beam[i].acc);
      for (Op op : {Op::NOP, Op::XOR}) {
        ++nodes;
        const Bit acc = op == Op::XOR ? Bit(beam[i].acc ^ instance.bits[pos]) : beam[i].acc;
        if (required[landing] >= 0 && acc != static_cast<Bit>(required[landing])) continue;
        if (landing == n && acc != instance.target) continue;
        double score = beam[i].score;
        if (config.scoring == BeamScoring::CheckpointsSatisfied) {
          if (required[landing] >= 0) score += 1.0;
        } else {
          score += op == Op::XOR ? logp.first : logp.second;
        }
        candidates.push_back({i, op, acc, score});
      }
    }
    if (candidates.empty()) {
      SolveOutcome out;
      out.status = SolveStatus::Exhausted;
      out.nodes_explored = nodes;
      out.failed_at = landing;
      return finish(instance, std::move(out), start);
    }
    order.resize(candidates.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return candidates[a].score > candidates[b].score;
    });
    if (order.size() > config.beam_size) order.resize(config.beam_size);
    std::sort(order.begin(), order.end());  // back to lexicographic order

    std::vector<Entry> next;
    std::vector<Link> links;
    next.reserve(order.size());
    links.reserve(order.size());
    for (auto idx : order) {
      next.push_back({candidates[idx].acc, candidates[idx].score});
      links.push_back({candidates[idx].parent, candidates[idx].op});
    }
    beam = std::move(next);
    history.push_back(std::move(links));
  }

  // Best survivor: highest score, lexicographically smallest among ties.
  std::uint32_t best = 0;
  for (std::uint32_t i = 1; i < beam.size(); ++i) {
    if (beam[i].score > beam[best].score) best = i;
  }
  SolveOutcome out;
  out.ops.resize(n);
  for (std::size_t pos = n; pos-- > 0;) {
    const Link& link = history[pos][best];
    out.ops[pos] = link.op;
    best = link.parent;
  }
  out.status = SolveStatus::Solved;
  out.nodes_explored = nodes;
  return finish(instance, std::move(out), start);
}

SolveOutcome solve_segments(const Instance& instance) {
  const auto start = Clock::now();
  const std::size_t n = instance.size();
  std::vector<Checkpoint> constraints = instance.checkpoints;
  constraints.push_back({n, instance.target});

  SolveOutcome out;
  out.ops.assign(n, Op::NOP);
  out.nodes_explored = n;
  std::size_t prev_pos = 0;
  Bit prev_acc = 0;
  for (const auto& c : constraints) {
    const Bit delta = c.required ^ prev_acc;
    if (delta) {
      // 1-based positions (prev_pos, c.position] are bits[prev_pos .. c.position-1].
      std::size_t i = prev_pos;
      while (i < c.position && instance.bits[i] == 0) ++i;
      if (i == c.position) {
        out.ops.clear();
        out.status = SolveStatus::Exhausted;
        out.failed_at = c.position;
        return finish(instance, std::move(out), start);
      }
      out.ops[i] = Op::XOR;
    }
    prev_pos = c.position;
    prev_acc = c.required;
  }
  out.status = SolveStatus::Solved;
  return finish(instance, std::move(out), start);
}

}  // namespace openxor
