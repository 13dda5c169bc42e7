#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "openxor/solvers.hpp"
#include "openxor/xor_core.hpp"

namespace openxor::lm {

// Non-finite values appeared in logits, losses or gradients.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// State features
//
// Layout (every component lies in [0, 1]):
//   0        acc
//   1        pos / n
//   2..7     bits pos+1 .. pos+6 (1-based), zero past the end
//   8        1 if a checkpoint lies strictly ahead of pos
//   9        (p_next - pos) / n
//   10       v_next
//   11       acc XOR v_next (parity still owed to the next constraint)
//   12       min(#1-bits in (pos, p_next], 8) / 8
//   13       target
//   14       acc XOR target
// When no checkpoint lies ahead, the target acts as the next constraint:
// p_next = n and v_next = target.

inline constexpr std::size_t kWindow = 6;
inline constexpr std::size_t kFeatureDim = 9 + kWindow;
inline constexpr std::size_t kOnesCap = 8;

using Features = std::array<double, kFeatureDim>;

const std::array<std::string_view, kFeatureDim>& feature_names();

// Per-instance lookup tables so featurizing a state is O(1).
class FeatureContext {
 public:
  explicit FeatureContext(const Instance& instance);

  const Instance& instance() const { return *instance_; }
  Features featurize(std::size_t pos, Bit acc) const;

 private:
  const Instance* instance_;
  std::vector<std::uint32_t> ones_before_;  // ones_before_[i] = #1-bits among bits[0, i)
  std::vector<std::uint32_t> next_checkpoint_;  // first checkpoint index with position > pos
};

// Convenience for one-off states; prefer FeatureContext in loops.
Features featurize(const Instance& instance, std::size_t pos, Bit acc);

// ---------------------------------------------------------------------------
// Policy network: features -> tanh(embed) -> tanh(hidden) -> 2 logits -> softmax.
// Logit 0 scores XOR, logit 1 scores NOP.

struct PolicyShape {
  std::size_t input = kFeatureDim;
  std::size_t embed = 64;
  std::size_t hidden = 128;
  std::size_t output = 2;

  std::size_t param_count() const {
    return embed * input + embed + hidden * embed + hidden + output * hidden + output;
  }
  friend bool operator==(const PolicyShape&, const PolicyShape&) = default;
};

// All weights in one flat buffer, blocks in the order
// W_embed [embed][input], b_embed, W_hidden [hidden][embed], b_hidden,
// W_out [output][hidden], b_out (row-major, output index first).
struct PolicyParams {
  PolicyShape shape;
  std::vector<double> values;

  PolicyParams() = default;
  explicit PolicyParams(PolicyShape s) : shape(s), values(s.param_count(), 0.0) {}

  std::span<double> w_embed() { return block(0, shape.embed * shape.input); }
  std::span<double> b_embed() { return block(off_b_embed(), shape.embed); }
  std::span<double> w_hidden() { return block(off_w_hidden(), shape.hidden * shape.embed); }
  std::span<double> b_hidden() { return block(off_b_hidden(), shape.hidden); }
  std::span<double> w_out() { return block(off_w_out(), shape.output * shape.hidden); }
  std::span<double> b_out() { return block(off_b_out(), shape.output); }

  std::size_t off_b_embed() const { return shape.embed * shape.input; }
  std::size_t off_w_hidden() const { return off_b_embed() + shape.embed; }
  std::size_t off_b_hidden() const { return off_w_hidden() + shape.hidden * shape.embed; }
  std::size_t off_w_out() const { return off_b_hidden() + shape.hidden; }
  std::size_t off_b_out() const { return off_w_out() + shape.output * shape.hidden; }

  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;

 private:
  std::span<double> block(std::size_t offset, std::size_t len) { return {values.data() + offset, len}; }
};

// Uniform in [-sqrt(1/fan_in), +sqrt(1/fan_in)] per layer, biases included.
PolicyParams init_params(std::uint64_t seed, PolicyShape shape = {});

struct OpProbs {
  double p_xor = 0.5;
  double p_nop = 0.5;
};

OpProbs policy_forward(const PolicyParams& params, std::span<const double> features);

// Teacher-forced sum of per-step cross entropies along instance.ground_truth,
// with its gradient (same layout as params.values).
struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
  std::size_t steps = 0;
};

LossGrad loss_and_grad(const PolicyParams& params, const Instance& instance);

// ---------------------------------------------------------------------------
// AdamW with decoupled weight decay.

struct AdamWConfig {
  double learning_rate = 1e-3;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamWState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
};

// m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2;  bias-correct both;
// theta <- theta - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * theta.
void adamw_step(std::span<double> params, std::span<const double> grad, AdamWState& state,
                const AdamWConfig& config);

// ---------------------------------------------------------------------------
// Training

// Source of the target op sequence for teacher forcing. GroundTruth uses the
// instance's stored sequence; the others relabel each instance with an exact
// solver's answer first.
enum class Teacher : std::uint8_t { GroundTruth, Backtracking, Segments };

std::string_view to_string(Teacher teacher);
Teacher parse_teacher(std::string_view text);

struct TrainConfig {
  std::size_t epochs = 5;
  double learning_rate = 1e-3;
  double weight_decay = 0.01;
  std::uint64_t seed = 0;
  Teacher teacher = Teacher::Backtracking;
  PolicyShape shape{};
};

struct TrainResult {
  PolicyParams params;
  // Per epoch: summed cross entropy divided by the number of teacher-forced
  // decisions (nats per decision).
  std::vector<double> epoch_loss;
};

// One AdamW step per instance, instances visited in dataset order every epoch.
TrainResult train(const std::vector<Instance>& dataset, const TrainConfig& config,
                  const std::function<void(std::size_t epoch, double loss)>& on_epoch = {});

// Replaces every ground truth with the chosen teacher's solution.
std::vector<Instance> relabel(std::vector<Instance> dataset, Teacher teacher);

// ---------------------------------------------------------------------------
// Inference

enum class InferMode : std::uint8_t { Greedy, Sample };

struct InferOptions {
  InferMode mode = InferMode::Greedy;
  std::uint64_t seed = 0;
  std::size_t retries = 0;  // extra sampled rollouts after a failed one
};

// Rolls the policy forward (argmax with ties to NOP, or sampling). The first
// violated checkpoint marks the attempt Failed and is recorded in failed_at;
// the rollout still runs to position n so the full attempt can be scored.
SolveOutcome infer(const PolicyParams& params, const Instance& instance, const InferOptions& options = {});

// Adapter for beam search with PolicyLogProb scoring.
OpLogProb policy_log_prob(const PolicyParams& params);

// ---------------------------------------------------------------------------
// Model file: one line of JSON header, then param_count little-endian
// IEEE-754 doubles.

struct ModelFile {
  PolicyParams params;
  TrainConfig config;
  std::vector<double> epoch_loss;
};

std::string serialize_model(const ModelFile& model);
ModelFile deserialize_model(std::string_view bytes);
void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace openxor::lm
