#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "openlm_internal.hpp"
#include "openxor/openlm.hpp"
#include "openxor/rng.hpp"

namespace openxor::lm {

const std::array<std::string_view, kFeatureDim>& feature_names() {
  static const std::array<std::string_view, kFeatureDim> names = {
      "acc",        "pos_frac",     "bit+1",       "bit+2",        "bit+3",
      "bit+4",      "bit+5",        "bit+6",       "has_next_cp",  "next_dist_frac",
      "next_value", "owed_parity",  "ones_to_next_capped", "target", "acc_xor_target"};
  return names;
}

FeatureContext::FeatureContext(const Instance& instance)
    : instance_(&instance),
      ones_before_(instance.size() + 1, 0),
      next_checkpoint_(instance.size() + 1, 0) {
  const std::size_t n = instance.size();
  for (std::size_t i = 0; i < n; ++i) ones_before_[i + 1] = ones_before_[i] + instance.bits[i];
  std::size_t idx = 0;
  const auto& cps = instance.checkpoints;
  for (std::size_t pos = 0; pos <= n; ++pos) {
    while (idx < cps.size() && cps[idx].position <= pos) ++idx;
    next_checkpoint_[pos] = static_cast<std::uint32_t>(idx);
  }
}

Features FeatureContext::featurize(std::size_t pos, Bit acc) const {
  const Instance& inst = *instance_;
  const std::size_t n = inst.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  Features f{};
  f[0] = acc;
  f[1] = static_cast<double>(pos) * inv_n;
  for (std::size_t j = 0; j < kWindow; ++j) f[2 + j] = pos + j < n ? inst.bits[pos + j] : 0.0;
  const std::size_t idx = next_checkpoint_[pos];
  const bool has_next = idx < inst.checkpoints.size();
  const std::size_t p_next = has_next ? inst.checkpoints[idx].position : n;
  const Bit v_next = has_next ? inst.checkpoints[idx].required : inst.target;
  const std::size_t ones = ones_before_[p_next] - ones_before_[pos];
  f[8] = has_next ? 1.0 : 0.0;
  f[9] = static_cast<double>(p_next - pos) * inv_n;
  f[10] = v_next;
  f[11] = acc ^ v_next;
  f[12] = static_cast<double>(std::min(ones, kOnesCap)) / static_cast<double>(kOnesCap);
  f[13] = inst.target;
  f[14] = acc ^ inst.target;
  return f;
}

Features featurize(const Instance& instance, std::size_t pos, Bit acc) {
  if (pos > instance.size()) throw ContractViolation("featurize: pos beyond n");
  return FeatureContext(instance).featurize(pos, acc);
}

PolicyParams init_params(std::uint64_t seed, PolicyShape shape) {
  PolicyParams p(shape);
  Xoshiro256 rng(seed);
  auto fill = [&rng](std::span<double> block, std::size_t fan_in) {
    const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
    for (double& w : block) w = (2.0 * rng.uniform() - 1.0) * bound;
  };
  fill(p.w_embed(), shape.input);
  fill(p.b_embed(), shape.input);
  fill(p.w_hidden(), shape.embed);
  fill(p.b_hidden(), shape.embed);
  fill(p.w_out(), shape.hidden);
  fill(p.b_out(), shape.hidden);
  return p;
}

namespace detail {

void forward(const PolicyParams& params, std::span<const double> x, Activations& act) {
  const auto& s = params.shape;
  const double* w = params.values.data();
  act.embed.resize(s.embed);
  act.hidden.resize(s.hidden);
  act.logits.resize(s.output);
  act.probs.resize(s.output);

  const double* we = w;
  const double* be = w + params.off_b_embed();
  for (std::size_t i = 0; i < s.embed; ++i) {
    double sum = be[i];
    const double* row = we + i * s.input;
    for (std::size_t j = 0; j < s.input; ++j) sum += row[j] * x[j];
    act.embed[i] = std::tanh(sum);
  }
  const double* wh = w + params.off_w_hidden();
  const double* bh = w + params.off_b_hidden();
  for (std::size_t i = 0; i < s.hidden; ++i) {
    double sum = bh[i];
    const double* row = wh + i * s.embed;
    for (std::size_t j = 0; j < s.embed; ++j) sum += row[j] * act.embed[j];
    act.hidden[i] = std::tanh(sum);
  }
  const double* wo = w + params.off_w_out();
  const double* bo = w + params.off_b_out();
  double top = -INFINITY;
  for (std::size_t i = 0; i < s.output; ++i) {
    double sum = bo[i];
    const double* row = wo + i * s.hidden;
    for (std::size_t j = 0; j < s.hidden; ++j) sum += row[j] * act.hidden[j];
    act.logits[i] = sum;
    top = std::max(top, sum);
  }
  double z = 0.0;
  for (std::size_t i = 0; i < s.output; ++i) z += std::exp(act.logits[i] - top);
  act.log_norm = top + std::log(z);
  for (std::size_t i = 0; i < s.output; ++i) act.probs[i] = std::exp(act.logits[i] - act.log_norm);
  if (!std::isfinite(act.log_norm)) throw NumericError("policy_forward: non-finite logits");
}

void backward(const PolicyParams& params, std::span<const double> x, const Activations& act,
              std::size_t label, std::span<double> grad, Scratch& scratch) {
  const auto& s = params.shape;
  const double* w = params.values.data();
  scratch.d_hidden.assign(s.hidden, 0.0);
  scratch.d_embed.assign(s.embed, 0.0);

  // d loss / d logits = probs - onehot(label)
  const double* wo = w + params.off_w_out();
  double* g_wo = grad.data() + params.off_w_out();
  double* g_bo = grad.data() + params.off_b_out();
  for (std::size_t i = 0; i < s.output; ++i) {
    const double dz = act.probs[i] - (i == label ? 1.0 : 0.0);
    g_bo[i] += dz;
    double* grow = g_wo + i * s.hidden;
    const double* row = wo + i * s.hidden;
    for (std::size_t j = 0; j < s.hidden; ++j) {
      grow[j] += dz * act.hidden[j];
      scratch.d_hidden[j] += dz * row[j];
    }
  }

  const double* wh = w + params.off_w_hidden();
  double* g_wh = grad.data() + params.off_w_hidden();
  double* g_bh = grad.data() + params.off_b_hidden();
  for (std::size_t i = 0; i < s.hidden; ++i) {
    const double dpre = scratch.d_hidden[i] * (1.0 - act.hidden[i] * act.hidden[i]);
    g_bh[i] += dpre;
    double* grow = g_wh + i * s.embed;
    const double* row = wh + i * s.embed;
    for (std::size_t j = 0; j < s.embed; ++j) {
      grow[j] += dpre * act.embed[j];
      scratch.d_embed[j] += dpre * row[j];
    }
  }

  double* g_we = grad.data();
  double* g_be = grad.data() + params.off_b_embed();
  for (std::size_t i = 0; i < s.embed; ++i) {
    const double dpre = scratch.d_embed[i] * (1.0 - act.embed[i] * act.embed[i]);
    g_be[i] += dpre;
    double* grow = g_we + i * s.input;
    for (std::size_t j = 0; j < s.input; ++j) grow[j] += dpre * x[j];
  }
}

}  // namespace detail

OpProbs policy_forward(const PolicyParams& params, std::span<const double> features) {
  if (features.size() != params.shape.input || params.shape.output != 2 ||
      params.values.size() != params.shape.param_count()) {
    throw ContractViolation("policy_forward: shape mismatch");
  }
  detail::Activations act;
  detail::forward(params, features, act);
  return {act.probs[0], act.probs[1]};
}

LossGrad loss_and_grad(const PolicyParams& params, const Instance& instance) {
  if (!instance.ground_truth) {
    throw ContractViolation(fmt::format("loss_and_grad: instance {} has no ground truth", instance.id));
  }
  const auto& ops = *instance.ground_truth;
  if (ops.size() != instance.size()) throw ContractViolation("loss_and_grad: ground truth length != n");
  if (params.shape.input != kFeatureDim) throw ContractViolation("loss_and_grad: feature width mismatch");

  LossGrad out;
  out.grad.assign(params.values.size(), 0.0);
  const FeatureContext ctx(instance);
  detail::Activations act;
  detail::Scratch scratch;
  Bit acc = 0;
  for (std::size_t pos = 0; pos < ops.size(); ++pos) {
    const Features x = ctx.featurize(pos, acc);
    detail::forward(params, x, act);
    const std::size_t label = ops[pos] == Op::XOR ? 0 : 1;
    out.loss += act.log_norm - act.logits[label];
    detail::backward(params, x, act, label, out.grad, scratch);
    if (ops[pos] == Op::XOR) acc ^= instance.bits[pos];  // teacher forcing
  }
  out.steps = ops.size();
  if (!std::isfinite(out.loss)) throw NumericError(fmt::format("loss_and_grad: non-finite loss on {}", instance.id));
  return out;
}

void adamw_step(std::span<double> params, std::span<const double> grad, AdamWState& state,
                const AdamWConfig& config) {
  if (params.size() != grad.size()) throw ContractViolation("adamw_step: shape mismatch");
  for (double g : grad) {
    if (!std::isfinite(g)) throw NumericError("adamw_step: non-finite gradient");
  }
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size()) throw ContractViolation("adamw_step: optimizer state shape mismatch");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  const double lr = config.learning_rate;
  const double decay = lr * config.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] = params[i] - lr * (m_hat / (std::sqrt(v_hat) + config.eps)) - decay * params[i];
  }
}

}  // namespace openxor::lm
