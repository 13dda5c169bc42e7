#include <chrono>
#include <cmath>
#include <cstring>
#include <memory>

#include <fmt/format.h>
#include <json.hpp>

#include "openlm_internal.hpp"
#include "openxor/instance_io.hpp"
#include "openxor/openlm.hpp"
#include "openxor/rng.hpp"

namespace openxor::lm {

std::string_view to_string(Teacher teacher) {
  switch (teacher) {
    case Teacher::GroundTruth: return "ground_truth";
    case Teacher::Backtracking: return "backtracking";
    case Teacher::Segments: return "segments";
  }
  return "unknown";
}

Teacher parse_teacher(std::string_view text) {
  for (auto t : {Teacher::GroundTruth, Teacher::Backtracking, Teacher::Segments}) {
    if (to_string(t) == text) return t;
  }
  throw ContractViolation(fmt::format("unknown teacher '{}'", text));
}

std::vector<Instance> relabel(std::vector<Instance> dataset, Teacher teacher) {
  if (teacher == Teacher::GroundTruth) return dataset;
  for (auto& inst : dataset) {
    const SolveOutcome outcome =
        teacher == Teacher::Backtracking ? solve_backtracking(inst) : solve_segments(inst);
    if (!outcome.solved()) {
      throw ContractViolation(fmt::format("teacher {} could not solve {} ({})", to_string(teacher), inst.id,
                                          to_string(outcome.status)));
    }
    inst.ground_truth = outcome.ops;
  }
  return dataset;
}

TrainResult train(const std::vector<Instance>& dataset, const TrainConfig& config,
                  const std::function<void(std::size_t, double)>& on_epoch) {
  if (dataset.empty()) throw ContractViolation("train: empty dataset");
  if (config.epochs < 1) throw ContractViolation("train: epochs must be >= 1");
  if (!(config.learning_rate > 0.0) || config.weight_decay < 0.0) {
    throw ContractViolation("train: learning rate must be positive and weight decay non-negative");
  }
  const std::vector<Instance> labelled = relabel(dataset, config.teacher);
  for (const auto& inst : labelled) {
    if (!inst.ground_truth) throw ContractViolation(fmt::format("train: instance {} has no ground truth", inst.id));
  }

  TrainResult result;
  result.params = init_params(config.seed, config.shape);
  AdamWState state;
  const AdamWConfig opt{config.learning_rate, config.weight_decay};
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double total = 0.0;
    std::size_t decisions = 0;
    for (const auto& inst : labelled) {
      LossGrad lg;
      try {
        lg = loss_and_grad(result.params, inst);
        adamw_step(result.params.values, lg.grad, state, opt);
      } catch (const NumericError& e) {
        throw NumericError(fmt::format("epoch {}, instance {}: {}", epoch + 1, inst.id, e.what()));
      }
      total += lg.loss;
      decisions += lg.steps;
    }
    const double mean = total / static_cast<double>(std::max<std::size_t>(decisions, 1));
    result.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch + 1, mean);
  }
  return result;
}

namespace {

struct Attempt {
  std::vector<Op> ops;
  std::optional<std::size_t> failed_at;
  bool exact = false;
};

template <class Choose>
Attempt roll(const PolicyParams& params, const FeatureContext& ctx, Choose&& choose) {
  const Instance& inst = ctx.instance();
  const auto required = checkpoint_table(inst);
  detail::Activations act;
  Attempt a;
  a.ops.reserve(inst.size());
  Bit acc = 0;
  for (std::size_t pos = 0; pos < inst.size(); ++pos) {
    const Features x = ctx.featurize(pos, acc);
    detail::forward(params, x, act);
    const Op op = choose(act.probs[0], act.probs[1]);
    a.ops.push_back(op);
    if (op == Op::XOR) acc ^= inst.bits[pos];
    const std::size_t landed = pos + 1;
    if (!a.failed_at && required[landed] >= 0 && acc != static_cast<Bit>(required[landed])) {
      a.failed_at = landed;
    }
  }
  if (!a.failed_at && acc != inst.target) a.failed_at = inst.size();
  a.exact = !a.failed_at;
  return a;
}

}  // namespace

SolveOutcome infer(const PolicyParams& params, const Instance& instance, const InferOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (params.shape.input != kFeatureDim || params.values.size() != params.shape.param_count()) {
    throw ContractViolation("infer: parameter shape mismatch");
  }
  const FeatureContext ctx(instance);
  Attempt attempt;
  std::uint64_t nodes = 0;
  if (options.mode == InferMode::Greedy) {
    attempt = roll(params, ctx, [](double p_xor, double p_nop) { return p_xor > p_nop ? Op::XOR : Op::NOP; });
    nodes = instance.size();
  } else {
    Xoshiro256 rng(options.seed);
    for (std::size_t round = 0; round <= options.retries; ++round) {
      attempt = roll(params, ctx, [&rng](double p_xor, double) { return rng.uniform() < p_xor ? Op::XOR : Op::NOP; });
      nodes += instance.size();
      if (attempt.exact) break;
    }
  }
  SolveOutcome out;
  out.status = attempt.exact ? SolveStatus::Solved : SolveStatus::Failed;
  out.failed_at = attempt.failed_at;
  out.ops = std::move(attempt.ops);
  out.nodes_explored = nodes;
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (out.solved() && !verify(instance, out.ops).exact) throw std::logic_error("infer: unsound success");
  return out;
}

OpLogProb policy_log_prob(const PolicyParams& params) {
  // Feature tables are rebuilt only when the instance changes.
  struct Cache {
    const Instance* instance = nullptr;
    std::unique_ptr<FeatureContext> ctx;
    detail::Activations act;
  };
  auto cache = std::make_shared<Cache>();
  return [params, cache](const Instance& inst, std::size_t pos, Bit acc) {
    if (cache->instance != &inst) {
      cache->ctx = std::make_unique<FeatureContext>(inst);
      cache->instance = &inst;
    }
    const Features x = cache->ctx->featurize(pos, acc);
    detail::forward(params, x, cache->act);
    const double lx = cache->act.logits[0] - cache->act.log_norm;
    const double ln = cache->act.logits[1] - cache->act.log_norm;
    return std::pair{lx, ln};
  };
}

// ---------------------------------------------------------------------------
// Model file

namespace {

constexpr std::string_view kModelFormat = "openlm-policy";
constexpr int kModelVersion = 1;

void put_le64(std::string& out, double value) {
  std::uint64_t bits;
  std::memcpy(&bits, &value, sizeof bits);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

double get_le64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  double value;
  std::memcpy(&value, &bits, sizeof value);
  return value;
}

}  // namespace

std::string serialize_model(const ModelFile& model) {
  const auto& p = model.params;
  if (p.values.size() != p.shape.param_count()) throw ContractViolation("serialize_model: shape mismatch");
  nlohmann::ordered_json h;
  h["format"] = kModelFormat;
  h["version"] = kModelVersion;
  h["dtype"] = "f64le";
  h["activation"] = "tanh";
  h["block_order"] = {"w_embed", "b_embed", "w_hidden", "b_hidden", "w_out", "b_out"};
  h["matrix_layout"] = "row-major [out][in]";
  h["shape"] = {{"input", p.shape.input}, {"embed", p.shape.embed}, {"hidden", p.shape.hidden},
                {"output", p.shape.output}};
  h["param_count"] = p.values.size();
  nlohmann::ordered_json layout = nlohmann::ordered_json::array();
  for (auto name : feature_names()) layout.push_back(std::string(name));
  h["feature_layout"] = layout;
  h["window"] = kWindow;
  h["ones_cap"] = kOnesCap;
  h["train"] = {{"epochs", model.config.epochs},
                {"learning_rate", model.config.learning_rate},
                {"weight_decay", model.config.weight_decay},
                {"seed", model.config.seed},
                {"teacher", std::string(to_string(model.config.teacher))},
                {"optimizer", "adamw(0.9,0.999,1e-8)"},
                {"epoch_loss", model.epoch_loss}};
  std::string out = h.dump();
  out.push_back('\n');
  out.reserve(out.size() + 8 * p.values.size());
  for (double v : p.values) put_le64(out, v);
  return out;
}

ModelFile deserialize_model(std::string_view bytes) {
  const auto newline = bytes.find('\n');
  if (newline == std::string_view::npos) throw ParseError("model file: missing header line");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(bytes.substr(0, newline));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("model file: bad header: {}", e.what()));
  }
  if (h.value("format", "") != kModelFormat || h.value("version", 0) != kModelVersion) {
    throw ParseError("model file: unsupported format or version");
  }
  ModelFile model;
  try {
    PolicyShape shape;
    shape.input = h.at("shape").at("input").get<std::size_t>();
    shape.embed = h.at("shape").at("embed").get<std::size_t>();
    shape.hidden = h.at("shape").at("hidden").get<std::size_t>();
    shape.output = h.at("shape").at("output").get<std::size_t>();
    if (shape.input != kFeatureDim || shape.output != 2) throw ParseError("model file: incompatible feature layout");
    const auto& names = h.at("feature_layout");
    for (std::size_t i = 0; i < kFeatureDim; ++i) {
      if (names.at(i).get<std::string>() != feature_names()[i]) {
        throw ParseError("model file: feature layout differs from this build");
      }
    }
    model.params = PolicyParams(shape);
    const auto& t = h.at("train");
    model.config.epochs = t.at("epochs").get<std::size_t>();
    model.config.learning_rate = t.at("learning_rate").get<double>();
    model.config.weight_decay = t.at("weight_decay").get<double>();
    model.config.seed = t.at("seed").get<std::uint64_t>();
    model.config.teacher = parse_teacher(t.at("teacher").get<std::string>());
    model.config.shape = shape;
    model.epoch_loss = t.at("epoch_loss").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("model file: bad header: {}", e.what()));
  }
  const auto blob = bytes.substr(newline + 1);
  const std::size_t count = model.params.values.size();
  if (blob.size() != 8 * count) {
    throw ParseError(fmt::format("model file: expected {} weight bytes, found {}", 8 * count, blob.size()));
  }
  const auto* raw = reinterpret_cast<const unsigned char*>(blob.data());
  for (std::size_t i = 0; i < count; ++i) {
    const double v = get_le64(raw + 8 * i);
    if (!std::isfinite(v)) throw ParseError("model file: non-finite weight");
    model.params.values[i] = v;
  }
  return model;
}

void save_model(const std::filesystem::path& path, const ModelFile& model) {
  write_file_atomic(path, serialize_model(model));
}

ModelFile load_model(const std::filesystem::path& path) { return deserialize_model(read_file(path)); }

}  // namespace openxor::lm
