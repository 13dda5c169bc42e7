// openxor command-line entry point.
//
// Exit codes: 0 success, 1 runtime failure (I/O, parse, transport, numeric,
// failed validation), 2 usage error or violated precondition.

#include <cstdio>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "openxor/eval.hpp"
#include "openxor/fixpoint.hpp"
#include "openxor/generator.hpp"
#include "openxor/instance_io.hpp"
#include "openxor/llm.hpp"
#include "openxor/openlm.hpp"
#include "openxor/parallel.hpp"
#include "openxor/solvers.hpp"

namespace fs = std::filesystem;
using namespace openxor;

namespace {

void log(const std::string& line) { std::cerr << line << '\n'; }

std::string ops_summary(const std::vector<eval::ResultRecord>& records) {
  std::map<std::string_view, std::size_t> counts;
  for (const auto& r : records) ++counts[to_string(r.outcome.status)];
  std::string out;
  for (const auto& [status, c] : counts) out += fmt::format("{}{}={}", out.empty() ? "" : " ", status, c);
  return out;
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  GenConfig config = [] {
    GenConfig c;
    c.count = 100;
    return c;
  }();
  fs::path out;
};

int run_generate(const GenerateArgs& a) {
  const Dataset ds = generate_dataset(a.config);
  write_jsonl(a.out, ds.instances);
  std::size_t cps = 0;
  for (const auto& inst : ds.instances) cps += inst.checkpoints.size();
  log(fmt::format("wrote {} instances (n={}, k={}) to {}; digest {}", ds.instances.size(), a.config.n,
                  ds.instances.empty() ? 0 : cps / ds.instances.size(), a.out.string(),
                  eval::fingerprint_dataset(ds.instances, a.config.seed).digest));
  return 0;
}

// ---------------------------------------------------------------------------

struct SolveArgs {
  fs::path in, out, model;
  std::string method = "backtracking";
  std::size_t beam_size = 8;
  std::string scoring = "checkpoints";
  std::uint64_t max_steps = kDefaultMaxSteps;
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  std::string mode = "greedy";
  std::size_t retries = 0;
  std::size_t jobs = 0;
};

std::function<SolveOutcome(const Instance&, std::size_t index, std::size_t trial)> make_solver(const SolveArgs& a) {
  if (a.method == "backtracking") {
    return [steps = a.max_steps](const Instance& inst, std::size_t, std::size_t) {
      return solve_backtracking(inst, steps);
    };
  }
  if (a.method == "random") {
    return [seed = a.seed](const Instance& inst, std::size_t i, std::size_t t) {
      Xoshiro256 rng(derive_seed(derive_seed(seed, t), i));
      return solve_random(inst, rng);
    };
  }
  if (a.method == "greedy") return [](const Instance& inst, std::size_t, std::size_t) { return solve_greedy(inst); };
  if (a.method == "segments") return [](const Instance& inst, std::size_t, std::size_t) { return solve_segments(inst); };

  std::optional<lm::PolicyParams> params;
  if (a.method == "openlm" || (a.method == "beam" && a.scoring == "policy")) {
    if (a.model.empty()) throw ContractViolation(fmt::format("--model is required for method {}", a.method));
    params = lm::load_model(a.model).params;
  }
  if (a.method == "beam") {
    if (a.scoring != "checkpoints" && a.scoring != "policy") {
      throw ContractViolation("--scoring must be 'checkpoints' or 'policy'");
    }
    const bool policy = a.scoring == "policy";
    return [policy, params, size = a.beam_size](const Instance& inst, std::size_t, std::size_t) {
      BeamConfig cfg{size, policy ? BeamScoring::PolicyLogProb : BeamScoring::CheckpointsSatisfied, {}};
      if (policy) cfg.log_prob = lm::policy_log_prob(*params);
      return solve_beam(inst, cfg);
    };
  }
  if (a.method == "openlm") {
    if (a.mode != "greedy" && a.mode != "sample") throw ContractViolation("--mode must be 'greedy' or 'sample'");
    const bool sample = a.mode == "sample";
    return [params, sample, seed = a.seed, retries = a.retries](const Instance& inst, std::size_t i, std::size_t t) {
      lm::InferOptions opt;
      opt.mode = sample ? lm::InferMode::Sample : lm::InferMode::Greedy;
      opt.seed = derive_seed(derive_seed(seed, t), i);
      opt.retries = retries;
      return lm::infer(*params, inst, opt);
    };
  }
  throw ContractViolation(fmt::format("unknown method '{}'", a.method));
}

int run_solve(const SolveArgs& a) {
  if (a.trials < 1) throw ContractViolation("--trials must be >= 1");
  const auto instances = read_jsonl(a.in);
  const auto solver = make_solver(a);
  // Trial-major: all instances for trial 0, then trial 1, ...
  std::vector<eval::ResultRecord> records(instances.size() * a.trials);
  parallel_for(records.size(), a.jobs, [&](std::size_t slot) {
    const std::size_t t = slot / instances.size();
    const std::size_t i = slot % instances.size();
    records[slot] = {instances[i].id, solver(instances[i], i, t)};
  });
  eval::write_results(a.out, records);
  log(fmt::format("{}: {} results to {} ({})", a.method, records.size(), a.out.string(), ops_summary(records)));
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  fs::path in, out;
  lm::TrainConfig config;
  std::string teacher = "backtracking";
};

int run_train(TrainArgs a) {
  a.config.teacher = lm::parse_teacher(a.teacher);
  const auto dataset = read_jsonl(a.in);
  auto result = lm::train(dataset, a.config, [&](std::size_t epoch, double loss) {
    log(fmt::format("epoch {}/{}: loss {:.6f} nats/decision", epoch, a.config.epochs, loss));
  });
  lm::save_model(a.out, {std::move(result.params), a.config, result.epoch_loss});
  log(fmt::format("saved {} parameters to {}", a.config.shape.param_count(), a.out.string()));
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  fs::path in, out, csv;
  std::vector<std::string> results;  // LABEL=PATH
  std::optional<std::uint64_t> seed;
};

// A result file may hold T records per id (T independent trials); the j-th
// occurrence of each id belongs to trial j.
std::vector<std::vector<eval::ResultRecord>> split_trials(std::vector<eval::ResultRecord> records) {
  std::map<std::string, std::size_t> seen;
  std::vector<std::vector<eval::ResultRecord>> trials;
  for (auto& r : records) {
    const std::size_t j = seen[r.id]++;
    if (trials.size() <= j) trials.resize(j + 1);
    trials[j].push_back(std::move(r));
  }
  return trials;
}

int run_eval(const EvalArgs& a) {
  const auto instances = read_jsonl(a.in);
  eval::EvalReport report;
  report.dataset = eval::fingerprint_dataset(instances, a.seed);
  for (const auto& spec : a.results) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw ContractViolation(fmt::format("--results expects LABEL=PATH, got '{}'", spec));
    const std::string label = spec.substr(0, eq);
    const auto trials = split_trials(eval::read_results(spec.substr(eq + 1)));
    report.rows.push_back({label, eval::score_trials(instances, trials)});
    if (trials.size() > 1) report.notes.push_back(fmt::format("{} pooled over {} trials per instance", label, trials.size()));
  }
  report.notes.push_back("accuracy columns other than Exact are over completed attempts");
  const std::string md = eval::render_markdown(report);
  if (a.out.empty()) {
    std::cout << md;
  } else {
    write_file_atomic(a.out, md);
  }
  if (!a.csv.empty()) write_file_atomic(a.csv, eval::render_csv(report));
  return 0;
}

// ---------------------------------------------------------------------------

struct ValidateArgs {
  std::string law;
  fs::path in;
  std::size_t k = 8, trials = 1000, beam_size = 4, n = 12, spacing = 32;
  bool dense = false;
  std::uint64_t seed = 0;
};

void print_bound(const eval::BoundReport& r) {
  std::cout << fmt::format("law={} k={}{} trials={} successes={} rate={:.5f} wilson95=[{:.5f}, {:.5f}] "
                           "bound={:.5f} slack={} -> {}\n",
                           r.law, r.k, r.beam_size ? fmt::format(" B={}", r.beam_size) : "", r.trials, r.successes,
                           r.rate, r.interval.low, r.interval.high, r.bound, r.slack, r.pass ? "PASS" : "FAIL");
}

int run_validate(const ValidateArgs& a) {
  const eval::BoundOptions opt{a.seed, a.spacing, false};
  if (a.law == "random") {
    const auto r = eval::validate_random_bound(a.k, a.trials, opt);
    print_bound(r);
    return r.pass ? 0 : 1;
  }
  if (a.law == "beam") {
    const auto r = eval::validate_beam_bound(a.beam_size, a.k, a.trials, {a.seed, a.spacing, !a.dense});
    print_bound(r);
    return r.pass ? 0 : 1;
  }
  if (a.law == "density") {
    const auto r = eval::validate_density(a.n, a.k, a.seed);
    std::cout << fmt::format(
        "law=density n={} k={} sequences={} valid(checkpoints)={} ({:.6f}, closed form {:.6f}{}) "
        "valid(with target)={} ({:.6f}, closed form {:.6f}{}) -> {}\n",
        r.n, r.k, r.sequences, r.valid_checkpoints, r.fraction_checkpoints, r.expected_checkpoints,
        r.checkpoint_segments_ok ? "" : ", preconditions unmet", r.valid_with_target, r.fraction_with_target,
        r.expected_with_target, r.target_segment_ok ? "" : ", preconditions unmet", r.pass ? "PASS" : "FAIL");
    return r.pass ? 0 : 1;
  }
  if (a.law == "dataset") {
    if (a.in.empty()) throw ContractViolation("--in is required for --law dataset");
    const auto instances = read_jsonl(a.in);  // validates every record
    std::size_t unsolved = 0;
    for (const auto& inst : instances) unsolved += !solve_segments(inst).solved();
    std::cout << fmt::format("law=dataset instances={} unsatisfiable={} digest={} -> {}\n", instances.size(), unsolved,
                             eval::fingerprint_dataset(instances).digest, unsolved ? "FAIL" : "PASS");
    return unsolved ? 1 : 0;
  }
  throw ContractViolation(fmt::format("unknown law '{}'", a.law));
}

// ---------------------------------------------------------------------------

struct PromptArgs {
  fs::path in, out;
};

int run_prompt(const PromptArgs& a) {
  const auto instances = read_jsonl(a.in);
  fs::create_directories(a.out);
  for (const auto& inst : instances) {
    write_file_atomic(a.out / (llm::transcript_stem(inst.id) + ".txt"), llm::render_prompt(inst));
  }
  log(fmt::format("wrote {} prompts to {}", instances.size(), a.out.string()));
  return 0;
}

struct GradeArgs {
  fs::path in, transcripts, out, csv, lexicon, classes;
  std::size_t jobs = 0;
};

int run_grade(const GradeArgs& a) {
  const auto instances = read_jsonl(a.in);
  const llm::Lexicon lexicon = a.lexicon.empty() ? llm::default_lexicon() : llm::load_lexicon(a.lexicon);
  std::vector<llm::Classification> verdicts(instances.size());
  parallel_for(instances.size(), a.jobs, [&](std::size_t i) {
    verdicts[i] = llm::classify(llm::read_transcript(a.transcripts, instances[i].id), instances[i], lexicon);
  });

  eval::EvalReport report;
  report.dataset = eval::fingerprint_dataset(instances);
  std::vector<eval::ResultRecord> records;
  std::string lines;
  for (auto cls : {llm::FailureClass::Refusal, llm::FailureClass::LengthLimit,
                   llm::FailureClass::ConstraintHallucination, llm::FailureClass::FormatError,
                   llm::FailureClass::ValidAttempt}) {
    report.failure_modes[std::string(to_string(cls))] = 0;
  }
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& v = verdicts[i];
    ++report.failure_modes[std::string(to_string(v.cls))];
    eval::ResultRecord r{instances[i].id, {}};
    if (v.ops) {
      r.outcome.ops = *v.ops;
      r.outcome.status = verify(instances[i], r.outcome.ops).exact ? SolveStatus::Solved : SolveStatus::Failed;
    } else {
      r.outcome.status = SolveStatus::Failed;
    }
    records.push_back(std::move(r));
    nlohmann::ordered_json j{{"id", instances[i].id}, {"class", to_string(v.cls)}, {"rule", v.rule}};
    lines += j.dump() + "\n";
  }
  report.rows.push_back({"transcripts", eval::score(instances, records)});
  report.notes.push_back(fmt::format("lexicon version {}", lexicon.version));
  report.notes.push_back("decoding settings are those recorded in each transcript's .meta.json (submit defaults: temperature 0)");
  report.notes.push_back("accuracy columns other than Exact are over completed attempts");
  const std::string md = eval::render_markdown(report);
  if (a.out.empty()) {
    std::cout << md;
  } else {
    write_file_atomic(a.out, md);
  }
  if (!a.csv.empty()) write_file_atomic(a.csv, eval::render_csv(report));
  if (!a.classes.empty()) write_file_atomic(a.classes, lines);
  return 0;
}

struct SubmitArgs {
  fs::path in, out;
  llm::EndpointConfig endpoint;
  int max_tokens = 0;
  int timeout_s = 600;
  std::size_t jobs = 4;
  bool skip_existing = false;
};

int run_submit(SubmitArgs a) {
  if (a.max_tokens > 0) a.endpoint.max_tokens = a.max_tokens;
  a.endpoint.timeout = std::chrono::seconds(a.timeout_s);
  const auto instances = read_jsonl(a.in);
  std::atomic<std::size_t> done{0}, skipped{0};
  parallel_for(instances.size(), std::max<std::size_t>(a.jobs, 1), [&](std::size_t i) {
    const auto& inst = instances[i];
    if (a.skip_existing && fs::exists(a.out / (llm::transcript_stem(inst.id) + ".txt"))) {
      ++skipped;
      return;
    }
    const auto sub = llm::submit(inst, a.endpoint);
    llm::write_transcript(a.out, sub.transcript, sub.meta_json);
    ++done;
  });
  log(fmt::format("submitted {} prompts ({} skipped); transcripts in {}", done.load(), skipped.load(), a.out.string()));
  return 0;
}

// ---------------------------------------------------------------------------

struct FixpointArgs {
  std::string system;
  std::size_t n = 10;
  fs::path graph;
  std::size_t source = 0;
  double lambda = 0.5, offset = 0.0, x0 = 1.0, eps = 1e-9;
  bool trace = false;
};

std::string fmt_dist(double d) { return d == fixpoint::kUnreachable ? "inf" : fmt::format("{}", d); }

int run_fixpoint(const FixpointArgs& a) {
  using namespace openxor::fixpoint;
  if (a.system == "stairs") {
    const auto sys = stairs_system(a.n);
    std::vector<std::uint64_t> x0(a.n + 1, 0);
    const auto res = iterate<std::vector<std::uint64_t>>(sys, x0, [&](std::size_t t, const auto& x) {
      if (a.trace) std::cout << fmt::format("t={} {}\n", t, fmt::join(x, " "));
    });
    std::cout << fmt::format("stairs n={} ways={} iterations={} converged={}\n", a.n, res.fixed_point[a.n],
                             res.iterations, res.converged);
    return res.converged ? 0 : 1;
  }
  if (a.system == "contraction") {
    const auto res = iterate<double>(affine_contraction(a.lambda, a.offset, a.eps), a.x0, [&](std::size_t t, double x) {
      if (a.trace) std::cout << fmt::format("t={} {:.12g}\n", t, x);
    });
    std::cout << fmt::format("contraction lambda={} fixed_point={:.12g} iterations={} converged={}\n", a.lambda,
                             res.fixed_point, res.iterations, res.converged);
    return res.converged ? 0 : 1;
  }
  if (a.graph.empty()) throw ContractViolation("--graph is required for graph systems");
  const Graph g = read_edge_list(a.graph);
  if (a.source >= g.vertices) throw ContractViolation("--source is not a vertex of the graph");
  if (a.system == "bellman-ford") {
    const auto sys = bellman_ford_system(g);
    const auto res = iterate<std::vector<double>>(sys, bellman_ford_initial(g, a.source), [&](std::size_t t, const auto& x) {
      if (!a.trace) return;
      std::vector<std::string> cells;
      for (double d : x) cells.push_back(fmt_dist(d));
      std::cout << fmt::format("t={} {}\n", t, fmt::join(cells, " "));
    });
    if (!res.converged) throw NegativeCycle("negative cycle reachable from the source");
    for (std::size_t v = 0; v < g.vertices; ++v) std::cout << fmt::format("{} {}\n", v, fmt_dist(res.fixed_point[v]));
    log(fmt::format("bellman-ford converged after {} iterations", res.iterations));
    return 0;
  }
  if (a.system == "bfs") {
    const auto r = bfs_reach(g, a.source);
    std::cout << fmt::format("reachable from {}: {}\n", a.source, fmt::join(r.vertices, " "));
    log(fmt::format("bfs converged after {} iterations", r.iterations));
    return 0;
  }
  throw ContractViolation(fmt::format("unknown system '{}'", a.system));
}

std::string header(int argc, char** argv) {
  std::string cmd;
  for (int i = 1; i < argc; ++i) cmd += fmt::format("{}{}", i > 1 ? " " : "", argv[i]);
  return fmt::format("# openxor {} | generator {} | dataset format v{} | args: {}", OPENXOR_VERSION, kGeneratorVersion,
                     kDatasetFormatVersion, cmd);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OpenXOR: generate, solve, train and evaluate XOR/NOP checkpoint instances"};
  app.set_version_flag("--version", fmt::format("openxor {} ({})", OPENXOR_VERSION, kGeneratorVersion));
  app.require_subcommand(1);
  std::function<int()> run;

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a reproducible instance set");
  g->add_option("--n", gen.config.n, "Bits per instance")->capture_default_str();
  g->add_option("--density", gen.config.checkpoint_density, "Checkpoints per bit")->capture_default_str();
  g->add_option("--seed", gen.config.seed, "Master seed")->capture_default_str();
  g->add_option("--count", gen.config.count, "Number of instances")->capture_default_str();
  g->add_option("--id-prefix", gen.config.id_prefix, "Prefix for instance ids");
  g->add_option("--few-shot-n", gen.config.few_shot_n, "Bits per few-shot example")->capture_default_str();
  g->add_option("--out", gen.out, "Output JSONL")->required();
  g->callback([&] { run = [&] { return run_generate(gen); }; });

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Run a solver over an instance file");
  s->add_option("--in", solve.in, "Instance JSONL")->required()->check(CLI::ExistingFile);
  s->add_option("--out", solve.out, "Result JSONL")->required();
  s->add_option("--method", solve.method, "backtracking|random|greedy|beam|segments|openlm")->capture_default_str();
  s->add_option("--beam-size", solve.beam_size)->capture_default_str();
  s->add_option("--scoring", solve.scoring, "Beam scoring: checkpoints|policy")->capture_default_str();
  s->add_option("--model", solve.model, "OpenLM model file");
  s->add_option("--max-steps", solve.max_steps, "Backtracking node budget")->capture_default_str();
  s->add_option("--seed", solve.seed)->capture_default_str();
  s->add_option("--trials", solve.trials, "Independent attempts per instance")->capture_default_str();
  s->add_option("--mode", solve.mode, "OpenLM decoding: greedy|sample")->capture_default_str();
  s->add_option("--retries", solve.retries, "Extra sampled rollouts (sample mode)")->capture_default_str();
  s->add_option("--jobs", solve.jobs, "Worker threads (0 = all cores)")->capture_default_str();
  s->callback([&] { run = [&] { return run_solve(solve); }; });

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train the OpenLM policy");
  t->add_option("--data,--in", tr.in, "Training JSONL")->required()->check(CLI::ExistingFile);
  t->add_option("--out", tr.out, "Model file")->required();
  t->add_option("--epochs", tr.config.epochs)->capture_default_str();
  t->add_option("--lr", tr.config.learning_rate)->capture_default_str();
  t->add_option("--wd", tr.config.weight_decay)->capture_default_str();
  t->add_option("--seed", tr.config.seed)->capture_default_str();
  t->add_option("--teacher", tr.teacher, "ground_truth|backtracking|segments")->capture_default_str();
  t->callback([&] { run = [&] { return run_train(tr); }; });

  SolveArgs inf;
  inf.method = "openlm";
  auto* i = app.add_subcommand("infer", "Roll out a trained OpenLM policy");
  i->add_option("--model", inf.model, "Model file")->required()->check(CLI::ExistingFile);
  i->add_option("--in", inf.in, "Instance JSONL")->required()->check(CLI::ExistingFile);
  i->add_option("--out", inf.out, "Result JSONL")->required();
  i->add_option("--mode", inf.mode, "greedy|sample")->capture_default_str();
  i->add_option("--seed", inf.seed)->capture_default_str();
  i->add_option("--retries", inf.retries)->capture_default_str();
  i->add_option("--jobs", inf.jobs)->capture_default_str();
  i->callback([&] { run = [&] { return run_solve(inf); }; });

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score result files against instances");
  e->add_option("--in", ev.in, "Instance JSONL")->required()->check(CLI::ExistingFile);
  e->add_option("--results", ev.results, "LABEL=PATH, repeatable")->required();
  e->add_option("--out", ev.out, "Markdown report (stdout if omitted)");
  e->add_option("--csv", ev.csv, "CSV report");
  e->add_option("--seed", ev.seed, "Dataset seed to record in the header");
  e->callback([&] { run = [&] { return run_eval(ev); }; });

  ValidateArgs va;
  auto* v = app.add_subcommand("validate", "Check a bound or a dataset");
  v->add_option("--law", va.law, "random|beam|density|dataset")->required();
  v->add_option("--in", va.in, "Instance JSONL (dataset)");
  v->add_option("--k", va.k)->capture_default_str();
  v->add_option("--trials", va.trials)->capture_default_str();
  v->add_option("--beam-size", va.beam_size)->capture_default_str();
  v->add_option("--n", va.n, "Bits (density)")->capture_default_str();
  v->add_option("--spacing", va.spacing, "Bits per checkpoint segment")->capture_default_str();
  v->add_flag("--dense", va.dense, "Beam law on random dense segments instead of one 1-bit per segment");
  v->add_option("--seed", va.seed)->capture_default_str();
  v->callback([&] { run = [&] { return run_validate(va); }; });

  PromptArgs pr;
  auto* p = app.add_subcommand("prompt", "Render one prompt file per instance");
  p->add_option("--in", pr.in)->required()->check(CLI::ExistingFile);
  p->add_option("--out", pr.out, "Output directory")->required();
  p->callback([&] { run = [&] { return run_prompt(pr); }; });

  GradeArgs gr;
  auto* gd = app.add_subcommand("grade", "Classify and score model transcripts");
  gd->add_option("--in", gr.in)->required()->check(CLI::ExistingFile);
  gd->add_option("--transcripts", gr.transcripts, "Directory of <id>.txt files")->required()->check(CLI::ExistingDirectory);
  gd->add_option("--out", gr.out, "Markdown report (stdout if omitted)");
  gd->add_option("--csv", gr.csv);
  gd->add_option("--classes", gr.classes, "Per-transcript class and rule (JSONL)");
  gd->add_option("--lexicon", gr.lexicon, "Lexicon JSON (default: built in)")->check(CLI::ExistingFile);
  gd->add_option("--jobs", gr.jobs)->capture_default_str();
  gd->callback([&] { run = [&] { return run_grade(gr); }; });

  SubmitArgs su;
  auto* sb = app.add_subcommand("submit", "Send prompts to an OpenAI-compatible chat endpoint");
  sb->add_option("--in", su.in)->required()->check(CLI::ExistingFile);
  sb->add_option("--endpoint", su.endpoint.url, "Base URL, e.g. https://api.openai.com/v1")->required();
  sb->add_option("--model", su.endpoint.model)->required();
  sb->add_option("--out", su.out, "Transcript directory")->required();
  sb->add_option("--api-key-env", su.endpoint.api_key_env, "Environment variable holding the key")->capture_default_str();
  sb->add_option("--max-tokens", su.max_tokens, "0 = endpoint default")->capture_default_str();
  sb->add_option("--timeout", su.timeout_s, "Seconds per request")->capture_default_str();
  sb->add_option("--retries", su.endpoint.max_retries, "Retries on 429/5xx")->capture_default_str();
  sb->add_option("--jobs", su.jobs, "Concurrent requests")->capture_default_str();
  sb->add_flag("--skip-existing", su.skip_existing, "Keep transcripts already on disk");
  sb->callback([&] { run = [&] { return run_submit(su); }; });

  FixpointArgs fx;
  auto* f = app.add_subcommand("fixpoint", "Iterate a monotone operator to its fixed point");
  f->add_option("--system", fx.system, "stairs|bellman-ford|bfs|contraction")->required();
  f->add_option("--lambda", fx.lambda, "Contraction factor")->capture_default_str();
  f->add_option("--offset", fx.offset, "Contraction offset")->capture_default_str();
  f->add_option("--x0", fx.x0, "Contraction start")->capture_default_str();
  f->add_option("--eps", fx.eps, "Contraction tolerance")->capture_default_str();
  f->add_option("--n", fx.n, "Stairs count")->capture_default_str();
  f->add_option("--graph", fx.graph, "Edge list file")->check(CLI::ExistingFile);
  f->add_option("--source", fx.source)->capture_default_str();
  f->add_flag("--trace", fx.trace, "Print every iterate");
  f->callback([&] { run = [&] { return run_fixpoint(fx); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  log(header(argc, argv));
  try {
    return run();
  } catch (const ContractViolation& err) {
    log(fmt::format("error: {}", err.what()));
    return 2;
  } catch (const std::invalid_argument& err) {
    log(fmt::format("error: {}", err.what()));
    return 2;
  } catch (const llm::TransportError& err) {
    log(fmt::format("error: transport ({}): {}", to_string(err.kind()), err.what()));
    return 1;
  } catch (const std::exception& err) {
    log(fmt::format("error: {}", err.what()));
    return 1;
  }
}
