#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "openxor/eval.hpp"
#include "openxor/generator.hpp"
#include "openxor/instance_io.hpp"
#include "support.hpp"

using namespace openxor;
using namespace openxor::eval;

namespace {

Instance tiny(std::string id, std::vector<Bit> bits, Bit target, std::vector<Checkpoint> cps = {}) {
  Instance inst;
  inst.id = std::move(id);
  inst.bits = std::move(bits);
  inst.target = target;
  inst.checkpoints = std::move(cps);
  return inst;
}

ResultRecord result(std::string id, std::vector<Op> ops, double time = 0.0) {
  ResultRecord r;
  r.id = std::move(id);
  r.outcome.ops = std::move(ops);
  r.outcome.status = r.outcome.ops.empty() ? SolveStatus::Exhausted : SolveStatus::Failed;
  r.outcome.wall_time = time;
  return r;
}

constexpr Op X = Op::XOR;
constexpr Op N = Op::NOP;

}  // namespace

TEST_CASE("scoring by hand on three instances") {
  // a: exact. b: checkpoint missed, target hit. c: no attempt.
  const std::vector<Instance> instances{
      tiny("a", {1, 1}, 1, {{1, 1}}),
      tiny("b", {1, 0, 1}, 0, {{1, 1}, {2, 0}}),
      tiny("c", {1}, 1),
  };
  const std::vector<ResultRecord> results{
      result("c", {}),
      result("a", {X, N}, 2.0),
      result("b", {N, N, N}, 4.0),
  };
  const Metrics m = score(instances, results);
  CHECK(m.n_instances == 3);
  CHECK(m.attempts == 3);
  CHECK(m.completed == 2);
  CHECK(m.completion_rate == doctest::Approx(2.0 / 3.0));
  CHECK(m.exact_accuracy == doctest::Approx(1.0 / 3.0));
  // b passes checkpoint 2 only: (1 + 1/2) / 2.
  CHECK(*m.checkpoint_accuracy == doctest::Approx(0.75));
  CHECK(*m.target_accuracy == 1.0);
  CHECK(*m.mean_time == doctest::Approx(3.0));
}

TEST_CASE("nothing completed leaves accuracies undefined") {
  const std::vector<Instance> instances{tiny("a", {1, 1}, 1), tiny("b", {0}, 0)};
  const Metrics m = score(instances, {result("a", {X}), result("b", {})});
  CHECK(m.completed == 0);
  CHECK(m.completion_rate == 0.0);
  CHECK(m.exact_accuracy == 0.0);
  CHECK_FALSE(m.checkpoint_accuracy.has_value());
  CHECK_FALSE(m.target_accuracy.has_value());
  CHECK_FALSE(m.mean_time.has_value());
}

TEST_CASE("id mismatches name every offender") {
  const std::vector<Instance> instances{tiny("a", {1}, 1), tiny("b", {1}, 1)};
  try {
    score(instances, {result("a", {X}), result("a", {X}), result("z", {X})});
    FAIL("expected IdMismatch");
  } catch (const IdMismatch& e) {
    CHECK(e.offenders().size() == 3);
    CHECK(std::string(e.what()).find("b (no result)") != std::string::npos);
    CHECK(std::string(e.what()).find("z (unknown instance)") != std::string::npos);
  }
}

TEST_CASE("pooled trials weigh every attempt equally and ignore record order") {
  const std::vector<Instance> instances{tiny("a", {1}, 1), tiny("b", {1}, 0)};
  const std::vector<std::vector<ResultRecord>> trials{
      {result("a", {X}), result("b", {X})},
      {result("b", {N}), result("a", {N})},
  };
  const Metrics m = score_trials(instances, trials);
  CHECK(m.attempts == 4);
  CHECK(m.exact_accuracy == 0.5);
  CHECK(*m.target_accuracy == 0.5);
  CHECK(score_trials(instances, {trials[1], trials[0]}) == m);
}

TEST_CASE("result files round-trip") {
  const auto path = std::filesystem::temp_directory_path() / "openxor-results.jsonl";
  std::vector<ResultRecord> records{result("a", {X, N}, 0.25), result("b", {})};
  records[0].outcome.status = SolveStatus::Solved;
  records[0].outcome.nodes_explored = 12;
  write_results(path, records);
  const auto back = read_results(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].outcome.ops == records[0].outcome.ops);
  CHECK(back[0].outcome.status == SolveStatus::Solved);
  CHECK(back[0].outcome.nodes_explored == 12);
  CHECK(back[0].outcome.wall_time == 0.25);
  CHECK(back[1].outcome.ops.empty());
  CHECK(to_json(records[0]).dump() == R"({"id":"a","status":"solved","ops":["XOR","NOP"],"nodes":12,"time_s":0.25})");
  write_file_atomic(path, "{\"id\":\"a\",\"status\":\"solved\",\"ops\":[\"AND\"]}\n");
  CHECK_THROWS_AS(read_results(path), ParseError);
}

TEST_CASE("reports render undefined cells distinctly") {
  EvalReport report;
  report.dataset = fingerprint_dataset({tiny("a", {1, 0}, 1, {{1, 1}}), tiny("b", {1, 1, 0}, 0)}, 42);
  CHECK(report.dataset.n == "2-3");
  CHECK(report.dataset.mean_checkpoints == 0.5);
  Metrics done;
  done.n_instances = 2;
  done.attempts = 2;
  done.completed = 2;
  done.completion_rate = 1.0;
  done.exact_accuracy = 0.5;
  done.checkpoint_accuracy = 0.75;
  done.target_accuracy = 1.0;
  done.mean_time = 0.0125;
  Metrics none;
  none.n_instances = 2;
  none.attempts = 2;
  report.rows = {{"backtracking", done}, {"openlm", none}};
  report.failure_modes = {{"refusal", 1}, {"valid_attempt", 3}};

  const std::string csv = render_csv(report);
  CHECK(csv ==
        "method,n_instances,attempts,completion,exact,checkpoint,target_completed,time_s\n"
        "backtracking,2,2,1.000000,0.500000,0.750000,1.000000,0.012500\n"
        "openlm,2,2,0.000000,0.000000,NA,NA,NA\n");

  const std::string md = render_markdown(report);
  CHECK(md.find("| backtracking | 100.0% | 50.0% | 75.0% | 100.0% | 0.0125 |") != std::string::npos);
  CHECK(md.find("| openlm | 0.0% | 0.0% | N/A | N/A | N/A |") != std::string::npos);
  CHECK(md.find("| refusal | 1 | 25.0% |") != std::string::npos);
  CHECK(md.find("seed 42") != std::string::npos);
  CHECK(md.find(report.dataset.digest) != std::string::npos);
}

TEST_CASE("Wilson interval against published values") {
  const auto half = wilson95(5, 10);
  CHECK(half.low == doctest::Approx(0.2366).epsilon(2e-4));
  CHECK(half.high == doctest::Approx(0.7634).epsilon(2e-4));
  const auto zero = wilson95(0, 10);
  CHECK(zero.low == 0.0);
  CHECK(zero.high == doctest::Approx(0.2775).epsilon(2e-4));
  const auto all = wilson95(10, 10);
  CHECK(all.high == doctest::Approx(1.0));
  CHECK(all.low == doctest::Approx(0.7225).epsilon(2e-4));
  CHECK_THROWS_AS(wilson95(3, 2), ContractViolation);
}

TEST_CASE("density check agrees with brute-force counting") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = validate_density(12, 2, seed);
    CHECK(r.n == 12);
    CHECK(r.k == 2);
    CHECK(r.pass);

    GenConfig config;
    config.n = 12;
    config.checkpoint_density = 2.0 / 12.0;
    config.seed = seed;
    Xoshiro256 rng(derive_seed(seed, 0));
    Instance inst = generate_instance(config, rng, "density");
    Instance flipped = inst;
    flipped.target ^= 1;
    const auto with_target = testing::enumerate(inst).valid;
    CHECK(r.valid_with_target == with_target);
    CHECK(r.valid_checkpoints == with_target + testing::enumerate(flipped).valid);
    if (r.checkpoint_segments_ok) CHECK(r.valid_checkpoints == 1024);
    if (r.target_segment_ok) CHECK(r.valid_with_target == 512);
  }
}

TEST_CASE("density check ignores instances whose segments lack a 1-bit") {
  const Instance inst = tiny("gap", {0, 0, 1, 1}, 0, {{2, 0}});
  const auto r = validate_density(inst);
  CHECK_FALSE(r.checkpoint_segments_ok);
  CHECK(r.valid_checkpoints == 16);  // the first two bits are zero, so every sequence passes
  CHECK(r.pass);
}

TEST_CASE("random-search success tracks 2^-k") {
  const auto r = validate_random_bound(3, 2000, {.seed = 7});
  CHECK(r.bound == 0.125);
  CHECK(std::abs(r.rate - 0.125) < 0.03);
  CHECK(r.pass);
}

TEST_CASE("beam success stays under B / 2^k") {
  const auto r = validate_beam_bound(2, 6, 300, {.seed = 9, .spacing = 16, .one_bit_per_segment = true});
  CHECK(r.bound == doctest::Approx(2.0 / 64.0));
  CHECK(r.rate <= 2 * r.bound);
  CHECK(r.pass);
}
