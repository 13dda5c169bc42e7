#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include <json.hpp>

#include "openxor/generator.hpp"
#include "openxor/instance_io.hpp"
#include "openxor/llm.hpp"
#include "support.hpp"

using namespace openxor;
using namespace openxor::llm;
namespace fs = std::filesystem;

namespace {

Instance worked_example() { return read_jsonl(testing::golden("worked_example.jsonl")).at(0); }

Instance full_size_instance(std::uint64_t seed) {
  GenConfig config;
  config.count = 1;
  config.seed = seed;
  return generate_dataset(config).instances.at(0);
}

std::string spell(const std::vector<Op>& ops, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (i) out += sep;
    out += to_string(ops[i]);
  }
  return out;
}

Instance unsatisfiable() {
  Instance inst;
  inst.id = "unsat";
  inst.bits = {0, 0, 1};
  inst.target = 0;
  inst.checkpoints = {{2, 1}};
  return inst;
}

const std::vector<Op>* ops_of(const std::variant<std::vector<Op>, ParseFailure>& r) {
  return std::get_if<std::vector<Op>>(&r);
}

}  // namespace

TEST_CASE("worked example prompt is byte-identical to the golden file") {
  CHECK(render_prompt(worked_example()) == read_file(testing::golden("worked_example_prompt.txt")));
}

TEST_CASE("prompt edge cases") {
  Instance inst = worked_example();
  inst.checkpoints.clear();
  const std::string text = render_prompt(inst);
  CHECK(text.find("## Your Task:\nInput bits: [0, 1, 1, 1, 1, 0, 1]\nTarget output: 1\nCheckpoint constraints: none\n") !=
        std::string::npos);
  inst.few_shot[1].ground_truth.reset();
  CHECK_THROWS_AS(render_prompt(inst), ContractViolation);
  inst.few_shot.clear();
  CHECK_THROWS_AS(render_prompt(inst), ContractViolation);
  const Instance big = full_size_instance(1);
  CHECK(render_prompt(big).find("sequence of 2048 operations.\n") != std::string::npos);
}

TEST_CASE("parser takes the final run of operations") {
  using V = std::vector<Op>;
  const V xnx{Op::XOR, Op::NOP, Op::XOR};
  CHECK(*ops_of(parse_response("XOR NOP XOR", 3)) == xnx);
  CHECK(*ops_of(parse_response("xor, nop, Xor.", 3)) == xnx);
  CHECK(*ops_of(parse_response("Reasoning: NOP NOP then...\n\nOperations: XOR NOP XOR\n", 3)) == xnx);
  CHECK(*ops_of(parse_response("**XOR** `NOP` [XOR]", 3)) == xnx);

  const auto wrong = parse_response("XOR NOP XOR NOP", 3);
  REQUIRE(std::holds_alternative<ParseFailure>(wrong));
  CHECK(std::get<ParseFailure>(wrong).found == 4);
  CHECK(std::holds_alternative<ParseFailure>(parse_response("", 3)));
  CHECK(std::holds_alternative<ParseFailure>(parse_response("XORNOP XOR", 2)));
  CHECK(std::get<ParseFailure>(parse_response("no ops here", 1)).found == 0);
}

TEST_CASE("rendered ground truth parses back for generated instances") {
  GenConfig config;
  config.n = 200;
  config.count = 20;
  config.seed = 12;
  for (const auto& inst : generate_dataset(config).instances) {
    for (auto sep : {" ", ", ", "\n"}) {
      const auto parsed = parse_response("Here is my answer:\n" + spell(*inst.ground_truth, sep) + "\n", inst.size());
      REQUIRE(ops_of(parsed));
      CHECK(*ops_of(parsed) == *inst.ground_truth);
    }
  }
}

TEST_CASE("the three failure excerpts land in their classes") {
  const Instance inst = full_size_instance(3);
  REQUIRE(inst.size() == 2048);

  const auto refusal = classify({inst.id, read_file(testing::golden("refusal.txt")), false}, inst);
  CHECK(refusal.cls == FailureClass::Refusal);

  const auto length = classify({inst.id, read_file(testing::golden("length_limit.txt")), false}, inst);
  CHECK(length.cls == FailureClass::LengthLimit);

  const auto hallucination = classify({inst.id, read_file(testing::golden("hallucination.txt")), false}, inst);
  CHECK(hallucination.cls == FailureClass::ConstraintHallucination);

  // The same claim about an unsatisfiable instance is not a hallucination.
  const Instance unsat = unsatisfiable();
  const auto honest = classify({"unsat", read_file(testing::golden("hallucination.txt")), false}, unsat);
  CHECK(honest.cls == FailureClass::FormatError);
}

TEST_CASE("classification ladder order") {
  const Instance inst = full_size_instance(4);
  const std::vector<Op> truncated(inst.ground_truth->begin(), inst.ground_truth->begin() + 1848);

  const auto cut = classify({inst.id, spell(truncated), false}, inst);
  CHECK(cut.cls == FailureClass::FormatError);
  CHECK(cut.rule.find("1848") != std::string::npos);
  CHECK(classify({inst.id, spell(truncated), true}, inst).cls == FailureClass::LengthLimit);

  const auto valid = classify({inst.id, "Operations: " + spell(*inst.ground_truth), true}, inst);
  CHECK(valid.cls == FailureClass::ValidAttempt);
  REQUIRE(valid.ops);
  CHECK(*valid.ops == *inst.ground_truth);

  // A full-length answer that violates constraints is still a valid attempt.
  const auto wrong = classify({inst.id, spell(std::vector<Op>(inst.size(), Op::NOP)), false}, inst);
  CHECK(wrong.cls == FailureClass::ValidAttempt);

  CHECK(classify({inst.id, "I apologize, the output was truncated.", false}, inst).cls == FailureClass::LengthLimit);
  CHECK(classify({inst.id, "Sure! Here you go.", false}, inst).cls == FailureClass::FormatError);

  Lexicon empty{"test", {}, {}, {}};
  CHECK(classify({inst.id, read_file(testing::golden("refusal.txt")), false}, inst, empty).cls ==
        FailureClass::FormatError);
}

TEST_CASE("class names") {
  CHECK(to_string(FailureClass::ValidAttempt) == "valid_attempt");
  CHECK(to_string(FailureClass::LengthLimit) == "length_limit");
  CHECK(to_string(FailureClass::Refusal) == "refusal");
  CHECK(to_string(FailureClass::ConstraintHallucination) == "constraint_hallucination");
  CHECK(to_string(FailureClass::FormatError) == "format_error");
}

TEST_CASE("shipped lexicon file equals the compiled-in lexicon") {
  const Lexicon file = load_lexicon(fs::path(OPENXOR_TEST_DATA) / ".." / "data" / "lexicon.json");
  const Lexicon& built = default_lexicon();
  CHECK(file.version == built.version);
  CHECK(file.truncation == built.truncation);
  CHECK(file.refusal == built.refusal);
  CHECK(file.unsatisfiable == built.unsatisfiable);
}

TEST_CASE("transcript files round-trip") {
  const auto dir = fs::temp_directory_path() / "openxor-transcripts";
  fs::remove_all(dir);
  write_transcript(dir, {"a/b c", "XOR NOP", true}, R"({"token_limit": true})");
  CHECK(fs::exists(dir / "a_b_c.txt"));
  const Transcript t = read_transcript(dir, "a/b c");
  CHECK(t.text == "XOR NOP");
  CHECK(t.token_limit);
  write_transcript(dir, {"plain", "NOP", false}, "");
  CHECK_FALSE(read_transcript(dir, "plain").token_limit);
  CHECK_THROWS_AS(read_transcript(dir, "missing"), IoError);
  CHECK_THROWS_AS(transcript_stem(".."), ContractViolation);
}

namespace {

// Local stand-in for a chat-completions endpoint.
class MockEndpoint {
 public:
  explicit MockEndpoint(httplib::Server::Handler handler) {
    server_.Post("/v1/chat/completions", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockEndpoint() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::string completion(const std::string& content, const std::string& finish) {
  nlohmann::json j;
  j["choices"] = nlohmann::json::array({{{"index", 0},
                                         {"message", {{"role", "assistant"}, {"content", content}}},
                                         {"finish_reason", finish}}});
  j["usage"] = {{"prompt_tokens", 10}, {"completion_tokens", 5}};
  return j.dump();
}

EndpointConfig local(const std::string& url) {
  EndpointConfig c;
  c.url = url;
  c.model = "mock-model";
  c.api_key_env = "OPENXOR_TEST_KEY";
  c.timeout = std::chrono::seconds{5};
  c.max_backoff = std::chrono::seconds{0};
  return c;
}

}  // namespace

TEST_CASE("submission against a local endpoint") {
  ::setenv("OPENXOR_TEST_KEY", "sk-test", 1);
  const Instance inst = worked_example();
  const std::string answer = spell(*inst.ground_truth);

  SUBCASE("a normal completion") {
    std::string seen_auth, seen_prompt, seen_model;
    double seen_temperature = -1;
    MockEndpoint server([&](const httplib::Request& req, httplib::Response& res) {
      seen_auth = req.get_header_value("Authorization");
      const auto body = nlohmann::json::parse(req.body);
      seen_model = body["model"];
      seen_prompt = body["messages"][0]["content"];
      seen_temperature = body["temperature"];
      res.set_content(completion("Operations: " + answer, "stop"), "application/json");
    });
    const Submission s = submit(inst, local(server.url()));
    CHECK(seen_auth == "Bearer sk-test");
    CHECK(seen_model == "mock-model");
    CHECK(seen_temperature == 0.0);
    CHECK(seen_prompt == render_prompt(inst));
    CHECK_FALSE(s.transcript.token_limit);
    CHECK(classify(s.transcript, inst).cls == FailureClass::ValidAttempt);
    const auto meta = nlohmann::json::parse(s.meta_json);
    CHECK(meta["finish_reason"] == "stop");
    CHECK(meta["attempts"] == 1);
    CHECK(meta["usage"]["completion_tokens"] == 5);
  }

  SUBCASE("finish_reason length sets the token-limit flag") {
    MockEndpoint server([&](const httplib::Request&, httplib::Response& res) {
      res.set_content(completion("XOR NOP", "length"), "application/json");
    });
    const Submission s = submit(inst, local(server.url()));
    CHECK(s.transcript.token_limit);
    CHECK(classify(s.transcript, inst).cls == FailureClass::LengthLimit);
  }

  SUBCASE("rejected credentials") {
    MockEndpoint server([](const httplib::Request&, httplib::Response& res) { res.status = 401; });
    try {
      submit(inst, local(server.url()));
      FAIL("expected TransportError");
    } catch (const TransportError& e) {
      CHECK(e.kind() == TransportError::Kind::Auth);
    }
  }

  SUBCASE("rate limiting is retried") {
    std::atomic<int> calls{0};
    MockEndpoint server([&](const httplib::Request&, httplib::Response& res) {
      if (calls++ == 0) {
        res.status = 429;
        res.set_header("Retry-After", "0");
        return;
      }
      res.set_content(completion(answer, "stop"), "application/json");
    });
    const Submission s = submit(inst, local(server.url()));
    CHECK(calls == 2);
    CHECK(nlohmann::json::parse(s.meta_json)["attempts"] == 2);
  }

  SUBCASE("persistent server errors give up") {
    MockEndpoint server([](const httplib::Request&, httplib::Response& res) { res.status = 503; });
    auto config = local(server.url());
    config.max_retries = 1;
    try {
      submit(inst, config);
      FAIL("expected TransportError");
    } catch (const TransportError& e) {
      CHECK(e.kind() == TransportError::Kind::Server);
    }
  }

  SUBCASE("malformed bodies are protocol errors") {
    MockEndpoint server([](const httplib::Request&, httplib::Response& res) {
      res.set_content("{\"choices\": []}", "application/json");
    });
    try {
      submit(inst, local(server.url()));
      FAIL("expected TransportError");
    } catch (const TransportError& e) {
      CHECK(e.kind() == TransportError::Kind::Protocol);
    }
  }

  SUBCASE("unreachable endpoint") {
    int port = 0;
    {
      httplib::Server probe;
      port = probe.bind_to_any_port("127.0.0.1");
    }
    try {
      submit(inst, local("http://127.0.0.1:" + std::to_string(port)));
      FAIL("expected TransportError");
    } catch (const TransportError& e) {
      CHECK(e.kind() == TransportError::Kind::Network);
    }
  }

  SUBCASE("missing credential variable") {
    auto config = local("http://127.0.0.1:1");
    config.api_key_env = "OPENXOR_TEST_KEY_UNSET";
    ::unsetenv("OPENXOR_TEST_KEY_UNSET");
    CHECK_THROWS_AS(submit(inst, config), ContractViolation);
  }
}
