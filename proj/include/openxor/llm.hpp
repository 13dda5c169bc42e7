#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "openxor/xor_core.hpp"

namespace openxor::llm {

// Prompt text for an instance and its few-shot examples. Positions are shown
// 1-based, lines end in LF, and the op count is spelled out.
std::string render_prompt(const Instance& instance);

struct ParseFailure {
  std::string reason;
  std::size_t found = 0;  // length of the final op run
};

// Takes the final contiguous run of XOR/NOP tokens (case-insensitive,
// surrounding punctuation ignored) and requires it to have length n.
std::variant<std::vector<Op>, ParseFailure> parse_response(std::string_view text, std::size_t n);

enum class FailureClass : std::uint8_t { ValidAttempt, LengthLimit, Refusal, ConstraintHallucination, FormatError };

std::string_view to_string(FailureClass cls);

struct Lexicon {
  std::string version;
  std::vector<std::string> truncation;
  std::vector<std::string> refusal;
  std::vector<std::string> unsatisfiable;
};

// The lexicon compiled into this build.
const Lexicon& default_lexicon();
// {"version": ..., "truncation": [...], "refusal": [...], "unsatisfiable": [...]}
Lexicon load_lexicon(const std::filesystem::path& path);

struct Transcript {
  std::string id;
  std::string text;
  bool token_limit = false;  // the endpoint reported finish_reason "length"
};

struct Classification {
  FailureClass cls = FailureClass::FormatError;
  std::string rule;  // which rung of the ladder fired, with the matched phrase
  std::optional<std::vector<Op>> ops;  // parsed ops for ValidAttempt
};

// Ladder: parse -> length limit -> refusal -> unsatisfiability claim on an
// instance the linear solver satisfies -> format error.
Classification classify(const Transcript& transcript, const Instance& instance,
                        const Lexicon& lexicon = default_lexicon());

// Transcript files: <dir>/<id>.txt holds the raw text; an optional
// <dir>/<id>.meta.json records endpoint metadata such as the length flag.
std::string transcript_stem(std::string_view id);
Transcript read_transcript(const std::filesystem::path& dir, const std::string& id);
void write_transcript(const std::filesystem::path& dir, const Transcript& transcript, const std::string& meta_json);

// ---------------------------------------------------------------------------
// Endpoint submission (OpenAI-compatible chat completions).

class TransportError : public std::runtime_error {
 public:
  enum class Kind : std::uint8_t { Network, Auth, RateLimited, Server, Protocol };
  TransportError(Kind kind, std::string message) : std::runtime_error(std::move(message)), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string_view to_string(TransportError::Kind kind);

struct EndpointConfig {
  std::string url;  // base URL; "/chat/completions" is appended unless present
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  double temperature = 0.0;
  std::optional<int> max_tokens;
  std::chrono::seconds timeout{600};
  int max_retries = 3;
  std::chrono::seconds max_backoff{60};
};

struct Submission {
  Transcript transcript;
  std::string meta_json;  // model, finish_reason, usage, attempts
};

// One deterministic request per instance. Retries on 429 and 5xx honour
// Retry-After; other failures raise TransportError.
Submission submit(const Instance& instance, const EndpointConfig& config);

}  // namespace openxor::llm
