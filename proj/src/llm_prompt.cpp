#include <cctype>

#include <fmt/format.h>
#include <json.hpp>

#include "openxor/instance_io.hpp"
#include "openxor/llm.hpp"
#include "openxor/solvers.hpp"

namespace openxor::llm {

namespace {

constexpr std::string_view kHeader =
    "# XOR/NOP Reasoning Challenge with Checkpoint Constraints\n"
    "\n"
    "You are given a sequence of bits and need to determine a sequence of\n"
    "operations (XOR or NOP) that produces a target output while satisfying\n"
    "checkpoint constraints.\n"
    "\n"
    "## Rules:\n"
    "- Start with accumulator = 0\n"
    "- Process each bit left-to-right with an operation:\n"
    "  * XOR: accumulator = accumulator XOR current_bit\n"
    "  * NOP: accumulator stays unchanged\n"
    "- **Checkpoint constraints:** At certain positions, the accumulator\n"
    "  MUST equal a specific required value\n"
    "- Goal: Final accumulator should equal the target output AND all\n"
    "  checkpoints must be satisfied\n"
    "\n"
    "## Few-Shot Examples:\n";

std::string bits_line(const Instance& inst) {
  std::string out = "Input bits: [";
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (i) out += ", ";
    out += inst.bits[i] ? '1' : '0';
  }
  return out + "]\n";
}

std::string constraints_line(const Instance& inst) {
  std::string out = "Checkpoint constraints: ";
  if (inst.checkpoints.empty()) return out + "none\n";
  for (std::size_t i = 0; i < inst.checkpoints.size(); ++i) {
    if (i) out += ", ";
    out += fmt::format("position {} → {}", inst.checkpoints[i].position, int{inst.checkpoints[i].required});
  }
  return out + "\n";
}

std::string ops_text(const std::vector<Op>& ops) {
  std::string out;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (i) out += ' ';
    out += to_string(ops[i]);
  }
  return out;
}

}  // namespace

std::string render_prompt(const Instance& instance) {
  if (instance.few_shot.empty()) throw ContractViolation(fmt::format("render_prompt: {} has no few-shot examples", instance.id));
  std::string out(kHeader);
  for (std::size_t j = 0; j < instance.few_shot.size(); ++j) {
    const Instance& ex = instance.few_shot[j];
    if (!ex.ground_truth) throw ContractViolation(fmt::format("render_prompt: example {} has no solution", ex.id));
    if (j) out += '\n';
    out += fmt::format("Example {}:\n", j + 1);
    out += bits_line(ex);
    out += fmt::format("Target output: {}\n", int{ex.target});
    out += constraints_line(ex);
    out += fmt::format("Operations: {}\n", ops_text(*ex.ground_truth));
  }
  out += "\n## Your Task:\n";
  out += bits_line(instance);
  out += fmt::format("Target output: {}\n", int{instance.target});
  out += constraints_line(instance);
  out +=
      "\n"
      "**CRITICAL:** Your solution MUST satisfy ALL checkpoint constraints.\n"
      "\n"
      "Please provide a valid sequence of operations (XOR or NOP).\n";
  out += fmt::format("Your answer should be a space-separated sequence of {} operations.\n", instance.size());
  out += "\nOperations:\n";
  return out;
}

namespace {

bool is_separator(char c) { return std::isspace(static_cast<unsigned char>(c)) || c == ','; }

std::string_view strip_punct(std::string_view tok) {
  auto punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
  while (!tok.empty() && punct(tok.front())) tok.remove_prefix(1);
  while (!tok.empty() && punct(tok.back())) tok.remove_suffix(1);
  return tok;
}

}  // namespace

std::variant<std::vector<Op>, ParseFailure> parse_response(std::string_view text, std::size_t n) {
  std::vector<Op> run, last;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_separator(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_separator(text[j])) ++j;
    if (j == i) break;
    const auto op = parse_op(strip_punct(text.substr(i, j - i)));
    if (op) {
      run.push_back(*op);
    } else if (!run.empty()) {
      last = std::move(run);
      run.clear();
    }
    i = j;
  }
  if (!run.empty()) last = std::move(run);
  if (last.empty()) return ParseFailure{"no XOR/NOP sequence found", 0};
  if (last.size() != n) {
    return ParseFailure{fmt::format("final op sequence has length {}, expected {}", last.size(), n), last.size()};
  }
  return last;
}

std::string_view to_string(FailureClass cls) {
  switch (cls) {
    case FailureClass::ValidAttempt: return "valid_attempt";
    case FailureClass::LengthLimit: return "length_limit";
    case FailureClass::Refusal: return "refusal";
    case FailureClass::ConstraintHallucination: return "constraint_hallucination";
    case FailureClass::FormatError: return "format_error";
  }
  return "unknown";
}

const Lexicon& default_lexicon() {
  static const Lexicon lexicon{
      "1",
      {"token limit", "output truncated", "truncated", "exceeds maximum length", "maximum length",
       "context window", "max_tokens", "length limit"},
      {"cannot provide a valid solution", "i apologize", "i can't provide", "i cannot provide",
       "i cannot solve", "i can't solve", "unable to provide", "i am unable to", "i'm unable to",
       "i won't be able to", "not able to solve"},
      {"unsatisfiable", "no valid solution exists", "no solution exists", "constraints conflict",
       "conflicting constraints", "contradictory", "contradiction", "impossible to satisfy",
       "cannot be satisfied", "cannot both be satisfied"},
  };
  return lexicon;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  try {
    const auto j = nlohmann::json::parse(read_file(path));
    Lexicon lex;
    lex.version = j.at("version").get<std::string>();
    lex.truncation = j.at("truncation").get<std::vector<std::string>>();
    lex.refusal = j.at("refusal").get<std::vector<std::string>>();
    lex.unsatisfiable = j.at("unsatisfiable").get<std::vector<std::string>>();
    return lex;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("{}: bad lexicon: {}", path.string(), e.what()));
  }
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Phrases are matched case-insensitively as substrings.
const std::string* match(const std::string& haystack, const std::vector<std::string>& phrases) {
  for (const auto& p : phrases) {
    if (haystack.find(lower(p)) != std::string::npos) return &p;
  }
  return nullptr;
}

}  // namespace

Classification classify(const Transcript& transcript, const Instance& instance, const Lexicon& lexicon) {
  Classification c;
  auto parsed = parse_response(transcript.text, instance.size());
  if (auto* ops = std::get_if<std::vector<Op>>(&parsed)) {
    c.cls = FailureClass::ValidAttempt;
    c.rule = "parse: full-length op sequence";
    c.ops = std::move(*ops);
    return c;
  }
  if (transcript.token_limit) {
    c.cls = FailureClass::LengthLimit;
    c.rule = "length: endpoint finish_reason=length";
    return c;
  }
  const std::string text = lower(transcript.text);
  if (const auto* p = match(text, lexicon.truncation)) {
    c.cls = FailureClass::LengthLimit;
    c.rule = fmt::format("length: \"{}\"", *p);
    return c;
  }
  if (const auto* p = match(text, lexicon.refusal)) {
    c.cls = FailureClass::Refusal;
    c.rule = fmt::format("refusal: \"{}\"", *p);
    return c;
  }
  if (const auto* p = match(text, lexicon.unsatisfiable)) {
    if (solve_segments(instance).solved()) {
      c.cls = FailureClass::ConstraintHallucination;
      c.rule = fmt::format("hallucination: \"{}\" on a satisfiable instance", *p);
      return c;
    }
  }
  c.cls = FailureClass::FormatError;
  c.rule = fmt::format("format: {}", std::get<ParseFailure>(parsed).reason);
  return c;
}

std::string transcript_stem(std::string_view id) {
  std::string out;
  for (char c : id) {
    const bool safe = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out += safe ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") throw ContractViolation("transcript_stem: unusable id");
  return out;
}

Transcript read_transcript(const std::filesystem::path& dir, const std::string& id) {
  Transcript t;
  t.id = id;
  const auto stem = transcript_stem(id);
  t.text = read_file(dir / (stem + ".txt"));
  const auto meta = dir / (stem + ".meta.json");
  if (std::filesystem::exists(meta)) {
    try {
      t.token_limit = nlohmann::json::parse(read_file(meta)).value("token_limit", false);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(fmt::format("{}: {}", meta.string(), e.what()));
    }
  }
  return t;
}

void write_transcript(const std::filesystem::path& dir, const Transcript& transcript, const std::string& meta_json) {
  std::filesystem::create_directories(dir);
  const auto stem = transcript_stem(transcript.id);
  // Meta first: a transcript text file never appears without its metadata.
  if (!meta_json.empty()) write_file_atomic(dir / (stem + ".meta.json"), meta_json);
  write_file_atomic(dir / (stem + ".txt"), transcript.text);
}

}  // namespace openxor::llm
