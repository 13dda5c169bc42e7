#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "openxor/xor_core.hpp"

namespace openxor {

// File-system failure; the message always carries the offending path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed JSON / JSONL content.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kDatasetFormatVersion = 1;

nlohmann::ordered_json to_json(const Instance& instance);
Instance instance_from_json(const nlohmann::json& j);

// One compact JSON object, no trailing newline.
std::string to_jsonl_line(const Instance& instance);

std::vector<Instance> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<Instance>& instances);

// Whole-file helpers used by every reader/writer in the project.
std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary then renames, so readers never observe a
// partially written file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// FNV-1a 64-bit digest, rendered as 16 hex digits.
std::string fingerprint(std::string_view bytes);

}  // namespace openxor
