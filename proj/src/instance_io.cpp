#include "openxor/instance_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace openxor {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json to_json(const Instance& instance) {
  ordered_json j;
  j["id"] = instance.id;
  ordered_json bits = ordered_json::array();
  for (Bit b : instance.bits) bits.push_back(static_cast<int>(b));
  j["bits"] = std::move(bits);
  j["target"] = static_cast<int>(instance.target);
  ordered_json cps = ordered_json::array();
  for (const auto& cp : instance.checkpoints) {
    cps.push_back(ordered_json::array({cp.position, static_cast<int>(cp.required)}));
  }
  j["checkpoints"] = std::move(cps);
  if (instance.ground_truth) {
    ordered_json ops = ordered_json::array();
    for (Op op : *instance.ground_truth) ops.push_back(std::string(to_string(op)));
    j["ground_truth"] = std::move(ops);
  } else {
    j["ground_truth"] = nullptr;
  }
  ordered_json shots = ordered_json::array();
  for (const auto& shot : instance.few_shot) shots.push_back(to_json(shot));
  j["few_shot"] = std::move(shots);
  return j;
}

namespace {

Bit parse_bit(const json& v, std::string_view what) {
  if (!v.is_number_integer()) throw ParseError(fmt::format("{} must be 0 or 1", what));
  const auto x = v.get<long long>();
  if (x != 0 && x != 1) throw ParseError(fmt::format("{} must be 0 or 1, got {}", what, x));
  return static_cast<Bit>(x);
}

}  // namespace

Instance instance_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("instance must be a JSON object");
  Instance inst;
  if (!j.contains("id") || !j["id"].is_string()) throw ParseError("instance.id must be a string");
  inst.id = j["id"].get<std::string>();
  if (!j.contains("bits") || !j["bits"].is_array()) {
    throw ParseError(fmt::format("instance {}: bits must be an array", inst.id));
  }
  for (const auto& b : j["bits"]) inst.bits.push_back(parse_bit(b, "bit"));
  if (!j.contains("target")) throw ParseError(fmt::format("instance {}: missing target", inst.id));
  inst.target = parse_bit(j["target"], "target");
  if (j.contains("checkpoints")) {
    if (!j["checkpoints"].is_array()) {
      throw ParseError(fmt::format("instance {}: checkpoints must be an array", inst.id));
    }
    for (const auto& cp : j["checkpoints"]) {
      if (!cp.is_array() || cp.size() != 2 || !cp[0].is_number_integer() || cp[0].get<long long>() < 1) {
        throw ParseError(fmt::format("instance {}: checkpoint must be [p>=1, v]", inst.id));
      }
      inst.checkpoints.push_back({cp[0].get<std::size_t>(), parse_bit(cp[1], "checkpoint value")});
    }
  }
  if (j.contains("ground_truth") && !j["ground_truth"].is_null()) {
    std::vector<Op> ops;
    for (const auto& o : j["ground_truth"]) {
      auto op = o.is_string() ? parse_op(o.get<std::string>()) : std::nullopt;
      if (!op) throw ParseError(fmt::format("instance {}: ground_truth entries must be XOR/NOP", inst.id));
      ops.push_back(*op);
    }
    inst.ground_truth = std::move(ops);
  }
  if (j.contains("few_shot")) {
    for (const auto& shot : j["few_shot"]) inst.few_shot.push_back(instance_from_json(shot));
  }
  try {
    validate(inst);
  } catch (const ContractViolation& e) {
    throw ParseError(e.what());
  }
  return inst;
}

std::string to_jsonl_line(const Instance& instance) { return to_json(instance).dump(); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {} for reading", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(fmt::format("read failure on {}", path.string()));
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot open {} for writing", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError(fmt::format("write failure on {}", tmp.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError(fmt::format("cannot move output into place at {}", path.string()));
  }
}

std::vector<Instance> read_jsonl(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<Instance> out;
  std::istringstream lines(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(instance_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
  }
  return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Instance>& instances) {
  std::string out;
  for (const auto& inst : instances) {
    out += to_jsonl_line(inst);
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::string fingerprint(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace openxor
