#include "openxor/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "openxor/instance_io.hpp"

namespace openxor::eval {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json to_json(const ResultRecord& record) {
  ordered_json j;
  j["id"] = record.id;
  j["status"] = std::string(to_string(record.outcome.status));
  if (record.outcome.ops.empty()) {
    j["ops"] = nullptr;
  } else {
    ordered_json ops = ordered_json::array();
    for (Op op : record.outcome.ops) ops.push_back(std::string(to_string(op)));
    j["ops"] = std::move(ops);
  }
  j["nodes"] = record.outcome.nodes_explored;
  j["time_s"] = record.outcome.wall_time;
  return j;
}

ResultRecord result_from_json(const json& j) {
  ResultRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    const auto status = parse_status(j.at("status").get<std::string>());
    if (!status) throw ParseError(fmt::format("result {}: unknown status", r.id));
    r.outcome.status = *status;
    if (j.contains("ops") && !j["ops"].is_null()) {
      for (const auto& o : j["ops"]) {
        auto op = o.is_string() ? parse_op(o.get<std::string>()) : std::nullopt;
        if (!op) throw ParseError(fmt::format("result {}: ops entries must be XOR/NOP", r.id));
        r.outcome.ops.push_back(*op);
      }
    }
    r.outcome.nodes_explored = j.value("nodes", std::uint64_t{0});
    r.outcome.wall_time = j.value("time_s", 0.0);
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("result record: {}", e.what()));
  }
  return r;
}

std::vector<ResultRecord> read_results(const std::filesystem::path& path) {
  std::istringstream lines(read_file(path));
  std::vector<ResultRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(result_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw ParseError(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
  }
  return out;
}

void write_results(const std::filesystem::path& path, const std::vector<ResultRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

namespace {

struct Tally {
  std::size_t attempts = 0;
  std::size_t completed = 0;
  std::size_t exact = 0;
  std::size_t target_ok = 0;
  double checkpoint_sum = 0.0;
  double time_sum = 0.0;
};

// Pairs results with instances by id and accumulates in id order.
void accumulate(const std::vector<Instance>& instances, const std::vector<ResultRecord>& results, Tally& t) {
  std::unordered_map<std::string, const ResultRecord*> by_id;
  std::vector<std::string> offenders;
  for (const auto& r : results) {
    if (!by_id.emplace(r.id, &r).second) offenders.push_back(r.id + " (duplicate result)");
  }
  std::set<std::string> known;
  for (const auto& inst : instances) {
    known.insert(inst.id);
    if (!by_id.count(inst.id)) offenders.push_back(inst.id + " (no result)");
  }
  for (const auto& r : results) {
    if (!known.count(r.id)) offenders.push_back(r.id + " (unknown instance)");
  }
  if (!offenders.empty()) {
    std::string list;
    for (const auto& o : offenders) list += (list.empty() ? "" : ", ") + o;
    throw IdMismatch(fmt::format("results do not match instances: {}", list), offenders);
  }

  std::vector<const Instance*> ordered;
  for (const auto& inst : instances) ordered.push_back(&inst);
  std::sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->id < b->id; });
  for (const Instance* inst : ordered) {
    const auto& outcome = by_id.at(inst->id)->outcome;
    ++t.attempts;
    if (outcome.ops.size() != inst->size()) continue;
    ++t.completed;
    const auto report = verify(*inst, outcome.ops);
    t.exact += report.exact;
    t.target_ok += report.target_ok;
    t.checkpoint_sum += report.checkpoint_fraction();
    t.time_sum += outcome.wall_time;
  }
}

Metrics finish(const Tally& t, std::size_t n_instances) {
  Metrics m;
  m.n_instances = n_instances;
  m.attempts = t.attempts;
  m.completed = t.completed;
  if (t.attempts > 0) {
    m.completion_rate = static_cast<double>(t.completed) / static_cast<double>(t.attempts);
    m.exact_accuracy = static_cast<double>(t.exact) / static_cast<double>(t.attempts);
  }
  if (t.completed > 0) {
    const double c = static_cast<double>(t.completed);
    m.checkpoint_accuracy = t.checkpoint_sum / c;
    m.target_accuracy = static_cast<double>(t.target_ok) / c;
    m.mean_time = t.time_sum / c;
  }
  return m;
}

}  // namespace

Metrics score(const std::vector<Instance>& instances, const std::vector<ResultRecord>& results) {
  Tally t;
  accumulate(instances, results, t);
  return finish(t, instances.size());
}

Metrics score_trials(const std::vector<Instance>& instances, const std::vector<std::vector<ResultRecord>>& trials) {
  Tally t;
  for (const auto& results : trials) accumulate(instances, results, t);
  return finish(t, instances.size());
}

DatasetFingerprint fingerprint_dataset(const std::vector<Instance>& instances, std::optional<std::uint64_t> seed) {
  DatasetFingerprint fp;
  std::string bytes;
  std::size_t lo = SIZE_MAX, hi = 0, cps = 0;
  for (const auto& inst : instances) {
    bytes += to_jsonl_line(inst);
    bytes += '\n';
    lo = std::min(lo, inst.size());
    hi = std::max(hi, inst.size());
    cps += inst.checkpoints.size();
  }
  fp.digest = fingerprint(bytes);
  fp.count = instances.size();
  if (instances.empty()) {
    fp.n = "-";
  } else {
    fp.n = lo == hi ? std::to_string(lo) : fmt::format("{}-{}", lo, hi);
    fp.mean_checkpoints = static_cast<double>(cps) / static_cast<double>(instances.size());
  }
  fp.seed = seed;
  return fp;
}

namespace {

std::string pct(double x) { return fmt::format("{:.1f}%", 100.0 * x); }
std::string pct(const std::optional<double>& x) { return x ? pct(*x) : "N/A"; }
std::string csv_num(double x) { return fmt::format("{:.6f}", x); }
std::string csv_num(const std::optional<double>& x) { return x ? csv_num(*x) : "NA"; }

}  // namespace

std::string render_csv(const EvalReport& report) {
  std::string out = "method,n_instances,attempts,completion,exact,checkpoint,target_completed,time_s\n";
  for (const auto& row : report.rows) {
    const auto& m = row.metrics;
    out += fmt::format("{},{},{},{},{},{},{},{}\n", row.method, m.n_instances, m.attempts, csv_num(m.completion_rate),
                       csv_num(m.exact_accuracy), csv_num(m.checkpoint_accuracy), csv_num(m.target_accuracy),
                       csv_num(m.mean_time));
  }
  return out;
}

std::string render_markdown(const EvalReport& report) {
  std::string out = "# Evaluation report\n\n";
  const auto& d = report.dataset;
  out += fmt::format("- dataset: {} instances, n={}, mean checkpoints {:.2f}, digest {}", d.count, d.n,
                     d.mean_checkpoints, d.digest);
  if (d.seed) out += fmt::format(", seed {}", *d.seed);
  out += "\n";
  out += fmt::format("- tool: openxor {}\n", OPENXOR_VERSION);
  for (const auto& note : report.notes) out += fmt::format("- {}\n", note);
  out += "\n";
  if (!report.rows.empty()) {
    out += "| Method | Completion | Exact Acc. | Ckpt Acc. | Target Acc. (completed) | Time (s) |\n";
    out += "|---|---|---|---|---|---|\n";
    for (const auto& row : report.rows) {
      const auto& m = row.metrics;
      const std::string time = m.mean_time ? fmt::format("{:.3g}", *m.mean_time) : "N/A";
      out += fmt::format("| {} | {} | {} | {} | {} | {} |\n", row.method, pct(m.completion_rate),
                         pct(m.exact_accuracy), pct(m.checkpoint_accuracy), pct(m.target_accuracy), time);
    }
  }
  if (!report.failure_modes.empty()) {
    std::size_t total = 0;
    for (const auto& [_, c] : report.failure_modes) total += c;
    out += "\n| Failure mode | Count | Share |\n|---|---|---|\n";
    for (const auto& [name, c] : report.failure_modes) {
      out += fmt::format("| {} | {} | {} |\n", name, c,
                         pct(total ? static_cast<double>(c) / static_cast<double>(total) : 0.0));
    }
  }
  return out;
}

}  // namespace openxor::eval
