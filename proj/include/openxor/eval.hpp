#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "openxor/solvers.hpp"
#include "openxor/xor_core.hpp"

namespace openxor::eval {

struct ResultRecord {
  std::string id;
  SolveOutcome outcome;
};

// {"id", "status", "ops" (array or null), "nodes", "time_s"}
nlohmann::ordered_json to_json(const ResultRecord& record);
ResultRecord result_from_json(const nlohmann::json& j);
std::vector<ResultRecord> read_results(const std::filesystem::path& path);
void write_results(const std::filesystem::path& path, const std::vector<ResultRecord>& records);

// Results and instances do not pair up one-to-one.
class IdMismatch : public std::runtime_error {
 public:
  IdMismatch(std::string message, std::vector<std::string> offenders)
      : std::runtime_error(std::move(message)), offenders_(std::move(offenders)) {}
  const std::vector<std::string>& offenders() const { return offenders_; }

 private:
  std::vector<std::string> offenders_;
};

// Accuracy fields over completed attempts are undefined (nullopt) when nothing
// completed. exact_accuracy and completion_rate are over all attempts.
struct Metrics {
  std::size_t n_instances = 0;
  std::size_t attempts = 0;  // n_instances * trials when pooled
  std::size_t completed = 0;
  double completion_rate = 0.0;
  double exact_accuracy = 0.0;
  std::optional<double> checkpoint_accuracy;
  std::optional<double> target_accuracy;
  std::optional<double> mean_time;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

// One result per instance. Checkpoint and target accuracy use the full
// attempted trace, never stopping at the first violation.
Metrics score(const std::vector<Instance>& instances, const std::vector<ResultRecord>& results);

// Pools several independent result sets over the same instances (used for
// stochastic methods, where one draw per instance is a noisy estimate).
Metrics score_trials(const std::vector<Instance>& instances,
                     const std::vector<std::vector<ResultRecord>>& trials);

struct DatasetFingerprint {
  std::string digest;  // FNV-1a of the serialized dataset
  std::size_t count = 0;
  std::string n;  // "2048" or "min-max"
  double mean_checkpoints = 0.0;
  std::optional<std::uint64_t> seed;
};

DatasetFingerprint fingerprint_dataset(const std::vector<Instance>& instances,
                                       std::optional<std::uint64_t> seed = std::nullopt);

struct EvalReport {
  struct Row {
    std::string method;
    Metrics metrics;
  };
  std::vector<Row> rows;
  std::map<std::string, std::size_t> failure_modes;  // transcript grading only
  DatasetFingerprint dataset;
  std::vector<std::string> notes;  // extra header lines (settings, feature layout)
};

// Columns: method, completion, exact, checkpoint, target, time_s. Undefined
// cells are written as "NA".
std::string render_csv(const EvalReport& report);
// Markdown table in the same column order, plus failure-mode histogram.
std::string render_markdown(const EvalReport& report);

// ---------------------------------------------------------------------------
// Empirical checks of the search-bound statements.

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

// Wilson score interval at 95%.
Interval wilson95(std::size_t successes, std::size_t trials);

inline constexpr double kBoundSlack = 1.5;

struct BoundReport {
  std::string law;
  std::size_t k = 0;
  std::size_t beam_size = 0;  // beam law only
  std::size_t trials = 0;
  std::size_t successes = 0;
  double rate = 0.0;
  Interval interval;
  double bound = 0.0;
  double slack = kBoundSlack;
  // False whenever the interval's lower end exceeds bound * slack.
  bool pass = false;
};

struct BoundOptions {
  std::uint64_t seed = 0;
  std::size_t spacing = 32;  // positions per checkpoint segment
  bool one_bit_per_segment = false;
};

// solve_random on k evenly spaced checkpoints; success means every checkpoint
// holds (the last checkpoint sits at n, so it also fixes the target).
BoundReport validate_random_bound(std::size_t k, std::size_t trials, const BoundOptions& options = {});

// solve_beam with CheckpointsSatisfied scoring. The default instance family
// has one 1-bit per segment, so exactly one of 2^k parity patterns is valid.
BoundReport validate_beam_bound(std::size_t beam_size, std::size_t k, std::size_t trials,
                                BoundOptions options = {.seed = 0, .spacing = 32, .one_bit_per_segment = true});

struct DensityReport {
  std::size_t n = 0;
  std::size_t k = 0;
  std::uint64_t sequences = 0;
  std::uint64_t valid_checkpoints = 0;  // checkpoints only
  std::uint64_t valid_with_target = 0;  // checkpoints and target
  double fraction_checkpoints = 0.0;
  double fraction_with_target = 0.0;
  // Every segment (0,p1], (p1,p2], ... holds a 1-bit.
  bool checkpoint_segments_ok = false;
  // ... and (p_k, n] holds a 1-bit as well.
  bool target_segment_ok = false;
  double expected_checkpoints = 0.0;  // 2^-k
  double expected_with_target = 0.0;  // 2^-(k+1)
  bool pass = false;
};

// Exhaustive over all 2^n op sequences, n <= 20.
DensityReport validate_density(const Instance& instance);
DensityReport validate_density(std::size_t n, std::size_t k, std::uint64_t seed);

}  // namespace openxor::eval
