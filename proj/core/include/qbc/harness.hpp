#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qbc/decay.hpp"
#include "qbc/protocol.hpp"
#include "qbc/report.hpp"

namespace qbc::harness {

/// Thrown when an output path cannot be written or an input file cannot be
/// read; the command-line tool maps it to a distinct exit code.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

enum class OutputFormat { Json, Csv };

/// A full experiment: every strategy crossed with every sweep value, each
/// point repeated `trials` times under independent derived streams.
struct ExperimentPlan {
  std::vector<std::size_t> n_sweep = {1000};
  std::vector<protocol::AliceStrategy> strategies = {
      protocol::AliceStrategy::honest1()};
  std::size_t trials = 1;
  std::uint64_t master_seed = 0;
  double tau_over_T = 10.0;
  double unveil_over_T = 2.0;
  decay::ParticleSpecies species = decay::neutron_species();
  verify::TestConfig test;
  std::size_t threads = 0;  // 0 = one worker per hardware thread
  std::string out_path;     // empty = standard output
  OutputFormat format = OutputFormat::Json;

  void validate() const;

  /// Session config for one sweep point (seed filled in per trial).
  protocol::CommitmentConfig session_config(std::size_t n_qubits) const;
};

struct TrialRecord {
  std::uint64_t session_seed = 0;
  verify::VerificationReport report;
};

/// Aggregated outcome of one (strategy, N) sweep point.
struct SweepCell {
  std::string strategy;
  std::size_t n_qubits = 0;
  std::size_t trials = 0;
  std::size_t rejected = 0;
  double power = 0.0;  // rejected fraction
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::vector<TrialRecord> trial_records;
};

struct RunReport {
  ExperimentPlan plan;
  std::vector<SweepCell> cells;  // strategy-major, sweep-minor order
  std::string tool_version;
  double wall_time_seconds = 0.0;
};

/// Execute the plan on a bounded worker pool.  Every trial's stream is a
/// pure function of (master seed, strategy index, sweep index, trial
/// index), so serial and parallel execution give identical reports.
RunReport run_plan(const ExperimentPlan& plan);

/// 95% Wilson score interval for a binomial proportion.
std::pair<double, double> wilson_interval(std::size_t successes,
                                          std::size_t trials);

std::string to_json_string(const RunReport& report, int indent = 2);

/// One row per sweep cell: strategy,N,trials,rejected,power,ci_low,ci_high.
/// Locale-independent, 12 significant digits.
std::string to_csv_string(const RunReport& report);

void emit_json(const RunReport& report, const std::string& path);
void emit_csv(const RunReport& report, const std::string& path);

}  // namespace qbc::harness
