#include "qbc/harness.hpp"

#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include "qbc/version.hpp"
#include "serialization.hpp"

namespace qbc::harness {

namespace {

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, 12);
  return std::string(buf.data(), res.ptr);
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write output file: " + path);
  }
  out << body;
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

}  // namespace

void ExperimentPlan::validate() const {
  if (trials < 1) {
    throw std::invalid_argument("plan field trials must be >= 1");
  }
  if (n_sweep.empty()) {
    throw std::invalid_argument("plan field n_sweep must not be empty");
  }
  for (const std::size_t n : n_sweep) {
    if (n < 1) {
      throw std::invalid_argument("plan field n_sweep values must be >= 1");
    }
  }
  if (strategies.empty()) {
    throw std::invalid_argument("plan field strategies must not be empty");
  }
  test.validate();
  for (const auto& strategy : strategies) {
    for (const std::size_t n : n_sweep) {
      strategy.validate(session_config(n));
    }
  }
}

protocol::CommitmentConfig ExperimentPlan::session_config(
    std::size_t n_qubits) const {
  protocol::CommitmentConfig config;
  config.n_qubits = n_qubits;
  config.tau_over_T = tau_over_T;
  config.unveil_over_T = unveil_over_T;
  config.species = species;
  config.seed = 0;
  return config;
}

std::pair<double, double> wilson_interval(std::size_t successes,
                                          std::size_t trials) {
  if (trials == 0) return {0.0, 1.0};
  const double z = 1.959963984540054;  // two-sided 95%
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2n = z * z / n;
  const double center = (p + z2n / 2.0) / (1.0 + z2n);
  const double half = z / (1.0 + z2n) *
                      std::sqrt(p * (1.0 - p) / n + z2n / (4.0 * n));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

RunReport run_plan(const ExperimentPlan& plan) {
  plan.validate();
  const auto start = std::chrono::steady_clock::now();

  const std::size_t n_strategies = plan.strategies.size();
  const std::size_t n_points = plan.n_sweep.size();
  const std::size_t total = n_strategies * n_points * plan.trials;

  // Flat result table indexed by (strategy, sweep, trial); workers claim
  // indices from an atomic counter so no ordering or locking is needed.
  std::vector<TrialRecord> records(total);
  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  const auto worker = [&] {
    for (;;) {
      const std::size_t flat = cursor.fetch_add(1);
      if (flat >= total || failed.load()) break;
      const std::size_t si = flat / (n_points * plan.trials);
      const std::size_t rest = flat % (n_points * plan.trials);
      const std::size_t ni = rest / plan.trials;
      const std::size_t ti = rest % plan.trials;
      try {
        protocol::CommitmentConfig config =
            plan.session_config(plan.n_sweep[ni]);
        config.seed = RandomStream(plan.master_seed, {si, ni, ti}).next_u64();
        const auto transcript =
            protocol::run_session(config, plan.strategies[si], plan.test);
        records[flat] = {config.seed, transcript.report};
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        break;
      }
    }
  };

  std::size_t workers = plan.threads != 0
                            ? plan.threads
                            : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, total);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  RunReport report;
  report.plan = plan;
  report.tool_version = kVersionString;
  for (std::size_t si = 0; si < n_strategies; ++si) {
    for (std::size_t ni = 0; ni < n_points; ++ni) {
      SweepCell cell;
      cell.strategy = plan.strategies[si].name();
      cell.n_qubits = plan.n_sweep[ni];
      cell.trials = plan.trials;
      const std::size_t base = (si * n_points + ni) * plan.trials;
      for (std::size_t ti = 0; ti < plan.trials; ++ti) {
        const TrialRecord& rec = records[base + ti];
        if (!rec.report.accepted) ++cell.rejected;
        cell.trial_records.push_back(rec);
      }
      cell.power = static_cast<double>(cell.rejected) /
                   static_cast<double>(cell.trials);
      std::tie(cell.ci_low, cell.ci_high) =
          wilson_interval(cell.rejected, cell.trials);
      report.cells.push_back(std::move(cell));
    }
  }
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

std::string to_json_string(const RunReport& report, int indent) {
  using detail::Json;
  Json plan;
  plan["master_seed"] = report.plan.master_seed;
  plan["trials"] = report.plan.trials;
  plan["n_sweep"] = report.plan.n_sweep;
  Json strategies = Json::array();
  for (const auto& s : report.plan.strategies) {
    strategies.push_back(detail::strategy_json(s));
  }
  plan["strategies"] = std::move(strategies);
  plan["tau_over_T"] = report.plan.tau_over_T;
  plan["unveil_over_T"] = report.plan.unveil_over_T;
  plan["species"] = detail::species_json(report.plan.species);
  plan["test"] = detail::test_json(report.plan.test);
  plan["threads"] = report.plan.threads;
  plan["format"] =
      report.plan.format == OutputFormat::Csv ? "csv" : "json";

  Json cells = Json::array();
  for (const auto& cell : report.cells) {
    Json trials = Json::array();
    for (const auto& rec : cell.trial_records) {
      trials.push_back(Json{{"session_seed", rec.session_seed},
                            {"report", detail::report_json(rec.report)}});
    }
    cells.push_back(Json{
        {"strategy", cell.strategy},
        {"n_qubits", cell.n_qubits},
        {"trials", cell.trials},
        {"rejected", cell.rejected},
        {"power", cell.power},
        {"ci_low", cell.ci_low},
        {"ci_high", cell.ci_high},
        {"trial_records", std::move(trials)},
    });
  }

  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "run_report";
  j["tool_version"] = report.tool_version;
  j["plan"] = std::move(plan);
  j["cells"] = std::move(cells);
  j["wall_time_seconds"] = report.wall_time_seconds;
  return j.dump(indent);
}

std::string to_csv_string(const RunReport& report) {
  std::string out = "strategy,N,trials,rejected,power,ci_low,ci_high\n";
  for (const auto& cell : report.cells) {
    out += cell.strategy;
    out += ',';
    out += std::to_string(cell.n_qubits);
    out += ',';
    out += std::to_string(cell.trials);
    out += ',';
    out += std::to_string(cell.rejected);
    out += ',';
    out += format_double(cell.power);
    out += ',';
    out += format_double(cell.ci_low);
    out += ',';
    out += format_double(cell.ci_high);
    out += '\n';
  }
  return out;
}

void emit_json(const RunReport& report, const std::string& path) {
  write_file(path, to_json_string(report) + "\n");
}

void emit_csv(const RunReport& report, const std::string& path) {
  write_file(path, to_csv_string(report));
}

}  // namespace qbc::harness
