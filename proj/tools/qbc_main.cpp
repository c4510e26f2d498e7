#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qbc/harness.hpp"
#include "qbc/verify.hpp"
#include "qbc/version.hpp"

namespace {

int run(int argc, char** argv) {
  CLI::App app{
      "Simulator for a bit-commitment protocol whose information sink is "
      "parity-violating decay of unstable particles"};
  app.set_version_flag("--version", qbc::kVersionString);

  std::vector<std::size_t> n_sweep;
  app.add_option("--n", n_sweep,
                 "Security parameter N; repeat the flag to sweep");
  std::vector<std::string> strategy_names;
  app.add_option("--strategy", strategy_names,
                 "Committer strategy: honest0, honest1, switch01, switch10, "
                 "switch10-posterior, fabricate; repeatable");

  qbc::harness::ExperimentPlan plan;
  app.add_option("--tau-over-t", plan.tau_over_T,
                 "W lifetime in units of the qubit storage bound T")
      ->capture_default_str();
  app.add_option("--unveil-over-t", plan.unveil_over_T,
                 "Unveiling time in units of T")
      ->capture_default_str();
  double switch_over_t = 1.0;
  app.add_option("--switch-over-t", switch_over_t,
                 "Swap moment for switch01, in units of T")
      ->capture_default_str();

  std::string species_file;
  app.add_option("--species-file", species_file,
                 "JSON file overriding the particle species");
  double alpha = plan.species.asymmetry;
  auto* alpha_opt =
      app.add_option("--alpha", alpha, "Asymmetry coefficient in [-1, 1]");
  double endpoint = plan.species.endpoint_kev;
  auto* endpoint_opt = app.add_option("--endpoint-kev", endpoint,
                                      "Kinetic-energy endpoint Q in keV");
  bool monoenergetic = false;
  app.add_flag("--monoenergetic", monoenergetic,
               "All electrons carry the endpoint momentum");

  app.add_option("--trials", plan.trials, "Trials per (strategy, N) point")
      ->capture_default_str();
  app.add_option("--seed", plan.master_seed, "Master seed")
      ->capture_default_str();
  app.add_option("--significance", plan.test.significance,
                 "Total false-rejection budget per session")
      ->capture_default_str();
  app.add_option("--theta-bins", plan.test.theta_bins,
                 "Polar bins (even; folded in pairs)")
      ->capture_default_str();
  app.add_option("--p-bins", plan.test.p_bins, "Momentum bins")
      ->capture_default_str();
  app.add_option("--threads", plan.threads,
                 "Worker threads (0 = hardware concurrency)")
      ->capture_default_str();
  app.add_option("--out", plan.out_path,
                 "Output path (default: standard output)");
  std::string format = "json";
  app.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();

  std::size_t audit_n = 0;
  auto* audit_opt =
      app.add_option("--audit-concealing", audit_n,
                     "Run the concealing audit on N_SMALL qubits and exit");
  std::string transcript_path;
  app.add_option("--transcript", transcript_path,
                 "Also write the first trial's full session transcript here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (!species_file.empty()) {
    std::ifstream probe(species_file);
    if (!probe) {
      std::cerr << "cannot open species file: " << species_file << "\n";
      return 1;
    }
    plan.species = qbc::decay::load_species(species_file);
  }
  if (*alpha_opt) plan.species.asymmetry = alpha;
  if (*endpoint_opt) plan.species.endpoint_kev = endpoint;
  if (monoenergetic) {
    plan.species.spectrum = qbc::decay::SpectrumMode::Monoenergetic;
  }
  plan.species.validate();

  if (*audit_opt) {
    qbc::RandomStream rng(plan.master_seed, {11});
    const double distance = qbc::verify::concealing_audit(audit_n, rng);
    nlohmann::ordered_json j{{"schema_version", qbc::kSchemaVersion},
                             {"kind", "concealing_audit"},
                             {"n_small", audit_n},
                             {"max_trace_distance", distance}};
    const std::string body = j.dump(2) + "\n";
    if (plan.out_path.empty()) {
      std::cout << body;
    } else {
      std::ofstream out(plan.out_path, std::ios::binary);
      if (!out || !(out << body)) {
        std::cerr << "cannot write output file: " << plan.out_path << "\n";
        return 1;
      }
    }
    return 0;
  }

  if (!n_sweep.empty()) plan.n_sweep = n_sweep;
  if (!strategy_names.empty()) {
    plan.strategies.clear();
    for (const auto& name : strategy_names) {
      plan.strategies.push_back(qbc::protocol::strategy_from_name(name));
    }
  }
  for (auto& strategy : plan.strategies) {
    if (strategy.kind == qbc::protocol::StrategyKind::SwitchZeroToOne) {
      strategy.switch_over_T = switch_over_t;
    }
  }
  plan.format = format == "csv" ? qbc::harness::OutputFormat::Csv
                                : qbc::harness::OutputFormat::Json;
  plan.validate();

  const qbc::harness::RunReport report = qbc::harness::run_plan(plan);

  if (!transcript_path.empty()) {
    auto config = plan.session_config(plan.n_sweep.front());
    config.seed = report.cells.front().trial_records.front().session_seed;
    const auto transcript =
        qbc::protocol::run_session(config, plan.strategies.front(), plan.test);
    std::ofstream out(transcript_path, std::ios::binary);
    if (!out || !(out << qbc::protocol::to_json_string(transcript, 2) << "\n")) {
      std::cerr << "cannot write transcript file: " << transcript_path << "\n";
      return 1;
    }
  }

  const std::string body = plan.format == qbc::harness::OutputFormat::Csv
                               ? qbc::harness::to_csv_string(report)
                               : qbc::harness::to_json_string(report) + "\n";
  if (plan.out_path.empty()) {
    std::cout << body;
  } else if (plan.format == qbc::harness::OutputFormat::Csv) {
    qbc::harness::emit_csv(report, plan.out_path);
  } else {
    qbc::harness::emit_json(report, plan.out_path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const qbc::harness::IoError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}
