#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nrhc/sim.hpp"

namespace nrhc::config {

/// Process exit codes of the command-line front end.
enum ExitCode : int {
  kOk = 0,
  kValidation = 2,
  kDivergence = 3,
  kIo = 4,
};

std::vector<std::string> preset_names();

/// Four Lorenz agents with the benchmark initial states and tuning.
///   example1: fixed round-robin over the example topologies, 2.5 s dwell
///   example2: same family, topology chosen automatically each sample
///   example3: fixed delay-example graph with a 0.2 s communication delay
/// `t_end` and `delay` override the preset values; example3 rejects delay 0.
sim::SimConfig preset(std::string_view name, std::optional<double> t_end = std::nullopt,
                      std::optional<double> delay = std::nullopt);

/// Parses and validates; throws ValidationError naming the offending field.
sim::SimConfig parse_config(const nlohmann::json& doc);
sim::SimConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const sim::SimConfig& config);

/// Shortest decimal string that parses back to the same double.
std::string format_number(double value);

/// `t,agent,x1..xn,u1..un,sigma,J,P_norm,consensus_err`, one row per agent per sample.
void write_trajectory_csv(std::ostream& out, const sim::TrajectoryLog& log);
/// `t,sigma`, one row per topology change.
void write_switching_csv(std::ostream& out, const sim::TrajectoryLog& log);

struct RunSummary {
  double initial_consensus_error = 0.0;
  double final_consensus_error = 0.0;
  double final_total_cost = 0.0;
  double wall_time_s = 0.0;
  bool diverged = false;
  std::string error;
};

nlohmann::json metrics_json(const sim::SimConfig& config, const sim::TrajectoryLog& log,
                            const RunSummary& summary);

/// Runs `config` and writes trajectory.csv, switching.csv and metrics.json to
/// `out_dir`. Partial outputs are still written when the solver diverges.
int run_and_emit(const sim::SimConfig& config, const std::filesystem::path& out_dir,
                 std::ostream& out, std::ostream& err, sim::RunOptions options = {});

}  // namespace nrhc::config
