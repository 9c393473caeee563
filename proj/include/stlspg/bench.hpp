// SPDX-License-Identifier: Apache-2.0
//
// Experiment harness: configuration, campaign execution over ROM variants,
// relative-error and timing records, Pareto extraction, and report files.
#pragma once

#include "stlspg/core.hpp"
#include "stlspg/st_rom.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stlspg {

// One ROM variant with its method parameters. Unused fields stay 0.
struct RomVariantConfig {
  std::string name;  // lspg | gnat | st-lspg-1 | st-lspg-2 | st-gnat-1 | st-gnat-2
  Index n_s = 0;            // spatial trial modes
  Index n_t = 0;            // shared temporal trial modes (fixed variants)
  Index n_t_per_mode = 0;   // tailored temporal trial modes per spatial mode
  Index n_z = 0;            // spatial sample rows (gnat)
  Index n_r = 0;            // spatial residual basis size (gnat)
  Index n_rs = 0;           // space-time residual basis: spatial modes
  Index n_rt = 0;           // space-time residual basis: temporal modes
                            // (per spatial mode when tailored)
  Index n_bar_s = 0;        // space-time sample rows
  Index n_bar_t = 0;        // space-time sample time steps
};

struct ExperimentConfig {
  std::string problem = "burgers";  // burgers | euler_nozzle
  std::string scheme = "BE";
  double dt = 0.0;
  Index num_steps = 0;
  std::vector<Vector> training;
  std::vector<Vector> online;
  std::vector<RomVariantConfig> variants;
  std::uint64_t seed = 0;
  Index timing_repeats = 1;
  double newton_tol = 1e-10;
  std::string output_dir;
};

// JSON file; schema documented in the repository README.
ExperimentConfig load_config(const std::string& path);

struct RunRecord {
  std::string variant;
  Vector mu;
  Index dim = 0;  // unknowns solved online
  double error = 0.0;
  double online_seconds = 0.0;
  double fom_seconds = 0.0;
  double relative_wall_time = 0.0;  // online / FOM
  double speedup = 0.0;             // FOM / online
  std::uint64_t component_evals = 0;
  bool ok = false;
  std::string message;
  GaussNewtonHistory history;  // space-time variants only
};

// sqrt(sum_n ||rom^n - fom^n||^2) / sqrt(sum_n ||fom^n||^2) over n = 1..N_t;
// inputs are state matrices with column 0 = initial state.
double relative_error(const Matrix& rom_states, const Matrix& fom_states);

// Rejects variants violating the sampling/basis-size orderings; the reason
// is returned for reporting.
bool variant_constraints_ok(const RomVariantConfig& v, std::string* why);

struct CampaignResult {
  std::vector<RunRecord> records;
  std::vector<std::size_t> pareto;  // indices into records
};

// Offline phase (training trajectories, bases, residual bases, sample sets,
// shared across variants) followed by online solves at every online point.
// Individual run failures are recorded and the campaign continues.
CampaignResult run_campaign(const ExperimentConfig& config);

// Non-dominated records under (error, relative_wall_time), failed runs
// excluded; indices ascending.
std::vector<std::size_t> pareto_front(const std::vector<RunRecord>& records);

// Writes runs.csv, pareto.csv, config_echo.json, and per-run convergence
// CSVs into `dir` (created if missing).
void emit_reports(const CampaignResult& result, const ExperimentConfig& config,
                  const std::string& dir);

}  // namespace stlspg
