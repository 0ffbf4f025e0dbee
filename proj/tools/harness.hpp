// Experiment front end behind the CLI: the published-table command, seeded
// protocol sessions, adversary sweeps, the attack Monte Carlo, and CSV/JSON
// report writing.  Everything is deterministic in (configuration, seed);
// trials run in parallel over fixed per-trial streams, so thread count never
// changes a report.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qpkc/gmn.hpp"
#include "qpkc/protocol.hpp"

namespace qpkc::harness {

using Cell = std::variant<std::int64_t, double, std::string>;

struct Report {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

enum class Format { Csv, Json };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Doubles print with 17 significant digits unless `round_dp` pins a fixed
// number of decimals (presentation only; nothing upstream is rounded).
std::string format_cell(const Cell& cell, std::optional<int> round_dp = {});
void write_csv(const Report& report, std::ostream& out,
               std::optional<int> round_dp = {});
void write_json(const Report& report, std::ostream& out,
                std::optional<int> round_dp = {});
void write_report(const Report& report, const std::string& path, Format format,
                  std::optional<int> round_dp = {});

// Cells come back as raw strings (header row included).
std::vector<std::vector<std::string>> read_csv(std::istream& in);

struct Table1Config {
  std::vector<std::int64_t> k_values{10, 20, 50, 100, 1000};
  gmn::FidelityMode mode = gmn::FidelityMode::Approximation;
};

// Columns: K, F, I_AE, I_AE_clamped, P_e.
Report cmd_table1(const Table1Config& config);

struct SessionCommandConfig {
  proto::SessionConfig session;
  proto::AdversaryStrategy adversary;
  std::int64_t trials = 100;
  std::uint64_t seed = 0;
};

// One row per trial plus an aggregate row (trial = -1).  Columns: trial,
// aborted, abort_stage, decoy_err_keygen, decoy_err_issue, recycle_err,
// msg_ok, digest_ok, eve_bit_accuracy, mean_bell_fidelity.  Metrics a trial
// never reached are -1.
Report cmd_session(const SessionCommandConfig& config);

struct SweepConfig {
  proto::SessionConfig session;
  proto::AdversaryKind adversary = proto::AdversaryKind::EntangleCnotAncilla;
  double flip_probability = 1.0;
  std::vector<double> fractions;
  std::int64_t trials_per_point = 1000;
  std::uint64_t seed = 0;
};

// Columns: fraction, sessions, abort_probability, eve_mean_accuracy,
// mean_decoy_error_rate.  Eve accuracy averages over delivered sessions
// (-1 when none completed).
Report cmd_sweep(const SweepConfig& config);

struct EstimateSimConfig {
  std::int64_t copies = 10;  // K
  int message_length = 1;
  std::int64_t trials = 100000;
  std::uint64_t seed = 0;
  int resolution_bits = 16;
  std::optional<double> fidelity_override;  // tests inject F = 1
};

// Columns: K, F_theory, Pe_theory, Pe_empirical, EveAcc_theory,
// EveAcc_empirical, trials.
Report cmd_estimate_sim(const EstimateSimConfig& config);

// "start:stop:step" -> inclusive grid; throws std::invalid_argument on
// malformed specs or values outside [0, 1].
std::vector<double> parse_fraction_grid(const std::string& spec);

proto::AdversaryKind parse_adversary_name(const std::string& name);

}  // namespace qpkc::harness
