// Command-line front end: `table1` evaluates the leakage/error table,
// `session` runs seeded protocol sessions, `sweep` traces the partial-attack
// tradeoff, and `estimate-sim` Monte-Carlos the state-estimation attack.
// Reports go to --out (or stdout) as CSV or JSON.
//
// Exit codes: 0 success, 1 usage error, 2 I/O error, 3 internal error.
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "harness.hpp"

namespace {

using qpkc::harness::Format;
using qpkc::harness::Report;

struct OutputOptions {
  std::string path;
  Format format = Format::Csv;
  std::uint64_t seed = 0;
  bool show_config = false;
};

void add_output_options(CLI::App* cmd, OutputOptions* out) {
  cmd->add_option("--seed", out->seed, "Random seed")->capture_default_str();
  cmd->add_option("--out", out->path, "Output file (default: stdout)");
  cmd->add_option("--format", out->format, "Report format")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Format>{{"csv", Format::Csv},
                                        {"json", Format::Json}}))
      ->default_str("csv");
  cmd->add_flag("--show-config", out->show_config,
                "Print the resolved configuration and exit");
  cmd->set_config("--config", "", "Read options from a key=value file");
}

void emit(const Report& report, const OutputOptions& out,
          std::optional<int> round_dp = {}) {
  if (out.path.empty()) {
    if (out.format == Format::Csv) {
      qpkc::harness::write_csv(report, std::cout, round_dp);
    } else {
      qpkc::harness::write_json(report, std::cout, round_dp);
    }
  } else {
    qpkc::harness::write_report(report, out.path, out.format, round_dp);
  }
}

void print_config(const std::vector<std::pair<std::string, std::string>>& kv) {
  for (const auto& [key, value] : kv) {
    std::cout << key << "=" << value << "\n";
  }
}

std::string format_name(Format format) {
  return format == Format::Csv ? "csv" : "json";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation lab for a Bell-pair public-key cryptosystem"};
  app.require_subcommand(1);

  // ---- table1 ----
  auto* table1 = app.add_subcommand(
      "table1", "Leakage and error-rate table for the estimation attack");
  OutputOptions table1_out;
  qpkc::harness::Table1Config table1_cfg;
  std::string table1_mode = "approx";
  bool round4 = false;
  table1->add_option("--k", table1_cfg.k_values, "Copy counts K")
      ->delimiter(',')
      ->capture_default_str();
  table1->add_option("--mode", table1_mode, "Fidelity mode")
      ->check(CLI::IsMember({"approx", "exact"}))
      ->capture_default_str();
  table1->add_flag("--round4", round4, "Round printed values to 4 decimals");
  add_output_options(table1, &table1_out);

  // ---- session ----
  auto* session = app.add_subcommand("session", "Run seeded protocol sessions");
  OutputOptions session_out;
  qpkc::harness::SessionCommandConfig session_cfg;
  std::string session_adversary = "none";
  session->add_option("--adversary", session_adversary, "Channel adversary")
      ->check(CLI::IsMember({"none", "intercept", "entangle", "dos"}))
      ->capture_default_str();
  session->add_option("--n", session_cfg.session.key_length,
                      "Bell pairs minted at key generation")
      ->capture_default_str();
  session->add_option("--decoys", session_cfg.session.decoy_count,
                      "Decoy qubits per transmission (0 = auto)")
      ->capture_default_str();
  session->add_option("--msg-len", session_cfg.session.message_length,
                      "Message length in bits")
      ->capture_default_str();
  session->add_option("--attack-fraction",
                      session_cfg.adversary.attack_fraction,
                      "Per-qubit attack probability")
      ->capture_default_str();
  session->add_option("--flip-prob", session_cfg.adversary.flip_probability,
                      "Flip probability (dos adversary)")
      ->capture_default_str();
  session->add_option("--noise",
                      session_cfg.session.depolarizing_probability,
                      "Depolarizing probability per transit qubit")
      ->capture_default_str();
  session->add_option("--abort-threshold",
                      session_cfg.session.abort_threshold,
                      "Max tolerated decoy/recycle error rate")
      ->capture_default_str();
  session->add_option("--recycle-fraction",
                      session_cfg.session.recycle_test_fraction,
                      "Fraction of returned qubits tested")
      ->capture_default_str();
  session->add_option("--trials", session_cfg.trials, "Independent sessions")
      ->capture_default_str();
  add_output_options(session, &session_out);

  // ---- sweep ----
  auto* sweep = app.add_subcommand(
      "sweep", "Abort/leak tradeoff across attack fractions");
  OutputOptions sweep_out;
  qpkc::harness::SweepConfig sweep_cfg;
  std::string sweep_adversary = "entangle";
  std::string fractions_spec = "0:1:0.1";
  sweep->add_option("--adversary", sweep_adversary, "Channel adversary")
      ->check(CLI::IsMember({"none", "intercept", "entangle", "dos"}))
      ->capture_default_str();
  sweep->add_option("--fractions", fractions_spec,
                    "Attack-fraction grid start:stop:step")
      ->capture_default_str();
  sweep->add_option("--n", sweep_cfg.session.key_length,
                    "Bell pairs minted at key generation")
      ->capture_default_str();
  sweep->add_option("--decoys", sweep_cfg.session.decoy_count,
                    "Decoy qubits per transmission (0 = auto)")
      ->capture_default_str();
  sweep->add_option("--msg-len", sweep_cfg.session.message_length,
                    "Message length in bits")
      ->capture_default_str();
  sweep->add_option("--flip-prob", sweep_cfg.flip_probability,
                    "Flip probability (dos adversary)")
      ->capture_default_str();
  sweep->add_option("--trials", sweep_cfg.trials_per_point,
                    "Sessions per grid point")
      ->capture_default_str();
  add_output_options(sweep, &sweep_out);

  // ---- estimate-sim ----
  auto* estimate = app.add_subcommand(
      "estimate-sim", "Monte Carlo check of the estimation-attack formulas");
  OutputOptions estimate_out;
  qpkc::harness::EstimateSimConfig estimate_cfg;
  estimate->add_option("--k", estimate_cfg.copies, "Public-key copies K")
      ->capture_default_str();
  estimate->add_option("--msg-len", estimate_cfg.message_length,
                       "Message length per trial")
      ->capture_default_str();
  estimate->add_option("--trials", estimate_cfg.trials, "Attack trials")
      ->capture_default_str();
  add_output_options(estimate, &estimate_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (table1->parsed()) {
      table1_cfg.mode = table1_mode == "exact"
                            ? qpkc::gmn::FidelityMode::ExactSum
                            : qpkc::gmn::FidelityMode::Approximation;
      if (table1_out.show_config) {
        std::string k_list;
        for (auto k : table1_cfg.k_values) {
          k_list += (k_list.empty() ? "" : ",") + std::to_string(k);
        }
        print_config({{"command", "table1"},
                      {"k", k_list},
                      {"mode", table1_mode},
                      {"round4", round4 ? "true" : "false"},
                      {"seed", std::to_string(table1_out.seed)},
                      {"out", table1_out.path},
                      {"format", format_name(table1_out.format)}});
        return 0;
      }
      emit(cmd_table1(table1_cfg), table1_out,
           round4 ? std::optional<int>(4) : std::nullopt);
      return 0;
    }

    if (session->parsed()) {
      session_cfg.adversary.kind =
          qpkc::harness::parse_adversary_name(session_adversary);
      session_cfg.seed = session_out.seed;
      if (session_out.show_config) {
        print_config(
            {{"command", "session"},
             {"adversary", session_adversary},
             {"n", std::to_string(session_cfg.session.key_length)},
             {"decoys",
              std::to_string(session_cfg.session.resolved_decoy_count())},
             {"msg-len", std::to_string(session_cfg.session.message_length)},
             {"attack-fraction",
              std::to_string(session_cfg.adversary.attack_fraction)},
             {"flip-prob",
              std::to_string(session_cfg.adversary.flip_probability)},
             {"noise",
              std::to_string(session_cfg.session.depolarizing_probability)},
             {"abort-threshold",
              std::to_string(session_cfg.session.abort_threshold)},
             {"recycle-fraction",
              std::to_string(session_cfg.session.recycle_test_fraction)},
             {"trials", std::to_string(session_cfg.trials)},
             {"seed", std::to_string(session_cfg.seed)},
             {"out", session_out.path},
             {"format", format_name(session_out.format)}});
        return 0;
      }
      emit(cmd_session(session_cfg), session_out);
      return 0;
    }

    if (sweep->parsed()) {
      sweep_cfg.adversary = qpkc::harness::parse_adversary_name(sweep_adversary);
      sweep_cfg.fractions = qpkc::harness::parse_fraction_grid(fractions_spec);
      sweep_cfg.seed = sweep_out.seed;
      if (sweep_out.show_config) {
        print_config(
            {{"command", "sweep"},
             {"adversary", sweep_adversary},
             {"fractions", fractions_spec},
             {"n", std::to_string(sweep_cfg.session.key_length)},
             {"decoys",
              std::to_string(sweep_cfg.session.resolved_decoy_count())},
             {"msg-len", std::to_string(sweep_cfg.session.message_length)},
             {"flip-prob", std::to_string(sweep_cfg.flip_probability)},
             {"trials", std::to_string(sweep_cfg.trials_per_point)},
             {"seed", std::to_string(sweep_cfg.seed)},
             {"out", sweep_out.path},
             {"format", format_name(sweep_out.format)}});
        return 0;
      }
      emit(cmd_sweep(sweep_cfg), sweep_out);
      return 0;
    }

    if (estimate->parsed()) {
      estimate_cfg.seed = estimate_out.seed;
      if (estimate_out.show_config) {
        print_config({{"command", "estimate-sim"},
                      {"k", std::to_string(estimate_cfg.copies)},
                      {"msg-len", std::to_string(estimate_cfg.message_length)},
                      {"trials", std::to_string(estimate_cfg.trials)},
                      {"seed", std::to_string(estimate_cfg.seed)},
                      {"out", estimate_out.path},
                      {"format", format_name(estimate_out.format)}});
        return 0;
      }
      emit(cmd_estimate_sim(estimate_cfg), estimate_out);
      return 0;
    }
  } catch (const qpkc::harness::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
