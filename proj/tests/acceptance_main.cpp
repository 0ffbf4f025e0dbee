// Acceptance suite: one check per release criterion, each printed as a
// single pass/fail line.  The published-table and Monte Carlo criteria run
// through the real CLI binary (path via --cli or the QPKC_CLI environment
// variable); the rest drive the libraries directly.
//
// All randomized checks run on fixed seeds, so every verdict is
// reproducible.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "harness.hpp"
#include "qpkc/gmn.hpp"
#include "qpkc/protocol.hpp"

namespace {

using namespace qpkc;

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
  if (!condition) {
    throw CheckFailure(message);
  }
}

std::string cli_path;

std::string run_cli(const std::string& args) {
  const std::string command = cli_path + " " + args + " 2>/dev/null";
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(command.c_str(), "r"),
                                             pclose);
  require(pipe != nullptr, "failed to launch: " + command);
  std::string output;
  char buffer[4096];
  std::size_t got = 0;
  while ((got = fread(buffer, 1, sizeof(buffer), pipe.get())) > 0) {
    output.append(buffer, got);
  }
  return output;
}

std::vector<std::vector<std::string>> run_cli_csv(const std::string& args) {
  std::istringstream in(run_cli(args));
  auto rows = harness::read_csv(in);
  require(rows.size() > 1, "CLI produced no data rows for: " + args);
  return rows;
}

// ---- criteria ----

void table1_reproduction() {
  const auto rows =
      run_cli_csv("table1 --k 10,20,50,100,1000 --mode approx --round4");
  require(rows.size() == 6, "expected header plus five rows");
  const char* information[] = {"0.6627", "0.8061", "0.9092", "0.9496",
                               "0.9933"};
  const char* error[] = {"0.0488", "0.0247", "0.0100", "0.0050", "0.0005"};
  for (std::size_t i = 0; i < 5; ++i) {
    require(rows[i + 1][2] == information[i],
            "I(A,E) mismatch in row " + std::to_string(i) + ": got " +
                rows[i + 1][2] + ", want " + information[i]);
    require(rows[i + 1][4] == error[i],
            "P_e mismatch in row " + std::to_string(i) + ": got " +
                rows[i + 1][4] + ", want " + error[i]);
  }
}

void exact_sum_bound() {
  require(gmn::optimal_fidelity_exact(1) == 0.75, "F(1) must be exactly 0.75");
  require(std::abs(gmn::optimal_fidelity_exact(2) - 0.8535534) <= 1e-6,
          "F(2) out of tolerance");
  require(std::abs(gmn::optimal_fidelity_exact(10) - 0.975242) <= 1e-5,
          "F(10) out of tolerance");

  const auto prefix = gmn::optimal_fidelity_exact_prefix(10000);
  for (std::size_t m = 10; m <= 10000; ++m) {
    const double approx = 1.0 - 1.0 / (4.0 * static_cast<double>(m));
    require(std::abs(prefix[m - 1] - approx) < 1e-3,
            "exact and approximate forms diverge at M = " + std::to_string(m));
  }
  for (std::size_t m = 2; m <= 10000; ++m) {
    require(prefix[m - 1] >= prefix[m - 2],
            "fidelity must be nondecreasing; violated at M = " +
                std::to_string(m));
  }
}

void monte_carlo_confirmation() {
  const auto rows = run_cli_csv("estimate-sim --k 10 --trials 1000000");
  const double pe = std::stod(rows[1][3]);
  const double accuracy = std::stod(rows[1][5]);
  require(std::abs(accuracy - 0.975) < 1e-3,
          "empirical accuracy " + std::to_string(accuracy) +
              " strays from 0.975");
  require(std::abs(pe - 0.04875) < 1e-3,
          "empirical error rate " + std::to_string(pe) +
              " strays from 0.04875");
}

void protocol_round_trip() {
  proto::SessionConfig config;
  config.key_length = 64;
  config.message_length = 32;
  config.decoy_count = 16;
  for (int trial = 0; trial < 1000; ++trial) {
    config.seed = stream_seed(20240, static_cast<std::uint64_t>(trial));
    const auto outcome =
        proto::run_session(config, proto::AdversaryStrategy::none());
    require(!outcome.aborted, "clean session aborted");
    require(outcome.recovered_message == outcome.message,
            "message bits corrupted on a clean channel");
    require(*outcome.decoy_error_rate_keygen == 0.0 &&
                *outcome.decoy_error_rate_issue == 0.0 &&
                *outcome.recycle_error_rate == 0.0,
            "clean channel reported errors");
    require(*outcome.digest_ok, "digest check failed on a clean channel");
    for (double fid : outcome.post_decrypt_bell_fidelities) {
      require(std::abs(fid - 1.0) <= 1e-10,
              "post-decryption pair strayed from the Bell state");
    }
  }
}

void entangling_attack_tradeoff() {
  proto::SessionConfig config;
  config.key_length = 80;
  config.message_length = 16;
  config.decoy_count = 16;
  const auto adversary = proto::AdversaryStrategy::entangle(1.0);

  int keygen_aborts = 0;
  int delivered = 0;
  const int trials = 10000;
  for (int trial = 0; trial < trials; ++trial) {
    config.seed = stream_seed(555, static_cast<std::uint64_t>(trial));
    const auto outcome = proto::run_session(config, adversary);
    if (outcome.aborted && outcome.abort_stage == "keygen") {
      ++keygen_aborts;
      continue;
    }
    require(outcome.delivered(), "non-detected session should deliver");
    ++delivered;
    for (std::size_t i = 0; i < outcome.message.size(); ++i) {
      require(outcome.eve_recovered_bits[i].attacked,
              "full-fraction attack left a bit untouched");
      require(outcome.eve_recovered_bits[i].bit == outcome.message[i],
              "attacked bit read incorrectly");
    }
  }
  const double detection =
      static_cast<double>(keygen_aborts) / static_cast<double>(trials);
  const double expected = 1.0 - std::pow(0.75, 16.0);
  require(std::abs(detection - expected) < 0.01,
          "decoy detection frequency " + std::to_string(detection) +
              " strays from " + std::to_string(expected));
  require(delivered > 0, "no run escaped detection at this sample size");
}

void ciphertext_mixedness() {
  Rng rng(31337);
  proto::SessionConfig config;
  config.key_length = 72;
  config.message_length = 8;
  config.decoy_count = 8;
  for (int round = 0; round < 100; ++round) {
    auto stage1 = proto::stage1_keygen(config, proto::AdversaryStrategy::none(),
                                       rng);
    require(!stage1.aborted, "clean keygen aborted");
    std::vector<int> payload(72);
    for (auto& bit : payload) {
      bit = rng.bit();
    }
    const auto issue = proto::stage2_issue_public_key(
        stage1.store, payload.size(), config, proto::AdversaryStrategy::none(),
        rng);
    proto::stage2_encrypt(stage1.store, issue.issued, payload);

    std::vector<sim::Basis> bases = {sim::Basis::z(), sim::Basis::x()};
    for (int i = 0; i < 10; ++i) {
      bases.push_back(sim::Basis::planar(rng.uniform() * 6.283185307179586));
    }
    for (std::size_t index : issue.issued) {
      const auto& pair = stage1.store.pair(index);
      for (const auto& basis : bases) {
        const auto [p0, p1] =
            pair.reg.outcome_probabilities(*pair.cipher_index, basis);
        require(std::abs(p0 - 0.5) <= 1e-12 && std::abs(p1 - 0.5) <= 1e-12,
                "cipher qubit leaked its plaintext in basis " + basis.name());
      }
    }
  }
}

void sweep_monotonicity() {
  harness::SweepConfig config;
  config.session.key_length = 68;
  config.session.message_length = 4;
  config.session.decoy_count = 3;
  config.session.recycle_test_fraction = 0.04;  // 3 recycle tests
  config.adversary = proto::AdversaryKind::EntangleCnotAncilla;
  config.trials_per_point = 1000;
  config.seed = 97;
  for (int i = 0; i <= 10; ++i) {
    config.fractions.push_back(0.1 * i);
  }

  const auto report = harness::cmd_sweep(config);
  std::vector<double> abort_probability;
  std::vector<double> accuracy;
  for (const auto& row : report.rows) {
    abort_probability.push_back(std::get<double>(row[2]));
    accuracy.push_back(std::get<double>(row[3]));
  }
  require(abort_probability.front() == 0.0,
          "the no-attack point must never abort");
  for (std::size_t i = 1; i < abort_probability.size(); ++i) {
    require(abort_probability[i] > abort_probability[i - 1],
            "abort probability not strictly increasing at grid point " +
                std::to_string(i));
  }
  require(std::abs(accuracy.front() - 0.5) < 0.05,
          "blind guessing should sit at one half");
  require(accuracy.back() == 1.0,
          "a full-fraction attacker reads every delivered bit");
  for (std::size_t i = 1; i < accuracy.size(); ++i) {
    require(accuracy[i] > accuracy[i - 1] - 0.02,
            "accuracy fell along the grid at point " + std::to_string(i));
  }
}

struct Criterion {
  const char* name;
  double budget_seconds;
  std::function<void()> run;
};

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--cli") {
      cli_path = argv[i + 1];
    }
  }
  if (cli_path.empty()) {
    if (const char* env = std::getenv("QPKC_CLI")) {
      cli_path = env;
    }
  }
  if (cli_path.empty()) {
    std::cerr << "acceptance: need --cli <path> or QPKC_CLI pointing at the "
                 "CLI binary\n";
    return 2;
  }

  const std::vector<Criterion> criteria = {
      {"table1-reproduction", 1.0, table1_reproduction},
      {"exact-sum-bound", 5.0, exact_sum_bound},
      {"monte-carlo-confirmation", 60.0, monte_carlo_confirmation},
      {"protocol-round-trip", 30.0, protocol_round_trip},
      {"entangling-attack-tradeoff", 120.0, entangling_attack_tradeoff},
      {"ciphertext-mixedness", 5.0, ciphertext_mixedness},
      {"sweep-monotonicity", 0.0, sweep_monotonicity},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string reason;
    try {
      criterion.run();
    } catch (const std::exception& e) {
      reason = e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (reason.empty() && criterion.budget_seconds > 0.0 &&
        elapsed > criterion.budget_seconds) {
      reason = "exceeded the " + std::to_string(criterion.budget_seconds) +
               " s budget";
    }
    if (reason.empty()) {
      std::printf("[PASS] %-28s (%.2f s)\n", criterion.name, elapsed);
    } else {
      std::printf("[FAIL] %-28s (%.2f s) %s\n", criterion.name, elapsed,
                  reason.c_str());
      ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}
