// Single-qubit-rotation public-key scheme and the state-estimation attack on
// it: key material, the optimal-estimation fidelity bound, the derived
// leakage / error formulas behind the published table, and a Monte Carlo
// intercept-resend run that confirms the closed forms.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qpkc/quantum.hpp"
#include "qpkc/rng.hpp"

namespace qpkc::gmn {

// Private key {n, s}; public key = the rotated states R(s_j * theta_n)|0>.
struct KeyPair {
  int resolution_bits = 0;  // n; theta_n = pi / 2^(n-1)
  double step_angle = 0.0;
  std::vector<std::uint32_t> secret;                // s_j in [0, 2^n)
  std::vector<sim::QuantumRegister> public_states;  // one qubit each

  double key_angle(std::size_t j) const {
    return static_cast<double>(secret[j]) * step_angle;
  }
};

// s sampled uniformly from [0, 2^n) per qubit.  1 <= resolution_bits <= 30.
KeyPair keygen(int resolution_bits, std::size_t key_length, Rng& rng);

// Plaintext 1 applies the half-turn R(pi); plaintext 0 leaves the state as
// is, so the two ciphertexts are orthogonal.
sim::QuantumRegister encrypt(const sim::QuantumRegister& public_state,
                             int message_bit);

// Measures the cipher in the key basis { |psi_s>, |psi_s_perp> }.
int decrypt(sim::QuantumRegister cipher, std::uint32_t secret_j,
            double step_angle, Rng& rng);

enum class FidelityMode { ExactSum, Approximation };

// Optimal collective-estimation fidelity from M copies of a planar state:
//   F = 1/2 + 2^-(M+1) * sum_{i=0}^{M-1} sqrt(C(M,i) C(M,i+1)),
// evaluated in log space (log-factorials, long double) so the result is
// accurate to ~1e-10 relative error for 1 <= M <= 10^6.
double optimal_fidelity_exact(std::int64_t copies);
// F for every M in [1, max_copies]; shares one log-factorial table, which
// makes dense sweeps cheap.  result[m - 1] = F(m).
std::vector<double> optimal_fidelity_exact_prefix(std::int64_t max_copies);
// The large-M form 1 - 1/(4M).
double optimal_fidelity_approx(std::int64_t copies);

double binary_entropy(double p);
// Error probability 2F(1-F) a resend at overlap F leaves between the
// legitimate parties.  F in [1/2, 1].
double error_probability(double fidelity);
// Mutual information 1 - 2 h(F) the eavesdropper gains per bit; negative
// raw values near F = 1/2 are returned as-is (callers may clamp).
double eve_information(double fidelity);

// Deviation angle delta with cos^2(delta/2) = F, i.e. 2 acos(sqrt F).
double estimation_offset(double fidelity);
// true_angle +- delta with the sign uniform at random, so the guessed state
// overlaps the true one at exactly F.
double estimated_angle(double true_angle, double fidelity, Rng& rng);

struct AttackReport {
  std::int64_t copies = 0;            // K
  double fidelity = 0.0;              // F
  double information = 0.0;           // I(A,E), raw
  double information_clamped = 0.0;   // max(0, I)
  double error_probability = 0.0;     // P_e
  std::optional<double> empirical_eve_accuracy;
  std::optional<double> empirical_error_rate;
  std::int64_t trials = 0;            // bit samples behind the empirical fields
};

// One report row per K, in the given order.
std::vector<AttackReport> table_rows(std::span<const std::int64_t> k_values,
                                     FidelityMode mode);

struct AttackSimConfig {
  int resolution_bits = 16;
  std::int64_t copies = 10;  // K certified copies of the public key
  std::vector<int> message;
  std::int64_t trials = 1;
  // Overrides the fidelity reached by the estimate (tests inject F = 1).
  std::optional<double> fidelity_override;
};

// Per trial and message bit: fresh key, estimate at the bound fidelity,
// intercept the cipher, measure in the guessed basis, resend the observed
// vector, let the receiver decrypt with the true key.  The empirical fields
// converge on F and 2F(1-F).
AttackReport simulate_state_estimation_attack(const AttackSimConfig& config,
                                              Rng& rng);

}  // namespace qpkc::gmn
