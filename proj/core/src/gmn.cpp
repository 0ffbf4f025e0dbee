#include "qpkc/gmn.hpp"

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>

namespace qpkc::gmn {

namespace {

constexpr std::int64_t kMaxCopies = 1'000'000;

// log(k!) for k in [0, count], accumulated in long double with Kahan
// compensation; the worst-case exponent error stays ~1e-12 even at 10^6.
std::vector<long double> log_factorials(std::size_t count) {
  std::vector<long double> table(count + 1);
  long double sum = 0.0L;
  long double comp = 0.0L;
  table[0] = 0.0L;
  for (std::size_t k = 1; k <= count; ++k) {
    const long double term = logl(static_cast<long double>(k)) - comp;
    const long double next = sum + term;
    comp = (next - sum) - term;
    sum = next;
    table[k] = sum;
  }
  return table;
}

double fidelity_from_log_factorials(const std::vector<long double>& lf,
                                    std::size_t m) {
  const long double ln2 = std::numbers::ln2_v<long double>;
  const auto log_choose = [&](std::size_t n, std::size_t k) {
    return lf[n] - lf[k] - lf[n - k];
  };
  const auto exponent = [&](std::size_t i) {
    return 0.5L * (log_choose(m, i) + log_choose(m, i + 1)) -
           static_cast<long double>(m + 1) * ln2;
  };

  // Terms are log-concave in i and peak at the center; accumulate outward
  // and stop once they no longer contribute at double precision.
  const std::size_t center = (m - 1) / 2;
  const long double peak = exponent(center);
  const long double cutoff = peak - 64.0L;
  long double sum = 0.0L;
  for (std::size_t i = center + 1; i-- > 0;) {
    const long double t = exponent(i);
    if (t < cutoff) {
      break;
    }
    sum += expl(t);
  }
  for (std::size_t i = center + 1; i < m; ++i) {
    const long double t = exponent(i);
    if (t < cutoff) {
      break;
    }
    sum += expl(t);
  }
  return static_cast<double>(0.5L + sum);
}

void check_copies(std::int64_t copies) {
  if (copies < 1 || copies > kMaxCopies) {
    throw std::invalid_argument("copy count " + std::to_string(copies) +
                                " is outside [1, 10^6]");
  }
}

}  // namespace

KeyPair keygen(int resolution_bits, std::size_t key_length, Rng& rng) {
  if (resolution_bits < 1 || resolution_bits > 30) {
    throw std::invalid_argument("keygen: resolution_bits must be in [1, 30]");
  }
  if (key_length == 0) {
    throw std::invalid_argument("keygen: key_length must be positive");
  }
  KeyPair key;
  key.resolution_bits = resolution_bits;
  key.step_angle = std::numbers::pi / std::pow(2.0, resolution_bits - 1);
  key.secret.reserve(key_length);
  key.public_states.reserve(key_length);
  const std::uint64_t lattice = std::uint64_t{1} << resolution_bits;
  for (std::size_t j = 0; j < key_length; ++j) {
    const auto s = static_cast<std::uint32_t>(rng.below(lattice));
    key.secret.push_back(s);
    sim::QuantumRegister state(1);
    state.apply(sim::Unitary2::rotation(s * key.step_angle), 0);
    key.public_states.push_back(std::move(state));
  }
  return key;
}

sim::QuantumRegister encrypt(const sim::QuantumRegister& public_state,
                             int message_bit) {
  if (public_state.num_qubits() != 1) {
    throw std::invalid_argument("encrypt: expected a single-qubit state");
  }
  if (message_bit != 0 && message_bit != 1) {
    throw std::invalid_argument("encrypt: message bit must be 0 or 1");
  }
  sim::QuantumRegister cipher = public_state;
  if (message_bit == 1) {
    cipher.apply(sim::Unitary2::rotation(std::numbers::pi), 0);
  }
  return cipher;
}

int decrypt(sim::QuantumRegister cipher, std::uint32_t secret_j,
            double step_angle, Rng& rng) {
  if (cipher.num_qubits() != 1) {
    throw std::invalid_argument("decrypt: expected a single-qubit cipher");
  }
  return cipher.measure(0, sim::Basis::planar(secret_j * step_angle), rng);
}

double optimal_fidelity_exact(std::int64_t copies) {
  check_copies(copies);
  const auto m = static_cast<std::size_t>(copies);
  return fidelity_from_log_factorials(log_factorials(m + 1), m);
}

std::vector<double> optimal_fidelity_exact_prefix(std::int64_t max_copies) {
  check_copies(max_copies);
  const auto count = static_cast<std::size_t>(max_copies);
  const auto table = log_factorials(count + 1);
  std::vector<double> result(count);
  for (std::size_t m = 1; m <= count; ++m) {
    result[m - 1] = fidelity_from_log_factorials(table, m);
  }
  return result;
}

double optimal_fidelity_approx(std::int64_t copies) {
  if (copies < 1) {
    throw std::invalid_argument("copies must be positive");
  }
  return 1.0 - 1.0 / (4.0 * static_cast<double>(copies));
}

double binary_entropy(double p) {
  if (p < 0.0 || p > 1.0) {
    throw std::invalid_argument("binary_entropy: p must be in [0, 1]");
  }
  if (p == 0.0 || p == 1.0) {
    return 0.0;
  }
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double error_probability(double fidelity) {
  if (fidelity < 0.5 || fidelity > 1.0) {
    throw std::invalid_argument("error_probability: F must be in [1/2, 1]");
  }
  return 2.0 * fidelity * (1.0 - fidelity);
}

double eve_information(double fidelity) {
  if (fidelity <= 0.5 || fidelity > 1.0) {
    throw std::invalid_argument("eve_information: F must be in (1/2, 1]");
  }
  return 1.0 - 2.0 * binary_entropy(fidelity);
}

double estimation_offset(double fidelity) {
  if (fidelity <= 0.5 || fidelity > 1.0) {
    throw std::invalid_argument("estimation_offset: F must be in (1/2, 1]");
  }
  return 2.0 * std::acos(std::sqrt(fidelity));
}

double estimated_angle(double true_angle, double fidelity, Rng& rng) {
  const double delta = estimation_offset(fidelity);
  return rng.bit() ? true_angle + delta : true_angle - delta;
}

std::vector<AttackReport> table_rows(std::span<const std::int64_t> k_values,
                                     FidelityMode mode) {
  std::vector<AttackReport> rows;
  rows.reserve(k_values.size());
  for (std::int64_t k : k_values) {
    check_copies(k);
    AttackReport row;
    row.copies = k;
    row.fidelity = mode == FidelityMode::ExactSum ? optimal_fidelity_exact(k)
                                                  : optimal_fidelity_approx(k);
    row.information = eve_information(row.fidelity);
    row.information_clamped = std::max(0.0, row.information);
    row.error_probability = error_probability(row.fidelity);
    rows.push_back(row);
  }
  return rows;
}

AttackReport simulate_state_estimation_attack(const AttackSimConfig& config,
                                              Rng& rng) {
  if (config.message.empty()) {
    throw std::invalid_argument("attack simulation: message must be nonempty");
  }
  if (config.trials < 1) {
    throw std::invalid_argument("attack simulation: trials must be positive");
  }
  check_copies(config.copies);

  const double fidelity = config.fidelity_override
                              ? *config.fidelity_override
                              : optimal_fidelity_approx(config.copies);

  std::int64_t eve_correct = 0;
  std::int64_t bob_errors = 0;
  std::int64_t samples = 0;
  for (std::int64_t trial = 0; trial < config.trials; ++trial) {
    const KeyPair key = keygen(config.resolution_bits, config.message.size(), rng);
    for (std::size_t j = 0; j < config.message.size(); ++j) {
      const int m = config.message[j];
      const double guessed = estimated_angle(key.key_angle(j), fidelity, rng);

      sim::QuantumRegister cipher = encrypt(key.public_states[j], m);
      // Eve measures in her guessed basis and forwards the collapsed state.
      const int eve_bit = cipher.measure(0, sim::Basis::planar(guessed), rng);
      const int bob_bit =
          decrypt(std::move(cipher), key.secret[j], key.step_angle, rng);

      eve_correct += (eve_bit == m);
      bob_errors += (bob_bit != m);
      ++samples;
    }
  }

  AttackReport report;
  report.copies = config.copies;
  report.fidelity = fidelity;
  report.information = eve_information(fidelity);
  report.information_clamped = std::max(0.0, report.information);
  report.error_probability = error_probability(fidelity);
  report.empirical_eve_accuracy =
      static_cast<double>(eve_correct) / static_cast<double>(samples);
  report.empirical_error_rate =
      static_cast<double>(bob_errors) / static_cast<double>(samples);
  report.trials = samples;
  return report;
}

}  // namespace qpkc::gmn
