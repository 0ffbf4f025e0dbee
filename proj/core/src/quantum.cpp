#include "qpkc/quantum.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qpkc::sim {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

}  // namespace

Unitary2 Unitary2::identity() {
  Unitary2 u;
  u.m[0][0] = 1.0;
  u.m[1][1] = 1.0;
  return u;
}

Unitary2 Unitary2::rotation(double theta) {
  if (!std::isfinite(theta)) {
    throw std::invalid_argument("rotation: angle must be finite");
  }
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  Unitary2 u;
  u.m[0][0] = c;
  u.m[0][1] = -s;
  u.m[1][0] = s;
  u.m[1][1] = c;
  return u;
}

Unitary2 Unitary2::pauli_x() {
  Unitary2 u;
  u.m[0][1] = 1.0;
  u.m[1][0] = 1.0;
  return u;
}

Unitary2 Unitary2::pauli_z() {
  Unitary2 u;
  u.m[0][0] = 1.0;
  u.m[1][1] = -1.0;
  return u;
}

Unitary2 Unitary2::dagger() const {
  Unitary2 u;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      u.m[r][c] = std::conj(m[c][r]);
    }
  }
  return u;
}

Unitary2 Unitary2::operator*(const Unitary2& rhs) const {
  Unitary2 u;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      u.m[r][c] = m[r][0] * rhs.m[0][c] + m[r][1] * rhs.m[1][c];
    }
  }
  return u;
}

bool Unitary2::is_unitary(double tolerance) const {
  const Unitary2 product = dagger() * *this;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      const Complex expected = (r == c) ? Complex{1.0, 0.0} : Complex{0.0, 0.0};
      if (std::abs(product.m[r][c] - expected) > tolerance) {
        return false;
      }
    }
  }
  return true;
}

Basis Basis::z() { return Basis(Kind::Z, 0.0); }

Basis Basis::x() { return Basis(Kind::X, kHalfPi); }

Basis Basis::planar(double theta) {
  if (!std::isfinite(theta)) {
    throw std::invalid_argument("Basis::planar: angle must be finite");
  }
  return Basis(Kind::Planar, theta);
}

std::string Basis::name() const {
  switch (kind_) {
    case Kind::Z:
      return "Z";
    case Kind::X:
      return "X";
    case Kind::Planar:
      return "Planar(" + std::to_string(theta_) + ")";
  }
  return "?";
}

QuantumRegister::QuantumRegister(std::size_t num_qubits,
                                 std::span<const int> bits)
    : num_qubits_(num_qubits) {
  if (num_qubits == 0 || num_qubits > kMaxQubits) {
    throw std::invalid_argument("QuantumRegister: unsupported qubit count");
  }
  if (bits.size() != num_qubits) {
    throw std::invalid_argument(
        "QuantumRegister: bit pattern length must equal the qubit count");
  }
  std::size_t index = 0;
  for (int b : bits) {
    if (b != 0 && b != 1) {
      throw std::invalid_argument("QuantumRegister: bits must be 0 or 1");
    }
    index = (index << 1) | static_cast<std::size_t>(b);
  }
  amplitudes_.assign(std::size_t{1} << num_qubits, Complex{0.0, 0.0});
  amplitudes_[index] = 1.0;
}

QuantumRegister::QuantumRegister(std::size_t num_qubits)
    : QuantumRegister(num_qubits, std::vector<int>(num_qubits, 0)) {}

QuantumRegister QuantumRegister::bell_pair() {
  QuantumRegister reg(2);
  const double amp = 1.0 / std::numbers::sqrt2;
  reg.amplitudes_[0b00] = amp;
  reg.amplitudes_[0b11] = amp;
  return reg;
}

std::size_t QuantumRegister::bit_mask(std::size_t qubit) const {
  return std::size_t{1} << (num_qubits_ - 1 - qubit);
}

void QuantumRegister::check_qubit(std::size_t qubit, const char* what) const {
  if (qubit >= num_qubits_) {
    throw std::invalid_argument(std::string(what) +
                                ": qubit index out of range");
  }
}

void QuantumRegister::apply(const Unitary2& u, std::size_t qubit) {
  check_qubit(qubit, "apply");
  const std::size_t mask = bit_mask(qubit);
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    if (i & mask) {
      continue;
    }
    const std::size_t j = i | mask;
    const Complex a0 = amplitudes_[i];
    const Complex a1 = amplitudes_[j];
    amplitudes_[i] = u.m[0][0] * a0 + u.m[0][1] * a1;
    amplitudes_[j] = u.m[1][0] * a0 + u.m[1][1] * a1;
  }
}

void QuantumRegister::apply_cnot(std::size_t control, std::size_t target) {
  check_qubit(control, "apply_cnot");
  check_qubit(target, "apply_cnot");
  if (control == target) {
    throw std::invalid_argument(
        "apply_cnot: control and target must be distinct");
  }
  const std::size_t cmask = bit_mask(control);
  const std::size_t tmask = bit_mask(target);
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    if ((i & cmask) && !(i & tmask)) {
      std::swap(amplitudes_[i], amplitudes_[i | tmask]);
    }
  }
}

std::size_t QuantumRegister::append_qubit(int bit) {
  if (bit != 0 && bit != 1) {
    throw std::invalid_argument("append_qubit: bit must be 0 or 1");
  }
  if (num_qubits_ >= kMaxQubits) {
    throw std::invalid_argument("append_qubit: register is full");
  }
  std::vector<Complex> next(amplitudes_.size() * 2, Complex{0.0, 0.0});
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    next[(i << 1) | static_cast<std::size_t>(bit)] = amplitudes_[i];
  }
  amplitudes_ = std::move(next);
  return num_qubits_++;
}

std::pair<double, double> QuantumRegister::outcome_probabilities(
    std::size_t qubit, const Basis& basis) const {
  check_qubit(qubit, "outcome_probabilities");
  // Coefficients of R(-theta), which rotates the basis into the Z frame.
  const double c = std::cos(basis.angle() / 2.0);
  const double s = std::sin(basis.angle() / 2.0);
  const std::size_t mask = bit_mask(qubit);
  double p0 = 0.0;
  double p1 = 0.0;
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    if (i & mask) {
      continue;
    }
    const Complex a0 = amplitudes_[i];
    const Complex a1 = amplitudes_[i | mask];
    p0 += std::norm(c * a0 + s * a1);
    p1 += std::norm(-s * a0 + c * a1);
  }
  return {p0, p1};
}

int QuantumRegister::measure(std::size_t qubit, const Basis& basis, Rng& rng) {
  const auto [p0, p1] = outcome_probabilities(qubit, basis);
  const int outcome = rng.uniform() < p0 ? 0 : 1;

  // Rotate into the Z frame, project, renormalize, rotate back; the qubit
  // ends in the measured basis vector.
  apply(basis.frame().dagger(), qubit);
  const std::size_t mask = bit_mask(qubit);
  double kept = 0.0;
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    const bool one = (i & mask) != 0;
    if (one != (outcome == 1)) {
      amplitudes_[i] = 0.0;
    } else {
      kept += std::norm(amplitudes_[i]);
    }
  }
  const double scale = std::sqrt(kept);
  if (scale < 1e-15) {
    throw std::runtime_error("measure: collapse lost all amplitude");
  }
  for (auto& a : amplitudes_) {
    a /= scale;
  }
  apply(basis.frame(), qubit);
  return outcome;
}

double QuantumRegister::fidelity(const QuantumRegister& reference) const {
  if (reference.num_qubits_ != num_qubits_) {
    throw std::invalid_argument("fidelity: qubit counts must match");
  }
  Complex inner{0.0, 0.0};
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    inner += std::conj(reference.amplitudes_[i]) * amplitudes_[i];
  }
  return std::norm(inner);
}

double QuantumRegister::subsystem_fidelity(
    std::span<const std::size_t> qubits,
    const QuantumRegister& reference) const {
  if (qubits.size() != reference.num_qubits_) {
    throw std::invalid_argument(
        "subsystem_fidelity: reference arity must match the subsystem");
  }
  std::size_t sub_mask = 0;
  for (std::size_t q : qubits) {
    check_qubit(q, "subsystem_fidelity");
    const std::size_t m = bit_mask(q);
    if (sub_mask & m) {
      throw std::invalid_argument("subsystem_fidelity: duplicate qubit");
    }
    sub_mask |= m;
  }

  // <ref|rho|ref> = sum over complement assignments e of
  // |sum_k conj(ref_k) psi_{k,e}|^2.
  const std::size_t comp_qubits = num_qubits_ - qubits.size();
  std::vector<Complex> partial(std::size_t{1} << comp_qubits,
                               Complex{0.0, 0.0});
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    std::size_t sub_index = 0;
    for (std::size_t q : qubits) {
      sub_index = (sub_index << 1) | ((i & bit_mask(q)) ? 1u : 0u);
    }
    std::size_t comp_index = 0;
    for (std::size_t q = 0; q < num_qubits_; ++q) {
      const std::size_t m = bit_mask(q);
      if (!(sub_mask & m)) {
        comp_index = (comp_index << 1) | ((i & m) ? 1u : 0u);
      }
    }
    partial[comp_index] +=
        std::conj(reference.amplitudes_[sub_index]) * amplitudes_[i];
  }
  double result = 0.0;
  for (const Complex& inner : partial) {
    result += std::norm(inner);
  }
  return result;
}

double QuantumRegister::norm_squared() const {
  double total = 0.0;
  for (const Complex& a : amplitudes_) {
    total += std::norm(a);
  }
  return total;
}

}  // namespace qpkc::sim
