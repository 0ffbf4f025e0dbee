// Minimal pure-state simulator: small multi-qubit registers, planar
// rotations, CNOT, projective measurement in x-z-plane bases, and analytic
// probability / fidelity queries.
//
// Conventions:
//   * qubit 0 is the leftmost symbol in ket notation, i.e. the most
//     significant bit of an amplitude index;
//   * rotations act about the Bloch y-axis,
//       R(t) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]],
//     so amplitudes of planar states stay real, R(a)R(b) = R(a+b), and
//     R(pi)|psi> is orthogonal to |psi>.
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qpkc/rng.hpp"

namespace qpkc::sim {

using Complex = std::complex<double>;

inline constexpr double kNormTolerance = 1e-10;
inline constexpr double kMatrixTolerance = 1e-12;

struct Unitary2 {
  // m[row][col]
  std::array<std::array<Complex, 2>, 2> m{};

  static Unitary2 identity();
  // Planar rotation by `theta`; throws std::invalid_argument on non-finite
  // angles.
  static Unitary2 rotation(double theta);
  static Unitary2 pauli_x();
  static Unitary2 pauli_z();

  Unitary2 dagger() const;
  Unitary2 operator*(const Unitary2& rhs) const;
  // U†U == identity entrywise within `tolerance`.
  bool is_unitary(double tolerance = kMatrixTolerance) const;
};

// Measurement basis { R(theta)|0>, R(theta)|1> } in the x-z plane.
// Z is Planar(0) and X is Planar(pi/2); the kind tag survives only for
// transcripts.
class Basis {
 public:
  enum class Kind { Z, X, Planar };

  static Basis z();
  static Basis x();
  static Basis planar(double theta);

  Kind kind() const { return kind_; }
  double angle() const { return theta_; }
  // R(theta); its columns are the basis vectors.
  Unitary2 frame() const { return Unitary2::rotation(theta_); }
  std::string name() const;

 private:
  Basis(Kind kind, double theta) : kind_(kind), theta_(theta) {}
  Kind kind_;
  double theta_;
};

class QuantumRegister {
 public:
  // Computational basis state |b_0 b_1 ... b_{n-1}>.  Throws on an empty or
  // mismatched bit pattern, bits outside {0,1}, or more than kMaxQubits.
  QuantumRegister(std::size_t num_qubits, std::span<const int> bits);
  explicit QuantumRegister(std::size_t num_qubits);  // |00...0>

  // (|00> + |11>)/sqrt(2)
  static QuantumRegister bell_pair();

  std::size_t num_qubits() const { return num_qubits_; }
  std::size_t dim() const { return amplitudes_.size(); }
  const std::vector<Complex>& amplitudes() const { return amplitudes_; }
  Complex amplitude(std::size_t index) const { return amplitudes_.at(index); }

  // Single-qubit gate on `qubit`, identity elsewhere.
  void apply(const Unitary2& u, std::size_t qubit);
  // Basis states with the control bit set get the target bit flipped.
  void apply_cnot(std::size_t control, std::size_t target);
  // Tensor a fresh |bit> qubit onto the right end of the ket; returns its
  // index.
  std::size_t append_qubit(int bit);

  // (p0, p1) for measuring `qubit` in `basis`; the register is not modified.
  std::pair<double, double> outcome_probabilities(std::size_t qubit,
                                                  const Basis& basis) const;
  // Samples an outcome, collapses and renormalizes; `qubit` is left in the
  // measured basis vector.
  int measure(std::size_t qubit, const Basis& basis, Rng& rng);

  // |<reference|this>|^2
  double fidelity(const QuantumRegister& reference) const;
  // <ref|rho|ref> where rho is the reduced state of `qubits` (in the given
  // order); `reference` must have matching arity.  Equals fidelity() when
  // `qubits` covers the whole register.
  double subsystem_fidelity(std::span<const std::size_t> qubits,
                            const QuantumRegister& reference) const;

  double norm_squared() const;

  // Optional role tags (p, q, ancilla, cipher, decoy) for transcripts.
  std::map<std::size_t, std::string> labels;

  static constexpr std::size_t kMaxQubits = 20;

 private:
  std::size_t bit_mask(std::size_t qubit) const;
  void check_qubit(std::size_t qubit, const char* what) const;

  std::size_t num_qubits_ = 0;
  std::vector<Complex> amplitudes_;
};

}  // namespace qpkc::sim
