// Four-stage Bell-pair public-key protocol between a trusted center (Trent),
// a sender (Alice), and the key owner (Bob): key generation behind decoy
// states, CNOT encryption / decryption, digest-based DoS detection, key
// recycling, and the channel adversaries the scheme defends against.
//
// Each Bell pair lives in its own small register (pair + any ancilla an
// attacker attached + the cipher qubit), never one monolithic state; the
// protocol never entangles across pairs, so cost stays linear in key length.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpkc/digest.hpp"
#include "qpkc/quantum.hpp"
#include "qpkc/rng.hpp"

namespace qpkc::proto {

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when an issue request exceeds the fresh pairs on hand; the session
// driver refuels the store instead of failing.
struct RefuelRequired : ProtocolError {
  using ProtocolError::ProtocolError;
};

enum class Lifecycle { Fresh, Issued, Recycled, Consumed, Discarded };
const char* to_string(Lifecycle lifecycle);

// One Bell pair: qubit p is the public half held by Trent, q the private
// half delivered to Bob.  The register grows when an ancilla or the cipher
// qubit joins it.
struct KeyPair {
  std::size_t id = 0;
  sim::QuantumRegister reg = sim::QuantumRegister::bell_pair();
  std::size_t p_index = 0;
  std::size_t q_index = 1;
  Lifecycle lifecycle = Lifecycle::Fresh;
  // Ancilla an eavesdropper CNOT-ed onto the pair while q was in transit.
  std::optional<std::size_t> transit_ancilla;
  // Message qubit joined at encryption.
  std::optional<std::size_t> cipher_index;
};

class BellKeyStore {
 public:
  std::size_t add_fresh_pair();
  KeyPair& pair(std::size_t index);
  const KeyPair& pair(std::size_t index) const;
  std::size_t size() const { return pairs_.size(); }
  std::size_t fresh_count() const;
  std::vector<std::size_t> fresh_indices() const;
  // Validates the edge: fresh -> issued -> recycled -> fresh, or recycled ->
  // consumed / discarded.  Anything else is a ProtocolError.
  void transition(std::size_t index, Lifecycle to);

 private:
  std::vector<KeyPair> pairs_;
};

// Preparation record for one BB84-type decoy qubit.
struct DecoySpec {
  std::size_t position = 0;  // slot in the transmitted sequence
  sim::Basis basis = sim::Basis::z();
  int bit = 0;
};

enum class AdversaryKind {
  None,
  InterceptResendRandomBasis,
  EntangleCnotAncilla,
  DosFlip,
  GmnStateEstimation,  // targets the rotation scheme; rejected here
};
const char* to_string(AdversaryKind kind);

struct AdversaryStrategy {
  AdversaryKind kind = AdversaryKind::None;
  double attack_fraction = 1.0;   // per-qubit attack probability
  double flip_probability = 1.0;  // DosFlip only

  static AdversaryStrategy none();
  static AdversaryStrategy intercept_resend(double fraction);
  static AdversaryStrategy entangle(double fraction);
  static AdversaryStrategy dos_flip(double fraction, double flip_probability);

  void validate() const;
};

struct SessionConfig {
  std::size_t key_length = 96;   // n: Bell pairs minted at key generation
  std::size_t decoy_count = 0;   // k: 0 = auto, max(8, ceil(n/4))
  std::size_t message_length = 32;  // r <= n
  double recycle_test_fraction = 0.25;
  double abort_threshold = 0.0;  // max tolerated decoy/recycle error rate
  double depolarizing_probability = 0.0;  // optional channel noise
  std::uint64_t seed = 0;

  std::size_t resolved_decoy_count() const;
  void validate() const;
};

struct EveBit {
  int bit = 0;
  bool attacked = false;  // read through an ancilla rather than guessed
};

// Full transcript of one protocol run.  Stages past an abort carry no data.
struct SessionOutcome {
  bool aborted = false;
  std::string abort_stage;  // "keygen" | "refuel" | "issue" | "recycle"
  std::optional<double> decoy_error_rate_keygen;
  std::optional<double> decoy_error_rate_issue;
  std::optional<double> recycle_error_rate;
  std::vector<int> message;  // what Alice sent
  std::vector<int> recovered_message;
  std::optional<bool> digest_ok;
  std::vector<EveBit> eve_recovered_bits;  // one per message bit
  std::vector<double> post_decrypt_bell_fidelities;

  bool delivered() const { return !recovered_message.empty(); }
};

// A qubit in flight.  The adversary sees only position-ordered handles;
// decoys and key qubits are structurally indistinguishable.
struct TransitQubit {
  sim::QuantumRegister* reg = nullptr;
  std::size_t qubit = 0;
};

struct AdversaryEffect {
  bool attacked = false;
  std::optional<std::size_t> ancilla;  // set by the entangling strategy
};

// Applies one strategy to one transit qubit (the per-qubit attack_fraction
// coin is drawn inside).  GmnStateEstimation is rejected.
AdversaryEffect adversary_transform(const AdversaryStrategy& strategy,
                                    TransitQubit transit, Rng& rng);

// With probability `probability`, applies a uniformly random planar Pauli
// from {I, X, Z, XZ} to the transit qubit.
void apply_depolarizing_noise(TransitQubit transit, double probability,
                              Rng& rng);

struct TransmissionResult {
  double decoy_error_rate = 0.0;
  bool aborted = false;
  // Per key qubit, in transmission order: the ancilla index the adversary
  // attached, if any.  Ancillas that landed on decoys die with them.
  std::vector<std::optional<std::size_t>> eve_ancillas;
};

// One protected transmission: the key qubits interleaved with freshly
// prepared decoys at seeded-random positions, the adversary and channel
// noise applied per position, then the decoy comparison.  Aborts when the
// decoy error rate exceeds the threshold.
TransmissionResult transmit_with_decoys(std::span<const TransitQubit> key_qubits,
                                        std::size_t decoy_count,
                                        double abort_threshold,
                                        double noise_probability,
                                        const AdversaryStrategy& adversary,
                                        Rng& rng);

struct Stage1Result {
  BellKeyStore store;
  double decoy_error_rate = 0.0;
  bool aborted = false;
};

// Trent mints n Bell pairs and sends the private halves to Bob behind
// decoys; the adversary may act on every transit qubit.
Stage1Result stage1_keygen(const SessionConfig& config,
                           const AdversaryStrategy& adversary, Rng& rng);

struct RefuelResult {
  std::vector<std::size_t> added;
  double decoy_error_rate = 0.0;
  std::size_t decoy_count = 0;
  bool aborted = false;
};

// Mints `count` additional pairs and delivers their private halves exactly
// like stage 1.  Invoked by the session driver when the issue request
// exceeds the fresh supply.
RefuelResult refuel_store(BellKeyStore& store, std::size_t count,
                          const SessionConfig& config,
                          const AdversaryStrategy& adversary, Rng& rng);

struct IssueResult {
  std::vector<std::size_t> issued;  // store indices, transmission order
  double decoy_error_rate = 0.0;
  bool aborted = false;
};

// Sends the first `count` fresh public-key qubits to Alice behind decoys and
// marks them issued.  Throws RefuelRequired when fresh pairs run short.
// Trent keeps the returned index list so Bob knows which sub-sequence to
// decrypt with.
IssueResult stage2_issue_public_key(BellKeyStore& store, std::size_t count,
                                    const SessionConfig& config,
                                    const AdversaryStrategy& adversary,
                                    Rng& rng);

// Per payload bit: prepare |m_i>, then CNOT with the issued public qubit as
// control.  The cipher qubit joins the pair's register.
void stage2_encrypt(BellKeyStore& store, std::span<const std::size_t> issued,
                    std::span<const int> payload);

struct DecryptResult {
  std::vector<int> bits;
  std::vector<double> bell_fidelities;  // pair state vs |Phi+> after decrypt
};

// Per cipher qubit: CNOT with the private qubit as control, then a Z
// measurement; the pair is checked against |Phi+> afterwards.
DecryptResult stage3_decrypt(BellKeyStore& store,
                             std::span<const std::size_t> issued, Rng& rng);

// Ancilla decryption of an intercepted cipher qubit: a CNOT from the
// recorded ancilla reads the plaintext out, and a second CNOT restores the
// pre-interception correlation before the qubit travels on, so the
// legitimate decryption still succeeds.
int eve_ancilla_decrypt(KeyPair& pair, Rng& rng);

struct RecycleResult {
  double error_rate = 0.0;
  bool aborted = false;
  std::size_t tested = 0;
};

// Alice returns the issued public qubits; the adversary parameter models a
// dishonest sender tampering with them on the way out.  Trent measures a
// random test subset in random Z/X bases, Bob mirrors the measurements, and
// mismatches count as errors.  On a pass the tested pairs are consumed and
// the rest refuel the store; on a failure everything returned is discarded.
RecycleResult stage4_recycle(BellKeyStore& store,
                             std::span<const std::size_t> returned,
                             double test_fraction, double abort_threshold,
                             const AdversaryStrategy& adversary, Rng& rng);

// Runs the four stages end to end with a random message: keygen, issue
// (refueling first if the payload outgrows the fresh supply), encryption of
// message plus digest, the adversary's shot at the ciphertext, decryption,
// digest verification, recycling.  All sampling derives from config.seed, so
// equal seeds give bit-identical outcomes.
SessionOutcome run_session(const SessionConfig& config,
                           const AdversaryStrategy& adversary,
                           const DigestFn& digest = {});

}  // namespace qpkc::proto
