#include "qpkc/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qpkc::proto {

namespace {

// Which legs of the protocol each strategy strikes.  The interceptor and the
// entangler go after the private key on its way to Bob (stage 1 and any
// refuel); the entangler and the DoS attacker also touch the ciphertext.
// Nobody in this set gains from the issue or return legs, so the session
// driver runs those clean.
bool attacks_key_transmission(AdversaryKind kind) {
  return kind == AdversaryKind::InterceptResendRandomBasis ||
         kind == AdversaryKind::EntangleCnotAncilla;
}

bool attacks_ciphertext(AdversaryKind kind) {
  return kind == AdversaryKind::EntangleCnotAncilla ||
         kind == AdversaryKind::DosFlip;
}

void check_fraction(double value, const char* what) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must be in [0, 1]");
  }
}

std::vector<int> random_bits(std::size_t count, Rng& rng) {
  std::vector<int> bits(count);
  for (auto& b : bits) {
    b = rng.bit();
  }
  return bits;
}

}  // namespace

const char* to_string(Lifecycle lifecycle) {
  switch (lifecycle) {
    case Lifecycle::Fresh:
      return "fresh";
    case Lifecycle::Issued:
      return "issued";
    case Lifecycle::Recycled:
      return "recycled";
    case Lifecycle::Consumed:
      return "consumed";
    case Lifecycle::Discarded:
      return "discarded";
  }
  return "?";
}

const char* to_string(AdversaryKind kind) {
  switch (kind) {
    case AdversaryKind::None:
      return "none";
    case AdversaryKind::InterceptResendRandomBasis:
      return "intercept";
    case AdversaryKind::EntangleCnotAncilla:
      return "entangle";
    case AdversaryKind::DosFlip:
      return "dos";
    case AdversaryKind::GmnStateEstimation:
      return "gmn-state-estimation";
  }
  return "?";
}

std::size_t BellKeyStore::add_fresh_pair() {
  KeyPair pair;
  pair.id = pairs_.size();
  pair.reg.labels[pair.p_index] = "p";
  pair.reg.labels[pair.q_index] = "q";
  pairs_.push_back(std::move(pair));
  return pairs_.size() - 1;
}

KeyPair& BellKeyStore::pair(std::size_t index) {
  if (index >= pairs_.size()) {
    throw ProtocolError("unknown pair id");
  }
  return pairs_[index];
}

const KeyPair& BellKeyStore::pair(std::size_t index) const {
  if (index >= pairs_.size()) {
    throw ProtocolError("unknown pair id");
  }
  return pairs_[index];
}

std::size_t BellKeyStore::fresh_count() const {
  return static_cast<std::size_t>(
      std::count_if(pairs_.begin(), pairs_.end(), [](const KeyPair& p) {
        return p.lifecycle == Lifecycle::Fresh;
      }));
}

std::vector<std::size_t> BellKeyStore::fresh_indices() const {
  std::vector<std::size_t> indices;
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    if (pairs_[i].lifecycle == Lifecycle::Fresh) {
      indices.push_back(i);
    }
  }
  return indices;
}

void BellKeyStore::transition(std::size_t index, Lifecycle to) {
  KeyPair& p = pair(index);
  const Lifecycle from = p.lifecycle;
  const bool allowed =
      (from == Lifecycle::Fresh && to == Lifecycle::Issued) ||
      (from == Lifecycle::Issued && to == Lifecycle::Recycled) ||
      (from == Lifecycle::Recycled &&
       (to == Lifecycle::Fresh || to == Lifecycle::Consumed ||
        to == Lifecycle::Discarded));
  if (!allowed) {
    throw ProtocolError(std::string("illegal lifecycle transition: ") +
                        to_string(from) + " -> " + to_string(to));
  }
  p.lifecycle = to;
}

AdversaryStrategy AdversaryStrategy::none() { return {}; }

AdversaryStrategy AdversaryStrategy::intercept_resend(double fraction) {
  AdversaryStrategy s;
  s.kind = AdversaryKind::InterceptResendRandomBasis;
  s.attack_fraction = fraction;
  return s;
}

AdversaryStrategy AdversaryStrategy::entangle(double fraction) {
  AdversaryStrategy s;
  s.kind = AdversaryKind::EntangleCnotAncilla;
  s.attack_fraction = fraction;
  return s;
}

AdversaryStrategy AdversaryStrategy::dos_flip(double fraction,
                                              double flip_probability) {
  AdversaryStrategy s;
  s.kind = AdversaryKind::DosFlip;
  s.attack_fraction = fraction;
  s.flip_probability = flip_probability;
  return s;
}

void AdversaryStrategy::validate() const {
  check_fraction(attack_fraction, "attack_fraction");
  check_fraction(flip_probability, "flip_probability");
}

std::size_t SessionConfig::resolved_decoy_count() const {
  if (decoy_count > 0) {
    return decoy_count;
  }
  return std::max<std::size_t>(8, (key_length + 3) / 4);
}

void SessionConfig::validate() const {
  if (key_length == 0) {
    throw std::invalid_argument("key_length must be positive");
  }
  if (message_length == 0 || message_length > key_length) {
    throw std::invalid_argument("message_length must be in [1, key_length]");
  }
  if (!(recycle_test_fraction > 0.0 && recycle_test_fraction < 1.0)) {
    throw std::invalid_argument("recycle_test_fraction must be in (0, 1)");
  }
  check_fraction(abort_threshold, "abort_threshold");
  check_fraction(depolarizing_probability, "depolarizing_probability");
}

AdversaryEffect adversary_transform(const AdversaryStrategy& strategy,
                                    TransitQubit transit, Rng& rng) {
  strategy.validate();
  if (strategy.kind == AdversaryKind::GmnStateEstimation) {
    throw std::invalid_argument(
        "GmnStateEstimation targets rotation-scheme public keys, not this "
        "channel");
  }
  if (strategy.kind == AdversaryKind::None) {
    return {};
  }
  if (!rng.bernoulli(strategy.attack_fraction)) {
    return {};
  }

  AdversaryEffect effect;
  effect.attacked = true;
  switch (strategy.kind) {
    case AdversaryKind::InterceptResendRandomBasis: {
      // Measure in a random conjugate basis; the collapsed register is
      // exactly the basis vector that travels on.
      const sim::Basis basis = rng.bit() ? sim::Basis::x() : sim::Basis::z();
      transit.reg->measure(transit.qubit, basis, rng);
      break;
    }
    case AdversaryKind::EntangleCnotAncilla: {
      const std::size_t ancilla = transit.reg->append_qubit(0);
      transit.reg->labels[ancilla] = "ancilla";
      transit.reg->apply_cnot(transit.qubit, ancilla);
      effect.ancilla = ancilla;
      break;
    }
    case AdversaryKind::DosFlip: {
      if (rng.bernoulli(strategy.flip_probability)) {
        transit.reg->apply(sim::Unitary2::pauli_x(), transit.qubit);
      }
      break;
    }
    default:
      break;
  }
  return effect;
}

void apply_depolarizing_noise(TransitQubit transit, double probability,
                              Rng& rng) {
  if (probability <= 0.0 || !rng.bernoulli(probability)) {
    return;
  }
  switch (rng.below(4)) {
    case 0:
      break;  // identity
    case 1:
      transit.reg->apply(sim::Unitary2::pauli_x(), transit.qubit);
      break;
    case 2:
      transit.reg->apply(sim::Unitary2::pauli_z(), transit.qubit);
      break;
    case 3:
      transit.reg->apply(sim::Unitary2::pauli_x() * sim::Unitary2::pauli_z(),
                         transit.qubit);
      break;
  }
}

TransmissionResult transmit_with_decoys(
    std::span<const TransitQubit> key_qubits, std::size_t decoy_count,
    double abort_threshold, double noise_probability,
    const AdversaryStrategy& adversary, Rng& rng) {
  const std::size_t total = key_qubits.size() + decoy_count;

  // Prepare the decoys: random BB84 state each, then pick the slots they
  // occupy via a seeded shuffle so key order is preserved.
  std::vector<DecoySpec> specs;
  std::vector<sim::QuantumRegister> decoys;
  specs.reserve(decoy_count);
  decoys.reserve(decoy_count);
  for (std::size_t d = 0; d < decoy_count; ++d) {
    DecoySpec spec;
    spec.basis = rng.bit() ? sim::Basis::x() : sim::Basis::z();
    spec.bit = rng.bit();
    sim::QuantumRegister qubit(1, std::vector<int>{spec.bit});
    qubit.apply(spec.basis.frame(), 0);
    qubit.labels[0] = "decoy";
    specs.push_back(spec);
    decoys.push_back(std::move(qubit));
  }

  std::vector<std::size_t> slots(total);
  std::iota(slots.begin(), slots.end(), 0);
  shuffle(slots, rng);
  std::vector<std::size_t> decoy_slots(slots.begin(),
                                       slots.begin() +
                                           static_cast<std::ptrdiff_t>(decoy_count));
  std::sort(decoy_slots.begin(), decoy_slots.end());
  std::vector<bool> is_decoy(total, false);
  for (std::size_t d = 0; d < decoy_count; ++d) {
    is_decoy[decoy_slots[d]] = true;
    specs[d].position = decoy_slots[d];
  }

  // Transit: the adversary and the channel noise see one position-ordered
  // qubit at a time with no role information.
  TransmissionResult result;
  result.eve_ancillas.assign(key_qubits.size(), std::nullopt);
  std::size_t next_key = 0;
  std::size_t next_decoy = 0;
  for (std::size_t position = 0; position < total; ++position) {
    TransitQubit transit;
    std::optional<std::size_t> key_order;
    if (is_decoy[position]) {
      transit = {&decoys[next_decoy], 0};
      ++next_decoy;
    } else {
      transit = key_qubits[next_key];
      key_order = next_key;
      ++next_key;
    }
    const AdversaryEffect effect = adversary_transform(adversary, transit, rng);
    apply_depolarizing_noise(transit, noise_probability, rng);
    if (key_order && effect.ancilla) {
      result.eve_ancillas[*key_order] = effect.ancilla;
    }
  }

  // Positions and bases announced; the receiver measures each decoy in its
  // preparation basis and the sender compares outcomes with what was sent.
  std::size_t errors = 0;
  for (std::size_t d = 0; d < decoy_count; ++d) {
    const int outcome = decoys[d].measure(0, specs[d].basis, rng);
    if (outcome != specs[d].bit) {
      ++errors;
    }
  }
  result.decoy_error_rate =
      decoy_count == 0 ? 0.0
                       : static_cast<double>(errors) /
                             static_cast<double>(decoy_count);
  result.aborted = result.decoy_error_rate > abort_threshold;
  return result;
}

Stage1Result stage1_keygen(const SessionConfig& config,
                           const AdversaryStrategy& adversary, Rng& rng) {
  config.validate();
  Stage1Result result;
  for (std::size_t i = 0; i < config.key_length; ++i) {
    result.store.add_fresh_pair();
  }

  std::vector<TransitQubit> private_halves;
  private_halves.reserve(config.key_length);
  for (std::size_t i = 0; i < config.key_length; ++i) {
    KeyPair& pair = result.store.pair(i);
    private_halves.push_back({&pair.reg, pair.q_index});
  }

  const TransmissionResult transit = transmit_with_decoys(
      private_halves, config.resolved_decoy_count(), config.abort_threshold,
      config.depolarizing_probability, adversary, rng);
  result.decoy_error_rate = transit.decoy_error_rate;
  result.aborted = transit.aborted;
  for (std::size_t i = 0; i < config.key_length; ++i) {
    result.store.pair(i).transit_ancilla = transit.eve_ancillas[i];
  }
  return result;
}

RefuelResult refuel_store(BellKeyStore& store, std::size_t count,
                          const SessionConfig& config,
                          const AdversaryStrategy& adversary, Rng& rng) {
  RefuelResult result;
  result.decoy_count = config.resolved_decoy_count();
  result.added.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    result.added.push_back(store.add_fresh_pair());
  }

  std::vector<TransitQubit> private_halves;
  private_halves.reserve(count);
  for (std::size_t index : result.added) {
    KeyPair& pair = store.pair(index);
    private_halves.push_back({&pair.reg, pair.q_index});
  }

  const TransmissionResult transit = transmit_with_decoys(
      private_halves, result.decoy_count, config.abort_threshold,
      config.depolarizing_probability, adversary, rng);
  result.decoy_error_rate = transit.decoy_error_rate;
  result.aborted = transit.aborted;
  for (std::size_t i = 0; i < count; ++i) {
    store.pair(result.added[i]).transit_ancilla = transit.eve_ancillas[i];
  }
  return result;
}

IssueResult stage2_issue_public_key(BellKeyStore& store, std::size_t count,
                                    const SessionConfig& config,
                                    const AdversaryStrategy& adversary,
                                    Rng& rng) {
  const std::vector<std::size_t> fresh = store.fresh_indices();
  if (fresh.size() < count) {
    throw RefuelRequired("issue of " + std::to_string(count) +
                         " qubits exceeds " + std::to_string(fresh.size()) +
                         " fresh pairs; refuel the store");
  }

  IssueResult result;
  result.issued.assign(fresh.begin(),
                       fresh.begin() + static_cast<std::ptrdiff_t>(count));

  std::vector<TransitQubit> public_halves;
  public_halves.reserve(count);
  for (std::size_t index : result.issued) {
    KeyPair& pair = store.pair(index);
    public_halves.push_back({&pair.reg, pair.p_index});
  }

  const TransmissionResult transit = transmit_with_decoys(
      public_halves, config.resolved_decoy_count(), config.abort_threshold,
      config.depolarizing_probability, adversary, rng);
  result.decoy_error_rate = transit.decoy_error_rate;
  result.aborted = transit.aborted;
  if (result.aborted) {
    result.issued.clear();
    return result;
  }

  for (std::size_t i = 0; i < count; ++i) {
    if (transit.eve_ancillas[i]) {
      store.pair(result.issued[i]).transit_ancilla = transit.eve_ancillas[i];
    }
    store.transition(result.issued[i], Lifecycle::Issued);
  }
  return result;
}

void stage2_encrypt(BellKeyStore& store, std::span<const std::size_t> issued,
                    std::span<const int> payload) {
  if (payload.size() != issued.size()) {
    throw std::invalid_argument(
        "stage2_encrypt: payload length must match the issued qubit count");
  }
  for (std::size_t i = 0; i < issued.size(); ++i) {
    KeyPair& pair = store.pair(issued[i]);
    if (pair.lifecycle != Lifecycle::Issued) {
      throw ProtocolError("stage2_encrypt: pair is not issued");
    }
    const std::size_t cipher = pair.reg.append_qubit(payload[i]);
    pair.reg.labels[cipher] = "cipher";
    pair.reg.apply_cnot(pair.p_index, cipher);
    pair.cipher_index = cipher;
  }
}

DecryptResult stage3_decrypt(BellKeyStore& store,
                             std::span<const std::size_t> issued, Rng& rng) {
  DecryptResult result;
  result.bits.reserve(issued.size());
  result.bell_fidelities.reserve(issued.size());
  const sim::QuantumRegister bell = sim::QuantumRegister::bell_pair();
  for (std::size_t index : issued) {
    KeyPair& pair = store.pair(index);
    if (!pair.cipher_index) {
      throw ProtocolError("stage3_decrypt: pair carries no ciphertext");
    }
    pair.reg.apply_cnot(pair.q_index, *pair.cipher_index);
    result.bits.push_back(pair.reg.measure(*pair.cipher_index,
                                           sim::Basis::z(), rng));
    const std::size_t subsystem[] = {pair.p_index, pair.q_index};
    result.bell_fidelities.push_back(pair.reg.subsystem_fidelity(subsystem, bell));
  }
  return result;
}

int eve_ancilla_decrypt(KeyPair& pair, Rng& rng) {
  if (!pair.transit_ancilla) {
    throw ProtocolError(
        "eve_ancilla_decrypt: no ancilla is entangled with this pair");
  }
  if (!pair.cipher_index) {
    throw ProtocolError("eve_ancilla_decrypt: pair carries no ciphertext");
  }
  const std::size_t ancilla = *pair.transit_ancilla;
  const std::size_t cipher = *pair.cipher_index;
  pair.reg.apply_cnot(ancilla, cipher);
  const int bit = pair.reg.measure(cipher, sim::Basis::z(), rng);
  // Undo the readout CNOT so the cipher qubit re-enters the correlation it
  // arrived with; the legitimate decryption then still succeeds.
  pair.reg.apply_cnot(ancilla, cipher);
  return bit;
}

RecycleResult stage4_recycle(BellKeyStore& store,
                             std::span<const std::size_t> returned,
                             double test_fraction, double abort_threshold,
                             const AdversaryStrategy& adversary, Rng& rng) {
  if (returned.empty()) {
    throw std::invalid_argument("stage4_recycle: nothing returned");
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument(
        "stage4_recycle: test_fraction must be in (0, 1)");
  }
  check_fraction(abort_threshold, "abort_threshold");

  // A dishonest sender may tamper with the qubits on their way back.
  for (std::size_t index : returned) {
    KeyPair& pair = store.pair(index);
    if (pair.lifecycle != Lifecycle::Issued) {
      throw ProtocolError("stage4_recycle: pair was never issued");
    }
    const AdversaryEffect effect =
        adversary_transform(adversary, {&pair.reg, pair.p_index}, rng);
    if (effect.ancilla) {
      pair.transit_ancilla = effect.ancilla;
    }
  }
  for (std::size_t index : returned) {
    store.transition(index, Lifecycle::Recycled);
  }

  const auto tested_count = static_cast<std::size_t>(
      std::ceil(test_fraction * static_cast<double>(returned.size())));
  std::vector<std::size_t> order(returned.begin(), returned.end());
  shuffle(order, rng);

  // Conjugate-bases comparison on the test subset: for an intact pair the
  // two halves agree in both Z and X.
  std::size_t errors = 0;
  for (std::size_t t = 0; t < tested_count; ++t) {
    KeyPair& pair = store.pair(order[t]);
    const sim::Basis basis = rng.bit() ? sim::Basis::x() : sim::Basis::z();
    const int trent = pair.reg.measure(pair.p_index, basis, rng);
    const int bob = pair.reg.measure(pair.q_index, basis, rng);
    if (trent != bob) {
      ++errors;
    }
  }

  RecycleResult result;
  result.tested = tested_count;
  result.error_rate =
      static_cast<double>(errors) / static_cast<double>(tested_count);
  result.aborted = result.error_rate > abort_threshold;

  if (result.aborted) {
    for (std::size_t index : returned) {
      store.transition(index, Lifecycle::Discarded);
    }
  } else {
    for (std::size_t t = 0; t < order.size(); ++t) {
      store.transition(order[t], t < tested_count ? Lifecycle::Consumed
                                                  : Lifecycle::Fresh);
    }
  }
  return result;
}

SessionOutcome run_session(const SessionConfig& config,
                           const AdversaryStrategy& adversary,
                           const DigestFn& digest) {
  config.validate();
  adversary.validate();
  if (adversary.kind == AdversaryKind::GmnStateEstimation) {
    throw std::invalid_argument(
        "GmnStateEstimation does not apply to this protocol");
  }
  const DigestFn& hash = digest ? digest : DigestFn(test_digest);
  Rng rng(config.seed);

  const AdversaryStrategy key_leg =
      attacks_key_transmission(adversary.kind) ? adversary
                                               : AdversaryStrategy::none();
  SessionOutcome out;

  // Stage 1: Trent mints the pairs and delivers Bob's private halves.
  Stage1Result stage1 = stage1_keygen(config, key_leg, rng);
  out.decoy_error_rate_keygen = stage1.decoy_error_rate;
  if (stage1.aborted) {
    out.aborted = true;
    out.abort_stage = "keygen";
    return out;
  }
  BellKeyStore& store = stage1.store;

  // Payload = message followed by its digest, both quantum-encrypted.
  out.message = random_bits(config.message_length, rng);
  std::vector<int> payload = out.message;
  const std::vector<int> sent_digest = digest_bits(hash(out.message));
  payload.insert(payload.end(), sent_digest.begin(), sent_digest.end());

  if (store.fresh_count() < payload.size()) {
    const RefuelResult refuel = refuel_store(
        store, payload.size() - store.fresh_count(), config, key_leg, rng);
    // Pool the refuel decoys with the stage-1 ones: both legs carry the
    // private key from Trent to Bob.
    const auto k1 = static_cast<double>(config.resolved_decoy_count());
    const auto k2 = static_cast<double>(refuel.decoy_count);
    out.decoy_error_rate_keygen =
        (*out.decoy_error_rate_keygen * k1 + refuel.decoy_error_rate * k2) /
        (k1 + k2);
    if (refuel.aborted) {
      out.aborted = true;
      out.abort_stage = "refuel";
      return out;
    }
  }

  // Stage 2: Alice fetches public-key qubits and encrypts.
  const IssueResult issue = stage2_issue_public_key(
      store, payload.size(), config, AdversaryStrategy::none(), rng);
  out.decoy_error_rate_issue = issue.decoy_error_rate;
  if (issue.aborted) {
    out.aborted = true;
    out.abort_stage = "issue";
    return out;
  }
  stage2_encrypt(store, issue.issued, payload);

  // Ciphertext leg: the entangler reads attacked pairs through her ancillas
  // (and guesses blindly elsewhere); the DoS attacker flips qubits.
  std::vector<EveBit> eve_bits(payload.size());
  for (std::size_t i = 0; i < issue.issued.size(); ++i) {
    KeyPair& pair = store.pair(issue.issued[i]);
    if (attacks_ciphertext(adversary.kind)) {
      if (adversary.kind == AdversaryKind::EntangleCnotAncilla) {
        if (pair.transit_ancilla) {
          eve_bits[i] = {eve_ancilla_decrypt(pair, rng), true};
        } else {
          eve_bits[i] = {rng.bit(), false};
        }
      } else {  // DosFlip
        if (rng.bernoulli(adversary.attack_fraction) &&
            rng.bernoulli(adversary.flip_probability)) {
          pair.reg.apply(sim::Unitary2::pauli_x(), *pair.cipher_index);
        }
        eve_bits[i] = {rng.bit(), false};
      }
    } else {
      eve_bits[i] = {rng.bit(), false};
    }
    apply_depolarizing_noise({&pair.reg, *pair.cipher_index},
                             config.depolarizing_probability, rng);
  }

  // Stage 3: Bob decrypts and verifies the digest.
  const DecryptResult decrypted = stage3_decrypt(store, issue.issued, rng);
  out.recovered_message.assign(
      decrypted.bits.begin(),
      decrypted.bits.begin() +
          static_cast<std::ptrdiff_t>(config.message_length));
  const std::vector<int> received_digest(
      decrypted.bits.begin() +
          static_cast<std::ptrdiff_t>(config.message_length),
      decrypted.bits.end());
  out.digest_ok = received_digest == digest_bits(hash(out.recovered_message));
  out.post_decrypt_bell_fidelities = decrypted.bell_fidelities;
  out.eve_recovered_bits.assign(
      eve_bits.begin(),
      eve_bits.begin() + static_cast<std::ptrdiff_t>(config.message_length));

  // Stage 4: Alice returns the public qubits and Trent spot-checks them.
  const RecycleResult recycle = stage4_recycle(
      store, issue.issued, config.recycle_test_fraction, config.abort_threshold,
      AdversaryStrategy::none(), rng);
  out.recycle_error_rate = recycle.error_rate;
  if (recycle.aborted) {
    out.aborted = true;
    out.abort_stage = "recycle";
  }
  return out;
}

}  // namespace qpkc::proto
