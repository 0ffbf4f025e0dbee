#include <benchmark/benchmark.h>

#include <numbers>

#include "qpkc/gmn.hpp"
#include "qpkc/protocol.hpp"
#include "qpkc/quantum.hpp"

namespace {

using namespace qpkc;

void BM_SingleQubitGate(benchmark::State& state) {
  const auto qubits = static_cast<std::size_t>(state.range(0));
  sim::QuantumRegister reg(qubits);
  const auto gate = sim::Unitary2::rotation(0.731);
  std::size_t q = 0;
  for (auto _ : state) {
    reg.apply(gate, q);
    q = (q + 1) % qubits;
  }
  benchmark::DoNotOptimize(reg.amplitudes().data());
}
BENCHMARK(BM_SingleQubitGate)->Arg(2)->Arg(4)->Arg(5);

void BM_CnotPair(benchmark::State& state) {
  auto reg = sim::QuantumRegister::bell_pair();
  reg.append_qubit(0);
  for (auto _ : state) {
    reg.apply_cnot(0, 2);
  }
  benchmark::DoNotOptimize(reg.amplitudes().data());
}
BENCHMARK(BM_CnotPair);

void BM_MeasureBellHalf(benchmark::State& state) {
  Rng rng(1);
  for (auto _ : state) {
    auto bell = sim::QuantumRegister::bell_pair();
    benchmark::DoNotOptimize(bell.measure(0, sim::Basis::x(), rng));
  }
}
BENCHMARK(BM_MeasureBellHalf);

void BM_OptimalFidelityExact(benchmark::State& state) {
  const auto copies = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gmn::optimal_fidelity_exact(copies));
  }
}
BENCHMARK(BM_OptimalFidelityExact)->Arg(100)->Arg(10000)->Arg(1000000);

void BM_AttackBitTrial(benchmark::State& state) {
  gmn::AttackSimConfig config;
  config.copies = 10;
  config.message = {1};
  config.trials = 1;
  Rng rng(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        gmn::simulate_state_estimation_attack(config, rng));
  }
}
BENCHMARK(BM_AttackBitTrial);

void BM_CleanSession(benchmark::State& state) {
  proto::SessionConfig config;
  config.key_length = static_cast<std::size_t>(state.range(0));
  config.message_length = config.key_length - proto::kDigestBits;
  config.decoy_count = 16;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    config.seed = seed++;
    benchmark::DoNotOptimize(
        proto::run_session(config, proto::AdversaryStrategy::none()));
  }
}
BENCHMARK(BM_CleanSession)->Arg(80)->Arg(96)->Arg(128);

void BM_EntangledSession(benchmark::State& state) {
  proto::SessionConfig config;
  config.key_length = 96;
  config.message_length = 32;
  config.decoy_count = 16;
  const auto adversary = proto::AdversaryStrategy::entangle(1.0);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    config.seed = seed++;
    benchmark::DoNotOptimize(proto::run_session(config, adversary));
  }
}
BENCHMARK(BM_EntangledSession);

}  // namespace

BENCHMARK_MAIN();
