#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "qpkc/quantum.hpp"
#include "test_util.hpp"

using namespace qpkc;
using sim::Basis;
using sim::QuantumRegister;
using sim::Unitary2;

namespace {

constexpr double kPi = std::numbers::pi;

void check_amplitudes(const QuantumRegister& reg,
                      const std::vector<sim::Complex>& expected,
                      double tol = 1e-12) {
  REQUIRE(reg.dim() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CAPTURE(i);
    CHECK(std::abs(reg.amplitude(i) - expected[i]) <= tol);
  }
}

}  // namespace

TEST_CASE("basis-state construction fixes the indexing convention") {
  check_amplitudes(QuantumRegister(1, std::array{0}), {1.0, 0.0});

  // qubit 0 is the leftmost ket symbol, so |10> sits at index 2
  const QuantumRegister reg(2, std::array{1, 0});
  CHECK(std::abs(reg.amplitude(2) - 1.0) < 1e-15);
  CHECK(reg.norm_squared() == doctest::Approx(1.0));

  const QuantumRegister all_ones(3, std::array{1, 1, 1});
  CHECK(std::abs(all_ones.amplitude(7) - 1.0) < 1e-15);

  CHECK_THROWS_AS(QuantumRegister(2, std::array{1}), std::invalid_argument);
  CHECK_THROWS_AS(QuantumRegister(1, std::array{2}), std::invalid_argument);
  CHECK_THROWS_AS(QuantumRegister(0, std::span<const int>{}),
                  std::invalid_argument);
}

TEST_CASE("rotation gate") {
  SUBCASE("zero angle is the identity") {
    const Unitary2 r0 = Unitary2::rotation(0.0);
    CHECK(r0.m[0][0] == sim::Complex{1.0, 0.0});
    CHECK(r0.m[0][1] == sim::Complex{0.0, 0.0});
    CHECK(r0.m[1][0] == sim::Complex{0.0, 0.0});
    CHECK(r0.m[1][1] == sim::Complex{1.0, 0.0});
  }

  SUBCASE("half turn maps |0> to |1>") {
    QuantumRegister reg(1);
    reg.apply(Unitary2::rotation(kPi), 0);
    check_amplitudes(reg, {0.0, 1.0});
  }

  SUBCASE("overlap of two rotated states is cos^2 of half the difference") {
    const auto a = testing::planar_state(kPi / 3.0);
    const auto b = testing::planar_state(kPi / 6.0);
    CHECK(a.fidelity(b) == doctest::Approx(0.9330127018922194).epsilon(1e-9));
  }

  SUBCASE("non-finite angles are rejected") {
    CHECK_THROWS_AS(Unitary2::rotation(std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(Basis::planar(INFINITY), std::invalid_argument);
  }

  SUBCASE("rotations are unitary for random angles") {
    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
      CHECK(Unitary2::rotation((rng.uniform() - 0.5) * 20.0).is_unitary());
    }
  }
}

TEST_CASE("single-qubit gate application") {
  Rng rng(17);

  SUBCASE("identity leaves amplitudes unchanged") {
    auto reg = testing::random_register(3, rng);
    const auto before = reg.amplitudes();
    reg.apply(Unitary2::identity(), 1);
    check_amplitudes(reg, before, 0.0);
  }

  SUBCASE("quarter turn builds |+>") {
    QuantumRegister reg(1);
    reg.apply(Unitary2::rotation(kPi / 2.0), 0);
    const double amp = 1.0 / std::numbers::sqrt2;
    check_amplitudes(reg, {amp, amp});
  }

  SUBCASE("a rotation and its inverse cancel") {
    for (int i = 0; i < 20; ++i) {
      auto reg = testing::random_register(3, rng);
      const auto before = reg.amplitudes();
      const double theta = (rng.uniform() - 0.5) * 12.0;
      const std::size_t q = rng.below(3);
      reg.apply(Unitary2::rotation(theta), q);
      reg.apply(Unitary2::rotation(-theta), q);
      check_amplitudes(reg, before);
    }
  }

  SUBCASE("rotations compose additively on random registers") {
    for (int i = 0; i < 20; ++i) {
      auto lhs = testing::random_register(2, rng);
      auto rhs = lhs;
      const double a = (rng.uniform() - 0.5) * 12.0;
      const double b = (rng.uniform() - 0.5) * 12.0;
      lhs.apply(Unitary2::rotation(a), 0);
      lhs.apply(Unitary2::rotation(b), 0);
      rhs.apply(Unitary2::rotation(a + b), 0);
      CHECK(lhs.fidelity(rhs) == doctest::Approx(1.0).epsilon(1e-10));
    }
  }

  SUBCASE("norm is preserved through random circuits") {
    for (int i = 0; i < 20; ++i) {
      auto reg = testing::random_register(4, rng);
      CHECK(std::abs(reg.norm_squared() - 1.0) <= 1e-10);
    }
  }

  SUBCASE("out-of-range index is rejected") {
    QuantumRegister reg(2);
    CHECK_THROWS_AS(reg.apply(Unitary2::identity(), 2), std::invalid_argument);
  }
}

TEST_CASE("CNOT") {
  const double amp = 1.0 / std::numbers::sqrt2;

  SUBCASE("encrypting a |0> message qubit against a Bell pair") {
    auto reg = QuantumRegister::bell_pair();
    const std::size_t target = reg.append_qubit(0);
    reg.apply_cnot(0, target);
    std::vector<sim::Complex> expected(8, 0.0);
    expected[0b000] = amp;
    expected[0b111] = amp;
    check_amplitudes(reg, expected);
  }

  SUBCASE("the private-half CNOT decrypts back to a product state") {
    for (int m : {0, 1}) {
      auto reg = QuantumRegister::bell_pair();
      const std::size_t target = reg.append_qubit(m);
      reg.apply_cnot(0, target);   // entangle: |00m> + |11 m-bar>
      reg.apply_cnot(1, target);   // decrypt with the other half
      auto expected_pair = QuantumRegister::bell_pair();
      const std::size_t l = expected_pair.append_qubit(m);
      (void)l;
      CHECK(reg.fidelity(expected_pair) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  SUBCASE("control 0 acts as the identity") {
    QuantumRegister reg(2);
    reg.apply_cnot(0, 1);
    check_amplitudes(reg, {1.0, 0.0, 0.0, 0.0});
  }

  SUBCASE("applying the same CNOT twice restores the register") {
    Rng rng(23);
    for (int i = 0; i < 20; ++i) {
      auto reg = testing::random_register(3, rng);
      const auto before = reg.amplitudes();
      reg.apply_cnot(0, 2);
      reg.apply_cnot(0, 2);
      check_amplitudes(reg, before);
    }
  }

  SUBCASE("coincident control and target are rejected") {
    QuantumRegister reg(2);
    CHECK_THROWS_AS(reg.apply_cnot(1, 1), std::invalid_argument);
  }
}

TEST_CASE("Bell pair") {
  const auto bell = QuantumRegister::bell_pair();
  const double amp = 1.0 / std::numbers::sqrt2;
  check_amplitudes(bell, {amp, 0.0, 0.0, amp}, 1e-15);
  CHECK(bell.fidelity(QuantumRegister::bell_pair()) == doctest::Approx(1.0));

  // both marginals are maximally mixed
  for (std::size_t q : {std::size_t{0}, std::size_t{1}}) {
    const auto [p0, p1] = bell.outcome_probabilities(q, Basis::z());
    CHECK(p0 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p1 == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("outcome probabilities") {
  SUBCASE("an eigenstate is deterministic in its own basis") {
    const auto plus = testing::planar_state(kPi / 2.0);
    const auto [p0, p1] = plus.outcome_probabilities(0, Basis::x());
    CHECK(p0 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p1 == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("conjugate bases randomize") {
    const QuantumRegister zero(1);
    const auto [p0, p1] = zero.outcome_probabilities(0, Basis::x());
    CHECK(p0 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p1 == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("the encrypted message qubit is maximally mixed in any basis") {
    Rng rng(31);
    for (int m : {0, 1}) {
      auto reg = QuantumRegister::bell_pair();
      const std::size_t l = reg.append_qubit(m);
      reg.apply_cnot(0, l);
      for (int i = 0; i < 10; ++i) {
        const auto basis = Basis::planar(rng.uniform() * 2.0 * kPi);
        const auto [p0, p1] = reg.outcome_probabilities(l, basis);
        CHECK(std::abs(p0 - 0.5) <= 1e-12);
        CHECK(std::abs(p1 - 0.5) <= 1e-12);
      }
    }
  }

  SUBCASE("probabilities sum to one on random registers") {
    Rng rng(37);
    for (int i = 0; i < 20; ++i) {
      const auto reg = testing::random_register(3, rng);
      const auto basis = Basis::planar(rng.uniform() * 2.0 * kPi);
      const auto [p0, p1] = reg.outcome_probabilities(rng.below(3), basis);
      CHECK(p0 + p1 == doctest::Approx(1.0).epsilon(1e-10));
    }
  }

  SUBCASE("out-of-range index is rejected") {
    const QuantumRegister reg(1);
    CHECK_THROWS_AS(reg.outcome_probabilities(1, Basis::z()),
                    std::invalid_argument);
  }
}

TEST_CASE("measurement") {
  Rng rng(41);

  SUBCASE("a basis state measures deterministically") {
    for (int i = 0; i < 50; ++i) {
      QuantumRegister reg(1, std::array{1});
      CHECK(reg.measure(0, Basis::z(), rng) == 1);
    }
  }

  SUBCASE("Bell halves agree in matching bases, every time") {
    for (const Basis& basis : {Basis::z(), Basis::x()}) {
      for (int i = 0; i < 200; ++i) {
        auto bell = QuantumRegister::bell_pair();
        const int first = bell.measure(0, basis, rng);
        const int second = bell.measure(1, basis, rng);
        REQUIRE(first == second);
      }
    }
  }

  SUBCASE("the measured qubit is left in the observed basis vector") {
    auto plus = testing::planar_state(kPi / 2.0);
    const int outcome = plus.measure(0, Basis::z(), rng);
    QuantumRegister expected(1, std::array{outcome});
    CHECK(plus.fidelity(expected) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(plus.norm_squared() - 1.0) <= 1e-10);
  }

  SUBCASE("empirical frequencies match the analytic probabilities") {
    const double theta = 0.8;
    const auto state = testing::planar_state(theta);
    const double p1 = state.outcome_probabilities(0, Basis::z()).second;
    const int samples = 100000;
    int ones = 0;
    for (int i = 0; i < samples; ++i) {
      auto copy = state;
      ones += copy.measure(0, Basis::z(), rng);
    }
    const double freq = static_cast<double>(ones) / samples;
    CHECK(std::abs(freq - p1) <= testing::binomial_band(p1, samples));
  }
}

TEST_CASE("fidelity") {
  Rng rng(43);

  SUBCASE("identical and orthogonal states") {
    const auto reg = testing::random_register(2, rng);
    CHECK(reg.fidelity(reg) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(QuantumRegister(1, std::array{0})
              .fidelity(QuantumRegister(1, std::array{1})) ==
          doctest::Approx(0.0).epsilon(1e-15));
  }

  SUBCASE("closed form for two planar states") {
    const double delta = 0.2;
    const auto a = testing::planar_state(1.0);
    const auto b = testing::planar_state(1.0 + delta);
    CHECK(a.fidelity(b) ==
          doctest::Approx(0.9900332889206209).epsilon(1e-12));
  }

  SUBCASE("dimension mismatch is rejected") {
    CHECK_THROWS_AS(QuantumRegister(1).fidelity(QuantumRegister(2)),
                    std::invalid_argument);
  }
}

TEST_CASE("subsystem fidelity") {
  SUBCASE("covering the whole register reduces to plain fidelity") {
    Rng rng(47);
    const auto reg = testing::random_register(2, rng);
    const auto ref = testing::random_register(2, rng);
    const std::size_t both[] = {0, 1};
    CHECK(reg.subsystem_fidelity(both, ref) ==
          doctest::Approx(reg.fidelity(ref)).epsilon(1e-12));
  }

  SUBCASE("a GHZ extension leaves the pair at one half") {
    auto reg = QuantumRegister::bell_pair();
    const std::size_t ancilla = reg.append_qubit(0);
    reg.apply_cnot(1, ancilla);
    const std::size_t pair[] = {0, 1};
    CHECK(reg.subsystem_fidelity(pair, QuantumRegister::bell_pair()) ==
          doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("duplicate or mismatched subsystems are rejected") {
    const auto reg = QuantumRegister::bell_pair();
    const std::size_t dup[] = {0, 0};
    CHECK_THROWS_AS(reg.subsystem_fidelity(dup, QuantumRegister::bell_pair()),
                    std::invalid_argument);
    const std::size_t one[] = {0};
    CHECK_THROWS_AS(reg.subsystem_fidelity(one, QuantumRegister::bell_pair()),
                    std::invalid_argument);
  }
}

TEST_CASE("append_qubit grows the ket on the right") {
  QuantumRegister reg(2, std::array{1, 0});
  const std::size_t added = reg.append_qubit(1);
  CHECK(added == 2);
  CHECK(reg.num_qubits() == 3);
  CHECK(std::abs(reg.amplitude(0b101) - 1.0) < 1e-15);  // |101>
  CHECK_THROWS_AS(reg.append_qubit(2), std::invalid_argument);
}

TEST_CASE("basis conventions") {
  // Z == Planar(0) and X == Planar(pi/2), checked on the basis vectors
  for (double theta : {0.0, kPi / 2.0}) {
    const Basis named = theta == 0.0 ? Basis::z() : Basis::x();
    const Basis planar = Basis::planar(theta);
    for (int row = 0; row < 2; ++row) {
      for (int col = 0; col < 2; ++col) {
        CHECK(std::abs(named.frame().m[row][col] -
                       planar.frame().m[row][col]) <= 1e-12);
      }
    }
  }
}
