#include <catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "zwm/dense.hpp"
#include "zwm/fock.hpp"

using namespace zwm;
using Catch::Approx;

namespace {

RegistryPtr six_modes(unsigned cutoff) {
  return make_registry({{"P1", cutoff}, {"P2", cutoff}, {"S1", cutoff}, {"S2", cutoff}, {"I", cutoff}, {"L", cutoff}});
}

}  // namespace

TEST_CASE("basis enumeration is lexicographic and complete", "[fock][basis]") {
  SECTION("one mode, cutoff 1") {
    const auto b = enumerate_basis(ModeRegistry{{"A", 1}});
    REQUIRE(b.size() == 2);
    CHECK(b[0].occupations == std::vector<unsigned>{0});
    CHECK(b[1].occupations == std::vector<unsigned>{1});
  }
  SECTION("two modes, cutoffs (1,1)") {
    const auto b = enumerate_basis(ModeRegistry{{"A", 1}, {"B", 1}});
    const std::vector<std::vector<unsigned>> expected{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    REQUIRE(b.size() == expected.size());
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(b[i].occupations == expected[i]);
  }
  SECTION("six modes, cutoff 2 gives 3^6 vectors in strictly increasing order") {
    const auto reg = six_modes(2);
    const auto b = enumerate_basis(*reg);
    REQUIRE(b.size() == 729);
    for (std::size_t i = 1; i < b.size(); ++i) CHECK(b[i - 1] < b[i]);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(reg->index_of(b[i]) == i);
  }
  SECTION("mixed cutoffs multiply") {
    ModeRegistry r{{"A", 3}, {"B", 0}, {"C", 4}};
    CHECK(r.basis_size() == 4 * 1 * 5);
  }
}

TEST_CASE("registry rejects bad configurations", "[fock][errors]") {
  CHECK_THROWS_AS((ModeRegistry{{"A", 1}, {"A", 2}}), ConfigError);
  std::vector<ModeSpec> huge;
  for (int k = 0; k < 40; ++k) huge.push_back({"m" + std::to_string(k), 10});
  CHECK_THROWS_AS(ModeRegistry(huge), SizingError);
  ModeRegistry big{{"A", 1000}, {"B", 1000}, {"C", 1000}};
  CHECK_THROWS_AS(enumerate_basis(big, 1000), SizingError);
  ModeRegistry r{{"A", 1}};
  CHECK_THROWS_AS(r.index_of("Z"), ConfigError);
  CHECK_THROWS_AS(r.index_of(FockBasisVector{{2}}), SizingError);
}

TEST_CASE("ladder operators follow the bosonic rules", "[fock][ladder]") {
  const auto reg = make_registry({{"S1", 3}, {"S2", 3}});
  const auto vac = StateVector::vacuum(reg);

  SECTION("creation on vacuum") {
    const auto s = apply(OperatorSum::create("S1"), vac);
    CHECK(s.amplitude(reg->basis_vector({{"S1", 1}})) == Complex{1.0});
    CHECK(s.norm_squared() == Approx(1.0));
  }
  SECTION("annihilation") {
    const auto one = StateVector::basis_state(reg, reg->basis_vector({{"S1", 1}}));
    const auto back = apply(OperatorSum::annihilate("S1"), one);
    CHECK(back.amplitude(0) == Complex{1.0});
    CHECK(apply(OperatorSum::annihilate("S1"), vac).is_zero());
  }
  SECTION("(a^dagger)^2 |0> = sqrt(2) |2>") {
    const auto a2 = OperatorSum::create("S1") * OperatorSum::create("S1");
    const auto s = apply(a2, vac);
    CHECK(std::abs(s.amplitude(reg->basis_vector({{"S1", 2}})) - std::sqrt(2.0)) < 1e-15);
  }
  SECTION("unknown mode is a configuration error") {
    CHECK_THROWS_AS(apply(OperatorSum::create("X"), vac), ConfigError);
  }
  SECTION("creation at the cutoff drops the component and records the loss") {
    const auto top = StateVector::basis_state(reg, reg->basis_vector({{"S1", 3}}));
    const auto s = apply(OperatorSum::create("S1"), top);
    CHECK(s.is_zero());
    CHECK(s.truncation_loss() == Approx(4.0));
  }
  SECTION("a later annihilation that kills the component does not count as loss") {
    const auto top = StateVector::basis_state(reg, reg->basis_vector({{"S1", 3}}));
    const auto op = OperatorSum::annihilate("S2") * OperatorSum::create("S1");
    const auto s = apply(op, top);
    CHECK(s.is_zero());
    CHECK(s.truncation_loss() == 0.0);
  }
}

TEST_CASE("commutator is the identity below the cutoff", "[fock][ladder][invariant]") {
  const unsigned cutoff = 5;
  const auto reg = make_registry({{"A", cutoff}, {"B", 2}});
  const auto comm = OperatorSum::annihilate("A") * OperatorSum::create("A") -
                    OperatorSum::create("A") * OperatorSum::annihilate("A");
  for (BasisIndex i = 0; i < reg->basis_size(); ++i) {
    const auto basis = StateVector(reg, {{i, 1.0}});
    const auto out = apply(comm, basis);
    const unsigned n = reg->occupation(i, 0);
    if (n < cutoff) {
      CHECK(out.nonzeros() == 1);
      CHECK(std::abs(out.amplitude(i) - 1.0) < 1e-14);  // sqrt(n+1)^2 - sqrt(n)^2 in floating point
    } else {
      // documented truncation artifact: a a^dagger |cutoff> = 0
      CHECK(std::abs(out.amplitude(i) + static_cast<double>(cutoff)) < 1e-12);
    }
  }
}

TEST_CASE("apply matches the Kronecker-product oracle", "[fock][ladder][oracle]") {
  const oracle::Space space{{"P1", "S1", "I"}, {2, 3, 3}};
  const auto reg = space.registry();
  std::mt19937_64 rng(7);
  const Complex g{0.3, -0.2};
  const auto x = OperatorSum::annihilate("P1") * OperatorSum::create("S1") * OperatorSum::create("I");
  const auto h = g * x + std::conj(g) * x.adjoint();
  const oracle::Mat hx = g * space.a("P1") * space.ad("S1") * space.ad("I");
  const oracle::Mat hd = hx + hx.adjoint().eval();
  for (int trial = 0; trial < 10; ++trial) {
    const auto psi = oracle::random_state(reg, rng);
    const oracle::Vec expected = hd * oracle::dense(psi, space.dim());
    const oracle::Vec got = oracle::dense(apply(h, psi), space.dim());
    CHECK((expected - got).norm() < 1e-12);
    // expectation of H against the dense oracle
    const Complex e = expectation(h, psi);
    const Complex eo = oracle::dense(psi, space.dim()).dot(expected);
    CHECK(std::abs(e - eo) < 1e-12);
  }
  // and the library's own dense view agrees
  CHECK((to_dense(h, reg) - hd).norm() < 1e-12);
}

TEST_CASE("apply is linear", "[fock][invariant]") {
  const auto reg = make_registry({{"A", 3}, {"B", 3}, {"C", 2}});
  std::mt19937_64 rng(11);
  const auto op = OperatorSum::annihilate("A") * OperatorSum::create("B") +
                  Complex{0.5, 1.0} * OperatorSum::create("C") * OperatorSum::create("A") +
                  OperatorSum::number("B");
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = oracle::random_state(reg, rng);
    const auto y = oracle::random_state(reg, rng);
    const Complex a{0.7, -0.3};
    const Complex b{-1.1, 0.4};
    const auto lhs = apply(op, a * x + b * y);
    const auto rhs = a * apply(op, x) + b * apply(op, y);
    const auto diff = lhs + Complex{-1.0} * rhs;
    CHECK(std::sqrt(diff.norm_squared()) < 1e-12);
  }
}

TEST_CASE("inner product", "[fock][inner]") {
  const auto reg = make_registry({{"S1", 2}, {"S2", 2}});
  const auto s1 = StateVector::basis_state(reg, reg->basis_vector({{"S1", 1}}));
  const auto s2 = StateVector::basis_state(reg, reg->basis_vector({{"S2", 1}}));
  CHECK(inner_product(s1, s1) == Complex{1.0});
  CHECK(inner_product(s1, s2) == Complex{0.0});

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = oracle::random_state(reg, rng, 0.7);
    const auto y = oracle::random_state(reg, rng, 0.7);
    // direct summation over the dense vectors
    const auto dx = oracle::dense(x, 9);
    const auto dy = oracle::dense(y, 9);
    Complex direct = 0.0;
    for (int i = 0; i < 9; ++i) direct += std::conj(dx(i)) * dy(i);
    CHECK(std::abs(inner_product(x, y) - direct) < 1e-14);
    CHECK(std::abs(inner_product(x, y) - std::conj(inner_product(y, x))) < 1e-14);
    CHECK(inner_product(x, x).real() >= 0.0);
  }
  const auto other = make_registry({{"S1", 3}, {"S2", 2}});
  CHECK_THROWS_AS(inner_product(s1, StateVector::vacuum(other)), ConfigError);
}

TEST_CASE("expectation values", "[fock][expectation]") {
  const auto reg = make_registry({{"A", 4}, {"B", 3}});
  const auto two = StateVector::basis_state(reg, reg->basis_vector({{"A", 2}}));
  CHECK(std::abs(expectation(OperatorSum::number("A"), two) - 2.0) < 1e-15);
  CHECK(expectation(OperatorSum::number("A"), StateVector::vacuum(reg)) == Complex{0.0});

  std::mt19937_64 rng(5);
  const auto x = OperatorSum::annihilate("A") * OperatorSum::create("B") * OperatorSum::create("B");
  const auto herm = Complex{0.2, 0.9} * x + Complex{0.2, -0.9} * x.adjoint() + OperatorSum::number("B");
  for (int trial = 0; trial < 20; ++trial) {
    const auto psi = oracle::random_state(reg, rng);
    CHECK(std::abs(expectation(herm, psi).imag()) < 1e-12);
  }
}

TEST_CASE("coherent states", "[fock][coherent]") {
  SECTION("alpha = 0 is the vacuum") {
    const auto reg = make_registry({{"P", 4}});
    const auto s = coherent_state(reg, "P", 0.0);
    CHECK(s.nonzeros() == 1);
    CHECK(s.amplitude(0) == Complex{1.0});
  }
  SECTION("P(1)/P(0) = |alpha|^2 at alpha 0.2, cutoff 6") {
    const auto reg = make_registry({{"P", 6}});
    const auto p = photon_number_distribution(coherent_state(reg, "P", 0.2), "P");
    CHECK(p[1] / p[0] == Approx(0.04).epsilon(1e-12));
  }
  SECTION("<a> = alpha within 1e-8 for |alpha| <= 0.5 at cutoff 10") {
    const auto reg = make_registry({{"P", 10}});
    for (Complex alpha : {Complex{0.1, 0.0}, Complex{0.3, 0.2}, Complex{0.0, -0.5}, Complex{-0.35, 0.35}}) {
      const auto s = coherent_state(reg, "P", alpha);
      CHECK(std::abs(expectation(OperatorSum::annihilate("P"), s) - alpha) < 1e-8);
    }
  }
  SECTION("Poisson identity P(2)P(0)/P(1)^2 = 1/2") {
    const auto reg = make_registry({{"P", 12}});
    const auto p = photon_number_distribution(coherent_state(reg, "P", Complex{0.4, 0.3}), "P");
    CHECK(p[2] * p[0] / (p[1] * p[1]) == Approx(0.5).epsilon(1e-12));
  }
  SECTION("truncation loss is reported and bounded") {
    const auto reg = make_registry({{"P", 3}});
    CHECK_THROWS_AS(coherent_state(reg, "P", 1.0), SizingError);
    const auto ok = coherent_state(reg, "P", 1.0, 0.1);
    CHECK(ok.truncation_loss() == Approx(1.0 - std::exp(-1.0) * (1 + 1 + 0.5 + 1.0 / 6)).epsilon(1e-10));
    CHECK(ok.norm_squared() == Approx(1.0).epsilon(1e-12));
  }
  SECTION("default cutoff is the smallest with tail below 1e-10") {
    const unsigned n = coherent_cutoff(0.5);
    CHECK(coherent_tail_mass(0.25, n) < 1e-10);
    CHECK(coherent_tail_mass(0.25, n - 1) >= 1e-10);
  }
}

TEST_CASE("photon-number distributions", "[fock][statistics]") {
  const auto reg = make_registry({{"S1", 3}, {"S2", 2}});
  const auto one = StateVector::basis_state(reg, reg->basis_vector({{"S1", 1}}));
  const auto p = photon_number_distribution(one, "S1");
  CHECK(p == std::vector<double>{0.0, 1.0, 0.0, 0.0});
  CHECK_THROWS_AS(photon_number_distribution(one, "Q"), ConfigError);

  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto psi = oracle::random_state(reg, rng);
    for (const char* m : {"S1", "S2"}) {
      double total = 0.0;
      for (double v : photon_number_distribution(psi, m)) total += v;
      CHECK(std::abs(total - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("state vectors store only canonical entries", "[fock][state]") {
  const auto reg = make_registry({{"A", 2}});
  const StateVector s(reg, {{2, 1.0}, {0, 0.5}, {2, -1.0}, {1, 0.0}});
  REQUIRE(s.nonzeros() == 1);
  CHECK(s.entries()[0].index == 0);
  CHECK_THROWS_AS(StateVector(reg, {{3, 1.0}}), SizingError);
  CHECK(std::abs(s.normalized().norm_squared() - 1.0) < 1e-12);
  CHECK_THROWS_AS(StateVector(reg, {}).normalized(), ConfigError);
}
