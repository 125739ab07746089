#include <doctest.h>

#include <cmath>

#include "irb/diagnostics.hpp"
#include "irb/frame.hpp"
#include "test_support.hpp"

using namespace irb;
using irb::testing::qubit_state;
using irb::testing::throws_code;

namespace {
using C = std::complex<double>;

MatrixXc<double> mat2(C a, C b, C c, C d) {
  MatrixXc<double> m(2, 2);
  m << a, b, c, d;
  return m;
}

VectorX<double> vec(std::initializer_list<double> v) {
  VectorX<double> out(static_cast<Index>(v.size()));
  Index i = 0;
  for (const double x : v) out[i++] = x;
  return out;
}
}  // namespace

TEST_CASE("split_real_imag produces the S + iT parts") {
  const auto split = split_real_imag(validate_density(mat2(0.5, C(0, 0.3), C(0, -0.3), 0.5)));
  CHECK(split.S(0, 0) == doctest::Approx(0.5));
  CHECK(split.S(0, 1) == doctest::Approx(0.0));
  CHECK(split.T(0, 1) == doctest::Approx(0.3));
  CHECK(split.T(1, 0) == doctest::Approx(-0.3));

  const auto real_split = split_real_imag(validate_density(mat2(0.6, 0.2, 0.2, 0.4)));
  CHECK(real_split.T.cwiseAbs().maxCoeff() == 0.0);

  const auto mixed =
      split_real_imag(validate_density(mat2(0.5, C(0.1, 0.2), C(0.1, -0.2), 0.5)));
  CHECK(mixed.S(0, 1) == doctest::Approx(0.1));
  CHECK(mixed.T(0, 1) == doctest::Approx(0.2));
  CHECK((mixed.S - mixed.S.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((mixed.T + mixed.T.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("construct_irb on a state already in the IRB") {
  const auto frame = construct_irb(validate_density(mat2(0.8, 0.0, 0.0, 0.2)));
  CHECK((frame.Q - MatrixX<double>::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(frame.populations[0] == doctest::Approx(0.8));
  CHECK(frame.populations[1] == doctest::Approx(0.2));
  CHECK(frame.N.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(frame.blocks.clusters.size() == 2);
}

TEST_CASE("construct_irb flags the balanced qubit as one degenerate block") {
  const auto frame = construct_irb(qubit_state(0.5, 0.25));
  CHECK(frame.populations[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(frame.populations[1] == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(frame.blocks.clusters.size() == 1);
  CHECK(frame.blocks.clusters[0].size() == 2);
  CHECK(std::abs(frame.N(0, 1)) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("construct_irb is gauge invariant under an SO(2) conjugation") {
  irb::testing::Rng rng(7);
  const auto rho = qubit_state(0.7, 0.2);
  const MatrixX<double> r = irb::testing::random_rotation(2, rng);
  const MatrixXc<double> rotated =
      r.cast<C>() * rho.matrix() * r.transpose().cast<C>();
  const auto frame = construct_irb(validate_density(rotated));
  CHECK(frame.populations[0] == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(frame.populations[1] == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(std::abs(frame.N(0, 1)) == doctest::Approx(0.2).epsilon(1e-10));
}

TEST_CASE("to_irb lands on the gauge-fixed form") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const auto rho = random_density(4, seed);
    const auto frame = construct_irb(rho);
    const auto rho_O = to_irb(rho, frame);
    MatrixX<double> re = rho_O.matrix().real();
    re.diagonal().setZero();
    CHECK(re.cwiseAbs().maxCoeff() <= 1e-10);  // real part diagonal
  }

  const auto diag_state = validate_density(mat2(0.8, 0.0, 0.0, 0.2));
  const auto id_frame = construct_irb(diag_state);  // Q = identity
  CHECK((to_irb(diag_state, id_frame).matrix() - diag_state.matrix()).cwiseAbs().maxCoeff() <
        1e-12);

  const double c = std::cos(M_PI / 4), s = std::sin(M_PI / 4);
  MatrixX<double> rot(2, 2);
  rot << c, -s, s, c;
  const auto rotated = validate_density(
      (rot.cast<C>() * diag_state.matrix() * rot.transpose().cast<C>()).eval());
  const auto frame = construct_irb(rotated);
  const auto recovered = to_irb(rotated, frame);
  CHECK(recovered.matrix()(0, 0).real() == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(recovered.matrix()(1, 1).real() == doctest::Approx(0.2).epsilon(1e-12));

  CHECK(throws_code([&] { to_irb(random_density(3, 1), frame); }, Errc::dim_mismatch));
}

TEST_CASE("dephase_irb zeroes coherences and is idempotent") {
  const auto rho = qubit_state(0.5, 0.25);
  const auto dephased = dephase_irb(rho);
  CHECK(dephased.matrix()(0, 0).real() == doctest::Approx(0.5));
  CHECK(std::abs(dephased.matrix()(0, 1)) == 0.0);

  CHECK((dephase_irb(dephased).matrix() - dephased.matrix()).cwiseAbs().maxCoeff() == 0.0);

  // HS distance to the dephased state equals sqrt(2U).
  const double hs = (rho.matrix() - dephased.matrix()).norm();
  CHECK(hs == doctest::Approx(std::sqrt(0.125)).epsilon(1e-12));
  CHECK(hs == doctest::Approx(0.3535533905932738).epsilon(1e-12));
}

TEST_CASE("detect_blocks clusters greedy by adjacent gaps") {
  const auto exact = detect_blocks(vec({0.4, 0.4, 0.2}), 1e-6);
  REQUIRE(exact.clusters.size() == 2);
  CHECK(exact.clusters[0] == std::vector<Index>{0, 1});
  CHECK(exact.clusters[1] == std::vector<Index>{2});

  const auto separate = detect_blocks(vec({0.5, 0.3, 0.2}), 1e-6);
  CHECK(separate.clusters.size() == 3);

  const auto chained = detect_blocks(vec({0.35, 0.34, 0.31}), 0.02);
  REQUIRE(chained.clusters.size() == 2);
  CHECK(chained.clusters[0] == std::vector<Index>{0, 1});
  CHECK(chained.clusters[1] == std::vector<Index>{2});

  CHECK(throws_code([&] { detect_blocks(vec({0.2, 0.3, 0.5}), 1e-6); }, Errc::not_sorted));
}

TEST_CASE("property: gauge invariance of populations, blocks and coherence diagnostics") {
  irb::testing::Rng rng(2024);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Index dim = 2 + static_cast<Index>(seed % 5);
    const auto rho = random_density(dim, seed + 5000);
    const MatrixX<double> r = irb::testing::random_rotation(dim, rng);
    const auto rotated =
        validate_density((r.cast<C>() * rho.matrix() * r.transpose().cast<C>()).eval());

    const auto f1 = construct_irb(rho);
    const auto f2 = construct_irb(rotated);
    REQUIRE((f1.populations - f2.populations).cwiseAbs().maxCoeff() <= 1e-10);
    REQUIRE(f1.blocks.clusters == f2.blocks.clusters);

    const double u1 = coherence_U(f1.N), u2 = coherence_U(f2.N);
    const double um1 = coherence_Umax(f1.populations), um2 = coherence_Umax(f2.populations);
    REQUIRE(std::abs(u1 - u2) <= 1e-10);
    REQUIRE(std::abs(um1 - um2) <= 1e-10);
    if (um1 >= 1e-12) {
      REQUIRE(std::abs(cohesion_index(u1, um1) - cohesion_index(u2, um2)) <= 1e-10);
    }
  }
}

TEST_CASE("property: frame reconstruction Q (Q^T rho Q) Q^T = rho") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Index dim = 2 + static_cast<Index>(seed % 7);
    const auto rho = random_density(dim, seed + 900);
    const auto frame = construct_irb(rho);
    const auto rho_O = to_irb(rho, frame);
    const MatrixXc<double> back =
        frame.Q.cast<C>() * rho_O.matrix() * frame.Q.transpose().cast<C>();
    REQUIRE((back - rho.matrix()).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("property: pairwise positivity bound over random states") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const Index dim = 2 + static_cast<Index>(seed % 7);
    const auto frame = construct_irb(random_density(dim, seed + 40000));
    const auto n_active = static_cast<Index>(frame.active.size());
    for (Index i = 0; i < n_active; ++i) {
      for (Index j = i + 1; j < n_active; ++j) {
        REQUIRE(frame.N(i, j) * frame.N(i, j) <=
                frame.populations[i] * frame.populations[j] + 1e-10);
      }
    }
    REQUIRE(coherence_U(frame.N) <= coherence_Umax(frame.populations) + 1e-10);
  }
}
