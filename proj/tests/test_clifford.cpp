#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "spinflow/clifford.hpp"

using namespace spinflow;

namespace {
SpinorValue random_spinor_value(std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  return SpinorValue(complexd(d(rng), d(rng)), complexd(d(rng), d(rng)));
}
}  // namespace

TEST_CASE("Clifford relation and skew-Hermiticity") {
  for (int n : {2, 3}) {
    CliffordRep rep = build_rep(n);
    for (int a = 0; a < n; ++a) {
      REQUIRE((rep.gamma[a] + rep.gamma[a].adjoint()).norm() == 0.0);
      for (int b = 0; b < n; ++b) {
        SpinorMatrix anti = rep.gamma[a] * rep.gamma[b] + rep.gamma[b] * rep.gamma[a];
        SpinorMatrix expect = -2.0 * (a == b ? 1.0 : 0.0) * SpinorMatrix::Identity();
        REQUIRE((anti - expect).norm() <= 1e-15);
      }
    }
    // sum_a gamma_a^2 = -n id
    SpinorMatrix s = SpinorMatrix::Zero();
    for (int a = 0; a < n; ++a) s += rep.gamma[a] * rep.gamma[a];
    REQUIRE((s + double(n) * SpinorMatrix::Identity()).norm() == 0.0);
  }
  REQUIRE_THROWS_AS(build_rep(4), std::invalid_argument);
}

TEST_CASE("volume element for n=3") {
  CliffordRep rep = build_rep(3);
  // gamma1 gamma2 gamma3 = i^3 sx sy sz = (-i)(i I) = I... confirmed by product
  SpinorMatrix prod = rep.gamma[0] * rep.gamma[1] * rep.gamma[2];
  const complexd I(0.0, 1.0);
  SpinorMatrix sx, sy, sz;
  sx << 0, 1, 1, 0;
  sy << 0, -I, I, 0;
  sz << 1, 0, 0, -1;
  SpinorMatrix oracle = (I * sx) * (I * sy) * (I * sz);
  REQUIRE((prod - oracle).norm() == 0.0);
  REQUIRE((prod - SpinorMatrix::Identity()).norm() <= 1e-15);
}

TEST_CASE("clifford_vector properties") {
  std::mt19937_64 rng(123);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int n : {2, 3}) {
    CliffordRep rep = build_rep(n);
    for (int trial = 0; trial < 20; ++trial) {
      double v[3] = {d(rng), d(rng), n == 3 ? d(rng) : 0.0};
      SpinorValue psi = random_spinor_value(rng);

      double zero[3] = {0, 0, 0};
      REQUIRE(clifford_vector(rep, zero, psi).norm() == 0.0);

      // Re<v.psi, psi> = 0
      REQUIRE(std::abs(re_inner(clifford_vector(rep, v, psi), psi)) <= 1e-12);

      // v.(v.psi) = -|v|^2 psi
      double vsq = 0.0;
      for (int a = 0; a < n; ++a) vsq += v[a] * v[a];
      SpinorValue vv = clifford_vector(rep, v, clifford_vector(rep, v, psi));
      REQUIRE((vv + vsq * psi).norm() <= 1e-12 * (1.0 + vsq));

      // skew-adjointness: <v.phi, psi> + <phi, v.psi> = 0
      SpinorValue phi = random_spinor_value(rng);
      complexd sum = inner(clifford_vector(rep, v, phi), psi) +
                     inner(phi, clifford_vector(rep, v, psi));
      REQUIRE(std::abs(sum) <= 1e-12);
    }
  }
}

TEST_CASE("two_form_action properties") {
  std::mt19937_64 rng(321);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int n : {2, 3}) {
    CliffordRep rep = build_rep(n);
    for (int trial = 0; trial < 20; ++trial) {
      double v[3] = {d(rng), d(rng), n == 3 ? d(rng) : 0.0};
      double w[3] = {d(rng), d(rng), n == 3 ? d(rng) : 0.0};
      SpinorValue psi = random_spinor_value(rng);

      REQUIRE(two_form_action(rep, v, v, psi).norm() <= 1e-14);
      REQUIRE(std::abs(re_inner(two_form_action(rep, v, w, psi), psi)) <= 1e-12);
    }
    // c(e1 ^ e2) = gamma1 gamma2 on orthonormal pairs
    double e1[3] = {1, 0, 0}, e2[3] = {0, 1, 0};
    SpinorValue psi = random_spinor_value(rng);
    SpinorValue lhs = two_form_action(rep, e1, e2, psi);
    SpinorValue rhs = rep.gamma[0] * (rep.gamma[1] * psi);
    REQUIRE((lhs - rhs).norm() <= 1e-15);
  }
}

TEST_CASE("observables are representation independent") {
  // conjugate the rep by a random unitary; real inner products built from
  // gamma-words and transported spinors are unchanged
  std::mt19937_64 rng(777);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int n : {2, 3}) {
    CliffordRep rep = build_rep(n);
    Eigen::Matrix2cd A;
    A << complexd(d(rng), d(rng)), complexd(d(rng), d(rng)),
        complexd(d(rng), d(rng)), complexd(d(rng), d(rng));
    Eigen::HouseholderQR<Eigen::Matrix2cd> qr(A);
    Eigen::Matrix2cd Q = qr.householderQ();
    CliffordRep rep2 = rep;
    for (int a = 0; a < n; ++a) rep2.gamma[a] = Q * rep.gamma[a] * Q.adjoint();

    for (int trial = 0; trial < 10; ++trial) {
      double v[3] = {d(rng), d(rng), n == 3 ? d(rng) : 0.0};
      double w[3] = {d(rng), d(rng), n == 3 ? d(rng) : 0.0};
      SpinorValue psi = random_spinor_value(rng);
      SpinorValue phi = random_spinor_value(rng);
      double obs1 = re_inner(two_form_action(rep, v, w, psi),
                             clifford_vector(rep, w, phi));
      SpinorValue psi2 = Q * psi, phi2 = Q * phi;
      double obs2 = re_inner(two_form_action(rep2, v, w, psi2),
                             clifford_vector(rep2, w, phi2));
      REQUIRE(obs1 == Catch::Approx(obs2).margin(1e-12));
    }
  }
}
