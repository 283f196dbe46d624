#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "qts/common.hpp"
#include "qts/encoding.hpp"
#include "qts/qsim.hpp"

using namespace qts::encoding;
using qts::Rng;
using qts::qsim::PauliAxis;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_SUITE("encoding") {

TEST_CASE("basis state") {
  auto s = amplitude_encode(vec({1, 0, 0, 0}));
  CHECK(s.n_qubits == 2);
  CHECK(s.amplitudes[0] == qts::qsim::Complex(1.0));
  for (int i = 1; i < 4; ++i) CHECK(s.amplitudes[i] == qts::qsim::Complex(0.0));
}

TEST_CASE("3-4-5 normalization") {
  auto s = amplitude_encode(vec({3, 0, 0, 4}));
  CHECK(s.amplitudes[0].real() == doctest::Approx(0.6));
  CHECK(s.amplitudes[3].real() == doctest::Approx(0.8));
  CHECK(s.amplitudes[0].imag() == 0.0);
}

TEST_CASE("uniform vector gives |++> with <X> = +1") {
  auto s = amplitude_encode(vec({1, 1, 1, 1}));
  CHECK(qts::qsim::expect_pauli(s, PauliAxis::X, 0) == doctest::Approx(1.0));
  CHECK(qts::qsim::expect_pauli(s, PauliAxis::X, 1) == doctest::Approx(1.0));
}

TEST_CASE("rejects zero and malformed vectors") {
  CHECK_THROWS_AS(amplitude_encode(vec({0, 0, 0, 0})), qts::EncodingError);
  CHECK_THROWS_AS(amplitude_encode(vec({1, 2, 3})), std::invalid_argument);
  CHECK_THROWS_AS(amplitude_encode(vec({1.0})), std::invalid_argument);
}

TEST_CASE("scale invariance and round trip") {
  Rng rng(77);
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::VectorXd v(8);
    for (int i = 0; i < 8; ++i) v(i) = rng.normal();
    double c = std::exp(rng.uniform(-3, 3));
    auto a = amplitude_encode(v);
    auto b = amplitude_encode(c * v);
    for (int i = 0; i < 8; ++i) {
      CHECK(std::abs(a.amplitudes[i] - b.amplitudes[i]) < 1e-12);
      CHECK(std::abs(a.amplitudes[i].real() * v.norm() - v(i)) < 1e-12);
    }
    CHECK(std::abs(a.norm_sq() - 1.0) < 1e-12);
  }
}

TEST_CASE("lift_and_project identity path") {
  auto proj = RandomProjection::from_matrix(Eigen::MatrixXd::Identity(4, 4));
  Eigen::VectorXd v = vec({0.3, -1.2, 0.0, 2.5});
  CHECK((lift_and_project(v, proj, LiftKind::Identity) - v).norm() == 0.0);

  Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
  CHECK(lift_and_project(zero, proj, LiftKind::Identity).norm() == 0.0);
  CHECK_THROWS_AS(amplitude_encode(lift_and_project(zero, proj, LiftKind::Identity)),
                  qts::EncodingError);
}

TEST_CASE("lift_and_project dimension mismatch") {
  auto proj = RandomProjection::gaussian(2, 4, 1);
  CHECK_THROWS_AS(lift_and_project(vec({1, 2, 3}), proj, LiftKind::Identity),
                  std::invalid_argument);
  CHECK_THROWS_AS(lift_and_project(vec({1, 2, 3}), proj, LiftKind::TanhConcat),
                  std::invalid_argument);
}

TEST_CASE("seeded projection replays on an independent generator") {
  // Oracle route: from-scratch MT19937-64 + the documented Box-Muller
  // transform, recomputing P and P*f_lift(v) without touching library code.
  const std::uint64_t seed = 42;
  auto proj = RandomProjection::gaussian(2, 4, seed);

  oracles::RefMt64 ref(seed);
  Eigen::MatrixXd want(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) want(r, c) = ref.normal() / std::sqrt(4.0);
  CHECK((proj.matrix - want).cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd v = vec({0.5, -0.2});
  Eigen::VectorXd got = lift_and_project(v, proj, LiftKind::TanhConcat);
  Eigen::VectorXd lifted(4);
  lifted << 0.5, -0.2, std::tanh(0.5), std::tanh(-0.2);
  Eigen::VectorXd expect = want * lifted;
  CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-15);

  auto target = prepare(v, proj, LiftKind::TanhConcat);
  CHECK(std::abs(target.normalized.norm() - 1.0) < 1e-12);
  CHECK((target.lifted - expect).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("projection determinism and seed sensitivity") {
  for (std::uint64_t s = 1; s <= 10; ++s) {
    auto a = RandomProjection::gaussian(3, 6, s);
    auto b = RandomProjection::gaussian(3, 6, s);
    auto c = RandomProjection::gaussian(3, 6, s + 1000);
    CHECK((a.matrix - b.matrix).norm() == 0.0);
    CHECK((a.matrix - c.matrix).norm() > 0.0);
  }
}

TEST_CASE("normalize_pullback matches central differences") {
  Rng rng(88);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd e(6), d(6);
    for (int i = 0; i < 6; ++i) {
      e(i) = rng.normal();
      d(i) = rng.normal();
    }
    Eigen::VectorXd grad = normalize_pullback(e, d);
    for (int i = 0; i < 6; ++i) {
      auto f = [&](double x) {
        Eigen::VectorXd v = e;
        v(i) = x;
        return d.dot(Eigen::VectorXd(v / v.norm()));
      };
      CHECK(std::abs(grad(i) - oracles::finite_diff(f, e(i))) < 1e-6);
    }
  }
}

}  // TEST_SUITE
