#include <cmath>
#include <random>

#include <doctest.h>

#include "sdclf/system.hpp"
#include "test_util.hpp"

using namespace sdclf;

namespace {

// eta_dot = -eta + u, z_dot = -z + z^2: scalar blocks with curved internal
// dynamics, for Jacobian checks.
NormalFormSystem make_quadratic_zero() {
  return NormalFormSystem(
      2, 1, 1, 1, [](const Vector& xi) { return Vector{-xi[0]}; },
      [](const Vector&) { return Matrix(1, 1, {1.0}); },
      [](const Vector& xi) { return Vector{-xi[1] + xi[1] * xi[1]}; }, Matrix(1, 1, {0.0}),
      Matrix(1, 1, {1.0}));
}

}  // namespace

TEST_CASE("benchmark dimensions and guard radius") {
  const NormalFormSystem sys = make_benchmark();
  CHECK(sys.n() == 3);
  CHECK(sys.gamma() == 2);
  CHECK(sys.m() == 1);
  CHECK(sys.k() == 1);
  CHECK(sys.domain_radius() == 100.0);
  CHECK(sys.A()(0, 1) == 1.0);
  CHECK(sys.B()(1, 0) == 1.0);
}

TEST_CASE("benchmark dynamics evaluation") {
  const NormalFormSystem sys = make_benchmark();

  CHECK(eval_dynamics(sys, {{0, 0, 0}, 2}, {0.0}) == Vector{0, 0, 0});

  const Vector drift = eval_dynamics(sys, {{1, 0, 1}, 2}, {0.0});
  CHECK(drift[0] == 0.0);
  CHECK(drift[1] == doctest::Approx(8.414709848078965).epsilon(1e-15));
  CHECK(drift[2] == 0.0);  // q = 1^2 - 1

  const Vector driven = eval_dynamics(sys, {{1, 0, 1}, 2}, {-10.0 * std::sin(1.0) - 0.5});
  CHECK(driven[0] == 0.0);
  CHECK(driven[1] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(driven[2] == 0.0);

  CHECK(sys.f_eta({1, 0, 1}) == Vector{0.0, 10.0 * std::sin(1.0)});
  CHECK(sys.g_eta({0.3, -2, 7})(0, 0) == 0.0);
  CHECK(sys.g_eta({0.3, -2, 7})(1, 0) == 1.0);
}

TEST_CASE("benchmark zero-dynamics is -z exactly") {
  const NormalFormSystem sys = make_benchmark();
  CHECK(eval_zero_dynamics(sys, {1.0}) == Vector{-1.0});
  CHECK(eval_zero_dynamics(sys, {0.0}) == Vector{0.0});
  CHECK(eval_zero_dynamics(sys, {-2.0}) == Vector{2.0});

  std::mt19937 gen(11);
  for (int i = 0; i < 50; ++i) {
    const double z = testutil::range(gen, -50.0, 50.0);
    CHECK(eval_zero_dynamics(sys, {z}) == Vector{-z});
  }
}

TEST_CASE("zero-dynamics Jacobian by central differences") {
  const NormalFormSystem sys = make_benchmark();
  CHECK(jacobian_zero_dynamics(sys, {0.0})(0, 0) == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(jacobian_zero_dynamics(sys, {5.0})(0, 0) == doctest::Approx(-1.0).epsilon(1e-9));

  // Central differencing is exact for quadratics up to rounding.
  const NormalFormSystem quad = make_quadratic_zero();
  CHECK(jacobian_zero_dynamics(quad, {0.0})(0, 0) == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(jacobian_zero_dynamics(quad, {1.5})(0, 0) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("domain guard rejects states outside the radius") {
  const NormalFormSystem sys = make_benchmark();
  CHECK_THROWS_AS(eval_dynamics(sys, {{101.0, 0, 0}, 2}, {0.0}), DomainViolation);
  CHECK_THROWS_AS(eval_zero_dynamics(sys, {101.0}), DomainViolation);
  // Perturbed differencing points fall outside the ball at its boundary.
  CHECK_THROWS_AS(jacobian_zero_dynamics(sys, {100.0}), DomainViolation);
  CHECK_NOTHROW(eval_dynamics(sys, {{100.0, 0, 0}, 2}, {0.0}));
}

TEST_CASE("construction validates shape, callbacks, and controllability") {
  const auto f = [](const Vector& xi) { return Vector{xi[1], 0.0}; };
  const auto g = [](const Vector&) { return Matrix(2, 1, {0.0, 1.0}); };
  const auto q = [](const Vector&) { return Vector{0.0}; };
  const Matrix A(2, 2, {0, 1, 0, 0});
  const Matrix B(2, 1, {0, 1});

  CHECK_NOTHROW(NormalFormSystem(3, 2, 1, 1, f, g, q, A, B));
  CHECK_THROWS_AS(NormalFormSystem(3, 0, 1, 1, f, g, q, A, B), BadParameter);
  CHECK_THROWS_AS(NormalFormSystem(3, 4, 1, 1, f, g, q, A, B), BadParameter);
  CHECK_THROWS_AS(NormalFormSystem(3, 2, 1, 2, f, g, q, A, B), BadParameter);
  CHECK_THROWS_AS(NormalFormSystem(3, 2, 1, 1, nullptr, g, q, A, B), BadParameter);
  CHECK_THROWS_AS(NormalFormSystem(3, 2, 1, 1, f, g, q, Matrix(1, 1, {0.0}), B), BadParameter);
  CHECK_THROWS_AS(NormalFormSystem(3, 2, 1, 1, f, g, q, A, B, -1.0), BadParameter);

  // B in the uncontrollable direction of the shift matrix.
  const Matrix B_bad(2, 1, {1, 0});
  CHECK_THROWS_WITH_AS(NormalFormSystem(3, 2, 1, 1, f, g, q, A, B_bad),
                       doctest::Contains("not a controllable pair"), BadParameter);
}

TEST_CASE("dynamics are affine in the input") {
  const NormalFormSystem sys = make_benchmark();
  std::mt19937 gen(22);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector xi = testutil::in_ball(gen, 3, 50.0);
    const NormalState s{xi, 2};
    const double u1 = testutil::range(gen, -20.0, 20.0);
    const double u2 = testutil::range(gen, -20.0, 20.0);
    const double alpha = testutil::unit(gen);

    const Vector lhs = eval_dynamics(sys, s, {alpha * u1 + (1.0 - alpha) * u2});
    const Vector a = eval_dynamics(sys, s, {u1});
    const Vector b = eval_dynamics(sys, s, {u2});
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(std::abs(lhs[i] - (alpha * a[i] + (1.0 - alpha) * b[i])) <= 1e-12);
  }
}

TEST_CASE("the z block ignores the input") {
  const NormalFormSystem sys = make_benchmark();
  std::mt19937 gen(33);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector xi = testutil::in_ball(gen, 3, 50.0);
    const NormalState s{xi, 2};
    const Vector with_zero = eval_dynamics(sys, s, {0.0});
    const Vector with_random = eval_dynamics(sys, s, {testutil::range(gen, -100.0, 100.0)});
    CHECK(with_zero[2] == with_random[2]);
  }
}

TEST_CASE("non-finite dynamics surface as domain violations") {
  const NormalFormSystem sys(
      1, 1, 1, 1, [](const Vector& xi) { return Vector{1.0 / xi[0]}; },
      [](const Vector&) { return Matrix(1, 1, {1.0}); },
      [](const Vector&) { return Vector{}; }, Matrix(1, 1, {0.0}), Matrix(1, 1, {1.0}), 10.0);
  CHECK_THROWS_AS(eval_dynamics(sys, {{0.0}, 1}, {0.0}), DomainViolation);
  CHECK_NOTHROW(eval_dynamics(sys, {{1.0}, 1}, {0.0}));
}

TEST_CASE("state partition accessors") {
  const NormalState s{{1.0, 2.0, 3.0}, 2};
  CHECK(s.eta() == Vector{1.0, 2.0});
  CHECK(s.z() == Vector{3.0});
}
