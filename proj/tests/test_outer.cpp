#include <cstdint>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "localopt/outer.hpp"
#include "localopt/rng.hpp"

using namespace localopt;

namespace {

Vector unit(int dim, int axis) {
  Vector v = Vector::Zero(dim);
  v(axis) = 1.0;
  return v;
}

}  // namespace

TEST_CASE("spec validation rejects out-of-range parameters") {
  OuterSpec bad_gamma;
  bad_gamma.gamma = 0.0;
  CHECK_THROWS_AS(validate(bad_gamma), std::invalid_argument);
  bad_gamma.gamma = -1.0;
  CHECK_THROWS_AS(validate(bad_gamma), std::invalid_argument);

  OuterSpec bad_mu;
  bad_mu.kind = OuterKind::kMomentum;
  bad_mu.mu = 1.0;
  CHECK_THROWS_AS(validate(bad_mu), std::invalid_argument);
  bad_mu.mu = -0.1;
  CHECK_THROWS_AS(validate(bad_mu), std::invalid_argument);

  OuterSpec bad_beta;
  bad_beta.kind = OuterKind::kScheduleFree;
  bad_beta.beta = 1.5;
  CHECK_THROWS_AS(validate(bad_beta), std::invalid_argument);

  OuterSpec ok;
  ok.kind = OuterKind::kMomentum;
  ok.gamma = 2.0;
  ok.mu = 0.99;
  CHECK_NOTHROW(validate(ok));
}

TEST_CASE("plain update is x += gamma * delta") {
  OuterSpec spec;
  spec.gamma = 1.5;
  OuterState st = make_outer_state(spec, Vector::Zero(2));
  outer_step(st, spec, unit(2, 0));
  outer_step(st, spec, unit(2, 1));
  CHECK(st.x(0) == 1.5);
  CHECK(st.x(1) == 1.5);
  CHECK(st.round == 2);
}

TEST_CASE("momentum two-step hand example") {
  // gamma=1, mu=0.5, deltas e1 then e2:
  //   x1 = x0 + e1
  //   x2 = x1 + e2 + 0.5 (x1 - x0) = 1.5 e1 + e2
  OuterSpec spec;
  spec.kind = OuterKind::kMomentum;
  spec.gamma = 1.0;
  spec.mu = 0.5;
  OuterState st = make_outer_state(spec, Vector::Zero(2));
  outer_step(st, spec, unit(2, 0));
  CHECK(st.x(0) == 1.0);
  CHECK(st.x(1) == 0.0);
  outer_step(st, spec, unit(2, 1));
  CHECK(st.x(0) == 1.5);
  CHECK(st.x(1) == 1.0);
}

TEST_CASE("momentum with mu = 0 tracks plain exactly") {
  OuterSpec plain;
  plain.gamma = 0.7;
  OuterSpec mom;
  mom.kind = OuterKind::kMomentum;
  mom.gamma = 0.7;
  mom.mu = 0.0;

  OuterState sp = make_outer_state(plain, Vector::Zero(4));
  OuterState sm = make_outer_state(mom, Vector::Zero(4));
  RngStream rng = RngStream::keyed(3);
  for (int r = 0; r < 20; ++r) {
    Vector delta(4);
    for (int i = 0; i < 4; ++i) {
      delta(i) = rng.normal();
    }
    outer_step(sp, plain, delta);
    outer_step(sm, mom, delta);
    CHECK(sp.x == sm.x);  // bitwise: identical arithmetic must be used
  }
}

TEST_CASE("accelerated two-step hand example") {
  // gamma=1, deltas e1 then e2, x0 = 0.
  //   round 0: gamma_0 = 1/2, tau = 2/3:
  //     u1 = e1, z1 = 0.5 e1, x1 = (1/3) e1 + (2/3)(0.5 e1) = (2/3) e1
  //   round 1: gamma_1 = 1, tau = 1/2:
  //     u2 = x1 + e2, z2 = 0.5 e1 + e2,
  //     x2 = 0.5 (x1 + e2) + 0.5 (0.5 e1 + e2) = (7/12) e1 + e2
  OuterSpec spec;
  spec.kind = OuterKind::kNesterov;
  spec.gamma = 1.0;
  OuterState st = make_outer_state(spec, Vector::Zero(2));

  outer_step(st, spec, unit(2, 0));
  CHECK(st.u(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(st.z(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(st.x(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  outer_step(st, spec, unit(2, 1));
  CHECK(st.u(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(st.u(1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(st.z(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(st.z(1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(st.x(0) == doctest::Approx(7.0 / 12.0).epsilon(1e-14));
  CHECK(st.x(1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("schedule-free xbar is the running mean of the base sequence") {
  OuterSpec spec;
  spec.kind = OuterKind::kScheduleFree;
  spec.gamma = 1.3;
  spec.beta = 0.4;
  OuterState st = make_outer_state(spec, Vector::Ones(3));

  std::vector<Vector> z_history;
  z_history.push_back(st.sf_z);  // z_0 = x0
  RngStream rng = RngStream::keyed(8);
  for (int r = 0; r < 25; ++r) {
    Vector delta(3);
    for (int i = 0; i < 3; ++i) {
      delta(i) = rng.normal();
    }
    outer_step(st, spec, delta);
    z_history.push_back(st.sf_z);

    Vector mean = Vector::Zero(3);
    for (const Vector& z : z_history) {
      mean += z;
    }
    mean /= double(z_history.size());
    CHECK((st.sf_xbar - mean).norm() < 1e-12);
    // Broadcast point interpolates between the mean and the base sequence.
    const Vector expect = 0.6 * st.sf_xbar + 0.4 * st.sf_z;
    CHECK((st.x - expect).norm() < 1e-12);
  }
}

TEST_CASE("schedule-free with beta = 1 broadcasts the plain trajectory") {
  OuterSpec plain;
  plain.gamma = 0.9;
  OuterSpec sf;
  sf.kind = OuterKind::kScheduleFree;
  sf.gamma = 0.9;
  sf.beta = 1.0;

  OuterState sp = make_outer_state(plain, Vector::Zero(5));
  OuterState ss = make_outer_state(sf, Vector::Zero(5));
  RngStream rng = RngStream::keyed(12);
  for (int r = 0; r < 30; ++r) {
    Vector delta(5);
    for (int i = 0; i < 5; ++i) {
      delta(i) = rng.normal();
    }
    outer_step(sp, plain, delta);
    outer_step(ss, sf, delta);
    CHECK((sp.x - ss.x).norm() < 1e-12);
  }
}

TEST_CASE("auxiliary sequences stay empty for rules that do not use them") {
  OuterSpec plain;
  OuterState st = make_outer_state(plain, Vector::Zero(2));
  CHECK(st.prev_x.size() == 0);
  CHECK(st.u.size() == 0);
  CHECK(st.z.size() == 0);
  CHECK(st.sf_z.size() == 0);
  CHECK(st.sf_xbar.size() == 0);
}
