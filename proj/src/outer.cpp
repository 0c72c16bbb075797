#include "localopt/outer.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace localopt {

void validate(const OuterSpec& spec) {
  if (!(spec.gamma > 0.0) || !std::isfinite(spec.gamma)) {
    throw std::invalid_argument("gamma must be positive and finite");
  }
  if (spec.kind == OuterKind::kMomentum &&
      !(spec.mu >= 0.0 && spec.mu < 1.0)) {
    throw std::invalid_argument("mu must lie in [0, 1)");
  }
  if (spec.kind == OuterKind::kScheduleFree &&
      !(spec.beta >= 0.0 && spec.beta <= 1.0)) {
    throw std::invalid_argument("beta must lie in [0, 1]");
  }
}

OuterState make_outer_state(const OuterSpec& spec, Vector x0) {
  validate(spec);
  OuterState st;
  st.x = std::move(x0);
  switch (spec.kind) {
    case OuterKind::kPlain:
      break;
    case OuterKind::kMomentum:
      st.prev_x = st.x;
      break;
    case OuterKind::kNesterov:
      st.u = st.x;
      st.z = st.x;
      break;
    case OuterKind::kScheduleFree:
      st.sf_z = st.x;
      st.sf_xbar = st.x;
      break;
  }
  return st;
}

void outer_step(OuterState& state, const OuterSpec& spec, const Vector& delta) {
  if (delta.size() != state.x.size()) {
    throw std::invalid_argument("delta dimension does not match state");
  }
  const int r = state.round;
  switch (spec.kind) {
    case OuterKind::kPlain: {
      state.x += spec.gamma * delta;
      break;
    }
    case OuterKind::kMomentum: {
      Vector next =
          state.x + spec.gamma * delta + spec.mu * (state.x - state.prev_x);
      state.prev_x = state.x;
      state.x = std::move(next);
      break;
    }
    case OuterKind::kNesterov: {
      const double gamma_r = spec.gamma * double(r + 1) / 2.0;
      const double tau = 2.0 / double(r + 3);
      state.u = state.x + delta;
      state.z += gamma_r * delta;
      state.x = (1.0 - tau) * state.u + tau * state.z;
      break;
    }
    case OuterKind::kScheduleFree: {
      const double c = 1.0 / double(r + 2);
      state.sf_z += spec.gamma * delta;
      state.sf_xbar = (1.0 - c) * state.sf_xbar + c * state.sf_z;
      state.x = (1.0 - spec.beta) * state.sf_xbar + spec.beta * state.sf_z;
      break;
    }
  }
  state.round = r + 1;
}

}  // namespace localopt
