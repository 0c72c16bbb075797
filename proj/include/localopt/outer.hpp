#pragma once

#include "localopt/problems.hpp"

namespace localopt {

// Server-side rule applied once per round to the averaged node displacement.
enum class OuterKind { kPlain, kMomentum, kNesterov, kScheduleFree };

struct OuterSpec {
  OuterKind kind = OuterKind::kPlain;
  double gamma = 1.0;  // outer stepsize, > 0
  double mu = 0.0;     // heavy-ball coefficient, in [0, 1); momentum rule only
  double beta = 0.9;   // broadcast interpolation, in [0, 1]; schedule-free only
};

// Throws std::invalid_argument when a parameter is out of range.
void validate(const OuterSpec& spec);

// State carried across rounds. `x` is always the point broadcast to nodes at
// the start of the next round. Auxiliary sequences are only maintained for
// the rule that uses them; the rest stay empty.
struct OuterState {
  Vector x;
  int round = 0;   // number of outer updates applied so far
  Vector prev_x;   // momentum: previous broadcast point
  Vector u;        // nesterov: un-damped point, the sequence rate bounds track
  Vector z;        // nesterov: weighted-step sequence
  Vector sf_z;     // schedule-free: base SGD sequence
  Vector sf_xbar;  // schedule-free: running mean of sf_z over rounds
};

OuterState make_outer_state(const OuterSpec& spec, Vector x0);

// Applies one outer update given the round's averaged displacement
// delta = (1/M) sum_m (y_m_end - x_broadcast).
//
//   plain:         x += gamma * delta
//   momentum:      x_next = x + gamma * delta + mu * (x - x_prev)
//   nesterov:      u_next = x + delta
//                  z_next = z + gamma * (round + 1) / 2 * delta
//                  x_next = (1 - tau) u_next + tau z_next, tau = 2/(round + 3)
//   schedule-free: z_next = z + gamma * delta
//                  xbar_next = (1 - c) xbar + c z_next, c = 1/(round + 2)
//                  (so xbar is the exact running mean of z over rounds)
//                  x_next = (1 - beta) xbar_next + beta z_next
void outer_step(OuterState& state, const OuterSpec& spec, const Vector& delta);

}  // namespace localopt
