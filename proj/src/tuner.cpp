#include "localopt/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace localopt {

namespace {

void validate(const TunerInputs& in) {
  if (!(in.dist0 > 0.0) || !std::isfinite(in.dist0)) {
    throw std::invalid_argument("dist0 must be positive and finite");
  }
  if (!(in.smoothness > 0.0) || !std::isfinite(in.smoothness)) {
    throw std::invalid_argument("smoothness must be positive and finite");
  }
  if (!(in.sigma >= 0.0) || !std::isfinite(in.sigma)) {
    throw std::invalid_argument("sigma must be non-negative and finite");
  }
  if (in.nodes < 1 || in.local_steps < 1 || in.rounds < 1) {
    throw std::invalid_argument("nodes, local_steps, rounds must be >= 1");
  }
}

double pos_part(double x) { return x > 0.0 ? x : 0.0; }

// Bisection for a strictly increasing function with f(0) < 0: grows the
// bracket from `hi0` until the sign flips, then bisects to full precision.
double rising_root(const std::function<double(double)>& f, double hi0) {
  double lo = 0.0;
  double hi = hi0;
  int guard = 0;
  while (f(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 2000) {
      throw std::runtime_error("root bracket failed to close");
    }
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) {
      break;
    }
    if (f(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double tuning_objective(const TunerInputs& in, double eta, double gamma) {
  validate(in);
  if (!(eta > 0.0) || !(gamma > 0.0)) {
    throw std::invalid_argument("eta and gamma must be positive");
  }
  const double d2 = in.dist0 * in.dist0;
  const double s2 = in.sigma * in.sigma;
  const double rh = double(in.rounds) * double(in.local_steps);
  return d2 / (eta * gamma * rh) +
         in.smoothness * s2 * double(in.local_steps) * eta * eta +
         eta * (1.0 + pos_part(gamma - 1.0)) * s2 / double(in.nodes);
}

bool tuning_feasible(const TunerInputs& in, double eta, double gamma) {
  validate(in);
  if (!(eta > 0.0) || !(gamma > 0.0)) {
    return false;
  }
  const double lhs = eta * in.smoothness *
                     (1.0 + pos_part(gamma - 1.0) * double(in.local_steps));
  return lhs <= 0.25 * (1.0 + 1e-12);
}

TunerCandidate solve_candidate_a(const TunerInputs& in) {
  validate(in);
  const double cap = 1.0 / (4.0 * in.smoothness);
  TunerCandidate cand;
  cand.feasible = true;
  cand.gamma = 1.0;
  if (in.sigma == 0.0) {
    cand.eta = cap;
    cand.objective = tuning_objective(in, cand.eta, 1.0);
    return cand;
  }
  const double d2 = in.dist0 * in.dist0;
  const double s2 = in.sigma * in.sigma;
  const double rh = double(in.rounds) * double(in.local_steps);
  const auto cubic = [&](double eta) {
    return 2.0 * in.smoothness * double(in.local_steps) * s2 * eta * eta *
               eta +
           s2 / double(in.nodes) * eta * eta - d2 / rh;
  };
  const double root = rising_root(cubic, cap);
  if (root < cap) {
    cand.eta = root;
    cand.residual = std::abs(cubic(root));
  } else {
    cand.eta = cap;
  }
  cand.objective = tuning_objective(in, cand.eta, 1.0);
  return cand;
}

TunerCandidate solve_candidate_b(const TunerInputs& in) {
  validate(in);
  TunerCandidate cand;
  if (in.local_steps == 1) {
    cand.reason = "single local step: the constraint does not couple eta and gamma";
    return cand;
  }
  if (in.sigma == 0.0) {
    cand.reason = "noiseless: no interior trade-off along the constraint";
    return cand;
  }
  const double l = in.smoothness;
  const double d2 = in.dist0 * in.dist0;
  const double s2 = in.sigma * in.sigma;
  const double h = double(in.local_steps);
  const double hm1 = h - 1.0;
  const double rhs = 16.0 * l * l * d2 * hm1 / double(in.rounds);
  const auto cubic = [&](double eta) {
    const double s = 4.0 * l * eta * hm1 + 1.0;
    return (2.0 * l * s2 * h * eta + s2 * hm1 / (double(in.nodes) * h)) * s *
               s -
           rhs;
  };
  if (cubic(0.0) >= 0.0) {
    cand.reason = "noise floor exceeds the curvature scale: no positive root";
    return cand;
  }
  const double cap = 1.0 / (4.0 * l);
  const double root = rising_root(cubic, cap);
  const double gamma = 1.0 + (1.0 / h) * (1.0 / (4.0 * l * root) - 1.0);
  if (gamma < 1.0) {
    cand.reason = "stationary point sits past eta = 1/(4L): gamma below 1";
    return cand;
  }
  cand.feasible = true;
  cand.eta = root;
  cand.gamma = gamma;
  cand.residual = std::abs(cubic(root));
  cand.objective = tuning_objective(in, root, gamma);
  return cand;
}

TunerCandidate solve_candidate_limit(const TunerInputs& in) {
  validate(in);
  TunerCandidate cand;
  if (in.sigma == 0.0) {
    cand.reason = "noiseless: the vanishing-eta regime has no noise floor to balance";
    return cand;
  }
  const double l = in.smoothness;
  const double h = double(in.local_steps);
  const double eta = 1e-6 / (4.0 * l);
  const double u_cap = eta * (h - 1.0) / h + 1.0 / (4.0 * l * h);
  const double u_star = in.dist0 * std::sqrt(double(in.nodes) /
                                             (double(in.rounds) * h *
                                              in.sigma * in.sigma));
  const double u = std::min(u_star, u_cap);
  if (u <= eta) {
    cand.reason = "optimal aggregate step below eta: gamma would drop below 1";
    return cand;
  }
  cand.feasible = true;
  cand.eta = eta;
  cand.gamma = u / eta;
  cand.objective = tuning_objective(in, eta, cand.gamma);
  return cand;
}

TunerResult tune(const TunerInputs& in) {
  TunerResult out;
  out.a = solve_candidate_a(in);
  out.b = solve_candidate_b(in);
  out.limit = solve_candidate_limit(in);
  const TunerCandidate* cands[3] = {&out.a, &out.b, &out.limit};
  int best = -1;
  for (int i = 0; i < 3; ++i) {
    if (!cands[i]->feasible) {
      continue;
    }
    if (best < 0 ||
        cands[i]->objective < cands[best]->objective * (1.0 - 1e-12)) {
      best = i;
    }
  }
  if (best < 0) {
    throw std::runtime_error("no tuner candidate is available");
  }
  out.winner = best;
  out.eta = cands[best]->eta;
  out.gamma = cands[best]->gamma;
  out.objective = cands[best]->objective;
  return out;
}

double tail_mean_loss(const std::vector<RoundTrace>& traces, int tail) {
  if (traces.empty()) {
    throw std::invalid_argument("tail_mean_loss needs at least one round");
  }
  if (tail < 1) {
    throw std::invalid_argument("tail must be at least 1");
  }
  const std::size_t n = traces.size();
  const std::size_t take = std::min<std::size_t>(tail, n);
  double sum = 0.0;
  for (std::size_t i = n - take; i < n; ++i) {
    sum += traces[i].loss_x;
  }
  return sum / double(take);
}

EmpiricalGammaResult empirical_tune_gamma(
    const QuadraticProblem& problem, const RunConfig& base,
    const std::vector<double>& gammas, const std::vector<std::uint64_t>& seeds,
    int tail) {
  if (gammas.empty() || seeds.empty()) {
    throw std::invalid_argument("gammas and seeds must be non-empty");
  }
  EmpiricalGammaResult out;
  out.rows.reserve(gammas.size());
  for (double gamma : gammas) {
    EmpiricalGammaRow row;
    row.gamma = gamma;
    double sum = 0.0;
    for (std::uint64_t seed : seeds) {
      RunConfig cfg = base;
      cfg.outer.gamma = gamma;
      cfg.seed = seed;
      try {
        const RunResult res = run(problem, cfg);
        sum += tail_mean_loss(res.traces, tail);
      } catch (const DivergenceError&) {
        sum = std::numeric_limits<double>::infinity();
        ++row.diverged;
      }
    }
    row.score = std::isfinite(sum) ? sum / double(seeds.size()) : sum;
    out.rows.push_back(row);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < out.rows.size(); ++i) {
    if (out.rows[i].score < out.rows[best].score) {
      best = i;
    }
  }
  if (!std::isfinite(out.rows[best].score)) {
    throw std::runtime_error("every gamma candidate diverged");
  }
  out.best_gamma = out.rows[best].gamma;
  return out;
}

}  // namespace localopt
