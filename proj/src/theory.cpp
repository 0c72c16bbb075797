#include "localopt/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace localopt {

namespace {

// Checks the problem-scale fields only; the stepsize tuner consumes these
// without a candidate eta/gamma.
void validate_scales(const BoundInputs& in) {
  if (!(in.dist0 >= 0.0) || !std::isfinite(in.dist0)) {
    throw std::invalid_argument("dist0 must be non-negative and finite");
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

void validate(const BoundInputs& in) {
  validate_scales(in);
  if (!(in.eta > 0.0) || !std::isfinite(in.eta)) {
    throw std::invalid_argument("eta must be positive and finite");
  }
  if (!(in.gamma > 0.0) || !std::isfinite(in.gamma)) {
    throw std::invalid_argument("gamma must be positive and finite");
  }
  if (!(in.mu >= 0.0 && in.mu < 1.0)) {
    throw std::invalid_argument("mu must lie in [0, 1)");
  }
}

double pos_part(double x) { return x > 0.0 ? x : 0.0; }

// Total noise level of a run: per-coordinate scaling puts stddev sigma on
// each of the d coordinates, so E||noise||^2 = d sigma^2.
double effective_sigma(const RunConfig& cfg, Eigen::Index dim) {
  if (cfg.noise_scaling == NoiseScaling::kPerCoord) {
    return cfg.sigma * std::sqrt(double(dim));
  }
  return cfg.sigma;
}

}  // namespace

BoundReport plain_rate_bound(const BoundInputs& in) {
  validate(in);
  const double d2 = in.dist0 * in.dist0;
  const double s2 = in.sigma * in.sigma;
  const double rh = double(in.rounds) * double(in.local_steps);
  const double opt = 2.0 * d2 / (in.gamma * in.eta * rh);
  const double drift_term =
      8.0 * in.smoothness * in.eta * in.eta * s2 * double(in.local_steps);
  const double noise =
      2.0 * in.eta * (1.0 + pos_part(in.gamma - 1.0)) * s2 / double(in.nodes);
  BoundReport out;
  out.terms = {{"optimization", opt}, {"drift", drift_term}, {"noise", noise}};
  out.value = opt + drift_term + noise;
  out.stepsize_ok =
      in.eta * in.smoothness *
          (1.0 + pos_part(in.gamma - 1.0) * double(in.local_steps)) <=
      0.25;
  return out;
}

BoundReport momentum_rate_bound(const BoundInputs& in) {
  validate(in);
  const double d2 = in.dist0 * in.dist0;
  const double s2 = in.sigma * in.sigma;
  const double rh = double(in.rounds) * double(in.local_steps);
  const double one_minus_mu = 1.0 - in.mu;
  const double opt = 4.0 * one_minus_mu * d2 / (in.eta * in.gamma * rh);
  const double drift_term =
      16.0 * in.smoothness * in.eta * in.eta * s2 * double(in.local_steps);
  const double noise = 4.0 * in.eta * s2 / double(in.nodes) *
                       std::max(in.gamma / one_minus_mu, 1.0);
  const double momentum_noise =
      8.0 * in.eta * in.gamma * in.mu * s2 / (one_minus_mu * double(in.nodes));
  BoundReport out;
  out.terms = {{"optimization", opt},
               {"drift", drift_term},
               {"noise", noise},
               {"momentum_noise", momentum_noise}};
  out.value = opt + drift_term + noise + momentum_noise;
  const bool c1 = in.eta * in.smoothness *
                      (1.0 + pos_part(in.gamma / one_minus_mu - 1.0) *
                                 double(in.local_steps)) <=
                  0.25;
  const bool c2 = in.eta * in.gamma * in.mu * in.smoothness *
                      double(in.local_steps) / one_minus_mu <=
                  1.0 / 16.0;
  out.stepsize_ok = c1 && c2;
  return out;
}

BoundReport accelerated_rate_bound(const BoundInputs& in) {
  validate(in);
  const double d2 = in.dist0 * in.dist0;
  const double s2 = in.sigma * in.sigma;
  const double r = double(in.rounds);
  const double h = double(in.local_steps);
  const double m = double(in.nodes);
  const double l = in.smoothness;
  const double opt = 2.0 * d2 / (in.gamma * in.eta * r * r * h);
  const double noise_accum = r * l * in.eta * in.eta * s2 * h / (2.0 * m);
  const double drift_term =
      r * l * l * in.eta * in.eta * in.eta * s2 * h * h / 2.0;
  const double noise = in.gamma * in.eta * s2 * r / (2.0 * m);
  BoundReport out;
  out.terms = {{"optimization", opt},
               {"noise_accum", noise_accum},
               {"drift", drift_term},
               {"noise", noise}};
  out.value = opt + noise_accum + drift_term + noise;
  out.stepsize_ok = 2.0 * l * in.eta <= 1.0 && in.gamma <= 1.0;
  return out;
}

double accelerated_tuned_eta(const BoundInputs& in) {
  validate_scales(in);
  const double d2 = in.dist0 * in.dist0;
  const double s2 = in.sigma * in.sigma;
  const double r3 = std::pow(double(in.rounds), 3);
  const double h = double(in.local_steps);
  const double m = double(in.nodes);
  const double l = in.smoothness;
  double eta = 1.0 / (2.0 * l);
  if (s2 > 0.0) {
    eta = std::min(eta, std::cbrt(2.0 * m * d2 / (r3 * l * s2 * h * h)));
    eta = std::min(eta, std::pow(4.0 * d2 / (3.0 * r3 * l * l * s2 * h * h * h),
                                 0.25));
    eta = std::min(eta, std::sqrt(4.0 * m * d2 / (r3 * h * s2)));
  }
  return eta;
}

TradeoffResult gamma_tradeoff_argmin(double a, double b, double c) {
  if (!(a >= 0.0) || !(b >= 0.0) || !(c >= 0.0) || !std::isfinite(a) ||
      !std::isfinite(b) || !std::isfinite(c)) {
    throw std::invalid_argument(
        "trade-off coefficients must be non-negative and finite");
  }
  if (a == 0.0 && b == 0.0 && c == 0.0) {
    throw std::invalid_argument("all trade-off coefficients are zero");
  }
  if (a > 0.0 && b + c == 0.0) {
    throw std::invalid_argument("trade-off is unbounded below");
  }
  if (a >= b + c) {
    return {std::sqrt(a / (b + c)), TradeoffCase::kSqrtSum};
  }
  if (b >= c && a <= b - c) {
    return {std::sqrt(a / (b - c)), TradeoffCase::kSqrtDiff};
  }
  return {1.0, TradeoffCase::kOne};
}

DataTerms data_dependent_terms(const RunResult& result, double dist0,
                               double iota) {
  const RunConfig& cfg = result.config;
  const std::size_t want =
      static_cast<std::size_t>(cfg.rounds) * cfg.local_steps;
  if (result.steps.size() != want) {
    throw std::invalid_argument(
        "data_dependent_terms needs a run recorded at step level");
  }
  if (!(dist0 >= 0.0) || !(iota > 0.0)) {
    throw std::invalid_argument("dist0 must be >= 0 and iota > 0");
  }
  const double eta = cfg.eta;
  const double gamma = cfg.outer.gamma;
  const double rh = double(cfg.rounds) * double(cfg.local_steps);
  const double sigma = effective_sigma(cfg, result.avg_iterate.size());

  double sum_avg_sq = 0.0;
  double sum_local_sq = 0.0;
  double sum_round_norm_sq = 0.0;  // sum_r (sum_h ||avg grad||)^2
  double max_round_local_norm = 0.0;
  for (int r = 0; r < cfg.rounds; ++r) {
    double round_avg_norm = 0.0;
    double round_local_norm = 0.0;
    for (int h = 0; h < cfg.local_steps; ++h) {
      const StepRecord& s =
          result.steps[static_cast<std::size_t>(r) * cfg.local_steps + h];
      sum_avg_sq += s.g_avg_sq;
      sum_local_sq += s.g_local_sq_mean;
      round_avg_norm += s.g_avg_norm;
      round_local_norm += s.g_local_norm_mean;
    }
    sum_round_norm_sq += round_avg_norm * round_avg_norm;
    max_round_local_norm = std::max(max_round_local_norm, round_local_norm);
  }

  DataTerms t;
  t.opt = dist0 * dist0 / (gamma * eta * rh);
  t.grad_energy = gamma * eta / rh * sum_avg_sq;
  t.noise = gamma * eta * sigma * sigma * iota * iota;
  t.gamma_gap = std::abs(1.0 - gamma) * eta / rh * sum_round_norm_sq;
  t.drift = eta / (gamma * double(cfg.local_steps)) * max_round_local_norm *
            max_round_local_norm;
  t.noise_cross =
      eta * sigma * iota * std::sqrt(sum_local_sq / double(cfg.rounds));
  t.total =
      t.opt + t.grad_energy + t.noise + t.gamma_gap + t.drift + t.noise_cross;
  return t;
}

GammaRecommendation recommend_gamma(const RunResult& result, double dist0) {
  const RunConfig& cfg = result.config;
  const std::size_t want =
      static_cast<std::size_t>(cfg.rounds) * cfg.local_steps;
  if (result.steps.size() != want) {
    throw std::invalid_argument(
        "recommend_gamma needs a run recorded at step level");
  }
  if (!(dist0 >= 0.0) || !std::isfinite(dist0)) {
    throw std::invalid_argument("dist0 must be non-negative and finite");
  }
  const double sigma = effective_sigma(cfg, result.avg_iterate.size());
  const double s2 = sigma * sigma;

  double g1_raw = 0.0;
  double g2_raw = 0.0;
  for (const StepRecord& s : result.steps) {
    g1_raw += s.g_avg_sq;
    g2_raw += s.g_local_sq_mean;
  }
  g1_raw /= double(result.steps.size());
  g2_raw /= double(result.steps.size());

  GammaRecommendation rec;
  rec.g1_sq = std::max(g1_raw - s2 / double(cfg.nodes), 0.0);
  rec.g2_sq = std::max(g2_raw - s2, 0.0);
  const double rh = double(cfg.rounds) * double(cfg.local_steps);
  rec.a = dist0 * dist0 / (cfg.eta * rh) +
          cfg.eta * double(cfg.local_steps) * rec.g2_sq;
  rec.b = cfg.eta * (rec.g1_sq + s2);
  rec.c = cfg.eta * double(cfg.local_steps) * rec.g1_sq;
  const TradeoffResult tr = gamma_tradeoff_argmin(rec.a, rec.b, rec.c);
  rec.gamma = tr.x;
  if (rec.gamma < 1.0) {
    rec.regime = "noise_dominated";
  } else if (rec.gamma > 1.0) {
    rec.regime = "optimization_dominated";
  } else {
    rec.regime = "balanced";
  }
  return rec;
}

}  // namespace localopt
