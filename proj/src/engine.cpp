#include "localopt/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace localopt {

namespace {

void validate(const QuadraticProblem& problem, const RunConfig& cfg) {
  if (cfg.nodes < 1) {
    throw std::invalid_argument("nodes must be at least 1");
  }
  if (cfg.local_steps < 1) {
    throw std::invalid_argument("local_steps must be at least 1");
  }
  if (cfg.rounds < 1) {
    throw std::invalid_argument("rounds must be at least 1");
  }
  if (!(cfg.eta >= 0.0) || !std::isfinite(cfg.eta)) {
    throw std::invalid_argument("eta must be non-negative and finite");
  }
  if (!(cfg.sigma >= 0.0) || !std::isfinite(cfg.sigma)) {
    throw std::invalid_argument("sigma must be non-negative and finite");
  }
  validate(cfg.outer);
  if (cfg.x0 && cfg.x0->size() != problem.x_star.size()) {
    throw std::invalid_argument("x0 dimension does not match problem");
  }
}

// Mean squared deviation of node iterates from their mean. Centered on the
// first node so coincident iterates return exactly zero and nearby iterates
// lose no precision to a large common offset.
double dispersion(const std::vector<Vector>& y, Vector& mean_buf) {
  const int m = static_cast<int>(y.size());
  mean_buf.setZero();
  for (const Vector& v : y) {
    mean_buf += v - y[0];
  }
  mean_buf /= double(m);
  double acc = 0.0;
  for (const Vector& v : y) {
    acc += (v - y[0] - mean_buf).squaredNorm();
  }
  return acc / double(m);
}

}  // namespace

RunResult run(const QuadraticProblem& problem, const RunConfig& config) {
  validate(problem, config);

  const int d = problem.dim();
  const int m_nodes = config.nodes;
  const int h_steps = config.local_steps;
  const int rounds = config.rounds;
  const bool step_level = config.record_level == RecordLevel::kStep;

  RunResult result;
  result.config = config;
  result.traces.reserve(rounds);
  if (step_level) {
    result.steps.reserve(static_cast<std::size_t>(rounds) * h_steps);
    result.drift.reserve(static_cast<std::size_t>(rounds) * (h_steps + 1));
    result.round_disp_sq.reserve(rounds);
  }

  const Vector x0 = config.x0 ? *config.x0 : Vector::Zero(d);
  OuterState state = make_outer_state(config.outer, x0);
  const double dist0_sq = (x0 - problem.x_star).squaredNorm();
  const double blowup_sq = 1e12 * std::max(1.0, dist0_sq);

  std::vector<Vector> y(m_nodes, Vector::Zero(d));
  std::vector<RngStream> streams;
  streams.reserve(m_nodes);

  Vector y_avg(d);        // virtual iterate, advanced by averaged gradients
  Vector g_avg(d);        // averaged stochastic gradient at the current step
  Vector g(d), z(d);      // per-node work buffers
  Vector mean_buf(d);     // dispersion work buffer
  Vector iterate_sum = Vector::Zero(d);
  double local_loss_sum = 0.0;

  for (int r = 0; r < rounds; ++r) {
    const Vector x_bcast = state.x;
    for (int m = 0; m < m_nodes; ++m) {
      y[m] = x_bcast;
    }
    streams.clear();
    for (int m = 0; m < m_nodes; ++m) {
      streams.push_back(RngStream::keyed(config.seed, rng_tag::kNoise,
                                         static_cast<std::uint64_t>(m),
                                         static_cast<std::uint64_t>(r)));
    }
    y_avg = x_bcast;

    double g1_sq_sum = 0.0;
    double g2_sq_sum = 0.0;
    double drift_max = 0.0;

    for (int h = 0; h < h_steps; ++h) {
      if (m_nodes > 1) {
        const double v = dispersion(y, mean_buf);
        drift_max = std::max(drift_max, 2.0 * v);
        if (step_level) {
          result.drift.push_back({v, 2.0 * v});
        }
      } else if (step_level) {
        result.drift.push_back({0.0, 0.0});
      }

      g_avg.setZero();
      double local_sq = 0.0;
      double local_norm = 0.0;
      for (int m = 0; m < m_nodes; ++m) {
        z = y[m] - problem.x_star;
        g.noalias() = problem.hessian * z;
        local_loss_sum += 0.5 * z.dot(g);
        if (config.sigma > 0.0) {
          g += gaussian_noise(d, config.sigma, config.noise_scaling,
                              streams[m]);
        }
        local_sq += g.squaredNorm();
        local_norm += g.norm();
        g_avg += g;
        y[m] -= config.eta * g;
      }
      g_avg /= double(m_nodes);

      const double g_avg_sq = g_avg.squaredNorm();
      g1_sq_sum += g_avg_sq;
      g2_sq_sum += local_sq / double(m_nodes);
      iterate_sum += y_avg;
      if (step_level) {
        result.steps.push_back({g_avg_sq, std::sqrt(g_avg_sq),
                                local_sq / double(m_nodes),
                                local_norm / double(m_nodes),
                                (y_avg - x_bcast).dot(g_avg)});
      }
      y_avg -= config.eta * g_avg;
    }

    if (m_nodes > 1) {
      const double v = dispersion(y, mean_buf);
      drift_max = std::max(drift_max, 2.0 * v);
      if (step_level) {
        result.drift.push_back({v, 2.0 * v});
      }
    } else if (step_level) {
      result.drift.push_back({0.0, 0.0});
    }
    if (step_level) {
      result.round_disp_sq.push_back((y_avg - x_bcast).squaredNorm());
    }

    Vector delta = Vector::Zero(d);
    for (int m = 0; m < m_nodes; ++m) {
      delta += y[m];
    }
    delta /= double(m_nodes);
    delta -= x_bcast;

    double cos_sum = 0.0;
    int pair_count = 0;
    if (m_nodes > 1) {
      for (int a = 0; a < m_nodes; ++a) {
        for (int b = a + 1; b < m_nodes; ++b) {
          const Vector da = y[a] - x_bcast;
          const Vector db = y[b] - x_bcast;
          const double na = da.norm();
          const double nb = db.norm();
          cos_sum += (na > 0.0 && nb > 0.0) ? da.dot(db) / (na * nb) : 0.0;
          ++pair_count;
        }
      }
    }
    const double cos_sim_mean =
        m_nodes > 1 ? cos_sum / double(pair_count) : 1.0;

    outer_step(state, config.outer, delta);

    const double dist_sq = (state.x - problem.x_star).squaredNorm();
    if (!std::isfinite(dist_sq) || dist_sq > blowup_sq) {
      throw DivergenceError(r, dist_sq);
    }

    const std::size_t samples = static_cast<std::size_t>(r + 1) * h_steps;
    const Vector running_mean = iterate_sum / double(samples);
    result.traces.push_back({r, problem.loss(state.x),
                             problem.loss(running_mean), dist_sq, delta.norm(),
                             drift_max, g1_sq_sum, g2_sq_sum, cos_sim_mean});
  }

  result.final_state = std::move(state);
  result.avg_iterate =
      iterate_sum / double(static_cast<std::size_t>(rounds) * h_steps);
  result.avg_local_loss =
      local_loss_sum /
      double(static_cast<std::size_t>(rounds) * h_steps * m_nodes);
  return result;
}

}  // namespace localopt
