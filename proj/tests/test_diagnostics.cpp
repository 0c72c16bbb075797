#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "localopt/diagnostics.hpp"
#include "localopt/engine.hpp"
#include "localopt/rng.hpp"

using namespace localopt;

namespace {

Vector unit(int dim, int axis) {
  Vector v = Vector::Zero(dim);
  v(axis) = 1.0;
  return v;
}

}  // namespace

TEST_CASE("drift hand example: two nodes at 0 and 2 e1") {
  // Mean is e1; each node deviates by 1, so v = 1. Ordered pairs (including
  // the diagonal): 0,4,4,0 -> lambda = 2.
  std::vector<Vector> pts = {Vector::Zero(3), 2.0 * unit(3, 0)};
  const DriftStats st = drift(pts);
  CHECK(st.v == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(st.lambda == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("drift of identical iterates is zero") {
  std::vector<Vector> pts(4, Vector::Ones(5));
  const DriftStats st = drift(pts);
  CHECK(st.v == 0.0);
  CHECK(st.lambda == 0.0);
}

TEST_CASE("lambda equals twice v on random clouds") {
  RngStream rng = RngStream::keyed(55);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vector> pts;
    for (int m = 0; m < 7; ++m) {
      Vector v(6);
      for (int i = 0; i < 6; ++i) {
        v(i) = 3.0 * rng.normal();
      }
      pts.push_back(v);
    }
    const DriftStats st = drift(pts);
    CHECK(st.lambda ==
          doctest::Approx(2.0 * st.v).epsilon(1e-12));
  }
}

TEST_CASE("cosine similarity: hand examples") {
  // Three displacements e1, e1, e2: pair cosines 1, 0, 0 -> mean 1/3.
  std::vector<Vector> d3 = {unit(2, 0), unit(2, 0), unit(2, 1)};
  const CosineStats s3 = cosine_similarity(d3);
  CHECK(s3.mean == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(s3.zero_pairs == 0);
  // Population stddev of {1, 0, 0}: sqrt(2)/3.
  CHECK(s3.stddev == doctest::Approx(std::sqrt(2.0) / 3.0).epsilon(1e-12));

  // Anti-aligned pair.
  std::vector<Vector> d2 = {unit(2, 0), -unit(2, 0)};
  const CosineStats s2 = cosine_similarity(d2);
  CHECK(s2.mean == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(s2.stddev == 0.0);

  // A zero displacement contributes cosine 0 and is flagged.
  std::vector<Vector> dz = {Vector::Zero(2), unit(2, 0)};
  const CosineStats sz = cosine_similarity(dz);
  CHECK(sz.mean == 0.0);
  CHECK(sz.zero_pairs == 1);

  // Fewer than two vectors: a lone node agrees with itself.
  const CosineStats s1 = cosine_similarity({unit(2, 0)});
  CHECK(s1.mean == 1.0);
  CHECK(s1.stddev == 0.0);
  const CosineStats s0 = cosine_similarity({});
  CHECK(s0.mean == 1.0);
}

TEST_CASE("gradient scales from a synthetic step record") {
  // One step, averaged gradient 0 with node gradients e1 and -e1:
  // g1_rms = 0, g2_rms = 1.
  RunResult res;
  res.config.record_level = RecordLevel::kStep;
  res.config.nodes = 2;
  StepRecord s;
  s.g_avg_sq = 0.0;
  s.g_avg_norm = 0.0;
  s.g_local_sq_mean = 1.0;
  s.g_local_norm_mean = 1.0;
  res.steps.push_back(s);
  const GradientStats g = gradient_stats(res);
  CHECK(g.g1_rms == 0.0);
  CHECK(g.g2_rms == 1.0);
}

TEST_CASE("gradient_stats requires step-level records") {
  RunResult res;
  res.config.record_level = RecordLevel::kRound;
  CHECK_THROWS_AS(gradient_stats(res), std::invalid_argument);
}

TEST_CASE("gradient scales on a real run: averaged never exceeds node mean") {
  const QuadraticProblem p = make_random_quadratic(8, 21);
  RunConfig cfg;
  cfg.nodes = 5;
  cfg.local_steps = 4;
  cfg.rounds = 6;
  cfg.eta = 0.2 / p.smoothness;
  cfg.sigma = 1.0;
  cfg.seed = 13;
  cfg.record_level = RecordLevel::kStep;
  const RunResult res = run(p, cfg);
  const GradientStats g = gradient_stats(res);
  CHECK(g.g1_rms <= g.g2_rms + 1e-12);
  CHECK(g.g2_rms > 0.0);

  // Single node: both scales coincide exactly.
  cfg.nodes = 1;
  const GradientStats g1 = gradient_stats(run(p, cfg));
  CHECK(g1.g1_rms == g1.g2_rms);
}

TEST_CASE("node displacements decorrelate as noise grows") {
  // With tiny noise every node's displacement is dominated by the shared
  // clean gradient signal (cosine near 1); with noise far above the gradient
  // scale (roughly smoothness * dist0 here) the displacements are nearly
  // independent (cosine near 0). The means over many seeds must be cleanly
  // ordered.
  const QuadraticProblem p = make_random_quadratic(12, 30);
  auto mean_cos = [&](double sigma) {
    double acc = 0.0;
    const int n_seeds = 60;
    for (int seed = 0; seed < n_seeds; ++seed) {
      RunConfig cfg;
      cfg.nodes = 4;
      cfg.local_steps = 8;
      cfg.rounds = 2;
      cfg.eta = 0.1 / p.smoothness;
      cfg.sigma = sigma;
      cfg.seed = static_cast<std::uint64_t>(seed);
      const RunResult res = run(p, cfg);
      for (const RoundTrace& t : res.traces) {
        acc += t.cos_sim_mean;
      }
    }
    return acc / (60.0 * 2.0);
  };
  const double low = mean_cos(0.1);
  const double high = mean_cos(5000.0);
  CHECK(low > 0.9);
  CHECK(high < 0.5);
  CHECK(low > high + 0.3);
}
