#pragma once

#include <vector>

#include "localopt/engine.hpp"
#include "localopt/problems.hpp"

namespace localopt {

// Node dispersion computed directly from a set of iterates: v is the mean
// squared deviation from the mean iterate, lambda the mean pairwise squared
// distance over all ordered pairs (diagonal included). For any input
// lambda == 2 v holds in exact arithmetic; both are computed from their
// definitions here so that identity can be checked rather than assumed.
struct DriftStats {
  double v = 0;
  double lambda = 0;
};
DriftStats drift(const std::vector<Vector>& iterates);

// Pairwise cosine similarity of node displacement vectors. Pairs where
// either vector has zero norm contribute cosine 0 and are counted in
// zero_pairs. Fewer than two vectors: mean 1, stddev 0 (a lone node always
// agrees with itself). stddev is the population standard deviation.
struct CosineStats {
  double mean = 0;
  double stddev = 0;
  int zero_pairs = 0;
};
CosineStats cosine_similarity(const std::vector<Vector>& deltas);

// Root-mean-square gradient scales over a step-level run record:
//   g1_rms: RMS over (round, step) of the averaged-gradient norm.
//   g2_rms: RMS over (node, round, step) of individual gradient norms.
// g1_rms <= g2_rms always (triangle inequality plus Jensen). Throws
// std::invalid_argument when the run was not recorded at step level.
struct GradientStats {
  double g1_rms = 0;
  double g2_rms = 0;
};
GradientStats gradient_stats(const RunResult& result);

}  // namespace localopt
