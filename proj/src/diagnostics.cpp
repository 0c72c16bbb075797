#include "localopt/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

namespace localopt {

DriftStats drift(const std::vector<Vector>& iterates) {
  if (iterates.empty()) {
    throw std::invalid_argument("drift needs at least one iterate");
  }
  const int m = static_cast<int>(iterates.size());
  Vector mean = Vector::Zero(iterates[0].size());
  for (const Vector& y : iterates) {
    if (y.size() != mean.size()) {
      throw std::invalid_argument("iterates must share a dimension");
    }
    mean += y;
  }
  mean /= double(m);
  DriftStats out;
  for (const Vector& y : iterates) {
    out.v += (y - mean).squaredNorm();
  }
  out.v /= double(m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      out.lambda += (iterates[a] - iterates[b]).squaredNorm();
    }
  }
  out.lambda /= double(m) * double(m);
  return out;
}

CosineStats cosine_similarity(const std::vector<Vector>& deltas) {
  CosineStats out;
  const int m = static_cast<int>(deltas.size());
  if (m < 2) {
    out.mean = 1.0;
    return out;
  }
  std::vector<double> cosines;
  cosines.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      if (deltas[a].size() != deltas[b].size()) {
        throw std::invalid_argument("deltas must share a dimension");
      }
      const double na = deltas[a].norm();
      const double nb = deltas[b].norm();
      if (na > 0.0 && nb > 0.0) {
        cosines.push_back(deltas[a].dot(deltas[b]) / (na * nb));
      } else {
        cosines.push_back(0.0);
        ++out.zero_pairs;
      }
    }
  }
  double sum = 0.0;
  for (double c : cosines) {
    sum += c;
  }
  out.mean = sum / double(cosines.size());
  double var = 0.0;
  for (double c : cosines) {
    var += (c - out.mean) * (c - out.mean);
  }
  out.stddev = std::sqrt(var / double(cosines.size()));
  return out;
}

GradientStats gradient_stats(const RunResult& result) {
  if (result.steps.empty()) {
    throw std::invalid_argument(
        "gradient_stats needs a run recorded at step level");
  }
  double g1 = 0.0;
  double g2 = 0.0;
  for (const StepRecord& s : result.steps) {
    g1 += s.g_avg_sq;
    g2 += s.g_local_sq_mean;
  }
  const double n = double(result.steps.size());
  return {std::sqrt(g1 / n), std::sqrt(g2 / n)};
}

}  // namespace localopt
