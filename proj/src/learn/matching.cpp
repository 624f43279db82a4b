#include "pem/learn/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pem::learn {

double FrameMatch::total_cost() const {
  double sum = 0.0;
  for (const auto& a : assignments) sum += a.distance;
  return sum;
}

double center_distance(PolarCoord a, PolarCoord b) {
  const EgoPoint pa = to_cartesian(a);
  const EgoPoint pb = to_cartesian(b);
  return std::hypot(pa.x - pb.x, pa.y - pb.y);
}

std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t n) {
  // Shortest augmenting path with row/column potentials, 1-based internally.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= n; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

FrameMatch match_frame(std::span<const GroundTruthObject> gt, std::span<const PolarCoord> detections,
                       double gate_m) {
  std::vector<std::size_t> rows(gt.size());
  std::iota(rows.begin(), rows.end(), 0);
  std::stable_sort(rows.begin(), rows.end(),
                   [&](std::size_t a, std::size_t b) { return gt[a].id < gt[b].id; });

  const std::size_t g = gt.size();
  const std::size_t d = detections.size();
  const std::size_t n = std::max(g, d);

  FrameMatch match;
  if (g == 0 || d == 0) {
    for (std::size_t r : rows) match.unmatched_gt.push_back(gt[r].id);
    for (std::size_t j = 0; j < d; ++j) match.unmatched_detections.push_back(j);
    return match;
  }

  // Any pair outside the gate (or padding) costs more than every feasible
  // in-gate matching combined, so cardinality is maximized first.
  const double forbidden = gate_m * static_cast<double>(std::min(g, d) + 1) + 1.0;
  std::vector<double> cost(n * n, forbidden);
  std::vector<double> dist(g * d, 0.0);
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double dij = center_distance(gt[rows[i]].position, detections[j]);
      dist[i * d + j] = dij;
      if (dij <= gate_m) cost[i * n + j] = dij;
    }
  }

  const std::vector<std::size_t> assigned = solve_assignment(cost, n);
  std::vector<bool> det_used(d, false);
  for (std::size_t i = 0; i < g; ++i) {
    const std::size_t j = assigned[i];
    if (j < d && dist[i * d + j] <= gate_m) {
      match.assignments.push_back({gt[rows[i]].id, j, dist[i * d + j]});
      det_used[j] = true;
    } else {
      match.unmatched_gt.push_back(gt[rows[i]].id);
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    if (!det_used[j]) match.unmatched_detections.push_back(j);
  }
  return match;
}

}  // namespace pem::learn
