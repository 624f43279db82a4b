#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "pem/learn/matching.hpp"

namespace pem::learn {
namespace {

GroundTruthObject gt_at(ObjectId id, double x, double y) { return {id, to_polar({x, y}), OcclusionLevel::vis0}; }
PolarCoord det_at(double x, double y) { return to_polar({x, y}); }

struct Best {
  std::size_t pairs = 0;
  double cost = std::numeric_limits<double>::infinity();
};

// Exhaustive search over every partial one-to-one gated assignment; rows are
// visited in ascending id order so the cost is summed the same way.
void search(const std::vector<std::vector<double>>& dist, double gate, std::size_t row, std::vector<bool>& used,
            std::size_t pairs, double cost, Best& best) {
  if (row == dist.size()) {
    if (pairs > best.pairs || (pairs == best.pairs && cost < best.cost)) best = {pairs, cost};
    return;
  }
  search(dist, gate, row + 1, used, pairs, cost, best);
  for (std::size_t j = 0; j < used.size(); ++j) {
    if (used[j] || dist[row][j] > gate) continue;
    used[j] = true;
    search(dist, gate, row + 1, used, pairs + 1, cost + dist[row][j], best);
    used[j] = false;
  }
}

Best brute_force(std::vector<GroundTruthObject> gt, const std::vector<PolarCoord>& det, double gate) {
  std::sort(gt.begin(), gt.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::vector<std::vector<double>> dist(gt.size(), std::vector<double>(det.size()));
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (std::size_t j = 0; j < det.size(); ++j) dist[i][j] = center_distance(gt[i].position, det[j]);
  }
  Best best{0, 0.0};
  std::vector<bool> used(det.size(), false);
  if (!gt.empty()) {
    best = {};
    search(dist, gate, 0, used, 0, 0.0, best);
  }
  return best;
}

TEST(MatchFrame, PairInsideGateMatches) {
  const std::vector<GroundTruthObject> gt{gt_at(1, 0, 10)};
  const std::vector<PolarCoord> det{det_at(0, 14)};
  const FrameMatch m = match_frame(gt, det);
  ASSERT_EQ(m.assignments.size(), 1u);
  EXPECT_EQ(m.assignments[0].gt_id, 1);
  EXPECT_EQ(m.assignments[0].detection, 0u);
  EXPECT_NEAR(m.assignments[0].distance, 4.0, 1e-12);
}

TEST(MatchFrame, PairOutsideGateStaysUnmatched) {
  const std::vector<GroundTruthObject> gt{gt_at(1, 0, 10)};
  const std::vector<PolarCoord> det{det_at(0, 25)};
  const FrameMatch m = match_frame(gt, det);
  EXPECT_TRUE(m.assignments.empty());
  EXPECT_EQ(m.unmatched_gt, std::vector<ObjectId>{1});
  EXPECT_EQ(m.unmatched_detections, std::vector<std::size_t>{0});
}

TEST(MatchFrame, OptimalBeatsGreedy) {
  const std::vector<GroundTruthObject> gt{gt_at(1, 0, 0), gt_at(2, 6, 0)};
  const std::vector<PolarCoord> det{det_at(5, 0), det_at(7, 0)};
  const FrameMatch m = match_frame(gt, det);
  ASSERT_EQ(m.assignments.size(), 2u);
  EXPECT_EQ(m.assignments[0].gt_id, 1);
  EXPECT_EQ(m.assignments[0].detection, 0u);
  EXPECT_EQ(m.assignments[1].gt_id, 2);
  EXPECT_EQ(m.assignments[1].detection, 1u);
  EXPECT_NEAR(m.total_cost(), 6.0, 1e-12);
}

TEST(MatchFrame, EmptySides) {
  const std::vector<GroundTruthObject> gt{gt_at(4, 1, 1), gt_at(2, 3, 3)};
  const FrameMatch none = match_frame(gt, std::vector<PolarCoord>{});
  EXPECT_EQ(none.unmatched_gt, (std::vector<ObjectId>{2, 4}));
  const FrameMatch no_gt = match_frame(std::vector<GroundTruthObject>{}, std::vector<PolarCoord>{det_at(1, 1)});
  EXPECT_EQ(no_gt.unmatched_detections, std::vector<std::size_t>{0});
}

TEST(MatchFrame, TiesGoToLowestIdThenLowestIndex) {
  // two detections at the same spot, one object: the lower index wins
  const std::vector<GroundTruthObject> one{gt_at(7, 0, 10)};
  const std::vector<PolarCoord> twin{det_at(0, 12), det_at(0, 12)};
  EXPECT_EQ(match_frame(one, twin).assignments[0].detection, 0u);
  // two objects at the same spot, one detection: the lower id wins
  const std::vector<GroundTruthObject> pair{gt_at(9, 0, 10), gt_at(3, 0, 10)};
  const std::vector<PolarCoord> single{det_at(0, 12)};
  EXPECT_EQ(match_frame(pair, single).assignments[0].gt_id, 3);
}

TEST(MatchFrame, MatchesExhaustiveSearchOnRandomFrames) {
  std::mt19937_64 gen(20240611);
  std::uniform_int_distribution<int> count(0, 5);
  std::uniform_real_distribution<double> coord(-12.0, 12.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int ng = count(gen), nd = count(gen);
    std::vector<ObjectId> ids(static_cast<std::size_t>(ng));
    std::iota(ids.begin(), ids.end(), 1);
    std::shuffle(ids.begin(), ids.end(), gen);
    std::vector<GroundTruthObject> gt;
    for (ObjectId id : ids) gt.push_back(gt_at(id * 3, coord(gen), coord(gen) + 20.0));
    std::vector<PolarCoord> det;
    for (int j = 0; j < nd; ++j) det.push_back(det_at(coord(gen), coord(gen) + 20.0));

    const FrameMatch m = match_frame(gt, det);
    const Best best = brute_force(gt, det, kDefaultGateM);
    ASSERT_EQ(m.assignments.size(), best.pairs) << "trial " << trial;
    ASSERT_EQ(m.total_cost(), best.cost) << "trial " << trial;

    std::vector<bool> gt_seen(100, false), det_seen(det.size(), false);
    for (const auto& a : m.assignments) {
      EXPECT_LE(a.distance, kDefaultGateM);
      EXPECT_FALSE(gt_seen[static_cast<std::size_t>(a.gt_id)]);
      EXPECT_FALSE(det_seen[a.detection]);
      gt_seen[static_cast<std::size_t>(a.gt_id)] = true;
      det_seen[a.detection] = true;
    }
    EXPECT_EQ(m.assignments.size() + m.unmatched_gt.size(), gt.size());
    EXPECT_EQ(m.assignments.size() + m.unmatched_detections.size(), det.size());
    EXPECT_TRUE(std::is_sorted(m.assignments.begin(), m.assignments.end(),
                               [](const auto& a, const auto& b) { return a.gt_id < b.gt_id; }));
  }
}

TEST(SolveAssignment, SmallSquareMatrix) {
  const std::vector<double> cost{4, 1, 3, 2, 0, 5, 3, 2, 2};
  const auto cols = solve_assignment(cost, 3);
  EXPECT_EQ(cols, (std::vector<std::size_t>{1, 0, 2}));
}

}  // namespace
}  // namespace pem::learn
