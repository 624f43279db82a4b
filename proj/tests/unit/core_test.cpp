#include <cmath>
#include <numbers>
#include <vector>

#include "gtest/gtest.h"
#include "pem/core/grid.hpp"
#include "pem/core/injector.hpp"
#include "pem/core/model.hpp"

namespace pem {
namespace {

constexpr double kPi = std::numbers::pi;

PemModel model_with(const TransitionMatrix& tm, const ErrorDistribution& err = {}) {
  return PemModel::uniform(GridSpec{}, {tm, err}, "test");
}

TEST(WrapAngle, MapsIntoHalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_angle(0.0), 0.0);
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(3.0 * kPi / 2.0), -kPi / 2.0, 1e-15);
  EXPECT_NEAR(wrap_angle(-5.0 * kPi / 2.0), -kPi / 2.0, 1e-15);
  for (double a = -20.0; a < 20.0; a += 0.0137) {
    const double w = wrap_angle(a);
    EXPECT_GT(w, -kPi);
    EXPECT_LE(w, kPi);
    EXPECT_NEAR(std::cos(w), std::cos(a), 1e-12);
    EXPECT_NEAR(std::sin(w), std::sin(a), 1e-12);
  }
}

TEST(EgoFrame, BearingIsCounterclockwiseFromHeading) {
  EXPECT_NEAR(to_polar({0.0, 10.0}).theta, 0.0, 1e-15);
  EXPECT_NEAR(to_polar({-5.0, 0.0}).theta, kPi / 2.0, 1e-15);
  EXPECT_NEAR(to_polar({5.0, 0.0}).theta, -kPi / 2.0, 1e-15);
  EXPECT_NEAR(to_polar({0.0, -3.0}).theta, kPi, 1e-15);
  const EgoPoint p{3.5, -7.25};
  const EgoPoint back = to_cartesian(to_polar(p));
  EXPECT_NEAR(back.x, p.x, 1e-12);
  EXPECT_NEAR(back.y, p.y, 1e-12);
}

TEST(Occlusion, BinsVisibleFraction) {
  EXPECT_EQ(occlusion_from_fraction(0.0), OcclusionLevel::vis0);
  EXPECT_EQ(occlusion_from_fraction(0.3999), OcclusionLevel::vis0);
  EXPECT_EQ(occlusion_from_fraction(0.4), OcclusionLevel::vis1);
  EXPECT_EQ(occlusion_from_fraction(0.5), OcclusionLevel::vis1);
  EXPECT_EQ(occlusion_from_fraction(0.6), OcclusionLevel::vis2);
  EXPECT_EQ(occlusion_from_fraction(0.8), OcclusionLevel::vis3);
  EXPECT_EQ(occlusion_from_fraction(1.0), OcclusionLevel::vis3);
}

TEST(Grid, DefaultShape) {
  const GridSpec grid;
  EXPECT_EQ(grid.n_sectors(), 12);
  EXPECT_EQ(grid.n_rings(), 10);
  EXPECT_EQ(grid.n_conditions(), 480);
  EXPECT_NO_THROW(validate(grid));
}

TEST(Grid, RejectsNonTilingSpecs) {
  EXPECT_THROW(validate(GridSpec{7.0, 10.0, 100.0}), GridError);
  EXPECT_THROW(validate(GridSpec{30.0, 10.0, 95.0}), GridError);
  EXPECT_THROW(validate(GridSpec{30.0, 0.0, 100.0}), GridError);
}

TEST(Grid, SectorsAreCenteredOnHeading) {
  const GridSpec grid;
  const double w = grid.sector_width_rad();
  EXPECT_EQ(grid.sector_of(0.0), 0);
  EXPECT_EQ(grid.sector_of(0.1), 0);
  EXPECT_EQ(grid.sector_of(-0.1), 0);
  EXPECT_EQ(grid.sector_of(0.5 * w + 1e-9), 1);
  EXPECT_EQ(grid.sector_of(-0.5 * w - 1e-9), 11);
  EXPECT_EQ(grid.sector_of(kPi), 6);
  EXPECT_EQ(grid.sector_of(-kPi + 1e-12), 6);
}

TEST(ConditionOf, Examples) {
  const GridSpec grid;
  const auto c = condition_of({15.0, 0.1}, OcclusionLevel::vis3, grid);
  ASSERT_TRUE(c.has_value());
  const ConditionCell cell = unindex(*c, grid);
  EXPECT_EQ(cell.occlusion, OcclusionLevel::vis3);
  EXPECT_EQ(cell.ring, 1);
  EXPECT_EQ(cell.sector, grid.sector_of(0.1));
  EXPECT_EQ(c->index, 3 * 120 + 1 * 12 + 0);

  const auto origin = condition_of({0.0, 0.0}, OcclusionLevel::vis0, grid);
  ASSERT_TRUE(origin.has_value());
  EXPECT_EQ(unindex(*origin, grid), (ConditionCell{OcclusionLevel::vis0, 0, 0}));

  EXPECT_FALSE(condition_of({100.0, 0.0}, OcclusionLevel::vis3, grid).has_value());
  EXPECT_TRUE(condition_of({99.999, 0.0}, OcclusionLevel::vis3, grid).has_value());
}

TEST(ConditionOf, BijectionWithCells) {
  for (const GridSpec grid : {GridSpec{}, GridSpec{90.0, 20.0, 40.0}, GridSpec{45.0, 5.0, 15.0}}) {
    std::vector<bool> hit(static_cast<std::size_t>(grid.n_conditions()), false);
    for (int occ = 0; occ < kOcclusionLevels; ++occ) {
      for (int ring = 0; ring < grid.n_rings(); ++ring) {
        for (int sector = 0; sector < grid.n_sectors(); ++sector) {
          const ConditionCell cell{static_cast<OcclusionLevel>(occ), ring, sector};
          const Condition idx = index_of(cell, grid);
          EXPECT_EQ(unindex(idx, grid), cell);
          ASSERT_GE(idx.index, 0);
          ASSERT_LT(idx.index, grid.n_conditions());
          EXPECT_FALSE(hit[static_cast<std::size_t>(idx.index)]);
          hit[static_cast<std::size_t>(idx.index)] = true;

          // a point in the middle of the cell resolves back to the same index
          const PolarCoord mid{(ring + 0.5) * grid.ring_depth_m, grid.sector_center(sector)};
          const auto resolved = condition_of(mid, cell.occlusion, grid);
          ASSERT_TRUE(resolved.has_value());
          EXPECT_EQ(*resolved, idx);
        }
      }
    }
  }
}

TEST(StationaryDetection, Formula) {
  EXPECT_DOUBLE_EQ(stationary_detection({1.0, 1.0}), 1.0);
  EXPECT_DOUBLE_EQ(stationary_detection({0.25, 0.75}), 0.5);
  EXPECT_DOUBLE_EQ(stationary_detection({0.0, 0.0}), 0.0);
  EXPECT_DOUBLE_EQ(stationary_detection({0.0, 1.0}), 0.0);
  EXPECT_NEAR(stationary_detection({0.3, 0.9}), 0.75, 1e-15);
}

TEST(StepDetection, AbsorbingAndBlindChains) {
  Rng rng(1);
  const PemModel absorbing = model_with({0.0, 1.0});
  const PemModel blind = model_with({0.0, 0.0});
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(step_detection(absorbing, {5}, 1, rng), 1);
    EXPECT_EQ(step_detection(blind, {5}, 0, rng), 0);
  }
}

TEST(StepDetection, FrequencyFromUndetected) {
  Rng rng(7);
  const PemModel model = model_with({0.3, 0.9});
  int hits = 0;
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) hits += step_detection(model, {0}, 0, rng);
  EXPECT_NEAR(static_cast<double>(hits) / kDraws, 0.3, 0.01);
}

TEST(StepDetection, ChainConvergesToStationaryFraction) {
  const std::vector<TransitionMatrix> grid = {{0.1, 0.9}, {0.5, 0.5}, {0.8, 0.2}, {0.05, 0.6}};
  std::uint64_t seed = 11;
  for (const auto& tm : grid) {
    Rng rng(seed++);
    const PemModel model = model_with(tm);
    int v = 0;
    long detected = 0;
    constexpr int kSteps = 100000;
    for (int i = 0; i < kSteps; ++i) {
      v = step_detection(model, {3}, v, rng);
      detected += v;
    }
    EXPECT_NEAR(static_cast<double>(detected) / kSteps, stationary_detection(tm), 0.02)
        << "a01=" << tm.a01 << " a11=" << tm.a11;
  }
}

TEST(SampleError, DegenerateIsIdentity) {
  Rng rng(3);
  const PemModel model = model_with({1.0, 1.0});
  for (int i = 0; i < 100; ++i) {
    const ErrorSample e = sample_error(model, {0}, rng);
    EXPECT_NEAR(e.eps_r, 1.0, 1e-9);
    EXPECT_NEAR(e.eps_theta, 0.0, 1e-9);
  }
}

struct Moments {
  double mean_r = 0, mean_t = 0, sd_r = 0, sd_t = 0, corr = 0;
};

Moments moments_of(const PemModel& model, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ErrorSample> xs;
  xs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) xs.push_back(sample_error(model, {0}, rng));
  Moments m;
  for (const auto& x : xs) {
    m.mean_r += x.eps_r;
    m.mean_t += x.eps_theta;
  }
  m.mean_r /= n;
  m.mean_t /= n;
  double srr = 0, stt = 0, srt = 0;
  for (const auto& x : xs) {
    srr += (x.eps_r - m.mean_r) * (x.eps_r - m.mean_r);
    stt += (x.eps_theta - m.mean_t) * (x.eps_theta - m.mean_t);
    srt += (x.eps_r - m.mean_r) * (x.eps_theta - m.mean_t);
  }
  m.sd_r = std::sqrt(srr / (n - 1));
  m.sd_t = std::sqrt(stt / (n - 1));
  m.corr = srt / std::sqrt(srr * stt);
  return m;
}

TEST(SampleError, MeansMatch) {
  const PemModel model = model_with({1.0, 1.0}, {1.1, 0.05, 0.2, 0.1, 0.0});
  const Moments m = moments_of(model, 100000, 21);
  EXPECT_NEAR(m.mean_r, 1.1, 0.005);
  EXPECT_NEAR(m.mean_t, 0.05, 0.005);
  EXPECT_NEAR(m.sd_r, 0.2, 0.004);
  EXPECT_NEAR(m.sd_t, 0.1, 0.002);
}

TEST(SampleError, CorrelationMatches) {
  for (double rho : {0.8, -0.5, 0.0}) {
    const PemModel model = model_with({1.0, 1.0}, {1.0, 0.0, 0.05, 0.02, rho});
    const Moments m = moments_of(model, 100000, 99);
    EXPECT_NEAR(m.corr, rho, 0.02) << "rho=" << rho;
  }
}

std::vector<GroundTruthObject> ring_of_objects(int n, double r0) {
  std::vector<GroundTruthObject> world;
  for (int i = 0; i < n; ++i) {
    world.push_back({100 + i, {r0 + 7.0 * i, wrap_angle(0.9 * i)}, static_cast<OcclusionLevel>(i % 4)});
  }
  return world;
}

TEST(Apply, EmptyWorld) {
  Rng rng(1);
  const PemModel model = model_with({0.5, 0.5});
  const auto out = apply(model, {}, TrackState{{1, 1}, {2, 0}}, rng);
  EXPECT_TRUE(out.objects.empty());
  EXPECT_TRUE(out.tracks.empty());
}

TEST(Apply, PerfectModelIsIdentity) {
  Rng rng(5);
  const PemModel model = PemModel::uniform(GridSpec{}, perfect_params());
  const auto world = ring_of_objects(12, 1.0);
  TrackState tracks;
  for (int frame = 0; frame < 5; ++frame) {
    auto out = apply(model, world, tracks, rng);
    ASSERT_EQ(out.objects.size(), world.size());
    for (std::size_t i = 0; i < world.size(); ++i) {
      EXPECT_EQ(out.objects[i].source_id, world[i].id);
      EXPECT_NEAR(out.objects[i].position.r, world[i].position.r, 1e-9);
      EXPECT_NEAR(wrap_angle(out.objects[i].position.theta - world[i].position.theta), 0.0, 1e-9);
    }
    tracks = std::move(out.tracks);
  }
}

TEST(Apply, NewIdsStartUndetected) {
  // a01 = 0: a fresh id can never be detected, even if a11 = 1
  Rng rng(2);
  const PemModel model = model_with({0.0, 1.0});
  const auto world = ring_of_objects(4, 5.0);
  const auto out = apply(model, world, {}, rng);
  EXPECT_TRUE(out.objects.empty());
  for (const auto& obj : world) EXPECT_EQ(out.tracks.at(obj.id), 0);

  // an id that carries v = 1 stays detected
  TrackState carried = out.tracks;
  carried[world[0].id] = 1;
  const auto next = apply(model, world, carried, rng);
  ASSERT_EQ(next.objects.size(), 1u);
  EXPECT_EQ(next.objects[0].source_id, world[0].id);
}

TEST(Apply, OutOfRangeNeverDetected) {
  Rng rng(4);
  const PemModel model = PemModel::uniform(GridSpec{}, perfect_params());
  const std::vector<GroundTruthObject> world = {{1, {100.0, 0.0}, OcclusionLevel::vis3},
                                                {2, {250.0, 1.0}, OcclusionLevel::vis3},
                                                {3, {99.0, 0.0}, OcclusionLevel::vis3}};
  const auto out = apply(model, world, TrackState{{1, 1}, {2, 1}}, rng);
  ASSERT_EQ(out.objects.size(), 1u);
  EXPECT_EQ(out.objects[0].source_id, 3);
  EXPECT_EQ(out.tracks.at(1), 0);
  EXPECT_EQ(out.tracks.at(2), 0);
}

TEST(Apply, RejectsDuplicateIds) {
  Rng rng(4);
  const PemModel model = model_with({0.5, 0.5});
  const std::vector<GroundTruthObject> world = {{1, {10.0, 0.0}, OcclusionLevel::vis3},
                                                {1, {20.0, 0.0}, OcclusionLevel::vis3}};
  EXPECT_THROW(apply(model, world, {}, rng), DuplicateIdError);
}

TEST(Apply, LongRunDetectionFrequency) {
  Rng rng(8);
  const PemModel model = model_with({0.5, 0.5});
  const std::vector<GroundTruthObject> world = {{9, {30.0, 0.3}, OcclusionLevel::vis2}};
  TrackState tracks;
  int detected = 0;
  constexpr int kFrames = 10000;
  for (int t = 0; t < kFrames; ++t) {
    auto out = apply(model, world, tracks, rng);
    detected += static_cast<int>(out.objects.size());
    tracks = std::move(out.tracks);
  }
  EXPECT_NEAR(static_cast<double>(detected) / kFrames, 0.5, 0.02);
}

TEST(Apply, RadialClampAndAngularClosure) {
  Rng rng(12);
  // huge spread forces negative radial ratios and bearings far outside (-pi, pi]
  const PemModel model = model_with({1.0, 1.0}, {0.5, 0.0, 2.0, 10.0, 0.3});
  const auto world = ring_of_objects(10, 2.0);
  TrackState tracks;
  bool clamped = false;
  for (int t = 0; t < 200; ++t) {
    auto out = apply(model, world, tracks, rng);
    for (const auto& p : out.objects) {
      EXPECT_GE(p.position.r, kMinPerceivedRange);
      EXPECT_GT(p.position.theta, -kPi);
      EXPECT_LE(p.position.theta, kPi);
      clamped = clamped || p.position.r == kMinPerceivedRange;
    }
    tracks = std::move(out.tracks);
  }
  EXPECT_TRUE(clamped);
}

// Property: over random worlds and models, no false positives, no emission
// without detection, tracks equal the frame ids, and streams are reproducible.
TEST(ApplyProperty, RandomWorlds) {
  Rng gen(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const TransitionMatrix tm{gen.uniform(), gen.uniform()};
    const PemModel model = model_with(tm, {0.9 + 0.2 * gen.uniform(), 0.1 * (gen.uniform() - 0.5),
                                           0.05, 0.02, 0.5 * (gen.uniform() - 0.5)});
    const std::uint64_t seed = gen.next_u64();
    Rng a(seed), b(seed);
    TrackState ta, tb;
    for (int frame = 0; frame < 6; ++frame) {
      std::vector<GroundTruthObject> world;
      const int n = static_cast<int>(gen.uniform() * 8);
      for (int i = 0; i < n; ++i) {
        // ids drawn from a small pool so objects leave and re-enter
        const ObjectId id = static_cast<ObjectId>(frame % 2 + 2 * i);
        world.push_back({id, {130.0 * gen.uniform(), wrap_angle(7.0 * gen.uniform())},
                         static_cast<OcclusionLevel>(static_cast<int>(gen.uniform() * 4))});
      }
      const auto oa = apply(model, world, ta, a);
      const auto ob = apply(model, world, tb, b);
      ASSERT_EQ(oa.objects, ob.objects);
      ASSERT_EQ(oa.tracks, ob.tracks);
      ASSERT_LE(oa.objects.size(), world.size());
      ASSERT_EQ(oa.tracks.size(), world.size());
      for (const auto& obj : world) ASSERT_TRUE(oa.tracks.contains(obj.id));
      for (const auto& p : oa.objects) {
        ASSERT_EQ(oa.tracks.at(p.source_id), 1);
        ASSERT_GT(p.position.r, 0.0);
        ASSERT_GT(p.position.theta, -kPi);
        ASSERT_LE(p.position.theta, kPi);
      }
      ta = oa.tracks;
      tb = ob.tracks;
    }
  }
}

TEST(ModelValidation, RejectsBadParameters) {
  ConditionParams p = perfect_params();
  p.transition.a11 = 1.2;
  try {
    validate(p);
    FAIL() << "expected ModelError";
  } catch (const ModelError& e) {
    EXPECT_EQ(e.field(), "a11");
    EXPECT_STREQ(e.what(), "a11 out of [0,1]");
  }
  p = perfect_params();
  p.error.sigma_r = 0.0;
  EXPECT_THROW(validate(p), ModelError);
  p = perfect_params();
  p.error.rho = 1.0;
  EXPECT_THROW(validate(p), ModelError);
}

}  // namespace
}  // namespace pem
