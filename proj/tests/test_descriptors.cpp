#include <gtest/gtest.h>

#include <fstream>
#include <numbers>
#include <set>

#include <lmamotion/descriptors.hpp>
#include <lmamotion/synth.hpp>

#include "oracles.hpp"

using namespace lma;
using std::numbers::pi;

namespace {

constexpr std::size_t kRightHand = index_of(Joint::right_hand);

// Every joint at its own fixed point; `mover` (if any) follows `path`.
template <typename PathFn>
std::shared_ptr<const SkeletonSequence> single_mover(std::size_t frames, double fps, std::size_t mover,
                                                     PathFn&& path) {
  std::vector<Vec3> pos;
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t j = 0; j < kJointCount; ++j)
      pos.push_back(j == mover ? path(t) : Vec3{0.1 * static_cast<double>(j), 1.0, 0.0});
  return std::make_shared<const SkeletonSequence>("mover", fps, std::nullopt, std::move(pos));
}

std::shared_ptr<const SkeletonSequence> synth_sequence(Regime r, std::uint64_t seed, double fps = 30.0) {
  RegimeSpec spec;
  spec.regime = r;
  spec.seed = seed;
  spec.fps = fps;
  return std::make_shared<const SkeletonSequence>(generate(spec));
}

std::shared_ptr<const SkeletonSequence> transformed(const SkeletonSequence& s,
                                                    const std::function<Vec3(const Vec3&)>& f) {
  std::vector<Vec3> pos;
  for (const auto& p : s.positions()) pos.push_back(f(p));
  return std::make_shared<const SkeletonSequence>(s.source_id(), s.fps(), s.tier(), std::move(pos));
}

}  // namespace

// ---------------------------------------------------------------------------
// differentiate

TEST(Differentiate, LinearMotion) {
  const auto seq = oracle::uniform_motion(20, 30.0, [](std::size_t t) { return Vec3{double(t), 0, 0}; });
  const auto k = differentiate(seq->clip());
  for (std::size_t t = 0; t < 20; ++t) {
    EXPECT_NEAR(k.v(t, 4).x, 30.0, 1e-9);
    EXPECT_NEAR(norm(k.a(t, 4)), 0.0, 1e-9);
    EXPECT_NEAR(norm(k.jk(t, 4)), 0.0, 1e-9);
  }
}

TEST(Differentiate, Rest) {
  const auto seq = oracle::uniform_motion(6, 30.0, [](std::size_t) { return Vec3{1, 2, 3}; });
  const auto k = differentiate(seq->clip());
  for (std::size_t i = 0; i < k.velocity.size(); ++i) {
    EXPECT_EQ(k.velocity[i], Vec3{});
    EXPECT_EQ(k.acceleration[i], Vec3{});
    EXPECT_EQ(k.jerk[i], Vec3{});
  }
}

TEST(Differentiate, QuadraticMatchesAnalyticSecondDerivative) {
  const double dt = 1.0 / 30.0;
  const auto seq = oracle::uniform_motion(40, 30.0, [&](std::size_t t) {
    const double s = static_cast<double>(t) * dt;
    return Vec3{s * s, 0, 0};
  });
  const auto k = differentiate(seq->clip());
  // d2/ds2 s^2 = 2; interior frames are two steps away from one-sided ends.
  for (std::size_t t = 2; t + 2 < 40; ++t) EXPECT_NEAR(k.a(t, 0).x, 2.0, 1e-9) << t;
  for (std::size_t t = 1; t + 1 < 40; ++t) EXPECT_NEAR(k.v(t, 0).x, 2.0 * static_cast<double>(t) * dt, 1e-12);
}

TEST(Differentiate, TooShortForJerk) {
  const auto seq = oracle::uniform_motion(3, 30.0, [](std::size_t) { return Vec3{}; });
  EXPECT_THROW(differentiate(seq->clip()), Error);
}

// ---------------------------------------------------------------------------
// directness

TEST(Directness, StraightLineIsExactlyOne) {
  std::vector<Vec3> track;
  for (int t = 0; t < 50; ++t) track.push_back({0.03 * t, 1.0, -0.01 * t});
  for (std::size_t t = 0; t < track.size(); ++t) EXPECT_NEAR(directness(track, t, 15), 1.0, 1e-12);
}

TEST(Directness, ClosedLoopIsNearZero) {
  std::vector<Vec3> track;
  for (int t = 0; t <= 30; ++t) track.push_back({0.2 * std::cos(2 * pi * t / 30.0), 0.0, 0.2 * std::sin(2 * pi * t / 30.0)});
  EXPECT_LT(directness(track, 15, 15), 0.05);
}

TEST(Directness, HalfCircleMatchesChordOverArc) {
  std::vector<Vec3> track;
  for (int i = 0; i < 64; ++i) track.push_back({std::cos(pi * i / 63.0), std::sin(pi * i / 63.0), 0});
  const double d = directness(track, 32, 63);
  EXPECT_NEAR(d, 2.0 / pi, 0.01);
  // Exact polygonal value: chord 2 over 63 equal chords of angle pi/63.
  EXPECT_NEAR(d, 2.0 / (63.0 * 2.0 * std::sin(pi / 126.0)), 1e-12);
}

TEST(Directness, StationaryIsDirectAndWindowClamps) {
  std::vector<Vec3> still(10, Vec3{1, 1, 1});
  EXPECT_EQ(directness(still, 0, 15), 1.0);
  // Out-and-back track: clamped window at the start sees only the outbound leg.
  std::vector<Vec3> track;
  for (int t = 0; t < 10; ++t) track.push_back({double(t), 0, 0});
  for (int t = 10; t < 20; ++t) track.push_back({double(19 - t), 0, 0});
  EXPECT_NEAR(directness(track, 0, 5), 1.0, 1e-12);
  EXPECT_LT(directness(track, 9, 9), 0.2);
}

// ---------------------------------------------------------------------------
// effort

TEST(Effort, RestFrame) {
  const auto seq = oracle::uniform_motion(10, 30.0, [](std::size_t) { return Vec3{0, 1, 0}; });
  const auto k = differentiate(seq->clip());
  const auto e = effort_frame(k, seq->clip(), 5);
  EXPECT_EQ(e.space, 1.0);
  EXPECT_EQ(e.time, 0.0);
  EXPECT_EQ(e.weight, 0.0);
  EXPECT_EQ(e.flow, 0.0);
}

TEST(Effort, KineticEnergyOfOneMover) {
  const auto seq = single_mover(10, 30.0, kRightHand, [](std::size_t t) { return Vec3{2.0 * double(t) / 30.0, 0, 0}; });
  const auto k = differentiate(seq->clip());
  EXPECT_NEAR(effort_frame(k, seq->clip(), 5).weight, 2.0, 1e-12);
}

TEST(Effort, SinusoidTimeMatchesAnalyticMeanAcceleration) {
  // x = 0.5 sin(2 pi s): |a| averages (2/pi) * (2 pi)^2 * 0.5 over a period.
  const auto seq = oracle::uniform_motion(90, 30.0, [](std::size_t t) {
    return Vec3{0.5 * std::sin(2 * pi * double(t) / 30.0), 1.0, 0};
  });
  const auto k = differentiate(seq->clip());
  double mean_time = 0.0;
  for (std::size_t t = 30; t < 60; ++t) mean_time += effort_frame(k, seq->clip(), t).time;
  mean_time /= 30.0;
  const double expected = (2.0 / pi) * (2 * pi) * (2 * pi) * 0.5;
  EXPECT_NEAR(mean_time, expected, 0.05 * expected);
}

// ---------------------------------------------------------------------------
// dispersion

TEST(Dispersion, CoincidentJointsAllZero) {
  const auto seq = oracle::uniform_motion(4, 30.0, [](std::size_t) { return Vec3{}; });
  for (double v : dispersion_frame(seq->clip(), 1)) EXPECT_EQ(v, 0.0);
}

TEST(Dispersion, HeadReach) {
  std::vector<Vec3> pos(2 * kJointCount, Vec3{0, 1, 0});
  pos[index_of(Joint::head)] = {0, 1.7, 0};
  const SkeletonSequence seq("h", 30, std::nullopt, pos);
  EXPECT_NEAR(dispersion_frame(seq.clip(), 0)[0], 0.7, 1e-12);
}

TEST(Dispersion, FixturePoseMatchesHandValues) {
  // Nineteen joints sit on the pelvis at (0,1,0); head, hands, feet spread out.
  std::vector<Vec3> pose(kJointCount, Vec3{0, 1, 0});
  pose[index_of(Joint::head)] = {0, 1.7, 0};
  pose[index_of(Joint::left_hand)] = {0.8, 1.5, 0};
  pose[index_of(Joint::right_hand)] = {-0.8, 1.5, 0};
  pose[index_of(Joint::left_foot)] = {0.1, 0, 0.1};
  pose[index_of(Joint::right_foot)] = {-0.1, 0, 0.1};
  std::vector<Vec3> pos = pose;
  pos.insert(pos.end(), pose.begin(), pose.end());
  const SkeletonSequence seq("fixture", 30, std::nullopt, pos);
  const auto d = dispersion_frame(seq.clip(), 0);

  // Centroid: y = (19 + 1.7 + 1.5 + 1.5) / 24, z = 0.2 / 24.
  const double cy = 23.7 / 24.0, cz = 0.2 / 24.0;
  const double r_body = std::sqrt((1 - cy) * (1 - cy) + cz * cz);
  const double r_head = std::sqrt((1.7 - cy) * (1.7 - cy) + cz * cz);
  const double r_hand = std::sqrt(0.64 + (1.5 - cy) * (1.5 - cy) + cz * cz);
  const double r_foot = std::sqrt(0.01 + cy * cy + (0.1 - cz) * (0.1 - cz));
  const double mean = (19 * r_body + r_head + 2 * r_hand + 2 * r_foot) / 24.0;
  const double var = (19 * (r_body - mean) * (r_body - mean) + (r_head - mean) * (r_head - mean) +
                      2 * (r_hand - mean) * (r_hand - mean) + 2 * (r_foot - mean) * (r_foot - mean)) /
                     24.0;
  const std::array<double, 12> expected{0.7,  std::sqrt(0.89), std::sqrt(0.89), std::sqrt(1.02),
                                        std::sqrt(1.02), mean, 1.7, 1.6, std::sqrt(var), 1.6, 0.2, 1.0};
  for (std::size_t i = 0; i < 12; ++i) EXPECT_NEAR(d[i], expected[i], 1e-9) << "D" << i + 1;
}

// ---------------------------------------------------------------------------
// initiation

TEST(Initiation, SingleMover) {
  const auto seq = single_mover(8, 30.0, kRightHand, [](std::size_t t) { return Vec3{0.1 * double(t), 0, 0}; });
  const auto s = initiation_frame(differentiate(seq->clip()), 4);
  const std::array<double, 6> expected{0, 0, 0, 1, 0, 0};
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(s[i], expected[i], 1e-12);
}

TEST(Initiation, EqualSpeedsAreUniform) {
  const auto seq = oracle::uniform_motion(8, 30.0, [](std::size_t t) { return Vec3{0, 0, 0.05 * double(t)}; });
  for (double v : initiation_frame(differentiate(seq->clip()), 3)) EXPECT_NEAR(v, 1.0 / 6.0, 1e-12);
}

TEST(Initiation, NormalizesSpeeds) {
  // Tracked joints 0..2 move at 1, 2, 3 m/s; the rest are still.
  const DescriptorConfig cfg;
  std::vector<Vec3> pos;
  for (std::size_t t = 0; t < 8; ++t)
    for (std::size_t j = 0; j < kJointCount; ++j) {
      double speed = 0.0;
      for (std::size_t i = 0; i < 3; ++i)
        if (cfg.tracked[i].index == j) speed = double(i + 1);
      pos.push_back({speed * double(t) / 30.0, 0, double(j)});
    }
  const SkeletonSequence seq("n", 30, std::nullopt, pos);
  const auto s = initiation_frame(differentiate(seq.clip()), 4);
  const std::array<double, 6> expected{1.0 / 6, 2.0 / 6, 3.0 / 6, 0, 0, 0};
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(s[i], expected[i], 1e-12);
}

TEST(Initiation, RestIsUniform) {
  const auto seq = oracle::uniform_motion(6, 30.0, [](std::size_t) { return Vec3{}; });
  for (double v : initiation_frame(differentiate(seq->clip()), 2)) EXPECT_EQ(v, 1.0 / 6.0);
}

// ---------------------------------------------------------------------------
// trajectory

TEST(Trajectory, StraightLineHasNoCurvature) {
  const auto seq = oracle::uniform_motion(30, 30.0, [](std::size_t t) { return Vec3{0.04 * double(t), 0.9, 0.02 * double(t)}; });
  const auto k = differentiate(seq->clip());
  for (std::size_t t = 1; t + 1 < 30; ++t) EXPECT_NEAR(trajectory_frame(seq->clip(), k, t).curvature, 0.0, 1e-9);
  EXPECT_NEAR(trajectory_frame(seq->clip(), k, 10).displacement, std::sqrt(0.16 + 0.04) * 1.0, 1e-12);
}

TEST(Trajectory, CircleCurvatureIsInverseRadius) {
  const double r = 2.0;
  const auto seq = oracle::uniform_motion(120, 30.0, [&](std::size_t t) {
    const double a = 2 * pi * double(t) / 120.0;
    return Vec3{r * std::cos(a), 0.9, r * std::sin(a)};
  });
  const auto k = differentiate(seq->clip());
  for (std::size_t t = 3; t + 3 < 120; ++t) EXPECT_NEAR(trajectory_frame(seq->clip(), k, t).curvature, 0.5, 0.025);
}

TEST(Trajectory, StationaryPelvis) {
  const auto seq = oracle::uniform_motion(10, 30.0, [](std::size_t) { return Vec3{1, 1, 1}; });
  const auto k = differentiate(seq->clip());
  for (std::size_t t = 0; t < 10; ++t) {
    const auto v = trajectory_frame(seq->clip(), k, t);
    EXPECT_EQ(v.path_increment, 0.0);
    EXPECT_EQ(v.curvature, 0.0);
    EXPECT_EQ(v.displacement, 0.0);
  }
}

TEST(Trajectory, FinalFrameHasNoIncrement) {
  const auto seq = oracle::uniform_motion(10, 30.0, [](std::size_t t) { return Vec3{double(t), 0, 0}; });
  const auto k = differentiate(seq->clip());
  EXPECT_EQ(trajectory_frame(seq->clip(), k, 9).path_increment, 0.0);
  EXPECT_EQ(trajectory_frame(seq->clip(), k, 8).path_increment, 1.0);
}

// ---------------------------------------------------------------------------
// frame matrix and aggregate

TEST(FrameMatrix, ShapeAndNames) {
  const auto seq = synth_sequence(Regime::locomotion, 3);
  const auto m = frame_matrix(slice_fragments(seq).at(0));
  EXPECT_EQ(m.frames, 150u);
  EXPECT_EQ(m.values.size(), 150u * 55u);
  const auto names = frame_feature_names();
  EXPECT_EQ(names.size(), 55u);
  EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), 55u);
  EXPECT_EQ(names[kEffortOffset + 1], "effort.space");
  EXPECT_EQ(names[kKinematicsOffset + 4], "kinematics.pelvis.directness");
  EXPECT_EQ(names[kTrajectoryOffset + 2], "trajectory.displacement");
  const auto full = fragment_feature_names();
  EXPECT_EQ(full.size(), 110u);
  EXPECT_EQ(full[0], names[0] + ".mean");
  EXPECT_EQ(full[55], names[0] + ".std");
}

TEST(FrameMatrix, RestFragment) {
  const auto seq = oracle::uniform_motion(90, 30.0, [](std::size_t) { return Vec3{0, 1, 0}; });
  const auto m = frame_matrix(Fragment(seq, 0, 90));
  for (std::size_t t = 0; t < m.frames; ++t) {
    EXPECT_EQ(m(t, kEffortOffset + 0), 0.0);
    EXPECT_EQ(m(t, kEffortOffset + 2), 0.0);
    EXPECT_EQ(m(t, kEffortOffset + 3), 0.0);
    for (std::size_t i = 0; i < kTrackedJointCount; ++i)
      EXPECT_EQ(m(t, kKinematicsOffset + i * kPerJointKinematicsCount + 4), 1.0);
  }
}

TEST(FrameMatrix, EqualsConcatenationOfFamilies) {
  const auto seq = synth_sequence(Regime::staccato, 5);
  const auto clip = slice_fragments(seq).at(0).clip();
  const auto m = frame_matrix(clip);
  const auto k = differentiate(clip);
  const DescriptorConfig cfg;
  for (std::size_t t = 0; t < m.frames; t += 7) {
    std::vector<double> row;
    for (double v : dispersion_frame(clip, t)) row.push_back(v);
    const auto e = effort_frame(k, clip, t);
    row.insert(row.end(), {e.flow, e.space, e.time, e.weight});
    for (const auto& j : cfg.tracked) {
      const Vec3& v = k.v(t, j.index);
      row.insert(row.end(), {norm(v), norm(k.a(t, j.index)), norm(k.jk(t, j.index)), 0.5 * dot(v, v),
                             directness(joint_track(clip, j.index), t, cfg.directness_half_window)});
    }
    for (double v : initiation_frame(k, t)) row.push_back(v);
    const auto tr = trajectory_frame(clip, k, t);
    row.insert(row.end(), {tr.path_increment, tr.curvature, tr.displacement});
    ASSERT_EQ(row.size(), 55u);
    for (std::size_t c = 0; c < 55; ++c) EXPECT_NEAR(m(t, c), row[c], 1e-12 * (1 + std::abs(row[c]))) << t << "," << c;
  }
}

TEST(Aggregate, ConstantColumnsHaveZeroStd) {
  FrameFeatureMatrix m{5, std::vector<double>(5 * 55, 3.25)};
  const auto v = aggregate(m);
  for (std::size_t c = 0; c < 55; ++c) {
    EXPECT_EQ(v[c], 3.25);
    EXPECT_EQ(v[55 + c], 0.0);
  }
}

TEST(Aggregate, TwoPointColumn) {
  FrameFeatureMatrix m{2, std::vector<double>(2 * 55, 0.0)};
  m.values[0] = 1.0;
  m.values[55] = 3.0;
  const auto v = aggregate(m);
  EXPECT_DOUBLE_EQ(v[0], 2.0);
  EXPECT_DOUBLE_EQ(v[55], 1.0);
}

TEST(Aggregate, MatchesTwoPassStatistics) {
  Rng rng(5);
  FrameFeatureMatrix m{100, {}};
  for (std::size_t i = 0; i < 100 * 55; ++i) m.values.push_back(rng.uniform(-5, 50) * (1 + i % 7));
  const auto v = aggregate(m);
  const auto [mean, sd] = oracle::two_pass_stats(m.values, 100, 55);
  for (std::size_t c = 0; c < 55; ++c) {
    EXPECT_NEAR(v[c], mean[c], 1e-9 * std::abs(mean[c]));
    EXPECT_NEAR(v[55 + c], sd[c], 1e-9 * sd[c]);
  }
}

TEST(Aggregate, EmptyMatrixRejected) { EXPECT_THROW(aggregate(FrameFeatureMatrix{}), Error); }

// ---------------------------------------------------------------------------
// properties

class DescriptorProperties : public ::testing::TestWithParam<int> {};

TEST_P(DescriptorProperties, HorizontalTranslationInvariance) {
  const auto seq = synth_sequence(static_cast<Regime>(GetParam()), 20 + GetParam());
  const auto moved = transformed(*seq, [](const Vec3& p) { return p + Vec3{13.7, 0, -8.25}; });
  const auto a = frame_matrix(Fragment(seq, 0, 150));
  const auto b = frame_matrix(Fragment(moved, 0, 150));
  for (std::size_t i = 0; i < a.values.size(); ++i) ASSERT_NEAR(a.values[i], b.values[i], 1e-9) << i % 55;
}

TEST_P(DescriptorProperties, VerticalTranslationOnlyMovesPelvisHeight) {
  const auto seq = synth_sequence(static_cast<Regime>(GetParam()), 30 + GetParam());
  const double dy = 0.37;
  const auto moved = transformed(*seq, [&](const Vec3& p) { return p + Vec3{0, dy, 0}; });
  const auto a = frame_matrix(Fragment(seq, 0, 150));
  const auto b = frame_matrix(Fragment(moved, 0, 150));
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double shift = i % 55 == kDispersionOffset + 11 ? dy : 0.0;
    ASSERT_NEAR(b.values[i] - a.values[i], shift, 1e-9) << i % 55;
  }
}

TEST_P(DescriptorProperties, VerticalAxisRotationInvariance) {
  const auto seq = synth_sequence(static_cast<Regime>(GetParam()), 40 + GetParam());
  Vec3 c;
  for (std::size_t t = 0; t < seq->frame_count(); ++t) c += seq->joint(t, 0);
  c *= 1.0 / static_cast<double>(seq->frame_count());
  const double th = 1.234;
  const auto rotated = transformed(*seq, [&](const Vec3& p) {
    const Vec3 d = p - c;
    return c + Vec3{std::cos(th) * d.x - std::sin(th) * d.z, d.y, std::sin(th) * d.x + std::cos(th) * d.z};
  });
  const auto a = frame_matrix(Fragment(seq, 0, 150));
  const auto b = frame_matrix(Fragment(rotated, 0, 150));
  for (std::size_t i = 0; i < a.values.size(); ++i) ASSERT_NEAR(a.values[i], b.values[i], 1e-6) << i % 55;
}

TEST_P(DescriptorProperties, RangesAndInitiationSum) {
  const auto seq = synth_sequence(static_cast<Regime>(GetParam()), 50 + GetParam());
  const auto m = frame_matrix(Fragment(seq, 0, 150));
  for (std::size_t t = 0; t < m.frames; ++t) {
    double sum = 0.0;
    for (std::size_t i = 0; i < kTrackedJointCount; ++i) {
      const double d = m(t, kKinematicsOffset + i * kPerJointKinematicsCount + 4);
      EXPECT_GT(d, 0.0);
      EXPECT_LE(d, 1.0);
      EXPECT_GE(m(t, kKinematicsOffset + i * kPerJointKinematicsCount + 3), 0.0);
      EXPECT_GE(m(t, kInitiationOffset + i), 0.0);
      sum += m(t, kInitiationOffset + i);
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_GE(m(t, kTrajectoryOffset), 0.0);
    EXPECT_LE(m(t, kTrajectoryOffset + 1), kCurvatureCap);
  }
}

TEST_P(DescriptorProperties, TimeReversalPreservesPathLength) {
  const auto seq = synth_sequence(static_cast<Regime>(GetParam()), 60 + GetParam());
  std::vector<Vec3> rev;
  for (std::size_t t = seq->frame_count(); t-- > 0;) {
    const auto f = seq->clip().frame(t);
    rev.insert(rev.end(), f.begin(), f.end());
  }
  const auto back = std::make_shared<const SkeletonSequence>("rev", seq->fps(), seq->tier(), rev);
  const auto a = frame_matrix(Fragment(seq, 0, 150));
  const auto b = frame_matrix(Fragment(back, 0, 150));
  double pa = 0, pb = 0;
  for (std::size_t t = 0; t < 150; ++t) {
    pa += a(t, kTrajectoryOffset);
    pb += b(t, kTrajectoryOffset);
  }
  EXPECT_NEAR(pa, pb, 1e-9);
}

INSTANTIATE_TEST_SUITE_P(Regimes, DescriptorProperties, ::testing::Values(0, 1, 2, 3));

TEST(DescriptorProperties, FrameRateConsistency) {
  // Band-limited motion: each joint a 0.5-1.5 Hz sinusoid with its own phase.
  const auto make = [](double fps) {
    const auto frames = static_cast<std::size_t>(5.0 * fps);
    std::vector<Vec3> pos;
    for (std::size_t t = 0; t < frames; ++t) {
      const double s = double(t) / fps;
      for (std::size_t j = 0; j < kJointCount; ++j) {
        const double f = 0.5 + 0.04 * double(j), ph = 0.3 * double(j);
        pos.push_back({0.3 * std::sin(2 * pi * f * s + ph), 1.0 + 0.1 * std::cos(2 * pi * f * s), 0.2 * std::sin(2 * pi * 0.7 * s + ph)});
      }
    }
    return std::make_shared<const SkeletonSequence>("fr", fps, std::nullopt, pos);
  };
  const auto a = fragment_features(slice_fragments(make(30.0)).at(0));
  const auto b = fragment_features(slice_fragments(make(60.0)).at(0));
  for (std::size_t i = 0; i < kTrackedJointCount; ++i) {
    const std::size_t c = kKinematicsOffset + i * kPerJointKinematicsCount;
    EXPECT_NEAR(a[c], b[c], 0.02 * b[c]) << "speed of tracked joint " << i;
  }
}

TEST(Schema, NamesMatchVersionedFixture) {
  std::ifstream in(std::string(LMAMOTION_FIXTURES) + "/feature_names_v1.txt");
  ASSERT_TRUE(in);
  std::vector<std::string> expected;
  for (std::string line; std::getline(in, line);) expected.push_back(line);
  EXPECT_EQ(fragment_feature_names(), expected);
  EXPECT_EQ(std::string(kFeatureSchema), "lma55-v1");
  EXPECT_EQ(std::tuple_size_v<FeatureVector>, 110u);
}
