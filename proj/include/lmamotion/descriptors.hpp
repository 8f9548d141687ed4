#pragma once

// Per-frame Laban Movement Analysis descriptors and the per-fragment summary.
//
// Column layout of the 55-wide frame matrix (kinds in parentheses):
//   0..11   Dispersion: reach of head/hands/feet from the pelvis, spread
//           around the centroid, vertical and horizontal extent, hand and
//           foot spans, pelvis height.
//   12..15  Effort: Flow (mean jerk), Space (mean Directness), Time (mean
//           acceleration), Weight (kinetic energy, unit masses).
//   16..45  Per tracked joint: speed, acceleration, jerk, kinetic energy,
//           Directness.
//   46..51  Initiation: each tracked joint's share of total speed.
//   52..54  Pelvis trajectory: path increment, curvature, net displacement.
// The 110-wide fragment vector is the column means followed by the column
// population standard deviations.

#include <algorithm>
#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "core.hpp"
#include "motion_model.hpp"

namespace lma {

inline constexpr std::size_t kTrackedJointCount = 6;
inline constexpr std::size_t kDispersionCount = 12;
inline constexpr std::size_t kEffortCount = 4;
inline constexpr std::size_t kPerJointKinematicsCount = 5;
inline constexpr std::size_t kTrajectoryCount = 3;
inline constexpr std::size_t kFrameFeatureCount =
    kDispersionCount + kEffortCount + kTrackedJointCount * kPerJointKinematicsCount +
    kTrackedJointCount + kTrajectoryCount;
inline constexpr std::size_t kFragmentFeatureCount = 2 * kFrameFeatureCount;
static_assert(kFrameFeatureCount == 55);

inline constexpr std::size_t kDispersionOffset = 0;
inline constexpr std::size_t kEffortOffset = kDispersionOffset + kDispersionCount;
inline constexpr std::size_t kKinematicsOffset = kEffortOffset + kEffortCount;
inline constexpr std::size_t kInitiationOffset =
    kKinematicsOffset + kTrackedJointCount * kPerJointKinematicsCount;
inline constexpr std::size_t kTrajectoryOffset = kInitiationOffset + kTrackedJointCount;

// Version tag of the canonical feature enumeration. Bump it whenever
// frame_feature_names() changes.
inline constexpr const char* kFeatureSchema = "lma55-v1";

inline constexpr double kPathEpsilon = 1e-6;      // m
inline constexpr double kSpeedEpsilon = 1e-8;     // m/s
inline constexpr double kCurvatureCap = 100.0;    // 1/m

struct TrackedJoint {
  std::size_t index;
  const char* name;
};

struct DescriptorConfig {
  // Root plus end effectors. Order fixes column order.
  std::array<TrackedJoint, kTrackedJointCount> tracked{{
      {index_of(Joint::pelvis), "pelvis"},
      {index_of(Joint::head), "head"},
      {index_of(Joint::left_hand), "left_hand"},
      {index_of(Joint::right_hand), "right_hand"},
      {index_of(Joint::left_foot), "left_foot"},
      {index_of(Joint::right_foot), "right_foot"},
  }};
  // Directness window is [t - w, t + w], clamped to the fragment.
  std::size_t directness_half_window = 15;
};

inline std::vector<std::string> frame_feature_names(const DescriptorConfig& config = {}) {
  std::vector<std::string> names = {
      "dispersion.head_to_pelvis",   "dispersion.left_hand_to_pelvis",
      "dispersion.right_hand_to_pelvis", "dispersion.left_foot_to_pelvis",
      "dispersion.right_foot_to_pelvis", "dispersion.centroid_distance_mean",
      "dispersion.vertical_extent",  "dispersion.horizontal_span",
      "dispersion.centroid_distance_std", "dispersion.hand_span",
      "dispersion.foot_span",        "dispersion.pelvis_height",
      "effort.flow",                 "effort.space",
      "effort.time",                 "effort.weight",
  };
  for (const auto& j : config.tracked) {
    const std::string prefix = std::string("kinematics.") + j.name;
    for (const char* q : {".speed", ".acceleration", ".jerk", ".kinetic_energy", ".directness"}) {
      names.push_back(prefix + q);
    }
  }
  for (const auto& j : config.tracked) names.push_back(std::string("initiation.") + j.name);
  names.insert(names.end(),
               {"trajectory.path_increment", "trajectory.curvature", "trajectory.displacement"});
  return names;
}

inline std::vector<std::string> fragment_feature_names(const DescriptorConfig& config = {}) {
  const auto base = frame_feature_names(config);
  std::vector<std::string> names;
  names.reserve(2 * base.size());
  for (const auto& n : base) names.push_back(n + ".mean");
  for (const auto& n : base) names.push_back(n + ".std");
  return names;
}

// ---------------------------------------------------------------------------
// Kinematics

// Velocity, acceleration and jerk for every joint, frame-major like the
// positions. Each order is one more application of the same difference
// operator (central inside, one-sided at the ends) scaled by fps.
struct KinematicState {
  std::size_t frames = 0;
  std::vector<Vec3> velocity;
  std::vector<Vec3> acceleration;
  std::vector<Vec3> jerk;

  const Vec3& v(std::size_t t, std::size_t j) const { return velocity[t * kJointCount + j]; }
  const Vec3& a(std::size_t t, std::size_t j) const { return acceleration[t * kJointCount + j]; }
  const Vec3& jk(std::size_t t, std::size_t j) const { return jerk[t * kJointCount + j]; }
};

namespace detail {

inline std::vector<Vec3> time_derivative(std::span<const Vec3> x, std::size_t frames, double fps) {
  std::vector<Vec3> d(x.size());
  const auto at = [&](std::size_t t, std::size_t j) -> const Vec3& { return x[t * kJointCount + j]; };
  for (std::size_t j = 0; j < kJointCount; ++j) {
    d[j] = (at(1, j) - at(0, j)) * fps;
    for (std::size_t t = 1; t + 1 < frames; ++t) {
      d[t * kJointCount + j] = (at(t + 1, j) - at(t - 1, j)) * (0.5 * fps);
    }
    d[(frames - 1) * kJointCount + j] = (at(frames - 1, j) - at(frames - 2, j)) * fps;
  }
  return d;
}

}  // namespace detail

inline KinematicState differentiate(const PoseClip& clip) {
  const std::size_t frames = clip.frames();
  if (frames < 4) {
    throw Error("fragment too short for jerk: " + std::to_string(frames) + " frames, need 4");
  }
  KinematicState s;
  s.frames = frames;
  s.velocity = detail::time_derivative(clip.positions, frames, clip.fps);
  s.acceleration = detail::time_derivative(s.velocity, frames, clip.fps);
  s.jerk = detail::time_derivative(s.acceleration, frames, clip.fps);
  return s;
}

inline KinematicState differentiate(const Fragment& fragment) { return differentiate(fragment.clip()); }

// ---------------------------------------------------------------------------
// Directness

// Chord over path length of one joint's track within [t - w, t + w]
// (clamped). A track that barely moves counts as fully direct.
inline double directness(std::span<const Vec3> track, std::size_t t, std::size_t half_window) {
  assert(half_window >= 1 && t < track.size());
  const std::size_t a = t >= half_window ? t - half_window : 0;
  const std::size_t b = std::min(track.size() - 1, t + half_window);
  double path = 0.0;
  for (std::size_t tau = a; tau < b; ++tau) path += distance(track[tau + 1], track[tau]);
  if (path < kPathEpsilon) return 1.0;
  return std::min(1.0, distance(track[b], track[a]) / path);
}

inline std::vector<Vec3> joint_track(const PoseClip& clip, std::size_t joint) {
  std::vector<Vec3> track(clip.frames());
  for (std::size_t t = 0; t < track.size(); ++t) track[t] = clip.at(t, joint);
  return track;
}

// ---------------------------------------------------------------------------
// Family operations, one frame at a time

struct EffortValues {
  double flow = 0.0;
  double space = 0.0;
  double time = 0.0;
  double weight = 0.0;
};

inline EffortValues effort_frame(const KinematicState& state, const PoseClip& clip, std::size_t t,
                                 const DescriptorConfig& config = {}) {
  EffortValues e;
  for (const auto& j : config.tracked) {
    const Vec3& v = state.v(t, j.index);
    e.weight += 0.5 * dot(v, v);
    e.time += norm(state.a(t, j.index));
    e.flow += norm(state.jk(t, j.index));
    e.space += directness(joint_track(clip, j.index), t, config.directness_half_window);
  }
  constexpr double n = kTrackedJointCount;
  e.time /= n;
  e.flow /= n;
  e.space /= n;
  return e;
}

inline std::array<double, kDispersionCount> dispersion_frame(const PoseClip& clip, std::size_t t) {
  const auto pose = clip.frame(t);
  const Vec3& pelvis = pose[index_of(Joint::pelvis)];
  const auto reach = [&](Joint j) { return distance(pose[index_of(j)], pelvis); };

  Vec3 centroid;
  for (const auto& p : pose) centroid += p;
  centroid *= 1.0 / static_cast<double>(kJointCount);

  std::array<double, kJointCount> spread{};
  double spread_mean = 0.0;
  double y_min = pose[0].y;
  double y_max = pose[0].y;
  for (std::size_t j = 0; j < kJointCount; ++j) {
    spread[j] = distance(pose[j], centroid);
    spread_mean += spread[j];
    y_min = std::min(y_min, pose[j].y);
    y_max = std::max(y_max, pose[j].y);
  }
  spread_mean /= static_cast<double>(kJointCount);
  double spread_var = 0.0;
  for (double s : spread) spread_var += (s - spread_mean) * (s - spread_mean);
  spread_var /= static_cast<double>(kJointCount);

  double horizontal_span = 0.0;
  for (std::size_t i = 0; i < kJointCount; ++i) {
    for (std::size_t k = i + 1; k < kJointCount; ++k) {
      const double dx = pose[i].x - pose[k].x;
      const double dz = pose[i].z - pose[k].z;
      horizontal_span = std::max(horizontal_span, std::sqrt(dx * dx + dz * dz));
    }
  }

  return {
      reach(Joint::head),
      reach(Joint::left_hand),
      reach(Joint::right_hand),
      reach(Joint::left_foot),
      reach(Joint::right_foot),
      spread_mean,
      y_max - y_min,
      horizontal_span,
      std::sqrt(spread_var),
      distance(pose[index_of(Joint::left_hand)], pose[index_of(Joint::right_hand)]),
      distance(pose[index_of(Joint::left_foot)], pose[index_of(Joint::right_foot)]),
      pelvis.y,
  };
}

inline std::array<double, kTrackedJointCount> initiation_frame(const KinematicState& state,
                                                               std::size_t t,
                                                               const DescriptorConfig& config = {}) {
  std::array<double, kTrackedJointCount> score{};
  double total = 0.0;
  for (std::size_t i = 0; i < kTrackedJointCount; ++i) {
    score[i] = norm(state.v(t, config.tracked[i].index));
    total += score[i];
  }
  if (total < kSpeedEpsilon) {
    score.fill(1.0 / static_cast<double>(kTrackedJointCount));
    return score;
  }
  for (auto& s : score) s /= total;
  return score;
}

struct TrajectoryValues {
  double path_increment = 0.0;
  double curvature = 0.0;
  double displacement = 0.0;
};

inline TrajectoryValues trajectory_frame(const PoseClip& clip, const KinematicState& state,
                                         std::size_t t) {
  constexpr std::size_t root = index_of(Joint::pelvis);
  TrajectoryValues out;
  if (t + 1 < clip.frames()) out.path_increment = distance(clip.at(t + 1, root), clip.at(t, root));
  const Vec3& v = state.v(t, root);
  const double speed = norm(v);
  if (speed >= kSpeedEpsilon) {
    out.curvature = std::min(kCurvatureCap, norm(cross(v, state.a(t, root))) / (speed * speed * speed));
  }
  out.displacement = distance(clip.at(t, root), clip.at(0, root));
  return out;
}

// ---------------------------------------------------------------------------
// Full matrix and aggregate

struct FrameFeatureMatrix {
  std::size_t frames = 0;
  std::vector<double> values;  // frames x 55, row-major

  double operator()(std::size_t t, std::size_t c) const { return values[t * kFrameFeatureCount + c]; }
  std::span<const double> row(std::size_t t) const {
    return std::span<const double>(values).subspan(t * kFrameFeatureCount, kFrameFeatureCount);
  }
};

inline FrameFeatureMatrix frame_matrix(const PoseClip& clip, const DescriptorConfig& config = {}) {
  const KinematicState state = differentiate(clip);
  const std::size_t frames = clip.frames();

  // Directness is needed twice per joint (own column and Effort Space).
  std::array<std::vector<double>, kTrackedJointCount> direct;
  for (std::size_t i = 0; i < kTrackedJointCount; ++i) {
    const auto track = joint_track(clip, config.tracked[i].index);
    direct[i].resize(frames);
    for (std::size_t t = 0; t < frames; ++t) {
      direct[i][t] = directness(track, t, config.directness_half_window);
    }
  }

  FrameFeatureMatrix m;
  m.frames = frames;
  m.values.assign(frames * kFrameFeatureCount, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    double* row = m.values.data() + t * kFrameFeatureCount;

    const auto disp = dispersion_frame(clip, t);
    std::copy(disp.begin(), disp.end(), row + kDispersionOffset);

    EffortValues effort;
    for (std::size_t i = 0; i < kTrackedJointCount; ++i) {
      const std::size_t j = config.tracked[i].index;
      const Vec3& v = state.v(t, j);
      const double speed = norm(v);
      const double accel = norm(state.a(t, j));
      const double jerk = norm(state.jk(t, j));
      const double energy = 0.5 * dot(v, v);
      double* k = row + kKinematicsOffset + i * kPerJointKinematicsCount;
      k[0] = speed;
      k[1] = accel;
      k[2] = jerk;
      k[3] = energy;
      k[4] = direct[i][t];
      effort.flow += jerk;
      effort.space += direct[i][t];
      effort.time += accel;
      effort.weight += energy;
    }
    constexpr double n = kTrackedJointCount;
    row[kEffortOffset + 0] = effort.flow / n;
    row[kEffortOffset + 1] = effort.space / n;
    row[kEffortOffset + 2] = effort.time / n;
    row[kEffortOffset + 3] = effort.weight;

    const auto init = initiation_frame(state, t, config);
    std::copy(init.begin(), init.end(), row + kInitiationOffset);

    const auto traj = trajectory_frame(clip, state, t);
    row[kTrajectoryOffset + 0] = traj.path_increment;
    row[kTrajectoryOffset + 1] = traj.curvature;
    row[kTrajectoryOffset + 2] = traj.displacement;
  }
  return m;
}

inline FrameFeatureMatrix frame_matrix(const Fragment& fragment, const DescriptorConfig& config = {}) {
  return frame_matrix(fragment.clip(), config);
}

using FeatureVector = std::array<double, kFragmentFeatureCount>;

// Column means then population standard deviations (Welford updates).
inline FeatureVector aggregate(const FrameFeatureMatrix& m) {
  if (m.frames == 0) throw Error("cannot aggregate an empty feature matrix");
  FeatureVector out{};
  std::array<double, kFrameFeatureCount> mean{};
  std::array<double, kFrameFeatureCount> m2{};
  for (std::size_t t = 0; t < m.frames; ++t) {
    const double count = static_cast<double>(t + 1);
    for (std::size_t c = 0; c < kFrameFeatureCount; ++c) {
      const double x = m(t, c);
      const double delta = x - mean[c];
      mean[c] += delta / count;
      m2[c] += delta * (x - mean[c]);
    }
  }
  for (std::size_t c = 0; c < kFrameFeatureCount; ++c) {
    out[c] = mean[c];
    out[kFrameFeatureCount + c] = std::sqrt(std::max(0.0, m2[c] / static_cast<double>(m.frames)));
  }
  return out;
}

inline FeatureVector fragment_features(const Fragment& fragment, const DescriptorConfig& config = {}) {
  return aggregate(frame_matrix(fragment, config));
}

}  // namespace lma
