#pragma once

// Deterministic synthetic skeletons for four movement regimes:
//
//   R0 locomotion    root walks a straight line, gait-like limb swing
//   R1 staccato      near-stationary root, sparse fast strikes of a limb
//   R2 sway loop     root and hands circle horizontally, feet planted
//   R3 undulation    slow low-amplitude pelvis-centred wave up the spine
//
// Regime k is labelled tier k. With `overlap` > 0 every sequence mixes in a
// random share (up to `overlap`) of an adjacent regime's motion, which makes
// neighbouring tiers hard to tell apart while distant ones stay separable.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "core.hpp"
#include "motion_model.hpp"
#include "random.hpp"

namespace lma {

enum class Regime : int { locomotion = 0, staccato = 1, sway_loop = 2, undulation = 3 };

struct RegimeSpec {
  Regime regime = Regime::locomotion;
  double duration_s = 5.0;
  double fps = 30.0;
  double noise_m = 0.005;  // per-coordinate Gaussian jitter, meters
  std::uint64_t seed = 0;
  double overlap = 0.0;  // in [0, 1)

  void validate() const {
    const int r = static_cast<int>(regime);
    if (r < 0 || r > 3) throw Error("regime must be 0..3");
    if (!(duration_s >= kMinFragmentSeconds)) throw Error("synthetic duration must be >= 3 s");
    if (!(fps >= 10.0 && fps <= 120.0)) throw Error("synthetic fps must be within [10, 120]");
    if (!(noise_m >= 0.0)) throw Error("noise amplitude must be >= 0");
    if (!(overlap >= 0.0 && overlap < 1.0)) throw Error("overlap must be within [0, 1)");
  }
};

namespace synth_detail {

constexpr double kPelvisHeight = 0.93;
constexpr double kTau = 2.0 * std::numbers::pi;

// Relaxed standing pose relative to the pelvis, arms hanging. x is the
// subject's left, z forward.
inline const std::array<Vec3, kJointCount>& rest_pose() {
  static const std::array<Vec3, kJointCount> pose{{
      {0.00, 0.00, 0.00},    // pelvis
      {0.06, -0.09, 0.00},   // left hip
      {-0.06, -0.09, 0.00},  // right hip
      {0.00, 0.11, -0.02},   // spine1
      {0.10, -0.47, 0.01},   // left knee
      {-0.10, -0.47, 0.01},  // right knee
      {0.00, 0.25, 0.00},    // spine2
      {0.09, -0.86, -0.04},  // left ankle
      {-0.09, -0.86, -0.04}, // right ankle
      {0.00, 0.31, 0.03},    // spine3
      {0.12, -0.92, 0.08},   // left foot
      {-0.12, -0.92, 0.08},  // right foot
      {0.00, 0.51, 0.00},    // neck
      {0.08, 0.42, 0.00},    // left collar
      {-0.08, 0.42, 0.00},   // right collar
      {0.00, 0.60, 0.05},    // head
      {0.17, 0.45, 0.00},    // left shoulder
      {-0.17, 0.45, 0.00},   // right shoulder
      {0.21, 0.19, -0.01},   // left elbow
      {-0.21, 0.19, -0.01},  // right elbow
      {0.24, -0.05, 0.02},   // left wrist
      {-0.24, -0.05, 0.02},  // right wrist
      {0.25, -0.13, 0.03},   // left hand
      {-0.25, -0.13, 0.03},  // right hand
  }};
  return pose;
}

struct ChainWeight {
  Joint joint;
  double weight;
};

constexpr std::array<ChainWeight, 4> kLeftArm{{{Joint::left_shoulder, 0.1}, {Joint::left_elbow, 0.5},
                                               {Joint::left_wrist, 0.9}, {Joint::left_hand, 1.0}}};
constexpr std::array<ChainWeight, 4> kRightArm{{{Joint::right_shoulder, 0.1}, {Joint::right_elbow, 0.5},
                                                {Joint::right_wrist, 0.9}, {Joint::right_hand, 1.0}}};
constexpr std::array<ChainWeight, 4> kLeftLeg{{{Joint::left_hip, 0.1}, {Joint::left_knee, 0.5},
                                               {Joint::left_ankle, 0.95}, {Joint::left_foot, 1.0}}};
constexpr std::array<ChainWeight, 4> kRightLeg{{{Joint::right_hip, 0.1}, {Joint::right_knee, 0.5},
                                                {Joint::right_ankle, 0.95}, {Joint::right_foot, 1.0}}};

using Offsets = std::array<Vec3, kJointCount>;

inline void add_chain(Offsets& o, const std::array<ChainWeight, 4>& chain, const Vec3& d) {
  for (const auto& c : chain) o[index_of(c.joint)] += d * c.weight;
}

inline void add_all(Offsets& o, const Vec3& d) {
  for (auto& v : o) v += d;
}

// Moves everything except the legs, which taper to zero at the feet.
inline void add_upper(Offsets& o, const Vec3& d) {
  add_all(o, d);
  for (const auto* leg : {&kLeftLeg, &kRightLeg}) {
    for (const auto& c : *leg) o[index_of(c.joint)] -= d * c.weight;
  }
}

inline double smoothstep(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * (3.0 - 2.0 * u);
}

struct Locomotion {
  double speed, freq, phase;
  explicit Locomotion(Rng& rng)
      : speed(rng.uniform(1.0, 1.5)), freq(0.0), phase(rng.uniform(0.0, kTau)) {
    freq = speed / rng.uniform(1.3, 1.5);  // stride length 1.3-1.5 m
  }
  void apply(Offsets& o, double s, double w) const {
    const double c = kTau * freq * s + phase;
    // Swing amplitude keeps foot speed non-negative: A * 2 pi f <= v.
    const double swing = 0.9 * speed / (kTau * freq);
    add_all(o, {0.02 * w * std::sin(c), w * 0.02 * std::sin(2.0 * c), w * speed * s});
    add_chain(o, kLeftLeg, {0.0, w * 0.05 * std::max(0.0, std::sin(c)), w * swing * std::sin(c)});
    add_chain(o, kRightLeg, {0.0, w * 0.05 * std::max(0.0, -std::sin(c)), -w * swing * std::sin(c)});
    add_chain(o, kLeftArm, {0.0, 0.0, -w * 0.15 * std::sin(c)});
    add_chain(o, kRightArm, {0.0, 0.0, w * 0.15 * std::sin(c)});
  }
};

struct Staccato {
  struct Strike {
    double start, rise, hold, fall;
    int limb;  // 0 left arm, 1 right arm, 2 both arms, 3 left leg, 4 right leg
    Vec3 dir;
  };
  std::vector<Strike> strikes;
  Vec3 drift;

  Staccato(Rng& rng, double duration) {
    drift = {rng.uniform(-0.05, 0.05), 0.0, rng.uniform(-0.05, 0.05)};
    for (double t = rng.uniform(0.05, 0.3); t < duration; t += rng.uniform(0.3, 0.6)) {
      Strike k;
      k.start = t;
      k.rise = rng.uniform(0.07, 0.12);
      k.hold = rng.uniform(0.08, 0.2);
      k.fall = rng.uniform(0.1, 0.18);
      k.limb = static_cast<int>(rng.index(5));
      const double amp = rng.uniform(0.3, 0.5);
      if (k.limb >= 3) {
        const double a = rng.uniform(-0.6, 0.6);
        k.dir = Vec3{std::sin(a), 0.5, std::cos(a)} * (amp / std::sqrt(1.25));
      } else {
        const double a = rng.uniform(0.0, kTau);
        const double e = rng.uniform(-0.3, 1.2);
        k.dir = Vec3{std::cos(e) * std::sin(a), std::sin(e), std::cos(e) * std::cos(a)} * amp;
      }
      strikes.push_back(k);
    }
  }

  void apply(Offsets& o, double s, double w, double duration) const {
    add_all(o, drift * (w * s / duration));
    for (const auto& k : strikes) {
      const double u = s - k.start;
      double p = 0.0;
      if (u <= 0.0) {
        continue;
      } else if (u < k.rise) {
        p = smoothstep(u / k.rise);
      } else if (u < k.rise + k.hold) {
        p = 1.0;
      } else {
        p = 1.0 - smoothstep((u - k.rise - k.hold) / k.fall);
      }
      if (p == 0.0) continue;
      const Vec3 d = k.dir * (w * p);
      switch (k.limb) {
        case 0: add_chain(o, kLeftArm, d); break;
        case 1: add_chain(o, kRightArm, d); break;
        case 2:
          add_chain(o, kLeftArm, d);
          add_chain(o, kRightArm, {-d.x, d.y, d.z});
          break;
        case 3: add_chain(o, kLeftLeg, d); break;
        default: add_chain(o, kRightLeg, d); break;
      }
      add_upper(o, d * 0.08);
    }
  }
};

struct SwayLoop {
  double radius, period, phase, hand_radius, hand_phase;
  explicit SwayLoop(Rng& rng)
      : radius(rng.uniform(0.15, 0.25)),
        period(rng.uniform(0.9, 1.3)),
        phase(rng.uniform(0.0, kTau)),
        hand_radius(rng.uniform(0.12, 0.2)),
        hand_phase(rng.uniform(0.0, kTau)) {}
  static Vec3 circle(double r, double a, double a0) {
    return {r * (std::cos(a) - std::cos(a0)), 0.0, r * (std::sin(a) - std::sin(a0))};
  }
  void apply(Offsets& o, double s, double w) const {
    const double a = kTau * s / period + phase;
    add_upper(o, circle(w * radius, a, phase));
    const double h = a + hand_phase;
    add_chain(o, kLeftArm, circle(w * hand_radius, h, phase + hand_phase));
    add_chain(o, kRightArm, circle(w * hand_radius, -h, -(phase + hand_phase)));
  }
};

struct Undulation {
  double amp, freq, phase;
  explicit Undulation(Rng& rng)
      : amp(rng.uniform(0.04, 0.08)), freq(rng.uniform(0.3, 0.5)), phase(rng.uniform(0.0, kTau)) {}
  void apply(Offsets& o, double s, double w) const {
    // A wave travelling up the spine: later joints lag and shrink.
    constexpr std::array<std::pair<Joint, double>, 6> spine{{{Joint::pelvis, 1.0},
                                                             {Joint::spine1, 0.8},
                                                             {Joint::spine2, 0.65},
                                                             {Joint::spine3, 0.5},
                                                             {Joint::neck, 0.4},
                                                             {Joint::head, 0.35}}};
    for (std::size_t i = 0; i < spine.size(); ++i) {
      const double c = kTau * freq * s + phase - 0.5 * static_cast<double>(i);
      const Vec3 d{0.0, w * amp * spine[i].second * std::sin(c),
                   w * 0.6 * amp * spine[i].second * std::cos(c)};
      o[index_of(spine[i].first)] += d;
      if (i == 0) {
        o[index_of(Joint::left_hip)] += d;
        o[index_of(Joint::right_hip)] += d;
        o[index_of(Joint::left_knee)] += d * 0.5;
        o[index_of(Joint::right_knee)] += d * 0.5;
      }
      if (i == 3) {
        for (Joint j : {Joint::left_collar, Joint::right_collar}) o[index_of(j)] += d;
        add_chain(o, kLeftArm, d * 0.8);
        add_chain(o, kRightArm, d * 0.8);
      }
    }
  }
};

}  // namespace synth_detail

inline SkeletonSequence generate(const RegimeSpec& spec) {
  using namespace synth_detail;
  spec.validate();
  const int regime = static_cast<int>(spec.regime);
  Rng rng(spec.seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(regime) + 1);

  // Motion mix: own regime plus an optional share of one neighbour.
  std::array<double, 4> weight{};
  weight[static_cast<std::size_t>(regime)] = 1.0;
  if (spec.overlap > 0.0) {
    int neighbour = regime == 0 ? 1 : regime == 3 ? 2 : regime + (rng.index(2) == 0 ? -1 : 1);
    const double share = rng.uniform(0.0, spec.overlap);
    weight[static_cast<std::size_t>(regime)] = 1.0 - share;
    weight[static_cast<std::size_t>(neighbour)] = share;
  }

  const double heading = rng.uniform(0.0, kTau);
  const Vec3 origin{rng.uniform(-2.0, 2.0), kPelvisHeight, rng.uniform(-2.0, 2.0)};
  const Locomotion walk(rng);
  const Staccato strikes(rng, spec.duration_s);
  const SwayLoop sway(rng);
  const Undulation wave(rng);

  const auto frames = static_cast<std::size_t>(std::llround(spec.duration_s * spec.fps));
  const double ch = std::cos(heading);
  const double sh = std::sin(heading);
  const auto& rest = rest_pose();

  std::vector<Vec3> positions;
  positions.reserve(frames * kJointCount);
  for (std::size_t t = 0; t < frames; ++t) {
    const double s = static_cast<double>(t) / spec.fps;
    Offsets o{};
    if (weight[0] > 0.0) walk.apply(o, s, weight[0]);
    if (weight[1] > 0.0) strikes.apply(o, s, weight[1], spec.duration_s);
    if (weight[2] > 0.0) sway.apply(o, s, weight[2]);
    if (weight[3] > 0.0) wave.apply(o, s, weight[3]);
    for (std::size_t j = 0; j < kJointCount; ++j) {
      const Vec3 b = rest[j] + o[j];
      Vec3 p{ch * b.x + sh * b.z, b.y, -sh * b.x + ch * b.z};
      p += origin;
      if (spec.noise_m > 0.0) {
        p += Vec3{rng.normal(), rng.normal(), rng.normal()} * spec.noise_m;
      }
      positions.push_back(p);
    }
  }
  return SkeletonSequence("synth-r" + std::to_string(regime) + "-s" + std::to_string(spec.seed),
                          spec.fps, regime, std::move(positions));
}

}  // namespace lma
