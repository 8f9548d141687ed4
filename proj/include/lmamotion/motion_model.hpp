#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "random.hpp"

namespace lma {

inline constexpr std::size_t kJointCount = 24;
inline constexpr int kTierCount = 4;
inline constexpr double kMinFragmentSeconds = 3.0;

// SMPL 24-joint kinematic tree indexing.
enum class Joint : std::size_t {
  pelvis = 0,
  left_hip = 1,
  right_hip = 2,
  spine1 = 3,
  left_knee = 4,
  right_knee = 5,
  spine2 = 6,
  left_ankle = 7,
  right_ankle = 8,
  spine3 = 9,
  left_foot = 10,
  right_foot = 11,
  neck = 12,
  left_collar = 13,
  right_collar = 14,
  head = 15,
  left_shoulder = 16,
  right_shoulder = 17,
  left_elbow = 18,
  right_elbow = 19,
  left_wrist = 20,
  right_wrist = 21,
  left_hand = 22,
  right_hand = 23,
};

constexpr std::size_t index_of(Joint j) { return static_cast<std::size_t>(j); }

inline bool valid_tier(int tier) { return tier >= 0 && tier < kTierCount; }

// Read-only window over frame-major joint positions (frames x 24).
struct PoseClip {
  std::span<const Vec3> positions;
  double fps = 0.0;

  std::size_t frames() const { return positions.size() / kJointCount; }
  const Vec3& at(std::size_t t, std::size_t j) const { return positions[t * kJointCount + j]; }
  std::span<const Vec3> frame(std::size_t t) const {
    return positions.subspan(t * kJointCount, kJointCount);
  }
};

// One subject's world-space joint trajectory: y up, floor at y = 0, meters.
// Validated on construction and immutable afterwards.
class SkeletonSequence {
 public:
  SkeletonSequence(std::string source_id, double fps, std::optional<int> tier,
                   std::vector<Vec3> positions)
      : source_id_(std::move(source_id)), fps_(fps), tier_(tier), positions_(std::move(positions)) {
    if (!(fps_ > 0.0) || !std::isfinite(fps_)) {
      throw Error("fps must be positive and finite, got " + std::to_string(fps_));
    }
    if (positions_.size() % kJointCount != 0) {
      throw Error("position count " + std::to_string(positions_.size()) +
                  " is not a multiple of " + std::to_string(kJointCount));
    }
    if (frame_count() < 2) {
      throw Error("sequence needs at least 2 frames, got " + std::to_string(frame_count()));
    }
    if (tier_ && !valid_tier(*tier_)) {
      throw Error("tier " + std::to_string(*tier_) + " outside 0..3");
    }
    for (std::size_t i = 0; i < positions_.size(); ++i) {
      if (!is_finite(positions_[i])) {
        throw Error("non-finite coordinate at (frame, joint) = (" + std::to_string(i / kJointCount) +
                    ", " + std::to_string(i % kJointCount) + ")");
      }
    }
  }

  const std::string& source_id() const { return source_id_; }
  double fps() const { return fps_; }
  std::optional<int> tier() const { return tier_; }
  std::size_t frame_count() const { return positions_.size() / kJointCount; }
  std::span<const Vec3> positions() const { return positions_; }
  const Vec3& joint(std::size_t t, std::size_t j) const { return positions_[t * kJointCount + j]; }
  PoseClip clip() const { return {positions_, fps_}; }

 private:
  std::string source_id_;
  double fps_;
  std::optional<int> tier_;
  std::vector<Vec3> positions_;
};

// Contiguous half-open frame range [start, end) of a parent sequence.
class Fragment {
 public:
  Fragment(std::shared_ptr<const SkeletonSequence> parent, std::size_t start, std::size_t end)
      : parent_(std::move(parent)), start_(start), end_(end) {
    if (!parent_) throw Error("fragment without parent sequence");
    if (end_ <= start_ || end_ > parent_->frame_count()) {
      throw Error("fragment range [" + std::to_string(start_) + ", " + std::to_string(end_) +
                  ") invalid for sequence of " + std::to_string(parent_->frame_count()) + " frames");
    }
    // Frame counts come from round(length * fps); allow that half-frame of slack.
    if (duration_s() + 0.5 / parent_->fps() < kMinFragmentSeconds) {
      throw Error("fragment duration " + std::to_string(duration_s()) + " s below the " +
                  std::to_string(kMinFragmentSeconds) + " s minimum");
    }
  }

  const std::string& parent_id() const { return parent_->source_id(); }
  const SkeletonSequence& parent() const { return *parent_; }
  std::size_t start_frame() const { return start_; }
  std::size_t end_frame() const { return end_; }
  std::size_t frame_count() const { return end_ - start_; }
  double fps() const { return parent_->fps(); }
  double duration_s() const { return static_cast<double>(frame_count()) / parent_->fps(); }
  std::optional<int> tier() const { return parent_->tier(); }

  PoseClip clip() const {
    return {parent_->positions().subspan(start_ * kJointCount, frame_count() * kJointCount),
            parent_->fps()};
  }

 private:
  std::shared_ptr<const SkeletonSequence> parent_;
  std::size_t start_;
  std::size_t end_;
};

// Fixed-length windows at a fixed stride, ordered by start frame. A trailing
// remainder shorter than one window is dropped.
inline std::vector<Fragment> slice_fragments(const std::shared_ptr<const SkeletonSequence>& seq,
                                             double length_s = 5.0, double stride_s = 5.0) {
  if (!(length_s >= kMinFragmentSeconds)) {
    throw Error("fragment length " + std::to_string(length_s) + " s is below the 3 s minimum");
  }
  if (!(stride_s > 0.0)) throw Error("fragment stride must be positive");
  const auto length = static_cast<std::size_t>(std::llround(length_s * seq->fps()));
  const auto stride = static_cast<std::size_t>(std::llround(stride_s * seq->fps()));
  if (stride == 0) throw Error("fragment stride rounds to zero frames at this frame rate");

  std::vector<Fragment> out;
  for (std::size_t start = 0; start + length <= seq->frame_count(); start += stride) {
    out.emplace_back(seq, start, start + length);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Skeleton JSON files

namespace detail {

// Python's json module writes bare NaN / Infinity / -Infinity. Quote them so
// a strict parser accepts the document and the loader can report the exact
// frame and joint instead of a generic syntax error.
inline std::string quote_nonfinite_tokens(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_string = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      out.push_back(c);
      if (c == '\\' && i + 1 < text.size()) {
        out.push_back(text[++i]);
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
      out.push_back(c);
      continue;
    }
    bool replaced = false;
    for (std::string_view token : {"-Infinity", "Infinity", "NaN"}) {
      if (text.substr(i, token.size()) == token) {
        out.push_back('"');
        out.append(token);
        out.push_back('"');
        i += token.size() - 1;
        replaced = true;
        break;
      }
    }
    if (!replaced) out.push_back(c);
  }
  return out;
}

inline double coordinate_value(const nlohmann::json& v, std::size_t frame, std::size_t joint) {
  if (v.is_number()) return v.get<double>();
  if (v.is_null()) return std::nan("");
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s == "NaN") return std::nan("");
    if (s == "Infinity") return HUGE_VAL;
    if (s == "-Infinity") return -HUGE_VAL;
  }
  throw Error("coordinate at (frame, joint) = (" + std::to_string(frame) + ", " +
              std::to_string(joint) + ") is not a number");
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

inline SkeletonSequence parse_sequence(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(detail::quote_nonfinite_tokens(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string("skeleton JSON parse error: ") + e.what());
  }
  if (!doc.is_object()) throw Error("skeleton JSON must be an object");
  if (!doc.contains("fps") || !doc["fps"].is_number()) throw Error("missing numeric \"fps\"");
  if (!doc.contains("frames") || !doc["frames"].is_array()) throw Error("missing \"frames\" array");

  std::string source_id;
  if (doc.contains("source_id") && doc["source_id"].is_string()) {
    source_id = doc["source_id"].get<std::string>();
  }
  std::optional<int> tier;
  if (doc.contains("tier") && !doc["tier"].is_null()) {
    if (!doc["tier"].is_number_integer()) throw Error("\"tier\" must be an integer or null");
    tier = doc["tier"].get<int>();
  }

  const auto& frames = doc["frames"];
  std::vector<Vec3> positions;
  positions.reserve(frames.size() * kJointCount);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto& frame = frames[t];
    if (!frame.is_array()) throw Error("frame " + std::to_string(t) + " is not an array");
    if (frame.size() != kJointCount) {
      throw Error("joint count " + std::to_string(frame.size()) + " != " +
                  std::to_string(kJointCount) + " at frame " + std::to_string(t));
    }
    for (std::size_t j = 0; j < kJointCount; ++j) {
      const auto& p = frame[j];
      if (!p.is_array() || p.size() != 3) {
        throw Error("joint (frame, joint) = (" + std::to_string(t) + ", " + std::to_string(j) +
                    ") is not an [x, y, z] triple");
      }
      const Vec3 v{detail::coordinate_value(p[0], t, j), detail::coordinate_value(p[1], t, j),
                   detail::coordinate_value(p[2], t, j)};
      if (!is_finite(v)) {
        throw Error("non-finite coordinate at (frame, joint) = (" + std::to_string(t) + ", " +
                    std::to_string(j) + ")");
      }
      positions.push_back(v);
    }
  }
  return SkeletonSequence(std::move(source_id), doc["fps"].get<double>(), tier, std::move(positions));
}

inline SkeletonSequence load_sequence(const std::filesystem::path& path) {
  try {
    return parse_sequence(detail::read_text_file(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

inline nlohmann::json sequence_to_json(const SkeletonSequence& seq) {
  nlohmann::json frames = nlohmann::json::array();
  for (std::size_t t = 0; t < seq.frame_count(); ++t) {
    nlohmann::json frame = nlohmann::json::array();
    for (std::size_t j = 0; j < kJointCount; ++j) {
      const Vec3& p = seq.joint(t, j);
      frame.push_back({p.x, p.y, p.z});
    }
    frames.push_back(std::move(frame));
  }
  nlohmann::json doc;
  doc["source_id"] = seq.source_id();
  doc["fps"] = seq.fps();
  doc["tier"] = seq.tier() ? nlohmann::json(*seq.tier()) : nlohmann::json(nullptr);
  doc["frames"] = std::move(frames);
  return doc;
}

// nlohmann emits the shortest round-trip representation, so save/load is
// bit-exact on positions.
inline void save_sequence(const SkeletonSequence& seq, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << sequence_to_json(seq).dump() << '\n';
}

// ---------------------------------------------------------------------------
// Dataset manifests (JSON lines)

struct ManifestEntry {
  std::string path;
  std::string source_id;
  int tier = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

class DatasetManifest {
 public:
  DatasetManifest() = default;
  explicit DatasetManifest(std::vector<ManifestEntry> entries) : entries_(std::move(entries)) {
    std::set<std::string> seen;
    for (const auto& e : entries_) {
      if (!valid_tier(e.tier)) {
        throw Error("manifest entry " + e.path + " has tier " + std::to_string(e.tier) +
                    " outside 0..3");
      }
      if (!seen.insert(e.source_id).second) {
        throw Error("duplicate source_id in manifest: " + e.source_id);
      }
    }
  }

  const std::vector<ManifestEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::array<std::size_t, kTierCount> counts() const {
    std::array<std::size_t, kTierCount> c{};
    for (const auto& e : entries_) ++c[static_cast<std::size_t>(e.tier)];
    return c;
  }

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;

 private:
  std::vector<ManifestEntry> entries_;
};

// Relative paths are resolved against the manifest's directory. When a line
// has no source_id the resolved path stands in for it.
inline DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  const auto base = std::filesystem::absolute(path).parent_path();
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("path") || !j["path"].is_string()) {
      throw Error(where + ": manifest line needs a string \"path\"");
    }
    if (!j.contains("tier") || !j["tier"].is_number_integer()) {
      throw Error(where + ": manifest line needs an integer \"tier\"");
    }
    std::filesystem::path p = j["path"].get<std::string>();
    if (p.is_relative()) p = base / p;
    ManifestEntry e;
    e.path = p.lexically_normal().string();
    e.tier = j["tier"].get<int>();
    e.source_id = j.contains("source_id") && j["source_id"].is_string()
                      ? j["source_id"].get<std::string>()
                      : e.path;
    entries.push_back(std::move(e));
  }
  try {
    return DatasetManifest(std::move(entries));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

// Paths are written relative to the output file's directory.
inline void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest " + path.string());
  const auto base = std::filesystem::absolute(path).parent_path();
  for (const auto& e : manifest.entries()) {
    const auto rel = std::filesystem::absolute(e.path).lexically_proximate(base);
    nlohmann::json j;
    j["path"] = rel.generic_string();
    j["tier"] = e.tier;
    j["source_id"] = e.source_id;
    out << j.dump() << '\n';
  }
}

// Seeded uniform subsample of exactly `per_class` entries from every tier.
// Selected entries keep their original relative order, which makes the
// operation idempotent on an already balanced manifest.
inline DatasetManifest balance_dataset(const DatasetManifest& manifest, std::size_t per_class,
                                       std::uint64_t seed) {
  std::array<std::vector<std::size_t>, kTierCount> by_tier;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    by_tier[static_cast<std::size_t>(manifest.entries()[i].tier)].push_back(i);
  }
  for (int tier = 0; tier < kTierCount; ++tier) {
    const auto have = by_tier[static_cast<std::size_t>(tier)].size();
    if (have < per_class) {
      throw Error("tier " + std::to_string(tier) + " has " + std::to_string(have) +
                  " entries, fewer than the requested " + std::to_string(per_class));
    }
  }

  Rng rng(seed);
  std::vector<std::size_t> keep;
  keep.reserve(per_class * kTierCount);
  for (auto& rows : by_tier) {
    rng.shuffle(std::span<std::size_t>(rows));
    keep.insert(keep.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(per_class));
  }
  std::sort(keep.begin(), keep.end());

  std::vector<ManifestEntry> out;
  out.reserve(keep.size());
  for (auto i : keep) out.push_back(manifest.entries()[i]);
  return DatasetManifest(std::move(out));
}

}  // namespace lma
