#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <lmamotion/motion_model.hpp>
#include <lmamotion/random.hpp>

namespace fs = std::filesystem;
using namespace lma;

namespace {

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("lmamotion_mm_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string frame_json(std::size_t joints, const std::string& coord = "[0,1,2]") {
  std::string s = "[";
  for (std::size_t j = 0; j < joints; ++j) s += (j ? "," : "") + coord;
  return s + "]";
}

std::shared_ptr<const SkeletonSequence> ramp(std::size_t frames, double fps) {
  std::vector<Vec3> pos;
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t j = 0; j < kJointCount; ++j)
      pos.push_back({static_cast<double>(t), static_cast<double>(j), 0.5});
  return std::make_shared<const SkeletonSequence>("ramp", fps, 1, std::move(pos));
}

DatasetManifest manifest_with(std::array<int, 4> per_tier) {
  std::vector<ManifestEntry> e;
  for (int tier = 0; tier < 4; ++tier)
    for (int i = 0; i < per_tier[static_cast<std::size_t>(tier)]; ++i)
      e.push_back({"f" + std::to_string(tier) + "_" + std::to_string(i), "id" + std::to_string(tier) + "_" + std::to_string(i), tier});
  return DatasetManifest(std::move(e));
}

}  // namespace

TEST(LoadSequence, MinimalTwoFrameFile) {
  const auto seq = parse_sequence(R"({"source_id":"a","fps":30,"tier":2,"frames":[)" + frame_json(24) + "," +
                                  frame_json(24, "[1e0,2.5E-1,-3]") + "]}");
  EXPECT_EQ(seq.frame_count(), 2u);
  EXPECT_EQ(seq.source_id(), "a");
  EXPECT_EQ(seq.tier(), 2);
  EXPECT_EQ(seq.joint(1, 5), (Vec3{1.0, 0.25, -3.0}));
}

TEST(LoadSequence, WrongJointCount) {
  try {
    parse_sequence(R"({"source_id":"a","fps":30,"tier":null,"frames":[)" + frame_json(23) + "," + frame_json(23) + "]}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("joint count 23 != 24"), std::string::npos) << e.what();
  }
}

TEST(LoadSequence, NaNReportsFrameAndJoint) {
  std::string frames;
  for (int t = 0; t < 8; ++t) {
    std::string f = "[";
    for (int j = 0; j < 24; ++j) f += std::string(j ? "," : "") + (t == 5 && j == 3 ? "[0,NaN,0]" : "[0,0,0]");
    frames += (t ? "," : "") + f + "]";
  }
  try {
    parse_sequence(R"({"source_id":"a","fps":30,"frames":[)" + frames + "]}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("(5, 3)"), std::string::npos) << e.what();
  }
}

TEST(LoadSequence, RejectsBadHeaderFields) {
  const std::string two = frame_json(24) + "," + frame_json(24);
  EXPECT_THROW(parse_sequence(R"({"fps":0,"frames":[)" + two + "]}"), Error);
  EXPECT_THROW(parse_sequence(R"({"fps":-30,"frames":[)" + two + "]}"), Error);
  EXPECT_THROW(parse_sequence(R"({"fps":30,"frames":[)" + frame_json(24) + "]}"), Error);
  EXPECT_THROW(parse_sequence(R"({"fps":30,"tier":7,"frames":[)" + two + "]}"), Error);
  EXPECT_THROW(parse_sequence("{not json"), Error);
  // A quoted "NaN" inside source_id must not be rewritten.
  EXPECT_EQ(parse_sequence(R"({"source_id":"NaN Infinity","fps":30,"frames":[)" + two + "]}").source_id(),
            "NaN Infinity");
}

TEST(LoadSequence, SaveLoadRoundTripIsBitExact) {
  Rng rng(11);
  std::vector<Vec3> pos;
  for (std::size_t i = 0; i < 10 * kJointCount; ++i)
    pos.push_back({rng.normal() * 1e-7, rng.uniform(-3, 3), std::ldexp(rng.uniform(), -40)});
  const SkeletonSequence seq("rt", 29.97, 3, pos);
  const auto dir = temp_dir("roundtrip");
  save_sequence(seq, dir / "s.json");
  const auto back = load_sequence(dir / "s.json");
  ASSERT_EQ(back.frame_count(), 10u);
  for (std::size_t i = 0; i < pos.size(); ++i) EXPECT_EQ(back.positions()[i], pos[i]);
  EXPECT_EQ(back.fps(), 29.97);
  EXPECT_EQ(back.tier(), 3);
}

TEST(SliceFragments, ExactTiling) {
  const auto f = slice_fragments(ramp(300, 30), 5, 5);
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[0].start_frame(), 0u);
  EXPECT_EQ(f[0].end_frame(), 150u);
  EXPECT_EQ(f[1].start_frame(), 150u);
  EXPECT_EQ(f[1].end_frame(), 300u);
}

TEST(SliceFragments, OverlappingStride) {
  const auto f = slice_fragments(ramp(300, 30), 5, 2.5);
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[0].start_frame(), 0u);
  EXPECT_EQ(f[1].start_frame(), 75u);
  EXPECT_EQ(f[2].start_frame(), 150u);
}

TEST(SliceFragments, TooShortGivesEmpty) { EXPECT_TRUE(slice_fragments(ramp(60, 30), 3, 3).empty()); }

TEST(SliceFragments, RejectsLengthBelowFloor) {
  EXPECT_THROW(slice_fragments(ramp(300, 30), 2.9, 3), Error);
  EXPECT_THROW(slice_fragments(ramp(300, 30), 3, 0), Error);
}

TEST(SliceFragments, ConcatenationReproducesParent) {
  const auto seq = ramp(450, 30);
  const auto f = slice_fragments(seq, 5, 5);
  std::vector<Vec3> joined;
  for (const auto& fr : f) {
    const auto clip = fr.clip();
    joined.insert(joined.end(), clip.positions.begin(), clip.positions.end());
  }
  ASSERT_EQ(joined.size(), seq->positions().size());
  EXPECT_TRUE(std::equal(joined.begin(), joined.end(), seq->positions().begin()));
}

TEST(Fragment, EnforcesMinimumDuration) {
  EXPECT_THROW(Fragment(ramp(300, 30), 0, 60), Error);
  EXPECT_THROW(Fragment(ramp(300, 30), 100, 100), Error);
  EXPECT_NO_THROW(Fragment(ramp(300, 30), 0, 90));
}

TEST(Manifest, RejectsDuplicatesAndBadTiers) {
  EXPECT_THROW(DatasetManifest({{"a", "x", 0}, {"b", "x", 1}}), Error);
  EXPECT_THROW(DatasetManifest({{"a", "x", 4}}), Error);
}

TEST(Manifest, JsonLinesRoundTrip) {
  const auto dir = temp_dir("manifest");
  {
    std::ofstream out(dir / "m.jsonl");
    out << R"({"path":"a.json","tier":0})" << "\n\n" << R"({"path":"sub/b.json","tier":3,"source_id":"b"})" << "\n";
  }
  const auto m = read_manifest(dir / "m.jsonl");
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(fs::path(m.entries()[0].path), fs::absolute(dir / "a.json").lexically_normal());
  EXPECT_EQ(m.entries()[1].source_id, "b");
  EXPECT_EQ(m.counts()[3], 1u);

  fs::create_directories(dir / "other");
  write_manifest(m, dir / "other" / "copy.jsonl");
  EXPECT_EQ(read_manifest(dir / "other" / "copy.jsonl"), m);
}

TEST(Balance, ThousandsPerTierSampling) {
  const auto m = manifest_with({2000, 2000, 2000, 2000});
  const auto b = balance_dataset(m, 1075, 42);
  EXPECT_EQ(b.size(), 4300u);
  for (auto c : b.counts()) EXPECT_EQ(c, 1075u);
}

TEST(Balance, SmallestClassPassesThrough) {
  const auto m = manifest_with({5, 9, 7, 12});
  const auto b = balance_dataset(m, 5, 1);
  std::vector<ManifestEntry> tier0;
  for (const auto& e : b.entries())
    if (e.tier == 0) tier0.push_back(e);
  std::vector<ManifestEntry> orig0(m.entries().begin(), m.entries().begin() + 5);
  EXPECT_EQ(tier0, orig0);
}

TEST(Balance, DeterministicAndIdempotent) {
  const auto m = manifest_with({30, 40, 50, 60});
  const auto a = balance_dataset(m, 20, 9);
  EXPECT_EQ(a, balance_dataset(m, 20, 9));
  EXPECT_NE(a, balance_dataset(m, 20, 10));
  EXPECT_EQ(balance_dataset(a, 20, 9), a);
}

TEST(Balance, ErrorNamesShortTier) {
  try {
    balance_dataset(manifest_with({10, 3, 10, 10}), 5, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("tier 1 has 3"), std::string::npos) << e.what();
  }
}
