#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core.hpp"
#include "motion_model.hpp"

namespace lma {

enum class TaskKind { four_way, three_way, binary };

inline std::string_view to_string(TaskKind k) {
  switch (k) {
    case TaskKind::four_way: return "four_way";
    case TaskKind::three_way: return "three_way";
    case TaskKind::binary: return "binary";
  }
  return "?";
}

inline TaskKind parse_task_kind(std::string_view s) {
  if (s == "four_way") return TaskKind::four_way;
  if (s == "three_way") return TaskKind::three_way;
  if (s == "binary") return TaskKind::binary;
  throw Error("unknown task '" + std::string(s) + "' (expected four_way, three_way or binary)");
}

// Tier -> task class, or nullopt when the tier is left out of the task.
struct TaskSpec {
  TaskKind kind = TaskKind::four_way;
  std::array<std::optional<int>, kTierCount> label_map{0, 1, 2, 3};
  std::vector<std::string> class_names{"T0", "T1", "T2", "T3"};

  int class_count() const { return static_cast<int>(class_names.size()); }

  static TaskSpec four_way() { return {}; }

  // Artistic tier dropped; remaining tiers keep their order.
  static TaskSpec three_way() {
    return {TaskKind::three_way, {0, std::nullopt, 1, 2}, {"T0", "T2", "T3"}};
  }

  // Tiers below `first_unsafe_tier` are SFW (0), the rest NSFW (1).
  static TaskSpec binary(int first_unsafe_tier = 2) {
    if (first_unsafe_tier < 1 || first_unsafe_tier >= kTierCount) {
      throw Error("binary split tier must be in 1..3");
    }
    TaskSpec t{TaskKind::binary, {}, {"SFW", "NSFW"}};
    for (int tier = 0; tier < kTierCount; ++tier) {
      t.label_map[static_cast<std::size_t>(tier)] = tier < first_unsafe_tier ? 0 : 1;
    }
    return t;
  }

  static TaskSpec of(TaskKind kind, int binary_split = 2) {
    switch (kind) {
      case TaskKind::four_way: return four_way();
      case TaskKind::three_way: return three_way();
      case TaskKind::binary: return binary(binary_split);
    }
    return four_way();
  }
};

}  // namespace lma
