#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "core.hpp"
#include "motion_model.hpp"

namespace lma {

// One row per fragment: feature values plus source metadata. CSV layout is the
// feature columns followed by `tier`, `source_id`, `start_frame`.
struct FeatureTable {
  std::vector<std::string> feature_names;
  Matrix values;
  std::vector<std::optional<int>> tiers;
  std::vector<std::string> source_ids;
  std::vector<std::int64_t> start_frames;

  std::size_t rows() const { return values.rows(); }
};

inline constexpr const char* kTierColumn = "tier";
inline constexpr const char* kSourceColumn = "source_id";
inline constexpr const char* kStartColumn = "start_frame";

namespace csv {

inline std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

// %.9g: nine significant digits.
inline std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Splits one CSV record. Quoted fields may not span lines.
inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

inline double parse_double(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error(where + ": not a number: '" + s + "'");
  }
  if (used != s.size()) throw Error(where + ": not a number: '" + s + "'");
  return v;
}

}  // namespace csv

inline void write_feature_csv(std::ostream& out, const FeatureTable& table) {
  for (const auto& n : table.feature_names) out << csv::quote(n) << ',';
  out << kTierColumn << ',' << kSourceColumn << ',' << kStartColumn << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (double v : table.values.row(r)) out << csv::number(v) << ',';
    if (table.tiers[r]) out << *table.tiers[r];
    out << ',' << csv::quote(table.source_ids[r]) << ',' << table.start_frames[r] << '\n';
  }
}

inline void write_feature_csv(const std::filesystem::path& path, const FeatureTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_feature_csv(out, table);
}

inline FeatureTable read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open feature table " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(path.string() + ": empty file, expected a header row");
  const auto header = csv::split(line);

  FeatureTable table;
  std::optional<std::size_t> tier_col, source_col, start_col;
  std::vector<std::size_t> feature_cols;
  std::map<std::string, std::size_t> seen;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!seen.emplace(header[c], c).second) {
      throw Error(path.string() + ": duplicate column '" + header[c] + "'");
    }
    if (header[c] == kTierColumn) {
      tier_col = c;
    } else if (header[c] == kSourceColumn) {
      source_col = c;
    } else if (header[c] == kStartColumn) {
      start_col = c;
    } else {
      feature_cols.push_back(c);
      table.feature_names.push_back(header[c]);
    }
  }

  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split(line);
    const auto where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() != header.size()) {
      throw Error(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                  std::to_string(fields.size()));
    }
    for (auto c : feature_cols) values.push_back(csv::parse_double(fields[c], where));
    if (tier_col && !fields[*tier_col].empty()) {
      const double t = csv::parse_double(fields[*tier_col], where);
      if (t != static_cast<int>(t) || !valid_tier(static_cast<int>(t))) {
        throw Error(where + ": tier '" + fields[*tier_col] + "' outside 0..3");
      }
      table.tiers.emplace_back(static_cast<int>(t));
    } else {
      table.tiers.emplace_back();
    }
    table.source_ids.push_back(source_col ? fields[*source_col] : std::string());
    table.start_frames.push_back(
        start_col && !fields[*start_col].empty()
            ? static_cast<std::int64_t>(csv::parse_double(fields[*start_col], where))
            : 0);
    ++rows;
  }
  table.values = Matrix(rows, feature_cols.size());
  table.values.data() = std::move(values);
  return table;
}

// Feature columns reordered to `names`. The table must carry exactly that
// set of columns; the first name that differs is reported.
inline Matrix aligned_features(const FeatureTable& table, const std::vector<std::string>& names) {
  std::map<std::string, std::size_t> col;
  for (std::size_t c = 0; c < table.feature_names.size(); ++c) col[table.feature_names[c]] = c;
  std::vector<std::size_t> order;
  order.reserve(names.size());
  for (const auto& n : names) {
    auto it = col.find(n);
    if (it == col.end()) throw Error("feature name mismatch: column '" + n + "' is missing");
    order.push_back(it->second);
  }
  if (table.feature_names.size() != names.size()) {
    for (const auto& n : table.feature_names) {
      if (std::find(names.begin(), names.end(), n) == names.end()) {
        throw Error("feature name mismatch: unexpected column '" + n + "'");
      }
    }
  }
  Matrix out(table.rows(), names.size());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < names.size(); ++c) out(r, c) = table.values(r, order[c]);
  }
  return out;
}

inline std::vector<int> required_tiers(const FeatureTable& table) {
  std::vector<int> tiers;
  tiers.reserve(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (!table.tiers[r]) throw Error("row " + std::to_string(r) + " has no tier label");
    tiers.push_back(*table.tiers[r]);
  }
  return tiers;
}

}  // namespace lma
