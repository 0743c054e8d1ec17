// phoneval/phoneset.hpp
//
// Copyright 2026  The phoneval authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "phoneval/error.hpp"

namespace phoneval {

// Reserved response label for trials that produced no usable response.
// It never carries feature values and always sorts last.
inline constexpr std::string_view kNoResponse = "NR";

inline bool is_no_response(std::string_view label) { return label == kNoResponse; }

/// Display order of the 24-consonant/glide inventory: unvoiced before
/// voiced, stops before fricatives, nasals and glides at the end.
inline const std::vector<std::string>& master_order() {
  static const std::vector<std::string> order = {
      "p", "t", "k", "f", "th", "s", "sh", "ch", "b", "d", "g", "v",
      "dh", "z", "zh", "dj", "m", "n", "ng", "w", "y", "r", "l", "h"};
  return order;
}

/// Position of `label` in the master order, or -1 if not a master phone.
inline int master_rank(std::string_view label) {
  const auto& order = master_order();
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] == label) return static_cast<int>(i);
  }
  return -1;
}

inline bool is_master_phone(std::string_view label) { return master_rank(label) >= 0; }

/// Sorts an inventory of labels by master-order position, dropping
/// duplicates; "NR" sorts last. Labels outside the master list throw.
template <typename Container>
std::vector<std::string> canonical_order(const Container& inventory) {
  const int nr_rank = static_cast<int>(master_order().size());
  std::set<int> ranks;
  for (const auto& label : inventory) {
    if (is_no_response(label)) {
      ranks.insert(nr_rank);
      continue;
    }
    const int rank = master_rank(label);
    if (rank < 0) {
      throw ValidationError("canonical_order: unknown phone label '" + std::string(label) + "'");
    }
    ranks.insert(rank);
  }
  std::vector<std::string> ordered;
  ordered.reserve(ranks.size());
  for (int rank : ranks) {
    ordered.push_back(rank == nr_rank ? std::string(kNoResponse) : master_order()[rank]);
  }
  return ordered;
}

// ---------------------------------------------------------------------------
// Distinctive-feature table
// ---------------------------------------------------------------------------

/// Ternary feature value. The numeric embedding used for distances is
/// Plus -> +1, Unspecified -> 0, Minus -> -1.
enum class FeatureValue : int {
  Minus = -1,
  Unspecified = 0,
  Plus = 1,
};

inline int embed(FeatureValue v) { return static_cast<int>(v); }

/// Per-phone vectors of ternary feature values. Immutable once parsed;
/// the per-pair distance is bounded by 2 * feature_count().
class FeatureTable {
 public:
  FeatureTable(std::vector<std::string> feature_names, std::vector<std::string> phones,
               std::unordered_map<std::string, std::vector<FeatureValue>> rows)
      : feature_names_(std::move(feature_names)),
        phones_(std::move(phones)),
        rows_(std::move(rows)) {}

  std::size_t feature_count() const { return feature_names_.size(); }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  /// Phones in file order.
  const std::vector<std::string>& phones() const { return phones_; }

  bool has_phone(std::string_view label) const {
    return rows_.find(std::string(label)) != rows_.end();
  }

  const std::vector<FeatureValue>& row(const std::string& label) const {
    auto it = rows_.find(label);
    if (it == rows_.end()) {
      throw ValidationError("feature table: phone '" + label + "' not present");
    }
    return it->second;
  }

  /// Upper bound on any per-pair distance: every feature can contribute
  /// at most |(+1) - (-1)| = 2.
  int max_pair_distance() const { return 2 * static_cast<int>(feature_count()); }

 private:
  std::vector<std::string> feature_names_;
  std::vector<std::string> phones_;
  std::unordered_map<std::string, std::vector<FeatureValue>> rows_;
};

namespace detail {

inline std::vector<std::string> split_on(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

inline std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < text.size() && text[i] != ' ' && text[i] != '\t') ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

}  // namespace detail

/// Parses the tab-separated feature-table format: a header row
/// `phone<TAB>f1<TAB>...<TAB>fF`, then one row per phone with cells from
/// {+, -, 0}. Blank lines and lines starting with '#' are skipped.
inline FeatureTable parse_feature_table(std::istream& in, const std::string& source_name) {
  std::string line;
  std::vector<std::string> feature_names;
  bool header_seen = false;
  std::vector<std::string> phones;
  std::unordered_map<std::string, std::vector<FeatureValue>> rows;

  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::strip_cr(std::move(line));
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells = detail::split_on(line, '\t');

    if (!header_seen) {
      if (cells.size() < 2 || cells[0] != "phone") {
        throw ParseError(source_name + ":" + std::to_string(line_no) +
                         ": expected header 'phone<TAB>f1<TAB>...'");
      }
      feature_names.assign(cells.begin() + 1, cells.end());
      std::set<std::string> seen;
      for (const auto& name : feature_names) {
        if (name.empty() || !seen.insert(name).second) {
          throw ParseError(source_name + ": duplicate or empty feature name '" + name + "'");
        }
      }
      header_seen = true;
      continue;
    }

    const std::string& phone = cells[0];
    if (phone.empty()) {
      throw ParseError(source_name + ":" + std::to_string(line_no) + ": empty phone label");
    }
    if (is_no_response(phone)) {
      throw ValidationError(source_name + ": the sentinel 'NR' may not carry feature values");
    }
    if (rows.count(phone)) {
      throw ValidationError(source_name + ": duplicate phone '" + phone + "'");
    }
    if (cells.size() - 1 != feature_names.size()) {
      throw ValidationError(source_name + ": phone '" + phone + "' has " +
                            std::to_string(cells.size() - 1) + " values, expected " +
                            std::to_string(feature_names.size()));
    }
    std::vector<FeatureValue> values;
    values.reserve(feature_names.size());
    for (std::size_t i = 1; i < cells.size(); ++i) {
      const std::string& cell = cells[i];
      if (cell == "+") {
        values.push_back(FeatureValue::Plus);
      } else if (cell == "-") {
        values.push_back(FeatureValue::Minus);
      } else if (cell == "0") {
        values.push_back(FeatureValue::Unspecified);
      } else {
        throw ParseError(source_name + ": phone '" + phone + "', feature '" +
                         feature_names[i - 1] + "': invalid value '" + cell + "'");
      }
    }
    phones.push_back(phone);
    rows.emplace(phone, std::move(values));
  }
  if (!header_seen) {
    throw ParseError(source_name + ": empty feature table");
  }
  return FeatureTable(std::move(feature_names), std::move(phones), std::move(rows));
}

inline FeatureTable load_feature_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open feature table '" + path + "'");
  return parse_feature_table(in, path);
}

/// Sum over features of |embed(a) - embed(b)|; in [0, 2F]. The sentinel
/// has no features, so passing "NR" is a contract error (matrix-level NR
/// handling is a metrics policy).
inline int feature_distance(const std::string& a, const std::string& b,
                            const FeatureTable& table) {
  if (is_no_response(a) || is_no_response(b)) {
    throw ValidationError("feature_distance: 'NR' has no feature values");
  }
  const auto& ra = table.row(a);
  const auto& rb = table.row(b);
  int sum = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sum += std::abs(embed(ra[i]) - embed(rb[i]));
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Manner / place / voicing category scheme
// ---------------------------------------------------------------------------

/// Named phone classes: manner classes partition the inventory, voicing is
/// the unvoiced set plus its complement, place classes may leave phones
/// unclassified.
class CategoryScheme {
 public:
  using ClassList = std::vector<std::pair<std::string, std::vector<std::string>>>;

  CategoryScheme(ClassList manner, ClassList place, std::vector<std::string> unvoiced)
      : manner_classes_(std::move(manner)),
        place_classes_(std::move(place)),
        unvoiced_(std::move(unvoiced)) {
    for (const auto& [name, members] : manner_classes_) {
      for (const auto& phone : members) manner_of_[phone] = name;
    }
    for (const auto& [name, members] : place_classes_) {
      for (const auto& phone : members) place_of_[phone] = name;
    }
    unvoiced_set_.insert(unvoiced_.begin(), unvoiced_.end());
  }

  const ClassList& manner_classes() const { return manner_classes_; }
  const ClassList& place_classes() const { return place_classes_; }
  const std::vector<std::string>& unvoiced() const { return unvoiced_; }

  bool has_phone(std::string_view label) const {
    return manner_of_.find(std::string(label)) != manner_of_.end();
  }

  /// Inventory = union of the manner classes, in declaration order.
  std::vector<std::string> inventory() const {
    std::vector<std::string> all;
    for (const auto& [name, members] : manner_classes_) {
      all.insert(all.end(), members.begin(), members.end());
    }
    return all;
  }

  const std::string& manner_of(const std::string& phone) const {
    auto it = manner_of_.find(phone);
    if (it == manner_of_.end()) {
      throw ValidationError("category scheme: phone '" + phone + "' has no manner class");
    }
    return it->second;
  }

  std::optional<std::string> place_of(const std::string& phone) const {
    auto it = place_of_.find(phone);
    if (it == place_of_.end()) return std::nullopt;
    return it->second;
  }

  /// "unvoiced" for members of the unvoiced set, "voiced" for every other
  /// inventory phone.
  std::string voicing_of(const std::string& phone) const {
    if (!has_phone(phone)) {
      throw ValidationError("category scheme: phone '" + phone + "' not in inventory");
    }
    return unvoiced_set_.count(phone) ? "unvoiced" : "voiced";
  }

 private:
  ClassList manner_classes_;
  ClassList place_classes_;
  std::vector<std::string> unvoiced_;
  std::unordered_map<std::string, std::string> manner_of_;
  std::unordered_map<std::string, std::string> place_of_;
  std::set<std::string> unvoiced_set_;
};

/// Parses the sectioned key-value scheme format:
///   manner.<class> = p t k ...
///   place.<class>  = ...
///   voicing.unvoiced = ...
/// '#' comments and blank lines are skipped; voiced is the complement of
/// the unvoiced set within the manner inventory.
inline CategoryScheme parse_category_scheme(std::istream& in, const std::string& source_name) {
  CategoryScheme::ClassList manner, place;
  std::optional<std::vector<std::string>> unvoiced;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::strip_cr(std::move(line));
    const std::string where = source_name + ":" + std::to_string(line_no);
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(where + ": expected 'section.class = phones'");
    std::string key = line.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    const std::size_t dot = key.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 >= key.size()) {
      throw ParseError(where + ": malformed key '" + key + "'");
    }
    const std::string section = key.substr(0, dot);
    const std::string name = key.substr(dot + 1);
    std::vector<std::string> members = detail::split_whitespace(line.substr(eq + 1));
    for (const auto& phone : members) {
      if (is_no_response(phone)) {
        throw ValidationError(where + ": the sentinel 'NR' may not belong to a class");
      }
    }

    if (section == "manner") {
      manner.emplace_back(name, std::move(members));
    } else if (section == "place") {
      place.emplace_back(name, std::move(members));
    } else if (section == "voicing") {
      if (name != "unvoiced") {
        throw ParseError(where + ": only 'voicing.unvoiced' is accepted (voiced is the complement)");
      }
      if (unvoiced) throw ParseError(where + ": duplicate voicing.unvoiced");
      unvoiced = std::move(members);
    } else {
      throw ParseError(where + ": unknown section '" + section + "'");
    }
  }

  if (manner.empty()) throw ValidationError(source_name + ": no manner classes defined");
  if (!unvoiced) throw ValidationError(source_name + ": missing voicing.unvoiced");

  // Manner classes must partition their union; place classes must be
  // disjoint subsets of it; the unvoiced set must be a subset of it.
  std::set<std::string> inventory;
  std::set<std::string> class_names;
  for (const auto& [name, members] : manner) {
    if (!class_names.insert("manner." + name).second) {
      throw ValidationError(source_name + ": duplicate manner class '" + name + "'");
    }
    for (const auto& phone : members) {
      if (!inventory.insert(phone).second) {
        throw ValidationError(source_name + ": phone '" + phone +
                              "' appears in more than one manner class");
      }
    }
  }
  std::set<std::string> placed;
  for (const auto& [name, members] : place) {
    if (!class_names.insert("place." + name).second) {
      throw ValidationError(source_name + ": duplicate place class '" + name + "'");
    }
    for (const auto& phone : members) {
      if (!inventory.count(phone)) {
        throw ValidationError(source_name + ": place phone '" + phone +
                              "' is not in any manner class");
      }
      if (!placed.insert(phone).second) {
        throw ValidationError(source_name + ": phone '" + phone +
                              "' appears in more than one place class");
      }
    }
  }
  for (const auto& phone : *unvoiced) {
    if (!inventory.count(phone)) {
      throw ValidationError(source_name + ": unvoiced phone '" + phone +
                            "' is not in any manner class");
    }
  }

  return CategoryScheme(std::move(manner), std::move(place), std::move(*unvoiced));
}

inline CategoryScheme load_category_scheme(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scheme '" + path + "'");
  return parse_category_scheme(in, path);
}

struct Classification {
  std::string manner;
  std::optional<std::string> place;
  std::string voicing;
};

/// Looks up the containing manner/voicing classes (always present for
/// inventory phones) and the place class (absent for unplaced phones).
inline Classification classify(const std::string& phone, const CategoryScheme& scheme) {
  if (is_no_response(phone)) {
    throw ValidationError("classify: 'NR' has no categories");
  }
  return Classification{scheme.manner_of(phone), scheme.place_of(phone),
                        scheme.voicing_of(phone)};
}

}  // namespace phoneval
