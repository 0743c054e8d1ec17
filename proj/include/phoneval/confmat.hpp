// phoneval/confmat.hpp
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

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "phoneval/align.hpp"
#include "phoneval/error.hpp"
#include "phoneval/phoneset.hpp"

namespace phoneval {

/// Counts of (reference phone -> response) for one condition. Deletions
/// land in the "NR" response column; insertions have no reference slot and
/// live in the side tally instead of the grid.
struct ConfusionMatrix {
  std::vector<std::string> ref_labels;   // never contains the sentinel
  std::vector<std::string> resp_labels;  // "NR" permitted, always last
  std::vector<std::vector<std::uint64_t>> counts;  // [ref][resp]
  std::string condition;
  std::uint64_t insertions = 0;
};

inline std::uint64_t grand_total(const ConfusionMatrix& m) {
  std::uint64_t total = 0;
  for (const auto& row : m.counts) {
    for (std::uint64_t c : row) total += c;
  }
  return total;
}

/// Tabulates alignments over `inventory` into a square matrix plus the NR
/// column: Match/Substitute(r,h) -> cell (r,h), Delete(r) -> (r,NR),
/// Insert(h) -> side tally. Phones outside the inventory are an error.
inline ConfusionMatrix build_from_alignments(const std::vector<Alignment>& alignments,
                                             const std::set<std::string>& inventory) {
  std::set<std::string> phones;
  for (const auto& label : inventory) {
    if (!is_no_response(label)) phones.insert(label);
  }
  ConfusionMatrix m;
  m.ref_labels = canonical_order(phones);
  m.resp_labels = m.ref_labels;
  m.resp_labels.emplace_back(kNoResponse);
  m.counts.assign(m.ref_labels.size(),
                  std::vector<std::uint64_t>(m.resp_labels.size(), 0));

  std::unordered_map<std::string, std::size_t> ref_index, resp_index;
  for (std::size_t i = 0; i < m.ref_labels.size(); ++i) ref_index[m.ref_labels[i]] = i;
  for (std::size_t j = 0; j < m.resp_labels.size(); ++j) resp_index[m.resp_labels[j]] = j;

  auto ref_at = [&](const std::string& label) {
    auto it = ref_index.find(label);
    if (it == ref_index.end()) {
      throw ValidationError("build_from_alignments: phone '" + label + "' outside inventory");
    }
    return it->second;
  };
  auto resp_at = [&](const std::string& label) {
    auto it = resp_index.find(label);
    if (it == resp_index.end() || is_no_response(label)) {
      throw ValidationError("build_from_alignments: phone '" + label + "' outside inventory");
    }
    return it->second;
  };

  for (const auto& alignment : alignments) {
    for (const auto& step : alignment.steps) {
      switch (step.op) {
        case EditOp::Match:
        case EditOp::Substitute:
          ++m.counts[ref_at(step.ref)][resp_at(step.hyp)];
          break;
        case EditOp::Delete:
          ++m.counts[ref_at(step.ref)][resp_index.at(std::string(kNoResponse))];
          break;
        case EditOp::Insert:
          resp_at(step.hyp);  // inserted phones must still be in-inventory
          ++m.insertions;
          break;
      }
    }
  }
  return m;
}

namespace detail {

inline void validate_matrix_labels(const std::vector<std::string>& ref,
                                   const std::vector<std::string>& resp,
                                   const std::string& source_name) {
  std::set<std::string> seen;
  for (const auto& label : ref) {
    if (is_no_response(label)) {
      throw ParseError(source_name + ": 'NR' is not a valid reference label");
    }
    if (!is_master_phone(label)) {
      throw ParseError(source_name + ": unknown phone label '" + label + "'");
    }
    if (!seen.insert(label).second) {
      throw ParseError(source_name + ": duplicate reference label '" + label + "'");
    }
  }
  seen.clear();
  for (std::size_t j = 0; j < resp.size(); ++j) {
    const std::string& label = resp[j];
    if (is_no_response(label)) {
      if (j + 1 != resp.size()) {
        throw ParseError(source_name + ": 'NR' must be the last response label");
      }
    } else if (!is_master_phone(label)) {
      throw ParseError(source_name + ": unknown phone label '" + label + "'");
    }
    if (!seen.insert(label).second) {
      throw ParseError(source_name + ": duplicate response label '" + label + "'");
    }
  }
}

}  // namespace detail

/// Matrix CSV: cell (1,1) is the literal `ref\resp`, first row the response
/// labels, first column the reference labels, body nonnegative integers.
/// Trailing `# condition:` / `# insertions:` comments are optional.
inline ConfusionMatrix parse_matrix_csv(std::istream& in, const std::string& source_name) {
  ConfusionMatrix m;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::strip_cr(std::move(line));
    const std::string where = source_name + ":" + std::to_string(line_no);
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string_view rest(line);
      rest.remove_prefix(1);
      while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
      if (rest.rfind("condition:", 0) == 0) {
        rest.remove_prefix(10);
        while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
        m.condition = std::string(rest);
      } else if (rest.rfind("insertions:", 0) == 0) {
        rest.remove_prefix(11);
        while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
        const auto [ptr, ec] =
            std::from_chars(rest.data(), rest.data() + rest.size(), m.insertions);
        if (ec != std::errc() || ptr != rest.data() + rest.size()) {
          throw ParseError(where + ": malformed insertions count");
        }
      }
      continue;
    }
    std::vector<std::string> cells = detail::split_on(line, ',');
    if (!header_seen) {
      if (cells.size() < 2 || cells[0] != "ref\\resp") {
        throw ParseError(where + ": expected header starting with 'ref\\resp'");
      }
      m.resp_labels.assign(cells.begin() + 1, cells.end());
      header_seen = true;
      continue;
    }
    if (cells.size() != m.resp_labels.size() + 1) {
      throw ParseError(where + ": expected " + std::to_string(m.resp_labels.size() + 1) +
                       " fields, got " + std::to_string(cells.size()));
    }
    m.ref_labels.push_back(cells[0]);
    std::vector<std::uint64_t> row;
    row.reserve(m.resp_labels.size());
    for (std::size_t j = 1; j < cells.size(); ++j) {
      const std::string& cell = cells[j];
      if (!cell.empty() && cell[0] == '-') {
        throw ParseError(where + ": negative count '" + cell + "' in row '" + cells[0] + "'");
      }
      std::uint64_t value = 0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
        throw ParseError(where + ": malformed count '" + cell + "' in row '" + cells[0] + "'");
      }
      row.push_back(value);
    }
    m.counts.push_back(std::move(row));
  }
  if (!header_seen) throw ParseError(source_name + ": empty matrix file");
  detail::validate_matrix_labels(m.ref_labels, m.resp_labels, source_name);
  return m;
}

inline ConfusionMatrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open matrix '" + path + "'");
  return parse_matrix_csv(in, path);
}

inline void write_matrix_csv(const ConfusionMatrix& m, std::ostream& out) {
  out << "ref\\resp";
  for (const auto& label : m.resp_labels) out << ',' << label;
  out << '\n';
  for (std::size_t i = 0; i < m.ref_labels.size(); ++i) {
    out << m.ref_labels[i];
    for (std::uint64_t c : m.counts[i]) out << ',' << c;
    out << '\n';
  }
  if (!m.condition.empty()) out << "# condition: " << m.condition << '\n';
  if (m.insertions > 0) out << "# insertions: " << m.insertions << '\n';
}

inline void save_matrix_csv(const ConfusionMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write matrix '" + path + "'");
  write_matrix_csv(m, out);
}

/// Permutes rows and columns into canonical order (NR last). Idempotent;
/// counts are carried along with their labels.
inline ConfusionMatrix reorder_canonical(const ConfusionMatrix& m) {
  ConfusionMatrix out;
  out.condition = m.condition;
  out.insertions = m.insertions;
  out.ref_labels = canonical_order(m.ref_labels);
  out.resp_labels = canonical_order(m.resp_labels);

  std::unordered_map<std::string, std::size_t> old_ref, old_resp;
  for (std::size_t i = 0; i < m.ref_labels.size(); ++i) old_ref[m.ref_labels[i]] = i;
  for (std::size_t j = 0; j < m.resp_labels.size(); ++j) old_resp[m.resp_labels[j]] = j;

  out.counts.assign(out.ref_labels.size(),
                    std::vector<std::uint64_t>(out.resp_labels.size(), 0));
  for (std::size_t i = 0; i < out.ref_labels.size(); ++i) {
    const std::size_t oi = old_ref.at(out.ref_labels[i]);
    for (std::size_t j = 0; j < out.resp_labels.size(); ++j) {
      out.counts[i][j] = m.counts[oi][old_resp.at(out.resp_labels[j])];
    }
  }
  return out;
}

inline bool is_canonical(const ConfusionMatrix& m) {
  return m.ref_labels == canonical_order(m.ref_labels) &&
         m.resp_labels == canonical_order(m.resp_labels);
}

/// Per-row fractions of the row total; all-zero rows map to all-zero
/// fractions rather than an error.
inline std::vector<std::vector<double>> row_normalize(const ConfusionMatrix& m) {
  std::vector<std::vector<double>> out(m.counts.size());
  for (std::size_t i = 0; i < m.counts.size(); ++i) {
    std::uint64_t row_sum = 0;
    for (std::uint64_t c : m.counts[i]) row_sum += c;
    out[i].resize(m.counts[i].size(), 0.0);
    if (row_sum == 0) continue;
    for (std::size_t j = 0; j < m.counts[i].size(); ++j) {
      out[i][j] = static_cast<double>(m.counts[i][j]) / static_cast<double>(row_sum);
    }
  }
  return out;
}

}  // namespace phoneval
