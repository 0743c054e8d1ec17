// phoneval/align.hpp
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
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "phoneval/error.hpp"
#include "phoneval/phoneset.hpp"

namespace phoneval {

enum class EditOp { Match, Substitute, Delete, Insert };

inline const char* to_string(EditOp op) {
  switch (op) {
    case EditOp::Match: return "match";
    case EditOp::Substitute: return "sub";
    case EditOp::Delete: return "delete";
    case EditOp::Insert: return "insert";
  }
  return "?";
}

struct AlignStep {
  EditOp op;
  std::string ref;  // empty for Insert
  std::string hyp;  // empty for Delete
  friend bool operator==(const AlignStep&, const AlignStep&) = default;
};

/// Edit script between a reference and a hypothesis sequence. Projecting
/// the steps onto the ref side reproduces the reference, onto the hyp side
/// the hypothesis; cost counts the non-match steps.
struct Alignment {
  std::vector<AlignStep> steps;
  int cost = 0;
};

struct EditTally {
  std::uint64_t matches = 0;
  std::uint64_t substitutions = 0;
  std::uint64_t deletions = 0;
  std::uint64_t insertions = 0;
  std::uint64_t entries = 0;  // reference length
};

/// Minimum-edit-distance alignment under unit costs (match = 0,
/// substitute/delete/insert = 1). Ties are broken deterministically during
/// traceback: diagonal (Match/Substitute) first, then Delete, then Insert,
/// so identical inputs always yield an identical step list.
inline Alignment align(const std::vector<std::string>& reference,
                       const std::vector<std::string>& hypothesis) {
  for (const auto* seq : {&reference, &hypothesis}) {
    for (const auto& label : *seq) {
      if (label.empty()) throw ValidationError("align: empty phone label");
      if (is_no_response(label)) {
        throw ValidationError("align: the sentinel 'NR' may not appear in a sequence");
      }
    }
  }

  const std::size_t m = reference.size();
  const std::size_t n = hypothesis.size();
  std::vector<int> dp((m + 1) * (n + 1));
  auto cell = [&](std::size_t i, std::size_t j) -> int& { return dp[i * (n + 1) + j]; };

  for (std::size_t i = 0; i <= m; ++i) cell(i, 0) = static_cast<int>(i);
  for (std::size_t j = 0; j <= n; ++j) cell(0, j) = static_cast<int>(j);
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      const int sub = cell(i - 1, j - 1) + (reference[i - 1] == hypothesis[j - 1] ? 0 : 1);
      const int del = cell(i - 1, j) + 1;
      const int ins = cell(i, j - 1) + 1;
      cell(i, j) = std::min({sub, del, ins});
    }
  }

  Alignment result;
  result.cost = cell(m, n);
  result.steps.reserve(m + n);
  std::size_t i = m, j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = reference[i - 1] == hypothesis[j - 1];
      if (cell(i, j) == cell(i - 1, j - 1) + (same ? 0 : 1)) {
        result.steps.push_back({same ? EditOp::Match : EditOp::Substitute, reference[i - 1],
                                hypothesis[j - 1]});
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && cell(i, j) == cell(i - 1, j) + 1) {
      result.steps.push_back({EditOp::Delete, reference[i - 1], ""});
      --i;
      continue;
    }
    result.steps.push_back({EditOp::Insert, "", hypothesis[j - 1]});
    --j;
  }
  std::reverse(result.steps.begin(), result.steps.end());
  return result;
}

inline EditTally tally(const Alignment& alignment) {
  EditTally t;
  for (const auto& step : alignment.steps) {
    switch (step.op) {
      case EditOp::Match: ++t.matches; break;
      case EditOp::Substitute: ++t.substitutions; break;
      case EditOp::Delete: ++t.deletions; break;
      case EditOp::Insert: ++t.insertions; break;
    }
  }
  t.entries = t.matches + t.substitutions + t.deletions;
  return t;
}

inline EditTally operator+(const EditTally& a, const EditTally& b) {
  return EditTally{a.matches + b.matches, a.substitutions + b.substitutions,
                   a.deletions + b.deletions, a.insertions + b.insertions,
                   a.entries + b.entries};
}

/// (deletions + insertions + substitutions) / entries. May exceed 1 when
/// insertions are plentiful; undefined for an empty reference.
inline double error_rate(const EditTally& t) {
  if (t.entries == 0) {
    throw ValidationError("error_rate: undefined for zero reference entries");
  }
  return static_cast<double>(t.deletions + t.insertions + t.substitutions) /
         static_cast<double>(t.entries);
}

// ---------------------------------------------------------------------------
// Sequence files: one utterance per line, `utt_id<TAB>phone phone ...`,
// '#' comment lines ignored.
// ---------------------------------------------------------------------------

struct Utterance {
  std::string id;
  std::vector<std::string> phones;
};

inline std::vector<Utterance> parse_sequence_file(std::istream& in,
                                                  const std::string& source_name) {
  std::vector<Utterance> utts;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::strip_cr(std::move(line));
    if (line.empty() || line[0] == '#') continue;
    const std::size_t tab = line.find('\t');
    Utterance utt;
    if (tab == std::string::npos) {
      utt.id = line;
    } else {
      utt.id = line.substr(0, tab);
      utt.phones = detail::split_whitespace(std::string_view(line).substr(tab + 1));
    }
    if (utt.id.empty()) {
      throw ParseError(source_name + ":" + std::to_string(line_no) + ": empty utterance id");
    }
    if (!seen.insert(utt.id).second) {
      throw ParseError(source_name + ":" + std::to_string(line_no) + ": duplicate utterance id '" +
                       utt.id + "'");
    }
    utts.push_back(std::move(utt));
  }
  return utts;
}

inline std::vector<Utterance> load_sequence_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open sequence file '" + path + "'");
  return parse_sequence_file(in, path);
}

// ---------------------------------------------------------------------------
// Alignment-step CSV: `utt_id,op,ref,hyp` rows followed by aggregate tally
// comments. This is what `phoneval align` writes and `phoneval confmat
// --align` reads back.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_fixed6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

}  // namespace detail

/// Writes per-utterance steps plus the aggregate tally. Throws when the
/// aggregate reference length is zero (the error rate is undefined).
inline void write_alignment_csv(std::ostream& out,
                                const std::vector<std::pair<std::string, Alignment>>& aligned) {
  EditTally total;
  for (const auto& [id, alignment] : aligned) total = total + tally(alignment);
  const double rate = error_rate(total);  // throws on entries == 0

  out << "utt_id,op,ref,hyp\n";
  for (const auto& [id, alignment] : aligned) {
    for (const auto& step : alignment.steps) {
      out << id << ',' << to_string(step.op) << ',' << step.ref << ',' << step.hyp << '\n';
    }
  }
  out << "# entries: " << total.entries << '\n';
  out << "# matches: " << total.matches << '\n';
  out << "# substitutions: " << total.substitutions << '\n';
  out << "# deletions: " << total.deletions << '\n';
  out << "# insertions: " << total.insertions << '\n';
  out << "# error_rate: " << detail::format_fixed6(rate) << '\n';
}

inline std::vector<std::pair<std::string, Alignment>> parse_alignment_csv(
    std::istream& in, const std::string& source_name) {
  std::vector<std::pair<std::string, Alignment>> aligned;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::strip_cr(std::move(line));
    const std::string where = source_name + ":" + std::to_string(line_no);
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "utt_id,op,ref,hyp") {
        throw ParseError(where + ": expected header 'utt_id,op,ref,hyp'");
      }
      header_seen = true;
      continue;
    }
    const std::vector<std::string> cells = detail::split_on(line, ',');
    if (cells.size() != 4) throw ParseError(where + ": expected 4 fields");
    const std::string& id = cells[0];
    const std::string& op_name = cells[1];
    AlignStep step;
    step.ref = cells[2];
    step.hyp = cells[3];
    if (op_name == "match") {
      step.op = EditOp::Match;
      if (step.ref.empty() || step.ref != step.hyp) {
        throw ParseError(where + ": match step requires identical ref and hyp");
      }
    } else if (op_name == "sub") {
      step.op = EditOp::Substitute;
      if (step.ref.empty() || step.hyp.empty()) {
        throw ParseError(where + ": sub step requires both ref and hyp");
      }
    } else if (op_name == "delete") {
      step.op = EditOp::Delete;
      if (step.ref.empty() || !step.hyp.empty()) {
        throw ParseError(where + ": delete step takes a ref phone only");
      }
    } else if (op_name == "insert") {
      step.op = EditOp::Insert;
      if (!step.ref.empty() || step.hyp.empty()) {
        throw ParseError(where + ": insert step takes a hyp phone only");
      }
    } else {
      throw ParseError(where + ": unknown op '" + op_name + "'");
    }
    if (aligned.empty() || aligned.back().first != id) {
      aligned.emplace_back(id, Alignment{});
    }
    Alignment& alignment = aligned.back().second;
    if (step.op != EditOp::Match) ++alignment.cost;
    alignment.steps.push_back(std::move(step));
  }
  if (!header_seen) throw ParseError(source_name + ": empty alignment file");
  return aligned;
}

inline std::vector<std::pair<std::string, Alignment>> load_alignment_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open alignment file '" + path + "'");
  return parse_alignment_csv(in, path);
}

}  // namespace phoneval
