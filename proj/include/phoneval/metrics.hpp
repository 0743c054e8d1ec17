// phoneval/metrics.hpp
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

#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "phoneval/confmat.hpp"
#include "phoneval/error.hpp"
#include "phoneval/phoneset.hpp"

namespace phoneval {

/// How "No Response" cells enter the distinctive-feature distance:
/// MaxDistance scores them at 2F (a total miss), Exclude drops them from
/// numerator and denominator.
enum class NrPolicy { MaxDistance, Exclude };

inline NrPolicy nr_policy_from_string(const std::string& name) {
  if (name == "max" || name == "max-distance") return NrPolicy::MaxDistance;
  if (name == "exclude") return NrPolicy::Exclude;
  throw ValidationError("unknown NR policy '" + name + "' (expected 'max' or 'exclude')");
}

/// (off-diagonal + NR + side insertions) / grand total. Exceeds 1 only
/// when the side insertion tally is nonzero.
inline double overall_error(const ConfusionMatrix& m) {
  const std::uint64_t total = grand_total(m);
  if (total == 0) throw ValidationError("overall_error: empty matrix");
  std::uint64_t errors = m.insertions;
  for (std::size_t i = 0; i < m.ref_labels.size(); ++i) {
    for (std::size_t j = 0; j < m.resp_labels.size(); ++j) {
      if (m.resp_labels[j] != m.ref_labels[i]) errors += m.counts[i][j];
    }
  }
  return static_cast<double>(errors) / static_cast<double>(total);
}

/// The matrix-only variant of overall_error (insertions excluded); always
/// in [0, 1].
inline double matrix_error(const ConfusionMatrix& m) {
  const std::uint64_t total = grand_total(m);
  if (total == 0) throw ValidationError("matrix_error: empty matrix");
  std::uint64_t errors = 0;
  for (std::size_t i = 0; i < m.ref_labels.size(); ++i) {
    for (std::size_t j = 0; j < m.resp_labels.size(); ++j) {
      if (m.resp_labels[j] != m.ref_labels[i]) errors += m.counts[i][j];
    }
  }
  return static_cast<double>(errors) / static_cast<double>(total);
}

struct FeatureErrorRates {
  double manner = 0.0;
  std::optional<double> place;  // absent when no cell is place-classifiable
  double voicing = 0.0;
  std::uint64_t manner_trials = 0;
  std::uint64_t place_trials = 0;
  std::uint64_t voicing_trials = 0;
};

/// Mass in cross-class cells over mass in classifiable cells, per
/// dimension. NR responses count as errors for every measure; cells where
/// either phone lacks a place class are excluded from the place
/// denominator entirely.
inline FeatureErrorRates feature_error_rates(const ConfusionMatrix& m,
                                             const CategoryScheme& scheme) {
  for (const auto& label : m.ref_labels) {
    scheme.manner_of(label);  // throws if uncovered
  }
  for (const auto& label : m.resp_labels) {
    if (!is_no_response(label)) scheme.manner_of(label);
  }

  std::uint64_t manner_num = 0, manner_den = 0;
  std::uint64_t place_num = 0, place_den = 0;
  std::uint64_t voicing_num = 0, voicing_den = 0;
  for (std::size_t i = 0; i < m.ref_labels.size(); ++i) {
    const std::string& ref = m.ref_labels[i];
    const auto ref_place = scheme.place_of(ref);
    for (std::size_t j = 0; j < m.resp_labels.size(); ++j) {
      const std::uint64_t c = m.counts[i][j];
      if (c == 0) continue;
      const std::string& resp = m.resp_labels[j];
      if (is_no_response(resp)) {
        manner_den += c;
        manner_num += c;
        voicing_den += c;
        voicing_num += c;
        if (ref_place) {
          place_den += c;
          place_num += c;
        }
        continue;
      }
      manner_den += c;
      if (scheme.manner_of(ref) != scheme.manner_of(resp)) manner_num += c;
      voicing_den += c;
      if (scheme.voicing_of(ref) != scheme.voicing_of(resp)) voicing_num += c;
      if (ref_place) {
        const auto resp_place = scheme.place_of(resp);
        if (resp_place) {
          place_den += c;
          if (*ref_place != *resp_place) place_num += c;
        }
      }
    }
  }

  if (manner_den == 0) {
    throw ValidationError("feature_error_rates: empty matrix");
  }
  FeatureErrorRates rates;
  rates.manner = static_cast<double>(manner_num) / static_cast<double>(manner_den);
  rates.voicing = static_cast<double>(voicing_num) / static_cast<double>(voicing_den);
  rates.manner_trials = manner_den;
  rates.voicing_trials = voicing_den;
  rates.place_trials = place_den;
  if (place_den > 0) {
    rates.place = static_cast<double>(place_num) / static_cast<double>(place_den);
  }
  return rates;
}

/// Count-weighted mean per-pair feature distance, normalized by the table
/// maximum 2F; in [0, 1]. Zero exactly when all mass sits on the
/// exact-match diagonal.
inline double df_distance(const ConfusionMatrix& m, const FeatureTable& table,
                          NrPolicy policy) {
  for (const auto& label : m.ref_labels) table.row(label);
  for (const auto& label : m.resp_labels) {
    if (!is_no_response(label)) table.row(label);
  }
  const std::uint64_t max_distance = static_cast<std::uint64_t>(table.max_pair_distance());

  std::uint64_t num = 0, den = 0;
  for (std::size_t i = 0; i < m.ref_labels.size(); ++i) {
    for (std::size_t j = 0; j < m.resp_labels.size(); ++j) {
      const std::uint64_t c = m.counts[i][j];
      if (c == 0) continue;
      if (is_no_response(m.resp_labels[j])) {
        if (policy == NrPolicy::Exclude) continue;
        num += c * max_distance;
        den += c;
        continue;
      }
      num += c * static_cast<std::uint64_t>(
                     feature_distance(m.ref_labels[i], m.resp_labels[j], table));
      den += c;
    }
  }
  if (den == 0) {
    throw ValidationError("df_distance: no in-scope trials (empty effective denominator)");
  }
  return static_cast<double>(num) /
         (static_cast<double>(max_distance) * static_cast<double>(den));
}

/// Per-condition summary behind the error-pattern and DF-distance curves.
struct ErrorReport {
  std::string condition;
  double overall = 0.0;
  double manner = 0.0;
  std::optional<double> place;
  double voicing = 0.0;
  double df = 0.0;
  std::uint64_t n_trials = 0;  // matrix grand total
  std::uint64_t manner_trials = 0;
  std::uint64_t place_trials = 0;
  std::uint64_t voicing_trials = 0;
};

inline ErrorReport make_report(const std::string& condition, const ConfusionMatrix& m,
                               const CategoryScheme& scheme, const FeatureTable& table,
                               NrPolicy policy) {
  ErrorReport report;
  report.condition = condition;
  report.overall = overall_error(m);
  const FeatureErrorRates rates = feature_error_rates(m, scheme);
  report.manner = rates.manner;
  report.place = rates.place;
  report.voicing = rates.voicing;
  report.df = df_distance(m, table, policy);
  report.n_trials = grand_total(m);
  report.manner_trials = rates.manner_trials;
  report.place_trials = rates.place_trials;
  report.voicing_trials = rates.voicing_trials;
  return report;
}

/// One report per (condition, matrix), in caller order; conditions must be
/// unique.
inline std::vector<ErrorReport> snr_report(
    const std::vector<std::pair<std::string, ConfusionMatrix>>& conditions,
    const CategoryScheme& scheme, const FeatureTable& table, NrPolicy policy) {
  std::set<std::string> seen;
  for (const auto& [condition, matrix] : conditions) {
    if (!seen.insert(condition).second) {
      throw ValidationError("snr_report: duplicate condition '" + condition + "'");
    }
  }
  std::vector<ErrorReport> reports;
  reports.reserve(conditions.size());
  for (const auto& [condition, matrix] : conditions) {
    reports.push_back(make_report(condition, matrix, scheme, table, policy));
  }
  return reports;
}

namespace detail {

inline std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace detail

/// Report CSV: one row per condition in caller order, rates with 6 decimal
/// places, an undefined place rate as an empty field.
inline void write_report_csv(const std::vector<ErrorReport>& reports, std::ostream& out) {
  out << "condition,overall,manner,place,voicing,df_distance,n_trials\n";
  for (const auto& r : reports) {
    out << detail::csv_field(r.condition) << ',' << detail::format_fixed6(r.overall) << ','
        << detail::format_fixed6(r.manner) << ','
        << (r.place ? detail::format_fixed6(*r.place) : std::string()) << ','
        << detail::format_fixed6(r.voicing) << ',' << detail::format_fixed6(r.df) << ','
        << r.n_trials << '\n';
  }
}

}  // namespace phoneval
