// tests/test_align.cpp
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

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>
#include <vector>

#include "phoneval/align.hpp"

using namespace phoneval;

namespace {

using Seq = std::vector<std::string>;

// Independent oracle: the edit-distance recurrence evaluated directly on
// sequence suffixes, no traceback, no tie-breaking.
int brute_cost(const Seq& a, const Seq& b, std::size_t i, std::size_t j) {
  if (i == a.size()) return static_cast<int>(b.size() - j);
  if (j == b.size()) return static_cast<int>(a.size() - i);
  const int diag = brute_cost(a, b, i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
  const int del = brute_cost(a, b, i + 1, j) + 1;
  const int ins = brute_cost(a, b, i, j + 1) + 1;
  return std::min({diag, del, ins});
}

Seq project_ref(const Alignment& alignment) {
  Seq out;
  for (const auto& step : alignment.steps) {
    if (step.op != EditOp::Insert) out.push_back(step.ref);
  }
  return out;
}

Seq project_hyp(const Alignment& alignment) {
  Seq out;
  for (const auto& step : alignment.steps) {
    if (step.op != EditOp::Delete) out.push_back(step.hyp);
  }
  return out;
}

}  // namespace

TEST_CASE("forced single-step alignments") {
  SECTION("substitution") {
    const Alignment a = align({"b"}, {"d"});
    REQUIRE(a.cost == 1);
    REQUIRE(a.steps == std::vector<AlignStep>{{EditOp::Substitute, "b", "d"}});
  }
  SECTION("identity") {
    const Alignment a = align({"s"}, {"s"});
    REQUIRE(a.cost == 0);
    REQUIRE(a.steps == std::vector<AlignStep>{{EditOp::Match, "s", "s"}});
  }
  SECTION("deletion in the middle") {
    const Alignment a = align({"p", "t", "k"}, {"p", "k"});
    REQUIRE(a.cost == 1);
    REQUIRE(a.steps == std::vector<AlignStep>{{EditOp::Match, "p", "p"},
                                              {EditOp::Delete, "t", ""},
                                              {EditOp::Match, "k", "k"}});
  }
}

TEST_CASE("tally counts step kinds and reference entries") {
  SECTION("identity of length 5") {
    const Seq x = {"p", "t", "k", "s", "m"};
    const EditTally t = tally(align(x, x));
    REQUIRE(t.matches == 5);
    REQUIRE(t.substitutions == 0);
    REQUIRE(t.deletions == 0);
    REQUIRE(t.insertions == 0);
    REQUIRE(t.entries == 5);
  }
  SECTION("deletion case") {
    const EditTally t = tally(align({"p", "t", "k"}, {"p", "k"}));
    REQUIRE(t.matches == 2);
    REQUIRE(t.deletions == 1);
    REQUIRE(t.entries == 3);
  }
  SECTION("pure insertion") {
    const EditTally t = tally(align({}, {"m"}));
    REQUIRE(t.matches == 0);
    REQUIRE(t.insertions == 1);
    REQUIRE(t.entries == 0);
  }
}

TEST_CASE("error_rate follows (D+I+S)/entries") {
  REQUIRE(error_rate(EditTally{5, 0, 0, 0, 5}) == 0.0);
  REQUIRE(error_rate(EditTally{2, 0, 1, 0, 3}) == Catch::Approx(1.0 / 3.0));
  REQUIRE(error_rate(EditTally{0, 1, 1, 1, 2}) == Catch::Approx(1.5));
  REQUIRE_THROWS_AS(error_rate(EditTally{0, 0, 0, 1, 0}), ValidationError);
}

TEST_CASE("alignment projections reproduce the inputs") {
  std::mt19937 rng(23);
  const Seq alphabet = {"p", "t", "k", "s"};
  for (int trial = 0; trial < 300; ++trial) {
    Seq ref(rng() % 7), hyp(rng() % 7);
    for (auto& x : ref) x = alphabet[rng() % alphabet.size()];
    for (auto& x : hyp) x = alphabet[rng() % alphabet.size()];
    const Alignment a = align(ref, hyp);
    REQUIRE(project_ref(a) == ref);
    REQUIRE(project_hyp(a) == hyp);
    const EditTally t = tally(a);
    REQUIRE(t.matches + t.substitutions + t.deletions == ref.size());
    REQUIRE(static_cast<int>(t.substitutions + t.deletions + t.insertions) == a.cost);
  }
}

TEST_CASE("cost equals the brute-force recurrence for short pairs") {
  const Seq alphabet = {"p", "t", "k", "s"};
  std::vector<Seq> seqs = {{}};
  for (int len = 1; len <= 3; ++len) {
    std::vector<Seq> next;
    for (const auto& s : seqs) {
      if (s.size() == static_cast<std::size_t>(len - 1)) {
        for (const auto& x : alphabet) {
          Seq extended = s;
          extended.push_back(x);
          next.push_back(extended);
        }
      }
    }
    seqs.insert(seqs.end(), next.begin(), next.end());
  }
  for (const auto& a : seqs) {
    for (const auto& b : seqs) {
      REQUIRE(align(a, b).cost == brute_cost(a, b, 0, 0));
    }
  }
}

TEST_CASE("alignment is deterministic and symmetric in cost") {
  std::mt19937 rng(5);
  const Seq alphabet = {"p", "b", "m", "s", "sh"};
  for (int trial = 0; trial < 200; ++trial) {
    Seq ref(rng() % 8), hyp(rng() % 8);
    for (auto& x : ref) x = alphabet[rng() % alphabet.size()];
    for (auto& x : hyp) x = alphabet[rng() % alphabet.size()];

    const Alignment first = align(ref, hyp);
    const Alignment second = align(ref, hyp);
    REQUIRE(first.steps == second.steps);

    const Alignment swapped = align(hyp, ref);
    REQUIRE(first.cost == swapped.cost);
    REQUIRE(align(ref, ref).cost == 0);

    // Delete/Insert trade places when the arguments swap.
    const EditTally forward = tally(first);
    const EditTally backward = tally(swapped);
    REQUIRE(static_cast<long long>(forward.deletions) - static_cast<long long>(forward.insertions) ==
            static_cast<long long>(backward.insertions) - static_cast<long long>(backward.deletions));
  }
}

TEST_CASE("align rejects the sentinel") {
  REQUIRE_THROWS_AS(align({"NR"}, {"p"}), ValidationError);
  REQUIRE_THROWS_AS(align({"p"}, {"NR"}), ValidationError);
}

TEST_CASE("sequence files parse one utterance per line") {
  std::stringstream in(
      "# comment line\n"
      "u1\tp t k\n"
      "u2\ts   sh\n"
      "\n"
      "u3\t\n");
  const auto utts = parse_sequence_file(in, "test");
  REQUIRE(utts.size() == 3);
  REQUIRE(utts[0].id == "u1");
  REQUIRE(utts[0].phones == Seq{"p", "t", "k"});
  REQUIRE(utts[1].phones == Seq{"s", "sh"});
  REQUIRE(utts[2].phones.empty());

  std::stringstream dup("u1\tp\nu1\tt\n");
  REQUIRE_THROWS_AS(parse_sequence_file(dup, "test"), ParseError);
}

TEST_CASE("alignment CSV round trips") {
  std::vector<std::pair<std::string, Alignment>> aligned;
  aligned.emplace_back("u1", align({"p", "t", "k"}, {"p", "k"}));
  aligned.emplace_back("u2", align({"s"}, {"s", "m"}));

  std::stringstream buf;
  write_alignment_csv(buf, aligned);
  const auto parsed = parse_alignment_csv(buf, "test");
  REQUIRE(parsed.size() == 2);
  REQUIRE(parsed[0].first == "u1");
  REQUIRE(parsed[0].second.steps == aligned[0].second.steps);
  REQUIRE(parsed[0].second.cost == aligned[0].second.cost);
  REQUIRE(parsed[1].second.steps == aligned[1].second.steps);

  SECTION("aggregate comments carry the tally") {
    const std::string text = buf.str();
    REQUIRE(text.find("# entries: 4") != std::string::npos);
    REQUIRE(text.find("# deletions: 1") != std::string::npos);
    REQUIRE(text.find("# insertions: 1") != std::string::npos);
    REQUIRE(text.find("# error_rate: 0.500000") != std::string::npos);
  }
}

TEST_CASE("alignment CSV rejects malformed steps") {
  std::stringstream bad_op("utt_id,op,ref,hyp\nu1,swap,p,b\n");
  REQUIRE_THROWS_AS(parse_alignment_csv(bad_op, "test"), ParseError);
  std::stringstream bad_match("utt_id,op,ref,hyp\nu1,match,p,b\n");
  REQUIRE_THROWS_AS(parse_alignment_csv(bad_match, "test"), ParseError);
  std::stringstream bad_delete("utt_id,op,ref,hyp\nu1,delete,p,b\n");
  REQUIRE_THROWS_AS(parse_alignment_csv(bad_delete, "test"), ParseError);
}
