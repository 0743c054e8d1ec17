// tools/phoneval_main.cpp
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

// Command-line front end: align -> confmat -> report -> render, plus noise
// mixing. Exit codes: 0 success, 1 partial batch failure, 2 usage or
// validation error. All outputs are byte-deterministic for fixed inputs,
// flags, and seed.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phoneval/phoneval.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitError = 2;

// Default data files: explicit flag > PHONEVAL_DATA_DIR > data/ next to the
// executable > the source-tree path baked in at build time.
fs::path default_data_dir() {
  if (const char* env = std::getenv("PHONEVAL_DATA_DIR")) return fs::path(env);
#ifdef __linux__
  std::error_code ec;
  const fs::path exe = fs::read_symlink("/proc/self/exe", ec);
  if (!ec) {
    const fs::path beside = exe.parent_path() / "data";
    if (fs::is_directory(beside, ec)) return beside;
  }
#endif
#ifdef PHONEVAL_SOURCE_DATA_DIR
  return fs::path(PHONEVAL_SOURCE_DATA_DIR);
#else
  return fs::path("data");
#endif
}

std::string resolve_data_file(const std::string& flag_value, const char* filename) {
  if (!flag_value.empty()) return flag_value;
  return (default_data_dir() / filename).string();
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw phoneval::ParseError("cannot write output '" + path + "'");
  return out;
}

// Pairs up ref/hyp utterances by id, requiring identical id sets; the
// first offending id is named.
std::vector<std::pair<std::string, phoneval::Alignment>> align_files(const std::string& ref_path,
                                                                     const std::string& hyp_path) {
  const auto ref_utts = phoneval::load_sequence_file(ref_path);
  const auto hyp_utts = phoneval::load_sequence_file(hyp_path);
  std::map<std::string, const phoneval::Utterance*> hyp_by_id;
  for (const auto& utt : hyp_utts) hyp_by_id[utt.id] = &utt;

  std::set<std::string> ref_ids;
  for (const auto& utt : ref_utts) ref_ids.insert(utt.id);
  for (const auto& utt : hyp_utts) {
    if (!ref_ids.count(utt.id)) {
      throw phoneval::ValidationError("utterance '" + utt.id + "' present in hypothesis only");
    }
  }

  std::vector<std::pair<std::string, phoneval::Alignment>> aligned;
  aligned.reserve(ref_utts.size());
  for (const auto& utt : ref_utts) {
    auto it = hyp_by_id.find(utt.id);
    if (it == hyp_by_id.end()) {
      throw phoneval::ValidationError("utterance '" + utt.id + "' missing from hypothesis");
    }
    aligned.emplace_back(utt.id, phoneval::align(utt.phones, it->second->phones));
  }
  return aligned;
}

phoneval::ConfusionMatrix matrix_from_aligned(
    const std::vector<std::pair<std::string, phoneval::Alignment>>& aligned,
    const std::string& condition) {
  std::set<std::string> inventory;
  std::vector<phoneval::Alignment> alignments;
  alignments.reserve(aligned.size());
  for (const auto& [id, alignment] : aligned) {
    for (const auto& step : alignment.steps) {
      if (!step.ref.empty()) inventory.insert(step.ref);
      if (!step.hyp.empty()) inventory.insert(step.hyp);
    }
    alignments.push_back(alignment);
  }
  phoneval::ConfusionMatrix m = phoneval::build_from_alignments(alignments, inventory);
  m.condition = condition;
  return m;
}

int run_align(const std::string& ref_path, const std::string& hyp_path,
              const std::string& out_path) {
  const auto aligned = align_files(ref_path, hyp_path);
  std::ofstream out = open_output(out_path);
  phoneval::write_alignment_csv(out, aligned);

  phoneval::EditTally total;
  for (const auto& [id, alignment] : aligned) total = total + phoneval::tally(alignment);
  std::cout << "aligned " << aligned.size() << " utterances: " << total.entries << " entries, "
            << total.substitutions << " sub, " << total.deletions << " del, "
            << total.insertions << " ins, error rate "
            << phoneval::detail::format_fixed6(phoneval::error_rate(total)) << '\n';
  return kExitOk;
}

int run_confmat(const std::string& align_path, const std::string& ref_path,
                const std::string& hyp_path, const std::string& condition,
                const std::string& out_path) {
  std::vector<std::pair<std::string, phoneval::Alignment>> aligned;
  if (!align_path.empty()) {
    aligned = phoneval::load_alignment_csv(align_path);
  } else {
    aligned = align_files(ref_path, hyp_path);
  }
  const phoneval::ConfusionMatrix m = matrix_from_aligned(aligned, condition);
  std::ofstream out = open_output(out_path);
  phoneval::write_matrix_csv(m, out);
  return kExitOk;
}

int run_report(const std::vector<std::string>& matrix_paths, const std::string& features_path,
               const std::string& scheme_path, const std::string& nr_policy_name,
               const std::string& out_path) {
  const phoneval::FeatureTable table =
      phoneval::load_feature_table(resolve_data_file(features_path, "features_default.tsv"));
  const phoneval::CategoryScheme scheme =
      phoneval::load_category_scheme(resolve_data_file(scheme_path, "scheme_default.txt"));
  const phoneval::NrPolicy policy = phoneval::nr_policy_from_string(nr_policy_name);

  std::vector<std::pair<std::string, phoneval::ConfusionMatrix>> conditions;
  conditions.reserve(matrix_paths.size());
  for (const auto& path : matrix_paths) {
    phoneval::ConfusionMatrix m = phoneval::load_matrix_csv(path);
    std::string condition = m.condition;
    if (condition.empty()) condition = fs::path(path).stem().string();
    conditions.emplace_back(std::move(condition), std::move(m));
  }
  const auto reports = phoneval::snr_report(conditions, scheme, table, policy);
  std::ofstream out = open_output(out_path);
  phoneval::write_report_csv(reports, out);
  return kExitOk;
}

int run_render(const std::string& matrix_path, const std::string& out_path,
               std::uint32_t cell_size, std::uint32_t gutter) {
  const phoneval::ConfusionMatrix m =
      phoneval::reorder_canonical(phoneval::load_matrix_csv(matrix_path));
  const phoneval::GreyImage img = phoneval::render_matrix(m, cell_size, gutter);
  phoneval::save_pgm(img, out_path);
  return kExitOk;
}

int run_mix(const std::string& in_dir, const std::string& out_dir, const std::string& levels_arg,
            std::uint64_t seed) {
  std::vector<double> levels;
  for (const auto& token : phoneval::detail::split_on(levels_arg, ',')) {
    if (token.empty()) continue;
    std::size_t used = 0;
    double level = 0.0;
    try {
      level = std::stod(token, &used);
    } catch (const std::exception&) {
      throw phoneval::ValidationError("malformed level '" + token + "'");
    }
    if (used != token.size()) {
      throw phoneval::ValidationError("malformed level '" + token + "'");
    }
    levels.push_back(level);
  }

  const auto manifest = phoneval::batch_mix(in_dir, out_dir, levels, seed);
  fs::create_directories(out_dir);
  std::ofstream out = open_output((fs::path(out_dir) / "manifest.csv").string());
  phoneval::write_manifest_csv(manifest, out);

  std::size_t failed = 0;
  for (const auto& entry : manifest) {
    if (entry.status != "ok") ++failed;
  }
  std::cout << "mixed " << (manifest.size() - failed) << " outputs, " << failed << " failures\n";
  return failed == 0 ? kExitOk : kExitPartial;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phoneval: sub-phonemic evaluation of phone recognition results"};
  app.require_subcommand(1);

  // align
  auto* align_cmd = app.add_subcommand("align", "align hypothesis to reference phone sequences");
  std::string align_ref, align_hyp, align_out;
  align_cmd->add_option("--ref", align_ref, "reference sequence file")->required();
  align_cmd->add_option("--hyp", align_hyp, "hypothesis sequence file")->required();
  align_cmd->add_option("--out", align_out, "output alignment CSV")->required();

  // confmat
  auto* confmat_cmd = app.add_subcommand("confmat", "tabulate alignments into a confusion matrix");
  std::string cm_align, cm_ref, cm_hyp, cm_condition, cm_out;
  confmat_cmd->add_option("--align", cm_align, "alignment CSV from 'phoneval align'");
  confmat_cmd->add_option("--ref", cm_ref, "reference sequence file");
  confmat_cmd->add_option("--hyp", cm_hyp, "hypothesis sequence file");
  confmat_cmd->add_option("--condition", cm_condition, "condition label (e.g. SNR=-6dB)");
  confmat_cmd->add_option("--out", cm_out, "output matrix CSV")->required();

  // report
  auto* report_cmd = app.add_subcommand("report", "compute error rates and DF-distance per matrix");
  std::vector<std::string> rp_matrices;
  std::string rp_features, rp_scheme, rp_policy = "max", rp_out;
  report_cmd->add_option("--matrix", rp_matrices, "matrix CSV (repeatable, report order)")
      ->required();
  report_cmd->add_option("--features", rp_features, "feature table (default: shipped table)");
  report_cmd->add_option("--scheme", rp_scheme, "category scheme (default: shipped scheme)");
  report_cmd->add_option("--nr-policy", rp_policy, "NR handling in DF-distance: max|exclude");
  report_cmd->add_option("--out", rp_out, "output report CSV")->required();

  // render
  auto* render_cmd = app.add_subcommand("render", "render a matrix as a grey-scale PGM");
  std::string rd_matrix, rd_out;
  std::uint32_t rd_cell = 16, rd_gutter = 24;
  render_cmd->add_option("--matrix", rd_matrix, "matrix CSV")->required();
  render_cmd->add_option("--out", rd_out, "output PGM path")->required();
  render_cmd->add_option("--cell-size", rd_cell, "pixels per matrix cell");
  render_cmd->add_option("--gutter", rd_gutter, "pixels reserved for axis labels");

  // mix
  auto* mix_cmd = app.add_subcommand("mix", "mix white noise into WAV files at target SNRs");
  std::string mx_in, mx_out, mx_levels;
  std::uint64_t mx_seed = 1;
  mix_cmd->add_option("--in", mx_in, "input directory of mono 16-bit WAVs")->required();
  mix_cmd->add_option("--out", mx_out, "output directory")->required();
  mix_cmd->add_option("--levels", mx_levels, "comma-separated SNR targets in dB")->required();
  mix_cmd->add_option("--seed", mx_seed, "master RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (align_cmd->parsed()) return run_align(align_ref, align_hyp, align_out);
    if (confmat_cmd->parsed()) {
      const bool has_pair = !cm_ref.empty() && !cm_hyp.empty();
      if (cm_align.empty() == !has_pair) {
        throw phoneval::ValidationError("confmat needs either --align or both --ref and --hyp");
      }
      return run_confmat(cm_align, cm_ref, cm_hyp, cm_condition, cm_out);
    }
    if (report_cmd->parsed()) {
      return run_report(rp_matrices, rp_features, rp_scheme, rp_policy, rp_out);
    }
    if (render_cmd->parsed()) return run_render(rd_matrix, rd_out, rd_cell, rd_gutter);
    if (mix_cmd->parsed()) return run_mix(mx_in, mx_out, mx_levels, mx_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
