#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "formeclust/imposition.hpp"
#include "formeclust/kernel.hpp"
#include "formeclust/metrics.hpp"
#include "formeclust/profiling.hpp"
#include "formeclust/spectral.hpp"

namespace formeclust {

/// Everything needed to reproduce a clustering run. Defaults are the
/// configuration used for the reported results: 5 quantile bins, p = 4,
/// 5 neighbours, sheet-side units.
struct RunConfig {
  std::filesystem::path manifest_path;
  UnitScheme scheme = UnitScheme::sheet_sides;
  ProfileConfig profile;
  KernelOptions kernel;
  std::size_t k_neighbors = 5;
  std::optional<std::size_t> k;  // cluster count; read from gold labels when absent
  std::uint64_t seed = 17;
  int n_seeds = 1;  // seeds used: seed, seed+1, ...
  std::optional<int> threads;
  std::filesystem::path output_dir = ".";
};

/// Evaluation with the pred->gold mapping expressed in label names.
struct NamedEval {
  EvalReport report;
  std::vector<std::pair<std::string, std::string>> mapping;
};

NamedEval evaluate_named(const std::vector<std::string>& gold, const std::vector<std::string>& pred);

struct SeedRun {
  std::uint64_t seed = 0;
  ClusterAssignment assignment;
  std::optional<NamedEval> eval;
};

struct MeanScores {
  double v_measure = 0.0;
  double one_to_one = 0.0;
  double many_to_one = 0.0;
};

struct RunResult {
  RunConfig config;
  std::vector<UnitLayout> units;
  std::vector<std::optional<std::string>> gold;  // per unit
  DistanceMatrix distances;
  std::size_t k = 0;
  std::vector<SeedRun> runs;
  std::optional<MeanScores> mean;
  std::map<std::string, double> timings_ms;
  std::vector<std::string> warnings;
};

/// Quantizes every non-blank page title. Relative image paths resolve against
/// base_dir. Pages are processed in parallel; a failure names the page index.
std::map<int, QuantizedTitle> profile_book(const BookManifest& manifest, const std::filesystem::path& base_dir,
                                           const ProfileConfig& config);

std::vector<ClusterUnit> make_cluster_units(const std::vector<UnitLayout>& layouts,
                                            const std::map<int, QuantizedTitle>& titles);

/// Runs units -> distances -> clustering -> evaluation on already profiled titles.
RunResult run_clustering(const BookManifest& manifest, const std::map<int, QuantizedTitle>& titles,
                         const RunConfig& config);

/// Loads the manifest and titles from disk, then run_clustering.
RunResult run_pipeline(const RunConfig& config);

std::string format_labels_csv(const RunResult& result);
std::string format_report_json(const RunResult& result, bool include_metadata = true);
std::string format_eval_json(const NamedEval& eval);

/// `cluster`: runs the pipeline and writes labels.csv, distances.csv, report.json.
RunResult cmd_cluster(const RunConfig& config);

/// `eval`: compares two unit_id,label CSVs covering the same unit ids.
NamedEval cmd_eval(const std::filesystem::path& gold_csv, const std::filesystem::path& pred_csv,
                   const std::optional<std::filesystem::path>& out_json);

/// `plot`: staircase SVG of predicted (and optionally gold) labels in book order.
void cmd_plot(const std::filesystem::path& labels_csv, const std::filesystem::path& manifest_path, UnitScheme scheme,
              const std::optional<std::filesystem::path>& gold_csv, const std::filesystem::path& out_svg);

/// `montage`: PNG grid, one row per unit and one column per slot position.
void cmd_montage(const std::filesystem::path& manifest_path, UnitScheme scheme, const std::filesystem::path& out_png);

/// `synth`: materializes a synthetic book directory.
void cmd_synth(const std::filesystem::path& spec_path, std::uint64_t seed, const std::filesystem::path& out_dir);

struct AblationRow {
  std::string method;
  MeanScores scores;
};

/// `ablate`: all three unit schemes plus the three random baselines (computed
/// on sheet-side units), averaged over the configured seeds.
std::vector<AblationRow> run_ablation(const BookManifest& manifest, const std::map<int, QuantizedTitle>& titles,
                                      const RunConfig& config);
std::vector<AblationRow> cmd_ablate(const RunConfig& config);
std::string format_ablation_csv(const std::vector<AblationRow>& rows);

/// Reads a two-column unit_id,label CSV.
std::vector<std::pair<std::string, std::string>> read_label_csv(const std::filesystem::path& path);

}  // namespace formeclust
