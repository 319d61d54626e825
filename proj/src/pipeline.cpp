#include "formeclust/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <json.hpp>
#include <set>

#include "formeclust/csv.hpp"
#include "formeclust/error.hpp"
#include "formeclust/plot.hpp"
#include "formeclust/rng.hpp"
#include "formeclust/synth.hpp"

namespace formeclust {

using ojson = nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

BookManifest load_manifest(const std::filesystem::path& path) {
  try {
    return parse_manifest(read_text_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::filesystem::path base_dir_of(const std::filesystem::path& manifest_path) {
  auto dir = manifest_path.parent_path();
  return dir.empty() ? std::filesystem::path(".") : dir;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ojson eval_to_json(const NamedEval& eval) {
  ojson mapping = ojson::object();
  for (const auto& [pred, gold] : eval.mapping) mapping[pred] = gold;
  const auto& r = eval.report;
  return ojson{{"v_measure", r.v_measure},     {"homogeneity", r.homogeneity}, {"completeness", r.completeness},
               {"one_to_one", r.one_to_one},   {"many_to_one", r.many_to_one}, {"mapping", std::move(mapping)},
               {"n", r.n}};
}

ojson mean_to_json(const MeanScores& m) {
  return ojson{{"v_measure", m.v_measure}, {"one_to_one", m.one_to_one}, {"many_to_one", m.many_to_one}};
}

MeanScores mean_of(const std::vector<MeanScores>& xs) {
  MeanScores m;
  for (const auto& x : xs) {
    m.v_measure += x.v_measure;
    m.one_to_one += x.one_to_one;
    m.many_to_one += x.many_to_one;
  }
  const auto n = static_cast<double>(xs.size());
  m.v_measure /= n;
  m.one_to_one /= n;
  m.many_to_one /= n;
  return m;
}

MeanScores scores_of(const EvalReport& r) { return {r.v_measure, r.one_to_one, r.many_to_one}; }

std::string label_string(int label) { return std::to_string(label); }

}  // namespace

NamedEval evaluate_named(const std::vector<std::string>& gold, const std::vector<std::string>& pred) {
  if (gold.size() != pred.size()) {
    throw ConfigError("label count mismatch: " + std::to_string(gold.size()) + " gold vs " +
                      std::to_string(pred.size()) + " predicted");
  }
  const auto g = encode_labels(gold);
  const auto p = encode_labels(pred);
  NamedEval out;
  out.report = evaluate(g.codes, p.codes);
  for (const auto& [pc, gc] : out.report.mapping) {
    out.mapping.emplace_back(p.names[static_cast<std::size_t>(pc)], g.names[static_cast<std::size_t>(gc)]);
  }
  return out;
}

std::map<int, QuantizedTitle> profile_book(const BookManifest& manifest, const std::filesystem::path& base_dir,
                                           const ProfileConfig& config) {
  std::vector<const PageRecord*> todo;
  for (const auto& page : manifest.pages) {
    if (page.image_path) todo.push_back(&page);
  }
  std::vector<QuantizedTitle> out(todo.size());
  std::vector<std::string> errors(todo.size());
  std::vector<int> error_kind(todo.size(), 0);  // 0 none, else ExitCode value

  const auto n = static_cast<std::ptrdiff_t>(todo.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      std::filesystem::path path = *todo[idx]->image_path;
      if (path.is_relative()) path = base_dir / path;
      out[idx] = quantize_title(load_title_image(path), config);
    } catch (const Error& e) {
      errors[idx] = e.what();
      error_kind[idx] = static_cast<int>(e.code());
    } catch (const std::exception& e) {
      errors[idx] = e.what();
      error_kind[idx] = static_cast<int>(ExitCode::io);
    }
  }

  // Report the failing page with the lowest index so errors do not depend on scheduling.
  std::map<int, QuantizedTitle> titles;
  for (std::size_t i = 0; i < todo.size(); ++i) {
    const int page = todo[i]->global_index;
    if (error_kind[i] != 0) {
      const std::string msg = "page " + std::to_string(page) + ": " + errors[i];
      switch (static_cast<ExitCode>(error_kind[i])) {
        case ExitCode::config:
          throw ConfigError(msg);
        case ExitCode::numerical:
          throw NumericalError(msg);
        default:
          throw IoError(msg, page);
      }
    }
    titles.emplace(page, std::move(out[i]));
  }
  return titles;
}

std::vector<ClusterUnit> make_cluster_units(const std::vector<UnitLayout>& layouts,
                                            const std::map<int, QuantizedTitle>& titles) {
  std::vector<ClusterUnit> units;
  units.reserve(layouts.size());
  for (const auto& layout : layouts) {
    ClusterUnit u;
    u.id = layout.id;
    for (int page : layout.slot_pages) {
      auto it = titles.find(page);
      if (it == titles.end()) {
        u.slots.emplace_back(std::nullopt);
      } else {
        u.slots.emplace_back(it->second);
      }
    }
    units.push_back(std::move(u));
  }
  return units;
}

RunResult run_clustering(const BookManifest& manifest, const std::map<int, QuantizedTitle>& titles,
                         const RunConfig& config) {
  if (config.n_seeds < 1) throw ConfigError("--seeds must be at least 1");
  RunResult result;
  result.config = config;
  result.warnings = manifest.warnings;

  auto t0 = Clock::now();
  result.units = build_units(manifest, config.scheme);
  if (result.units.size() < 2) {
    throw ConfigError("need at least 2 units under scheme " + std::string(scheme_name(config.scheme)) + ", got " +
                      std::to_string(result.units.size()));
  }
  for (const auto& u : result.units) result.gold.push_back(unit_gold_label(manifest, u));
  const auto cluster_units = make_cluster_units(result.units, titles);
  result.timings_ms["units"] = elapsed_ms(t0);

  t0 = Clock::now();
  result.distances = distance_matrix(cluster_units, config.kernel);
  result.timings_ms["kernel"] = elapsed_ms(t0);

  std::vector<std::size_t> gold_idx;
  std::vector<std::string> gold_names;
  for (std::size_t i = 0; i < result.gold.size(); ++i) {
    if (result.gold[i]) {
      gold_idx.push_back(i);
      gold_names.push_back(*result.gold[i]);
    }
  }
  if (!gold_idx.empty() && gold_idx.size() < result.units.size()) {
    result.warnings.push_back("gold labels cover " + std::to_string(gold_idx.size()) + " of " +
                              std::to_string(result.units.size()) + " units; evaluating that subset");
  }

  if (config.k) {
    result.k = *config.k;
  } else {
    if (gold_names.empty()) throw ConfigError("--k is required when the manifest has no gold labels");
    result.k = std::set<std::string>(gold_names.begin(), gold_names.end()).size();
  }
  if (result.k < 1 || result.k > result.units.size()) {
    throw ConfigError("K = " + std::to_string(result.k) + " must lie in [1, " + std::to_string(result.units.size()) +
                      "]");
  }
  std::size_t knn = config.k_neighbors;
  if (knn >= result.units.size()) {
    knn = result.units.size() - 1;
    result.warnings.push_back("k_neighbors reduced to " + std::to_string(knn) + " (only " +
                              std::to_string(result.units.size()) + " units)");
  }

  t0 = Clock::now();
  for (int s = 0; s < config.n_seeds; ++s) {
    SeedRun run;
    run.seed = config.seed + static_cast<std::uint64_t>(s);
    run.assignment = cluster(result.distances, result.k, knn, run.seed);
    result.runs.push_back(std::move(run));
  }
  result.timings_ms["cluster"] = elapsed_ms(t0);

  t0 = Clock::now();
  if (!gold_idx.empty()) {
    std::vector<MeanScores> per_seed;
    for (auto& run : result.runs) {
      std::vector<std::string> pred;
      for (std::size_t i : gold_idx) pred.push_back(label_string(run.assignment.labels[i]));
      run.eval = evaluate_named(gold_names, pred);
      per_seed.push_back(scores_of(run.eval->report));
    }
    result.mean = mean_of(per_seed);
  }
  result.timings_ms["eval"] = elapsed_ms(t0);
  return result;
}

RunResult run_pipeline(const RunConfig& config) {
  if (config.threads) {
    if (*config.threads < 1) throw ConfigError("--threads must be at least 1");
    omp_set_num_threads(*config.threads);
  }
  auto t0 = Clock::now();
  const auto manifest = load_manifest(config.manifest_path);
  const double load_ms = elapsed_ms(t0);
  t0 = Clock::now();
  const auto titles = profile_book(manifest, base_dir_of(config.manifest_path), config.profile);
  const double profile_ms = elapsed_ms(t0);
  auto result = run_clustering(manifest, titles, config);
  result.timings_ms["manifest"] = load_ms;
  result.timings_ms["profile"] = profile_ms;
  return result;
}

std::string format_labels_csv(const RunResult& result) { return format_assignment_csv(result.runs.at(0).assignment); }

std::string format_eval_json(const NamedEval& eval) { return eval_to_json(eval).dump(2) + "\n"; }

std::string format_report_json(const RunResult& result, bool include_metadata) {
  const auto& c = result.config;
  ojson config{
      {"manifest", c.manifest_path.string()},
      {"unit_scheme", std::string(scheme_name(c.scheme))},
      {"n_bins", c.profile.n_bins},
      {"bin_strategy", std::string(strategy_name(c.profile.strategy))},
      {"binarize", c.profile.binarize},
      {"p", std::isinf(c.kernel.p) ? ojson("inf") : ojson(c.kernel.p)},
      {"normalize", c.kernel.normalize},
      {"k_neighbors", c.k_neighbors},
      {"K", result.k},
      {"K_from_gold", !c.k.has_value()},
      {"seed", c.seed},
      {"n_seeds", c.n_seeds},
  };
  ojson runs = ojson::array();
  for (const auto& run : result.runs) {
    ojson labels = ojson::object();
    for (std::size_t i = 0; i < run.assignment.unit_ids.size(); ++i) {
      labels[run.assignment.unit_ids[i]] = run.assignment.labels[i];
    }
    ojson r{{"seed", run.seed}, {"inertia", run.assignment.inertia}, {"labels", std::move(labels)}};
    if (run.eval) r["eval"] = eval_to_json(*run.eval);
    runs.push_back(std::move(r));
  }
  ojson doc{{"config", std::move(config)},
            {"prng", kRngAlgorithm},
            {"n_units", result.units.size()},
            {"runs", std::move(runs)}};
  if (result.runs.front().eval) doc["eval"] = eval_to_json(*result.runs.front().eval);
  if (result.mean) doc["mean"] = mean_to_json(*result.mean);
  doc["warnings"] = result.warnings;
  if (include_metadata) {
    ojson timings = ojson::object();
    for (const auto& [stage, ms] : result.timings_ms) timings[stage] = ms;
    doc["metadata"] = ojson{{"timestamp", utc_timestamp()},
                            {"threads", omp_get_max_threads()},
                            {"timings_ms", std::move(timings)}};
  }
  return doc.dump(2) + "\n";
}

RunResult cmd_cluster(const RunConfig& config) {
  auto result = run_pipeline(config);
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) throw IoError("cannot create " + config.output_dir.string() + ": " + ec.message());
  write_file_atomic(config.output_dir / "labels.csv", format_labels_csv(result));
  write_file_atomic(config.output_dir / "distances.csv", format_distance_csv(result.distances));
  write_file_atomic(config.output_dir / "report.json", format_report_json(result));
  return result;
}

std::vector<std::pair<std::string, std::string>> read_label_csv(const std::filesystem::path& path) {
  const auto table = read_csv(path);
  if (table.header.size() != 2) throw ConfigError(path.string() + ": expected two columns unit_id,label");
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> seen;
  for (const auto& row : table.rows) {
    if (row.size() != 2) throw ConfigError(path.string() + ": malformed row");
    if (!seen.insert(row[0]).second) throw ConfigError(path.string() + ": duplicate unit id " + row[0]);
    out.emplace_back(row[0], row[1]);
  }
  return out;
}

NamedEval cmd_eval(const std::filesystem::path& gold_csv, const std::filesystem::path& pred_csv,
                   const std::optional<std::filesystem::path>& out_json) {
  const auto gold_rows = read_label_csv(gold_csv);
  const auto pred_rows = read_label_csv(pred_csv);
  std::map<std::string, std::string> pred_by_id(pred_rows.begin(), pred_rows.end());
  if (pred_by_id.size() != gold_rows.size()) {
    throw ConfigError("unit sets differ: " + std::to_string(gold_rows.size()) + " gold vs " +
                      std::to_string(pred_by_id.size()) + " predicted");
  }
  std::vector<std::string> gold;
  std::vector<std::string> pred;
  for (const auto& [id, label] : gold_rows) {
    auto it = pred_by_id.find(id);
    if (it == pred_by_id.end()) throw ConfigError("unit " + id + " has no predicted label");
    gold.push_back(label);
    pred.push_back(it->second);
  }
  auto eval = evaluate_named(gold, pred);
  if (out_json) write_file_atomic(*out_json, format_eval_json(eval));
  return eval;
}

void cmd_plot(const std::filesystem::path& labels_csv, const std::filesystem::path& manifest_path, UnitScheme scheme,
              const std::optional<std::filesystem::path>& gold_csv, const std::filesystem::path& out_svg) {
  const auto manifest = load_manifest(manifest_path);
  const auto units = build_units(manifest, scheme);
  auto lookup = [&](const std::vector<std::pair<std::string, std::string>>& rows, const std::string& what) {
    std::map<std::string, std::string> by_id(rows.begin(), rows.end());
    std::vector<std::string> out;
    for (const auto& u : units) {
      auto it = by_id.find(u.id);
      if (it == by_id.end()) throw ConfigError(what + " has no label for unit " + u.id);
      out.push_back(it->second);
    }
    return out;
  };
  const auto predicted = lookup(read_label_csv(labels_csv), labels_csv.string());
  std::optional<std::vector<std::string>> gold;
  if (gold_csv) {
    gold = lookup(read_label_csv(*gold_csv), gold_csv->string());
  } else {
    std::vector<std::string> g;
    for (const auto& u : units) {
      auto label = unit_gold_label(manifest, u);
      if (!label) break;
      g.push_back(*label);
    }
    if (g.size() == units.size()) gold = std::move(g);
  }
  write_file_atomic(out_svg, render_staircase_svg(units, predicted, gold, manifest.title));
}

void cmd_montage(const std::filesystem::path& manifest_path, UnitScheme scheme, const std::filesystem::path& out_png) {
  const auto manifest = load_manifest(manifest_path);
  const auto units = build_units(manifest, scheme);
  save_title_png(build_montage(manifest, base_dir_of(manifest_path), units), out_png);
}

void cmd_synth(const std::filesystem::path& spec_path, std::uint64_t seed, const std::filesystem::path& out_dir) {
  const auto spec = parse_synth_spec(read_text_file(spec_path));
  write_synth_book(generate_book(spec, seed), out_dir);
}

std::vector<AblationRow> run_ablation(const BookManifest& manifest, const std::map<int, QuantizedTitle>& titles,
                                      const RunConfig& config) {
  std::vector<AblationRow> rows;
  for (UnitScheme scheme : {UnitScheme::all_pages, UnitScheme::recto_pages, UnitScheme::sheet_sides}) {
    RunConfig c = config;
    c.scheme = scheme;
    const auto result = run_clustering(manifest, titles, c);
    if (!result.mean) throw ConfigError("ablation needs gold labels in the manifest");
    rows.push_back({std::string(scheme_name(scheme)), *result.mean});
  }

  std::vector<std::string> gold;
  for (const auto& u : build_units(manifest, UnitScheme::sheet_sides)) {
    if (auto label = unit_gold_label(manifest, u)) gold.push_back(*label);
  }
  const auto codes = encode_labels(gold);
  for (BaselineKind kind : {BaselineKind::random_uniform, BaselineKind::assign_majority, BaselineKind::shuffle_gold}) {
    std::vector<MeanScores> per_seed;
    for (int s = 0; s < config.n_seeds; ++s) {
      const auto pred = baseline(codes.codes, kind, config.seed + static_cast<std::uint64_t>(s));
      per_seed.push_back(scores_of(evaluate(codes.codes, pred)));
    }
    rows.push_back({std::string(baseline_name(kind)), mean_of(per_seed)});
  }
  return rows;
}

std::vector<AblationRow> cmd_ablate(const RunConfig& config) {
  if (config.threads) {
    if (*config.threads < 1) throw ConfigError("--threads must be at least 1");
    omp_set_num_threads(*config.threads);
  }
  const auto manifest = load_manifest(config.manifest_path);
  const auto titles = profile_book(manifest, base_dir_of(config.manifest_path), config.profile);
  auto rows = run_ablation(manifest, titles, config);
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) throw IoError("cannot create " + config.output_dir.string() + ": " + ec.message());
  write_file_atomic(config.output_dir / "ablation.csv", format_ablation_csv(rows));
  return rows;
}

std::string format_ablation_csv(const std::vector<AblationRow>& rows) {
  CsvTable t;
  t.header = {"method", "v_measure", "one_to_one", "many_to_one"};
  for (const auto& r : rows) {
    t.rows.push_back({r.method, format_double(r.scores.v_measure), format_double(r.scores.one_to_one),
                      format_double(r.scores.many_to_one)});
  }
  return format_csv(t);
}

}  // namespace formeclust
