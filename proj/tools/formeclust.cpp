// formeclust: cluster running titles into skeleton formes.
#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <json.hpp>
#include <string>

#include "formeclust/csv.hpp"
#include "formeclust/error.hpp"
#include "formeclust/pipeline.hpp"

using namespace formeclust;

namespace {

struct Flags {
  std::string manifest;
  std::string scheme = "sheet_sides";
  std::string strategy = "quantile";
  std::string p = "4";
  int bins = 5;
  std::size_t knn = 5;
  std::size_t k = 0;
  std::uint64_t seed = 17;
  int seeds = 1;
  int threads = 0;
  bool no_binarize = false;
  bool normalize = false;
  std::string out = ".";
};

void add_run_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("manifest", f.manifest, "Book manifest JSON")->required();
  cmd->add_option("--scheme", f.scheme, "all_pages | recto_pages | sheet_sides")->capture_default_str();
  cmd->add_option("--bins", f.bins, "Quantization bins")->capture_default_str();
  cmd->add_option("--strategy", f.strategy, "uniform | quantile | kmeans")->capture_default_str();
  cmd->add_option("--p", f.p, "Reduction order (number >= 1 or inf)")->capture_default_str();
  cmd->add_option("--knn", f.knn, "Neighbours in the affinity graph")->capture_default_str();
  cmd->add_option("--k", f.k, "Cluster count (default: number of gold labels)");
  cmd->add_option("--seed", f.seed, "Base seed")->capture_default_str();
  cmd->add_option("--seeds", f.seeds, "Number of seeds (seed, seed+1, ...)")->capture_default_str();
  cmd->add_option("--threads", f.threads, "Worker threads (default: OpenMP default)");
  cmd->add_flag("--no-binarize", f.no_binarize, "Profile raw grey levels instead of Otsu-binarized ink");
  cmd->add_flag("--normalize", f.normalize, "Divide title distances by the longer title length");
  cmd->add_option("--out", f.out, "Output directory")->capture_default_str();
}

RunConfig to_config(const Flags& f) {
  RunConfig c;
  c.manifest_path = f.manifest;
  c.scheme = scheme_from_name(f.scheme);
  c.profile.binarize = !f.no_binarize;
  c.profile.n_bins = f.bins;
  c.profile.strategy = strategy_from_name(f.strategy);
  if (f.p == "inf") {
    c.kernel.p = kInfNorm;
  } else {
    c.kernel.p = parse_double(f.p);
    if (!(c.kernel.p >= 1.0)) throw ConfigError("--p must be >= 1 or inf, got " + f.p);
  }
  c.kernel.normalize = f.normalize;
  c.k_neighbors = f.knn;
  if (f.k > 0) c.k = f.k;
  c.seed = f.seed;
  c.n_seeds = f.seeds;
  if (f.threads > 0) c.threads = f.threads;
  c.output_dir = f.out;
  return c;
}

std::string pct(double v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
  return buf;
}

void print_scores(const std::string& label, double v, double o, double m) {
  std::cout << label << "V-measure " << pct(v) << "  1-to-1 " << pct(o) << "  many-to-1 " << pct(m) << "\n";
}

int report_error(ExitCode code, const char* kind, const std::string& message, std::optional<int> page = {}) {
  nlohmann::ordered_json err{{"code", static_cast<int>(code)}, {"kind", kind}, {"message", message}};
  if (page) err["page_index"] = *page;
  std::cerr << nlohmann::ordered_json{{"error", err}}.dump() << "\n";
  return static_cast<int>(code);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster running titles of printed books into skeleton formes"};
  app.require_subcommand(1);
  Flags f;

  auto* cluster = app.add_subcommand("cluster", "Profile, compare and cluster; writes labels.csv, distances.csv, report.json");
  add_run_flags(cluster, f);

  auto* ablate = app.add_subcommand("ablate", "Compare unit schemes and random baselines; writes ablation.csv");
  add_run_flags(ablate, f);

  std::string gold_csv;
  std::string pred_csv;
  std::string eval_out;
  auto* eval = app.add_subcommand("eval", "Score predicted labels against gold labels");
  eval->add_option("gold", gold_csv, "unit_id,label CSV")->required();
  eval->add_option("pred", pred_csv, "unit_id,label CSV")->required();
  eval->add_option("--out", eval_out, "Write the report JSON here");

  std::string labels_csv;
  std::string plot_gold;
  std::string plot_out = "staircase.svg";
  auto* plot = app.add_subcommand("plot", "Staircase SVG of cluster labels in book order");
  plot->add_option("labels", labels_csv, "unit_id,label CSV")->required();
  plot->add_option("manifest", f.manifest, "Book manifest JSON")->required();
  plot->add_option("--scheme", f.scheme, "Unit scheme the labels refer to")->capture_default_str();
  plot->add_option("--gold", plot_gold, "Gold unit_id,label CSV (default: manifest gold)");
  plot->add_option("--out", plot_out, "Output SVG")->capture_default_str();

  std::string montage_out = "montage.png";
  auto* montage = app.add_subcommand("montage", "PNG grid: one row per unit, one column per slot");
  montage->add_option("manifest", f.manifest, "Book manifest JSON")->required();
  montage->add_option("--scheme", f.scheme, "Unit scheme")->capture_default_str();
  montage->add_option("--out", montage_out, "Output PNG")->capture_default_str();

  std::string spec_path;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic book directory");
  synth->add_option("spec", spec_path, "Synthetic book spec JSON")->required();
  synth->add_option("--seed", f.seed, "Seed")->capture_default_str();
  synth->add_option("--out", synth_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(ExitCode::config, "config", e.what());
  }

  try {
    if (*cluster) {
      const auto result = cmd_cluster(to_config(f));
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << result.units.size() << " units, K = " << result.k << ", outputs in " << f.out << "\n";
      for (const auto& run : result.runs) {
        if (run.eval) {
          const auto& r = run.eval->report;
          print_scores("seed " + std::to_string(run.seed) + ": ", r.v_measure, r.one_to_one, r.many_to_one);
        }
      }
      if (result.mean && result.runs.size() > 1) {
        print_scores("mean: ", result.mean->v_measure, result.mean->one_to_one, result.mean->many_to_one);
      }
    } else if (*ablate) {
      const auto rows = cmd_ablate(to_config(f));
      for (const auto& row : rows) {
        print_scores(row.method + std::string(18 - std::min<std::size_t>(17, row.method.size()), ' '),
                     row.scores.v_measure, row.scores.one_to_one, row.scores.many_to_one);
      }
    } else if (*eval) {
      std::optional<std::filesystem::path> out;
      if (!eval_out.empty()) out = eval_out;
      const auto result = cmd_eval(gold_csv, pred_csv, out);
      print_scores("", result.report.v_measure, result.report.one_to_one, result.report.many_to_one);
      std::cout << format_eval_json(result);
    } else if (*plot) {
      std::optional<std::filesystem::path> gold;
      if (!plot_gold.empty()) gold = plot_gold;
      cmd_plot(labels_csv, f.manifest, scheme_from_name(f.scheme), gold, plot_out);
    } else if (*montage) {
      cmd_montage(f.manifest, scheme_from_name(f.scheme), montage_out);
    } else if (*synth) {
      cmd_synth(spec_path, f.seed, synth_out);
    }
  } catch (const IoError& e) {
    return report_error(e.code(), e.kind(), e.what(), e.page_index());
  } catch (const Error& e) {
    return report_error(e.code(), e.kind(), e.what());
  } catch (const std::exception& e) {
    return report_error(ExitCode::io, "io", e.what());
  }
  return 0;
}
