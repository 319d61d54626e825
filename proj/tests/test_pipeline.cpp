#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "formeclust/error.hpp"
#include "formeclust/pipeline.hpp"
#include "formeclust/synth.hpp"
#include "test_util.hpp"

using namespace formeclust;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small on-disk synthetic quarto book.
std::filesystem::path write_book(const std::string& name, NoiseParams noise, int n_formes = 3, std::uint64_t seed = 4) {
  SynthSpec spec;
  spec.format = Format{FormatKind::quarto};
  spec.leaves_per_gathering = 4;
  spec.n_gatherings = 5;
  spec.n_formes = n_formes;
  spec.title_width = 120;
  spec.title_height = 12;
  spec.noise = noise;
  const auto dir = testutil::temp_dir(name);
  write_synth_book(generate_book(spec, seed), dir / "book");
  return dir;
}

RunConfig config_for(const std::filesystem::path& dir, const std::string& out) {
  RunConfig c;
  c.manifest_path = dir / "book" / "manifest.json";
  c.output_dir = dir / out;
  c.k_neighbors = 3;
  return c;
}

struct CliResult {
  int status;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args, const std::filesystem::path& scratch) {
  const auto out = scratch / "stdout.txt";
  const auto err = scratch / "stderr.txt";
  const std::string cmd = std::string("\"") + FORMECLUST_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out), slurp(err)};
}

}  // namespace

TEST_CASE("zero-noise book is recovered exactly") {
  const auto dir = write_book("pipe_zero", {});
  auto config = config_for(dir, "run");
  // the smallest forme has 3 sheet sides, so 2 neighbours keep every edge inside a forme
  config.k_neighbors = 2;
  const auto result = cmd_cluster(config);
  CHECK(result.k == 3);
  REQUIRE(result.mean.has_value());
  CHECK(result.mean->v_measure == doctest::Approx(1.0));
  CHECK(result.mean->one_to_one == doctest::Approx(1.0));
  CHECK(result.mean->many_to_one == doctest::Approx(1.0));
  for (const char* f : {"labels.csv", "distances.csv", "report.json"}) CHECK(std::filesystem::exists(dir / "run" / f));

  const auto report = nlohmann::json::parse(slurp(dir / "run" / "report.json"));
  CHECK(report["n_units"] == result.units.size());
  CHECK(report["config"]["unit_scheme"] == "sheet_sides");
  CHECK(report["config"]["p"] == 4.0);
  CHECK(report["eval"]["v_measure"] == doctest::Approx(1.0));
  CHECK(report["runs"].size() == 1);
  CHECK(report.contains("metadata"));
}

TEST_CASE("outputs are deterministic across runs and thread counts") {
  const auto dir = write_book("pipe_det", {0.1, 0.05, 0.8, 1.2});
  auto c1 = config_for(dir, "one");
  c1.threads = 1;
  c1.n_seeds = 2;
  auto c3 = config_for(dir, "three");
  c3.threads = 3;
  c3.n_seeds = 2;
  const auto r1 = cmd_cluster(c1);
  const auto r3 = cmd_cluster(c3);
  auto again = c1;
  again.output_dir = dir / "again";
  cmd_cluster(again);
  for (const char* f : {"labels.csv", "distances.csv"}) {
    CHECK(slurp(dir / "one" / f) == slurp(dir / "three" / f));
    CHECK(slurp(dir / "one" / f) == slurp(dir / "again" / f));
  }
  CHECK(format_report_json(r1, false) == format_report_json(r3, false));
}

TEST_CASE("eval on written outputs reproduces the report") {
  const auto dir = write_book("pipe_eval", {0.1, 0.05, 0.8, 1.2});
  const auto result = cmd_cluster(config_for(dir, "run"));
  REQUIRE(result.runs.front().eval.has_value());
  const auto& expected = *result.runs.front().eval;
  const auto got = cmd_eval(dir / "book" / "gold.csv", dir / "run" / "labels.csv", dir / "eval.json");
  CHECK(got.report.v_measure == doctest::Approx(expected.report.v_measure).epsilon(1e-12));
  CHECK(got.report.one_to_one == doctest::Approx(expected.report.one_to_one));
  CHECK(got.report.many_to_one == doctest::Approx(expected.report.many_to_one));
  const auto j = nlohmann::json::parse(slurp(dir / "eval.json"));
  for (const char* key : {"v_measure", "one_to_one", "many_to_one", "mapping", "n"}) CHECK(j.contains(key));

  SUBCASE("mismatched unit ids are rejected") {
    std::ofstream(dir / "short.csv") << "unit_id,label\nA-1o,0\n";
    CHECK_THROWS_AS(cmd_eval(dir / "book" / "gold.csv", dir / "short.csv", std::nullopt), ConfigError);
  }
}

TEST_CASE("plot and montage") {
  const auto dir = write_book("pipe_plot", {});
  const auto result = cmd_cluster(config_for(dir, "run"));
  cmd_plot(dir / "run" / "labels.csv", dir / "book" / "manifest.json", UnitScheme::sheet_sides, std::nullopt,
           dir / "staircase.svg");
  const auto svg = slurp(dir / "staircase.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  std::size_t circles = 0;
  for (auto pos = svg.find("<circle"); pos != std::string::npos; pos = svg.find("<circle", pos + 1)) ++circles;
  // predicted and gold panels, one marker per unit each
  CHECK(circles == 2 * result.units.size());

  cmd_montage(dir / "book" / "manifest.json", UnitScheme::sheet_sides, dir / "montage.png");
  const auto png = load_title_image(dir / "montage.png");
  const int rows = static_cast<int>(result.units.size());
  CHECK(png.height == rows * 12 + (rows + 1) * 2);
  CHECK(png.width == 4 * 120 + 5 * 2);
}

TEST_CASE("ablation table shape") {
  const auto dir = write_book("pipe_ablate", {0.1, 0.05, 0.8, 1.2});
  auto c = config_for(dir, "run");
  c.n_seeds = 2;
  const auto rows = cmd_ablate(c);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].method == "all_pages");
  CHECK(rows[1].method == "recto_pages");
  CHECK(rows[2].method == "sheet_sides");
  CHECK(rows[4].method == "assign_majority");
  CHECK(rows[4].scores.v_measure == 0.0);
  const auto csv = slurp(dir / "run" / "ablation.csv");
  CHECK(csv.rfind("method,v_measure,one_to_one,many_to_one\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}

TEST_CASE("pipeline errors") {
  const auto dir = write_book("pipe_err", {});
  SUBCASE("missing title image names the page") {
    std::filesystem::remove(dir / "book" / "titles" / "p7.png");
    try {
      run_pipeline(config_for(dir, "run"));
      FAIL("expected an IoError");
    } catch (const IoError& e) {
      CHECK(e.page_index() == 7);
    }
  }
  SUBCASE("K larger than the unit count") {
    auto c = config_for(dir, "run");
    c.k = 1000;
    CHECK_THROWS_AS(run_pipeline(c), ConfigError);
  }
  SUBCASE("k_neighbors is clamped with a warning") {
    auto c = config_for(dir, "run");
    c.k_neighbors = 500;
    const auto r = run_pipeline(c);
    CHECK_FALSE(r.warnings.empty());
  }
}

TEST_CASE("command-line exit codes") {
  const auto dir = write_book("pipe_cli", {});
  const auto manifest = (dir / "book" / "manifest.json").string();

  auto ok = run_cli("cluster \"" + manifest + "\" --knn 3 --out \"" + (dir / "run").string() + "\"", dir);
  CHECK(ok.status == 0);
  CHECK(ok.out.find("V") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "run" / "labels.csv"));

  CHECK(run_cli("--help", dir).status == 0);
  CHECK(run_cli("cluster", dir).status == 1);
  CHECK(run_cli("cluster \"" + manifest + "\" --p 0.5", dir).status == 1);
  CHECK(run_cli("cluster \"" + manifest + "\" --scheme pages", dir).status == 1);

  auto missing = run_cli("cluster \"" + (dir / "nope.json").string() + "\"", dir);
  CHECK(missing.status == 2);

  std::filesystem::remove(dir / "book" / "titles" / "p3.png");
  auto broken = run_cli("cluster \"" + manifest + "\" --out \"" + (dir / "run2").string() + "\"", dir);
  CHECK(broken.status == 2);
  const auto err = nlohmann::json::parse(broken.err);
  CHECK(err["error"]["code"] == 2);
  CHECK(err["error"]["kind"] == "io");
  CHECK(err["error"]["page_index"] == 3);
  CHECK_FALSE(std::filesystem::exists(dir / "run2" / "labels.csv"));
}
