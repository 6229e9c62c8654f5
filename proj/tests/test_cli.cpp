#include "eigencascade/cli.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <map>

using namespace eigencascade;
using cli::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "eigencascade_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json small_cantor(const fs::path& out) {
  return {{"dataset", {{"name", "cantor"}, {"depth", 2}, {"grid", 2}}},
          {"ratio", 1.5},
          {"m", 4},
          {"seed", 3},
          {"output", out.string()},
          {"bench", {{"repeats", 3}}}};
}

json small_mapper(const fs::path& out) {
  return {{"dataset", {{"name", "y"}, {"spacing", 0.05}}},
          {"pipeline", "mapper"},
          {"m", 3},
          {"output", out.string()},
          {"mapper", {{"filter", {{"kind", "coordinate"}, {"axis", 1}}}, {"intervals", {3, 5}}}},
          {"bench", {{"repeats", 3}}}};
}

std::string config_error_path(const json& doc) {
  try {
    (void)cli::parse_config(doc);
  } catch (const cli::ConfigError& e) {
    return e.path();
  }
  return "";
}

// Every file below `dir` except timing outputs, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    if (name.rfind("timings", 0) == 0) continue;
    out[fs::relative(e.path(), dir).string()] = io::read_text(e.path());
  }
  return out;
}

}  // namespace

TEST_CASE("config validation reports field paths") {
  const json ok = small_cantor("x");
  CHECK(config_error_path(ok).empty());
  json a = ok;
  a["m"] = 0;
  CHECK(config_error_path(a) == "$.m");
  json b = ok;
  b["solver"] = {{"tol", -1.0}};
  CHECK(config_error_path(b) == "$.solver.tol");
  json c = ok;
  c["dataset"]["name"] = "moons";
  CHECK(config_error_path(c) == "$.dataset.name");
  json d = ok;
  d["colour"] = "blue";
  CHECK(config_error_path(d) == "$.colour");
  json e = ok;
  e["ratio"] = "big";
  CHECK(config_error_path(e) == "$.ratio");
  json f = ok;
  f["bench"]["repeats"] = 2;
  CHECK(config_error_path(f) == "$.bench.repeats");
  json g = ok;
  g.erase("dataset");
  CHECK(config_error_path(g) == "$.dataset");
  json h = small_mapper("x");
  h["mapper"]["intervals"] = {5, 3};
  CHECK(config_error_path(h) == "$.mapper.intervals");
  json i = ok;
  i["scales"] = {{"min", 2}, {"max", 1}};
  CHECK(config_error_path(i) == "$.scales");
}

TEST_CASE("config seed feeds the dataset") {
  json doc = small_cantor("x");
  doc["seed"] = 17;
  CHECK(cli::parse_config(doc).dataset.seed == 17);
}

TEST_CASE("generate writes the point cloud") {
  const fs::path out = scratch("generate");
  cli::run_command("generate", cli::parse_config(small_cantor(out)));
  const std::string text = io::read_text(out / "points.csv");
  CHECK(std::count(text.begin(), text.end(), '\n') == 16 * 4);
  json doc = small_cantor(out);
  doc["dataset"]["grid"] = 1;
  cli::run_command("generate", cli::parse_config(doc));
  const std::string t1 = io::read_text(out / "points.csv");
  CHECK(std::count(t1.begin(), t1.end(), '\n') == 16);
}

TEST_CASE("cascade on a two-scale tower writes a result directory") {
  const fs::path out = scratch("cascade");
  json doc = small_cantor(out);
  const auto cfg = cli::parse_config(doc);
  const auto p = cli::cover_pipeline(cfg);
  doc["scales"] = {{"min", p.range.second - 1}, {"max", p.range.second}};
  cli::run_command("cascade", cli::parse_config(doc));
  const json manifest = io::read_json(out / "manifest.json");
  REQUIRE(manifest["scales"].size() == 2);
  CHECK(fs::exists(out / "scale_00" / "manifest.json"));
  CHECK(fs::exists(out / "scale_01" / "w.csv"));
  CHECK(fs::exists(out / "provenance.json"));
  const CascadeResult r = io::read_cascade_result(out);
  CHECK(r.scales.size() == 2);
  CHECK(r.scales[0].w == r.scales[0].v);
}

TEST_CASE("every command is byte-reproducible") {
  for (const std::string cmd : {"generate", "covertree", "tower", "cascade", "bench"}) {
    const fs::path a = scratch("det_a_" + cmd), b = scratch("det_b_" + cmd);
    cli::run_command(cmd, cli::parse_config(small_cantor(a)));
    cli::run_command(cmd, cli::parse_config(small_cantor(b)));
    const auto sa = snapshot(a), sb = snapshot(b);
    CHECK_FALSE(sa.empty());
    CHECK(sa == sb);
  }
  {
    const fs::path a = scratch("det_a_mapper"), b = scratch("det_b_mapper");
    cli::run_command("mapper", cli::parse_config(small_mapper(a)));
    cli::run_command("mapper", cli::parse_config(small_mapper(b)));
    CHECK(snapshot(a) == snapshot(b));
  }
  {
    const fs::path src = scratch("det_src_heatmap");
    cli::run_command("cascade", cli::parse_config(small_cantor(src)));
    const fs::path a = scratch("det_a_heatmap"), b = scratch("det_b_heatmap");
    json da = small_cantor(a), db = small_cantor(b);
    da["input"] = db["input"] = src.string();
    cli::run_command("export-heatmap", cli::parse_config(da));
    cli::run_command("export-heatmap", cli::parse_config(db));
    CHECK(snapshot(a) == snapshot(b));
  }
}

TEST_CASE("heatmap export has one row per scale, vector and vertex") {
  const fs::path src = scratch("heat_src");
  cli::run_command("cascade", cli::parse_config(small_cantor(src)));
  const CascadeResult r = io::read_cascade_result(src);
  const std::string csv = io::heatmap_csv(r);
  std::size_t expect = 0;
  for (const auto& s : r.scales) expect += static_cast<std::size_t>(s.w.cols() * s.w.rows());
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == expect + 1);
  const auto back = io::parse_heatmap_csv(csv);
  REQUIRE(back.size() == r.scales.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    CHECK(back[k].label == r.scales[k].label);
    CHECK((back[k].w - r.scales[k].w).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("a single-scale single-vector three-vertex result gives three rows") {
  CascadeResult r;
  ScaleResult s;
  s.values = Vector::Zero(1);
  s.v = Matrix::Constant(3, 1, 1.0 / std::sqrt(3.0));
  s.w = s.v;
  s.partition.blocks = {{0}};
  r.scales.push_back(s);
  const std::string csv = io::heatmap_csv(r);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("export-heatmap needs manifests") {
  const fs::path empty = scratch("heat_empty");
  const fs::path out = scratch("heat_out");
  json doc = small_cantor(out);
  doc["input"] = empty.string();
  CHECK_THROWS_AS(cli::run_command("export-heatmap", cli::parse_config(doc)), InputError);
  doc.erase("input");
  CHECK_THROWS_AS(cli::run_command("export-heatmap", cli::parse_config(doc)), cli::ConfigError);
}

TEST_CASE("bench on an identical-graph ladder favors the warm start") {
  const auto cfg = cli::parse_config(small_cantor("unused"));
  const auto p = cli::cover_pipeline(cfg);
  const GraphOperators& g = p.ops.back();
  ScaleLadder L;
  L.sizes = {g.size(), g.size()};
  SparseMatrix I(g.size(), g.size());
  I.setIdentity();
  L.transfers = {I};
  SolverConfig sc;
  sc.m = 4;
  const BenchSummary S = run_bench(L, {g, g}, sc, {5, true});
  REQUIRE(S.records.size() == 1);
  CHECK(S.records[0].valid);
  CHECK(S.records[0].iterations_cascade <= 1);
  CHECK(S.records[0].iterations_cascade < S.records[0].iterations_cold);
  CHECK(S.records[0].speedup() > 1.0);
  CHECK(S.records[0].max_value_gap <= 1e-9);
  CHECK_THROWS_AS(run_bench(L, {g, g}, sc, {2, true}), InputError);
}

TEST_CASE("unknown commands are rejected") {
  CHECK_THROWS_AS(cli::run_command("plot", cli::parse_config(small_cantor("x"))), InputError);
}
