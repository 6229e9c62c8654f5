#pragma once

#include "eigencascade/bench.hpp"
#include "eigencascade/io.hpp"

#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace eigencascade::cli {

using io::json;
namespace fs = std::filesystem;

/// A configuration problem; what() starts with the JSON path of the field.
class ConfigError : public InputError {
 public:
  ConfigError(const std::string& path, const std::string& msg) : InputError(path + ": " + msg), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct MapperConfig {
  FilterSpec filter{FilterKind::gaussian_density, 1.0, 10, {}};
  int coordinate_axis = -1;  // custom filter: coordinate projection
  std::vector<int> intervals = {6, 8, 11, 15, 21, 30};
  MapperOptions options;
  PouMode pou = PouMode::gaussian;
};

struct RunConfig {
  DatasetSpec dataset;
  std::string pipeline = "covertree";
  double ratio = 1.0;
  std::optional<std::pair<int, int>> scales;
  int m = 16;
  std::optional<double> delta;
  double epsilon = 0.02;
  double tol = 1e-10;
  int max_iters = 2000;
  int guard = -1;
  std::uint64_t seed = 0;
  std::string output = "out";
  std::string input;  // export-heatmap: cascade result directory
  MapperConfig mapper;
  BenchOptions bench;
  json document;

  SolverConfig solver() const { return {m, tol, max_iters, seed, guard}; }
};

namespace detail {

class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_, "must be an object");
  }

  template <class T, class Check>
  void get(const std::string& key, T& out, Check&& check, const char* expect) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    const json& v = obj_.at(key);
    const std::string p = field(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(p, "must be a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError(p, "must be an integer");
        if (std::is_unsigned_v<T> && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) throw ConfigError(p, "must be a non-negative integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError(p, "must be a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(p, "must be a string");
      }
      out = v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError(p, std::string("has the wrong type; expected ") + expect);
    }
    if (!check(out)) throw ConfigError(p, std::string("must be ") + expect);
  }

  template <class T>
  void get(const std::string& key, T& out) {
    get(key, out, [](const T&) { return true; }, "a value of the documented type");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key) && !obj_.at(key).is_null();
  }
  const json& at(const std::string& key) const { return obj_.at(key); }
  std::string field(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : obj_.items())
      if (!seen_.count(k)) throw ConfigError(field(k), "unknown field");
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

inline auto positive = [](auto x) { return x > 0; };

inline void read_dataset(const json& j, DatasetSpec& d) {
  Reader r(j, "$.dataset");
  static const std::set<std::string> names{"cantor", "pin", "sphere", "uniform", "y", "flares", "csv"};
  if (!j.contains("name")) throw ConfigError("$.dataset.name", "is required");
  r.get("name", d.name, [](const std::string& s) { return names.count(s) > 0; },
        "one of cantor, pin, sphere, uniform, y, flares, csv");
  r.get("depth", d.depth, [](int x) { return x >= 0 && x <= 8; }, "an integer in [0, 8]");
  r.get("grid", d.grid, [](int x) { return x >= 1 && x <= 64; }, "an integer in [1, 64]");
  r.get("resolution", d.resolution, [](int x) { return x >= 1 && x <= 1000; }, "an integer in [1, 1000]");
  r.get("radial", d.radial, [](int x) { return x >= 2; }, "an integer >= 2");
  r.get("angular", d.angular, [](int x) { return x >= 4 && x % 4 == 0; }, "a positive multiple of 4");
  r.get("inner_angle_deg", d.inner_angle_deg, [](double x) { return x >= 0.0 && x < 45.0; }, "a number in [0, 45)");
  r.get("n", d.n, positive, "a positive integer");
  r.get("dim", d.dim, [](int x) { return x >= 1 && x <= 3; }, "1, 2 or 3");
  r.get("spacing", d.spacing, [](double x) { return x > 0.0 && x < 0.5; }, "a number in (0, 0.5)");
  r.get("center_spacing", d.center_spacing, [](double x) { return x > 0.0 && x < 0.25; }, "a number in (0, 0.25)");
  r.get("arm_points", d.arm_points, [](const std::vector<int>& v) { return v.size() == 4; }, "a list of four integers");
  r.get("arm_growth", d.arm_growth, [](const std::vector<double>& v) { return v.size() == 4; }, "a list of four numbers");
  r.get("path", d.path);
  if (d.name == "csv" && d.path.empty()) throw ConfigError("$.dataset.path", "is required for csv datasets");
  r.finish();
}

inline void read_mapper(const json& j, MapperConfig& m) {
  Reader r(j, "$.mapper");
  if (r.has("filter")) {
    Reader f(r.at("filter"), "$.mapper.filter");
    std::string kind = "gaussian_density";
    f.get("kind", kind, [](const std::string& s) { return s == "eccentricity" || s == "gaussian_density" || s == "coordinate"; },
          "one of eccentricity, gaussian_density, coordinate");
    m.filter.kind = kind == "eccentricity" ? FilterKind::eccentricity : kind == "gaussian_density" ? FilterKind::gaussian_density : FilterKind::custom;
    f.get("exponent", m.filter.exponent, positive, "a positive number");
    f.get("neighbors", m.filter.neighbors, positive, "a positive integer");
    m.coordinate_axis = kind == "coordinate" ? 0 : -1;
    if (kind == "coordinate") f.get("axis", m.coordinate_axis, [](int a) { return a >= 0 && a < 3; }, "0, 1 or 2");
    f.finish();
  }
  r.get("intervals", m.intervals,
        [](const std::vector<int>& v) {
          if (v.size() < 2 || v.front() < 1) return false;
          for (std::size_t k = 1; k < v.size(); ++k)
            if (v[k] <= v[k - 1]) return false;
          return true;
        },
        "a strictly increasing list of at least two positive integers");
  r.get("overlap", m.options.overlap, [](double g) { return g > 0.0 && g < 1.0; }, "a number in (0, 1)");
  r.get("tau", m.options.tau, positive, "a positive number");
  r.get("prune_singletons", m.options.prune_singletons);
  std::string pou = "gaussian";
  r.get("pou", pou, [](const std::string& s) { return s == "gaussian" || s == "indicator"; }, "gaussian or indicator");
  m.pou = pou == "gaussian" ? PouMode::gaussian : PouMode::indicator;
  r.finish();
}

}  // namespace detail

/// Validates every field before anything is computed. Unknown fields are errors.
inline RunConfig parse_config(const json& doc) {
  RunConfig c;
  c.document = doc;
  detail::Reader r(doc, "$");
  if (!doc.contains("dataset")) throw ConfigError("$.dataset", "is required");
  r.has("dataset");
  detail::read_dataset(doc.at("dataset"), c.dataset);
  r.get("pipeline", c.pipeline, [](const std::string& s) { return s == "covertree" || s == "mapper"; }, "covertree or mapper");
  r.get("ratio", c.ratio, [](double x) { return x >= 1.0 && std::isfinite(x); }, "a number >= 1");
  if (r.has("scales")) {
    detail::Reader s(r.at("scales"), "$.scales");
    int lo = 0, hi = 0;
    if (!r.at("scales").contains("min") || !r.at("scales").contains("max")) throw ConfigError("$.scales", "needs both min and max");
    s.get("min", lo);
    s.get("max", hi);
    if (lo > hi) throw ConfigError("$.scales", "min must not exceed max");
    s.finish();
    c.scales = std::make_pair(lo, hi);
  }
  r.get("m", c.m, [](int x) { return x >= 1 && x <= 512; }, "an integer in [1, 512]");
  if (r.has("delta")) {
    double d = 0.0;
    r.get("delta", d, [](double x) { return x >= 0.0; }, "a non-negative number or null");
    c.delta = d;
  }
  r.get("epsilon", c.epsilon, [](double x) { return x >= 0.0; }, "a non-negative number");
  if (r.has("solver")) {
    detail::Reader s(r.at("solver"), "$.solver");
    s.get("tol", c.tol, [](double x) { return x > 0.0; }, "a positive number");
    s.get("max_iters", c.max_iters, [](int x) { return x >= 0; }, "a non-negative integer");
    s.get("guard", c.guard, [](int x) { return x >= -1; }, "-1 (automatic) or a non-negative integer");
    s.finish();
  }
  r.get("seed", c.seed);
  r.get("output", c.output, [](const std::string& s) { return !s.empty(); }, "a non-empty path");
  r.get("input", c.input);
  if (r.has("mapper")) detail::read_mapper(r.at("mapper"), c.mapper);
  if (r.has("bench")) {
    detail::Reader b(r.at("bench"), "$.bench");
    b.get("repeats", c.bench.repeats, [](int x) { return x >= 3; }, "an integer >= 3");
    b.get("warmup", c.bench.warmup);
    b.finish();
  }
  r.finish();
  c.dataset.seed = c.seed;
  return c;
}

inline RunConfig load_config(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("$", std::string("not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

// ---------------------------------------------------------------------------
// Pipelines

struct CoverPipeline {
  PointCloud X;
  CoverTree tree;
  CoverTower tower;
  std::pair<int, int> range;
  ScaleLadder ladder;
  std::vector<GraphOperators> ops;
  std::vector<NerveGraph> nerves;  // coarsest first
};

/// Default scale range: every tree level from the bottom up to the coarsest
/// level holding at least m vertices.
inline std::pair<int, int> default_range(const CoverTree& T, int m) {
  int hi = T.bottom_level();
  for (int j = T.top_level(); j >= T.bottom_level(); --j)
    if (static_cast<int>(T.level(j).size()) >= m) {
      hi = j;
      break;
    }
  return {T.bottom_level(), hi};
}

inline CoverPipeline cover_pipeline(const RunConfig& c) {
  CoverPipeline p;
  p.X = generate_dataset(c.dataset);
  p.tree = build_cover_tree(p.X);
  p.range = c.scales ? *c.scales : default_range(p.tree, c.m);
  if (p.range.first < p.tree.bottom_level() || p.range.second > p.tree.top_level())
    throw ConfigError("$.scales", "must lie within the tree levels [" + std::to_string(p.tree.bottom_level()) + ", " +
                                      std::to_string(p.tree.top_level()) + "]");
  p.tower = tower_from_cover_tree(p.tree, p.X, c.ratio, p.range);
  p.ladder = ladder_from_tower(p.tower);
  for (int l : p.ladder.labels) {
    p.nerves.push_back(build_nerve_graph(p.tower, l, p.tree, p.X));
    p.ops.emplace_back(WeightedGraph(p.nerves.back().weights));
  }
  return p;
}

struct MapperPipeline {
  PointCloud X;
  MapperTower tower;
  ScaleLadder ladder;
  std::vector<GraphOperators> ops;
};

inline MapperPipeline mapper_pipeline(const RunConfig& c) {
  MapperPipeline p;
  p.X = generate_dataset(c.dataset);
  FilterFunction f;
  if (c.mapper.filter.kind == FilterKind::custom) {
    if (c.mapper.coordinate_axis >= p.X.dim()) throw ConfigError("$.mapper.filter.axis", "exceeds the dataset dimension");
    f = coordinate_filter(p.X, c.mapper.coordinate_axis);
  } else {
    f = eval_filter(p.X, c.mapper.filter);
  }
  p.tower = build_mapper_tower(p.X, f, c.mapper.intervals, c.mapper.options, c.mapper.pou);
  p.ladder = p.tower.ladder();
  for (const auto& g : p.tower.graphs) p.ops.emplace_back(WeightedGraph(g.weights));
  return p;
}

/// The output location is left out so that runs into different directories
/// produce identical files.
inline json base_provenance(const RunConfig& c, const std::string& command) {
  json doc = c.document;
  doc.erase("output");
  return {{"command", command}, {"config", doc}, {"seed", c.seed}};
}

// ---------------------------------------------------------------------------
// Commands. Each writes its artifacts under cfg.output.

inline void cmd_generate(const RunConfig& c) {
  const PointCloud X = generate_dataset(c.dataset);
  const fs::path out = c.output;
  io::write_text(out / "points.csv", io::points_csv(X));
  json p = base_provenance(c, "generate");
  p["n"] = X.size();
  p["dim"] = X.dim();
  io::write_json(out / "provenance.json", p);
}

inline void cmd_covertree(const RunConfig& c) {
  const PointCloud X = generate_dataset(c.dataset);
  const CoverTree T = build_cover_tree(X);
  const fs::path out = c.output;
  const InvariantReport rep = verify_invariants(T, X);
  io::write_json(out / "tree.json", io::tree_json(T));
  io::write_json(out / "invariants.json", io::invariants_json(rep));
  io::write_json(out / "provenance.json", base_provenance(c, "covertree"));
  if (!rep.ok()) throw NumericalError("cover tree violates its invariants; see invariants.json");
}

inline void cmd_tower(const RunConfig& c) {
  const CoverPipeline p = cover_pipeline(c);
  const fs::path out = c.output;
  json idx = json::array();
  for (std::size_t k = 0; k < p.nerves.size(); ++k) {
    const int l = p.ladder.labels[k];
    const fs::path sd = out / io::scale_dir(k);
    io::write_json(sd / "nerve.json", io::nerve_json(p.nerves[k]));
    if (k > 0) io::write_json(sd / "refinement.json", io::refinement_json(p.tower.refinement(l)));
    int comps = 0;
    connected_components(p.nerves[k].weights, &comps);
    idx.push_back({{"index", k}, {"label", l}, {"dir", io::scale_dir(k)}, {"n", p.nerves[k].size()}, {"components", comps},
                   {"pou_radius", p.tower.pou_radius(l)}});
  }
  io::write_json(out / "manifest.json", {{"ratio", c.ratio}, {"range", {p.range.first, p.range.second}}, {"scales", idx}});
  io::write_json(out / "provenance.json", base_provenance(c, "tower"));
}

inline CascadeResult run_cover_cascade(const RunConfig& c, const CoverPipeline& p) {
  return double_cascade(p.ladder, p.ops, c.solver(), Matrix(), c.delta, c.epsilon);
}

inline void cmd_cascade_covertree(const RunConfig& c) {
  const CoverPipeline p = cover_pipeline(c);
  const CascadeResult r = run_cover_cascade(c, p);
  json extra = base_provenance(c, "cascade");
  extra["ratio"] = c.ratio;
  extra["range"] = {p.range.first, p.range.second};
  io::write_cascade_result(c.output, r, extra);
}

/// Inverse participation ratio sum_v w_v^4 / (sum_v w_v^2)^2 per vector.
inline std::vector<double> participation(const Matrix& w) {
  std::vector<double> out;
  for (Index j = 0; j < w.cols(); ++j) {
    const double s2 = w.col(j).squaredNorm();
    out.push_back(s2 > 0.0 ? w.col(j).array().pow(4).sum() / (s2 * s2) : 0.0);
  }
  return out;
}

inline void cmd_mapper(const RunConfig& c) {
  const MapperPipeline p = mapper_pipeline(c);
  const MapperCascade mc = mapper_double_cascade(p.tower, c.solver(), c.delta, c.epsilon);
  const fs::path out = c.output;
  std::vector<int> point_labels;
  if (c.dataset.name == "flares") four_flares(c.dataset.center_spacing, c.dataset.arm_points, c.dataset.arm_growth, &point_labels);
  json diag = json::array();
  for (std::size_t k = 0; k < p.tower.graphs.size(); ++k) {
    const auto& G = p.tower.graphs[k];
    const fs::path ld = out / "mapper" / io::scale_dir(k);
    io::write_json(ld / "graph.json", io::mapper_graph_json(G));
    io::write_text(ld / "layout_hints.csv", io::layout_hints_csv(G));
    json d = {{"intervals", p.tower.interval_counts[k]},
              {"vertices", G.size()},
              {"components", mc.components[k]},
              {"pruned", G.pruned.size()},
              {"participation", participation(mc.result.scales[k].w)}};
    if (k > 0) d["flagged_transfer_rows"] = p.tower.transfers[k - 1].flagged_rows;
    if (!point_labels.empty()) {
      const auto fc = flare_concentration(mc.result.scales[k].w, majority_labels(G, point_labels));
      d["arm_label"] = fc.label;
      d["arm_share"] = fc.share;
    }
    diag.push_back(d);
  }
  io::write_json(out / "mapper" / "diagnostics.json", diag);
  json extra = base_provenance(c, "mapper");
  extra["filter"] = {{"kind", to_string(p.tower.filter.kind)}, {"parameter", p.tower.filter.parameter}};
  extra["intervals"] = p.tower.interval_counts;
  extra["overlap"] = c.mapper.options.overlap;
  extra["tau"] = c.mapper.options.tau;
  extra["pou"] = to_string(c.mapper.pou);
  io::write_cascade_result(out, mc.result, extra);
}

inline void cmd_cascade(const RunConfig& c) {
  if (c.pipeline == "mapper")
    cmd_mapper(c);
  else
    cmd_cascade_covertree(c);
}

inline BenchSummary cmd_bench(const RunConfig& c, std::ostream& log = std::cout) {
  ScaleLadder ladder;
  std::vector<GraphOperators> ops;
  if (c.pipeline == "mapper") {
    auto p = mapper_pipeline(c);
    ladder = std::move(p.ladder);
    ops = std::move(p.ops);
  } else {
    auto p = cover_pipeline(c);
    ladder = std::move(p.ladder);
    ops = std::move(p.ops);
  }
  const BenchSummary S = run_bench(ladder, ops, c.solver(), c.bench);
  const fs::path out = c.output;
  std::string det = "scale,n,nnz,components,iterations_cascade,iterations_cold,max_value_gap,valid\n";
  std::string tim = "scale,seconds_cascade,seconds_cold,speedup\n";
  for (const auto& r : S.records) {
    det += std::to_string(r.label) + "," + std::to_string(r.n) + "," + std::to_string(r.nnz) + "," + std::to_string(r.components) + "," +
           std::to_string(r.iterations_cascade) + "," + std::to_string(r.iterations_cold) + "," + io::format_double(r.max_value_gap) + "," +
           (r.valid ? "1" : "0") + "\n";
    tim += std::to_string(r.label) + "," + io::format_double(r.seconds_cascade) + "," + io::format_double(r.seconds_cold) + "," +
           io::format_double(r.speedup()) + "\n";
  }
  io::write_text(out / "bench.csv", det);
  io::write_text(out / "timings.csv", tim);
  json invalid = json::array();
  for (const auto& r : S.records)
    if (!r.valid) invalid.push_back({{"scale", r.label}, {"note", r.note}});
  io::write_json(out / "summary.json", {{"scales", S.records.size()},
                                        {"valid_scales", S.valid_scales},
                                        {"iterations_not_more", S.iterations_not_more},
                                        {"invalid", invalid}});
  io::write_json(out / "timings_summary.json", {{"coarsest_seconds", S.coarsest_seconds},
                                                {"single_cascade_total", S.cascade_total},
                                                {"cold_final", S.cold_final},
                                                {"cold_full", S.cold_total},
                                                {"cascade_not_slower", S.cascade_not_slower}});
  io::write_json(out / "provenance.json", base_provenance(c, "bench"));
  log << "scale      n  it(casc)  it(cold)   t(casc)    t(cold)  speedup\n";
  for (const auto& r : S.records) {
    char line[160];
    std::snprintf(line, sizeof line, "%5d %6lld %9d %9d %9.4f %10.4f %8.2f%s\n", r.label, static_cast<long long>(r.n), r.iterations_cascade,
                  r.iterations_cold, r.seconds_cascade, r.seconds_cold, r.speedup(), r.valid ? "" : "  invalid");
    log << line;
  }
  log << "single cascade total " << S.cascade_total << " s, cold final " << S.cold_final << " s, cold full " << S.cold_total << " s\n";
  return S;
}

inline void cmd_export_heatmap(const RunConfig& c) {
  if (c.input.empty()) throw ConfigError("$.input", "is required for export-heatmap");
  const CascadeResult r = io::read_cascade_result(c.input);
  io::write_text(fs::path(c.output) / "heatmap.csv", io::heatmap_csv(r));
}

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"generate", "covertree", "tower", "cascade", "mapper", "bench", "export-heatmap"};
  return c;
}

inline void run_command(const std::string& cmd, const RunConfig& c) {
  if (cmd == "generate") return cmd_generate(c);
  if (cmd == "covertree") return cmd_covertree(c);
  if (cmd == "tower") return cmd_tower(c);
  if (cmd == "cascade") return cmd_cascade(c);
  if (cmd == "mapper") return cmd_mapper(c);
  if (cmd == "bench") return (void)cmd_bench(c);
  if (cmd == "export-heatmap") return cmd_export_heatmap(c);
  throw InputError("unknown command '" + cmd + "'");
}

}  // namespace eigencascade::cli
