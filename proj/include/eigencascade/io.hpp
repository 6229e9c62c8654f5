#pragma once

#include "eigencascade/cascade.hpp"
#include "eigencascade/mapper.hpp"
#include "eigencascade/tower.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace eigencascade::io {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot write " + path.string());
  os << text;
}

inline std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// CSV blocks: one line per column of the matrix (one eigenvector per line).

inline std::string matrix_csv(const Matrix& M) {
  std::string out;
  for (Index c = 0; c < M.cols(); ++c) {
    for (Index r = 0; r < M.rows(); ++r) {
      if (r) out += ',';
      out += format_double(M(r, c));
    }
    out += '\n';
  }
  return out;
}

inline Matrix parse_matrix_csv(const std::string& text, Index rows) {
  std::vector<std::vector<double>> cols;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> c;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        c.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InputError("csv: bad number '" + cell + "'");
      }
    }
    if (static_cast<Index>(c.size()) != rows) throw InputError("csv: expected " + std::to_string(rows) + " values per line");
    cols.push_back(std::move(c));
  }
  Matrix M(rows, static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (Index r = 0; r < rows; ++r) M(r, static_cast<Index>(c)) = cols[c][static_cast<std::size_t>(r)];
  return M;
}

inline std::string vector_csv(const Vector& v) {
  std::string out;
  for (Index i = 0; i < v.size(); ++i) out += format_double(v(i)) + "\n";
  return out;
}

inline std::string points_csv(const PointCloud& X) {
  std::string out;
  for (Index i = 0; i < X.size(); ++i) {
    for (Index c = 0; c < X.dim(); ++c) {
      if (c) out += ',';
      out += format_double(X.coords()(i, c));
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trees, nerves, packets

/// {"bottom", "top", "levels": {"j": [ids]}, "parent": [[id, level, parent id]]}
inline json tree_json(const CoverTree& T) {
  json levels = json::object();
  json parents = json::array();
  for (int j = T.top_level(); j >= T.bottom_level(); --j) {
    levels[std::to_string(j)] = T.level(j);
    if (j < T.top_level())
      for (int id : T.level(j)) parents.push_back({id, j, T.parent(id, j)});
  }
  return {{"bottom", T.bottom_level()}, {"top", T.top_level()}, {"levels", levels}, {"parent", parents}};
}

inline json invariants_json(const InvariantReport& rep) {
  json v = json::array();
  for (const auto& x : rep.violations)
    v.push_back({{"kind", to_string(x.kind)}, {"level_i", x.level_i}, {"level_j", x.level_j}, {"a", x.a}, {"b", x.b},
                 {"dist", x.dist}, {"bound", x.bound}});
  return {{"ok", rep.ok()}, {"violations", v}};
}

inline json edges_json(const SparseMatrix& W) {
  json e = json::array();
  for (Index c = 0; c < W.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(W, c); it; ++it)
      if (it.row() < it.col()) e.push_back({it.row(), it.col(), it.value()});
  return e;
}

/// {"scale", "vertices": [{"index", "center_id", "radius", "count"}], "edges": [[k, j, w]]}
inline json nerve_json(const NerveGraph& g) {
  json v = json::array();
  for (std::size_t k = 0; k < g.centers.size(); ++k)
    v.push_back({{"index", k}, {"center_id", g.centers[k]}, {"radius", g.radius}, {"count", g.counts[k]}});
  return {{"scale", g.level}, {"vertices", v}, {"edges", edges_json(g.weights)}, {"isolated", g.isolated}};
}

/// [[child index, parent index]]
inline json refinement_json(const std::vector<int>& p) {
  json r = json::array();
  for (std::size_t u = 0; u < p.size(); ++u) r.push_back({u, p[u]});
  return r;
}

inline json packet_json(const EigenPacket& p) {
  return {{"values", std::vector<double>(p.values.data(), p.values.data() + p.values.size())},
          {"residual_norms", std::vector<double>(p.residual_norms.data(), p.residual_norms.data() + p.residual_norms.size())},
          {"iterations", p.iterations},
          {"converged", p.converged}};
}

inline json solver_json(const SolverConfig& c) {
  return {{"m", c.m}, {"tol", c.tol}, {"max_iters", c.max_iters}, {"guard", c.guard}, {"seed", c.seed}};
}

inline json mapper_graph_json(const MapperGraph& G) {
  json v = json::array();
  for (std::size_t k = 0; k < G.vertices.size(); ++k)
    v.push_back({{"index", k}, {"interval", G.vertices[k].interval}, {"members", G.vertices[k].members}});
  json pr = json::array();
  for (const auto& p : G.pruned) pr.push_back({{"interval", p.interval}, {"point", p.point}});
  return {{"n_intervals", G.n_intervals}, {"vertices", v}, {"edges", edges_json(G.weights)}, {"pruned", pr}};
}

/// vertex,interval,cluster_size
inline std::string layout_hints_csv(const MapperGraph& G) {
  std::string out = "vertex,interval,cluster_size\n";
  for (std::size_t k = 0; k < G.vertices.size(); ++k)
    out += std::to_string(k) + "," + std::to_string(G.vertices[k].interval) + "," + std::to_string(G.vertices[k].members.size()) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Cascade result directories
//
//   manifest.json            scales (coarsest first) and their directories
//   provenance.json          delta, epsilon, solver config, seeds, caller extras
//   timings.csv              wall time per scale (not reproducible)
//   scale_XX/manifest.json   label, n, m, blocks, iterations, flags
//   scale_XX/values.csv      one eigenvalue per line
//   scale_XX/{v,w,u,projected}.csv  one vector per line

inline std::string scale_dir(std::size_t k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "scale_%02zu", k);
  return buf;
}

inline json provenance_json(const CascadeResult& r, const json& extra = json::object()) {
  json scales = json::array();
  for (std::size_t k = 0; k < r.scales.size(); ++k)
    scales.push_back({{"label", r.scales[k].label}, {"delta", r.scales[k].delta}, {"padding_seed", r.solver.seed + k}});
  json p = {{"delta", r.delta ? json(*r.delta) : json("default: 1e3 * eps * max(max|lambda|, ||L_rw||_inf) per scale")},
            {"epsilon", r.epsilon},
            {"solver", solver_json(r.solver)},
            {"scales", scales}};
  for (const auto& [k, v] : extra.items()) p[k] = v;
  return p;
}

inline void write_cascade_result(const fs::path& dir, const CascadeResult& r, const json& extra = json::object()) {
  fs::create_directories(dir);
  json top = {{"format", "eigencascade-result-1"}, {"scales", json::array()}};
  std::string timings = "scale,label,seconds,iterations\n";
  for (std::size_t k = 0; k < r.scales.size(); ++k) {
    const auto& s = r.scales[k];
    const fs::path sd = dir / scale_dir(k);
    json blocks = json::array();
    for (const auto& b : s.partition.blocks) blocks.push_back(b);
    json m = {{"label", s.label},
              {"n", s.v.rows()},
              {"m", s.v.cols()},
              {"delta", s.delta},
              {"blocks", blocks},
              {"iterations", s.iterations},
              {"converged", s.converged},
              {"residual_norms", std::vector<double>(s.residuals.data(), s.residuals.data() + s.residuals.size())},
              {"has_projection", std::vector<int>(s.has_projection.begin(), s.has_projection.end())},
              {"fallback_blocks", s.fallback_blocks}};
    write_json(sd / "manifest.json", m);
    write_text(sd / "values.csv", vector_csv(s.values));
    write_text(sd / "v.csv", matrix_csv(s.v));
    write_text(sd / "w.csv", matrix_csv(s.w));
    write_text(sd / "u.csv", matrix_csv(s.u));
    write_text(sd / "projected.csv", matrix_csv(s.projected));
    top["scales"].push_back({{"index", k}, {"label", s.label}, {"dir", scale_dir(k)}});
    timings += std::to_string(k) + "," + std::to_string(s.label) + "," + format_double(s.seconds) + "," + std::to_string(s.iterations) + "\n";
  }
  write_json(dir / "manifest.json", top);
  write_json(dir / "provenance.json", provenance_json(r, extra));
  write_text(dir / "timings.csv", timings);
}

/// Reads back values, v, w, u, projections and partitions. Timings are not restored.
inline CascadeResult read_cascade_result(const fs::path& dir) {
  if (!fs::exists(dir / "manifest.json")) throw InputError("cascade result: missing " + (dir / "manifest.json").string());
  const json top = read_json(dir / "manifest.json");
  CascadeResult r;
  if (fs::exists(dir / "provenance.json")) {
    const json p = read_json(dir / "provenance.json");
    if (p.contains("epsilon")) r.epsilon = p["epsilon"].get<double>();
    if (p.contains("delta") && p["delta"].is_number()) r.delta = p["delta"].get<double>();
  }
  if (!top.contains("scales") || !top["scales"].is_array()) throw InputError("cascade result: manifest has no scale list");
  for (const auto& e : top["scales"]) {
    const fs::path sd = dir / e.at("dir").get<std::string>();
    if (!fs::exists(sd / "manifest.json")) throw InputError("cascade result: missing " + (sd / "manifest.json").string());
    const json m = read_json(sd / "manifest.json");
    ScaleResult s;
    try {
      s.label = m.at("label").get<int>();
      const Index n = m.at("n").get<Index>();
      s.delta = m.at("delta").get<double>();
      s.iterations = m.at("iterations").get<int>();
      s.converged = m.at("converged").get<bool>();
      for (const auto& b : m.at("blocks")) s.partition.blocks.push_back(b.get<std::vector<int>>());
      s.fallback_blocks = m.at("fallback_blocks").get<std::vector<int>>();
      for (int h : m.at("has_projection").get<std::vector<int>>()) s.has_projection.push_back(static_cast<char>(h));
      const auto res = m.at("residual_norms").get<std::vector<double>>();
      s.residuals = Eigen::Map<const Vector>(res.data(), static_cast<Index>(res.size()));
      s.values = parse_matrix_csv(read_text(sd / "values.csv"), 1).row(0).transpose();
      s.v = parse_matrix_csv(read_text(sd / "v.csv"), n);
      s.w = parse_matrix_csv(read_text(sd / "w.csv"), n);
      s.u = parse_matrix_csv(read_text(sd / "u.csv"), n);
      if (s.u.cols() == 0) s.u.resize(n, 0);
      s.projected = parse_matrix_csv(read_text(sd / "projected.csv"), n);
    } catch (const json::exception& ex) {
      throw InputError((sd / "manifest.json").string() + ": " + ex.what());
    }
    r.scales.push_back(std::move(s));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Heatmap: long-form rows scale,eigen_index,vertex,value,block of the aligned
// basis w. `scale` is the scale label, indices are 0-based.

inline std::string heatmap_csv(const CascadeResult& r) {
  std::string out = "scale,eigen_index,vertex,value,block\n";
  for (const auto& s : r.scales)
    for (Index j = 0; j < s.w.cols(); ++j) {
      const int b = s.partition.block_of(static_cast<int>(j));
      for (Index v = 0; v < s.w.rows(); ++v)
        out += std::to_string(s.label) + "," + std::to_string(j) + "," + std::to_string(v) + "," + format_double(s.w(v, j)) + "," +
               std::to_string(b) + "\n";
    }
  return out;
}

struct HeatmapScale {
  int label = 0;
  Matrix w;
  std::vector<int> block;
};

/// Parses heatmap_csv output back into one matrix per scale, in order of appearance.
inline std::vector<HeatmapScale> parse_heatmap_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "scale,eigen_index,vertex,value,block") throw InputError("heatmap: unexpected header");
  struct Row {
    int j;
    Index v;
    double x;
    int b;
  };
  std::vector<std::pair<int, std::vector<Row>>> scales;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    int label = 0, j = 0, b = 0;
    long long v = 0;
    char val[64];
    if (std::sscanf(line.c_str(), "%d,%d,%lld,%63[^,],%d", &label, &j, &v, val, &b) != 5) throw InputError("heatmap: bad row '" + line + "'");
    if (scales.empty() || scales.back().first != label) scales.emplace_back(label, std::vector<Row>{});
    scales.back().second.push_back({j, static_cast<Index>(v), std::stod(val), b});
  }
  std::vector<HeatmapScale> out;
  for (auto& [label, rows] : scales) {
    int m = 0;
    Index n = 0;
    for (const auto& r : rows) {
      m = std::max(m, r.j + 1);
      n = std::max(n, r.v + 1);
    }
    HeatmapScale h{label, Matrix::Zero(n, m), std::vector<int>(static_cast<std::size_t>(m), -1)};
    for (const auto& r : rows) {
      h.w(r.v, r.j) = r.x;
      h.block[static_cast<std::size_t>(r.j)] = r.b;
    }
    out.push_back(std::move(h));
  }
  return out;
}

}  // namespace eigencascade::io
