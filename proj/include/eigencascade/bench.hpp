#pragma once

#include "eigencascade/cascade.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace eigencascade {

/// One scale of a paired trial. Times are medians of `repeats` timed solves
/// after one discarded warm-up solve per arm.
struct BenchRecord {
  int label = 0;
  Index n = 0;
  Index nnz = 0;
  int components = 0;
  int iterations_cascade = 0;
  int iterations_cold = 0;
  double seconds_cascade = 0.0;
  double seconds_cold = 0.0;
  double max_value_gap = 0.0;  // max_j |lambda_j(cascade) - lambda_j(cold)|
  bool valid = true;           // both arms converged
  std::string note;

  double speedup() const { return seconds_cascade > 0.0 ? seconds_cold / seconds_cascade : 0.0; }
};

struct BenchSummary {
  std::vector<BenchRecord> records;  // scales below the coarsest, coarsest-first
  double coarsest_seconds = 0.0;     // shared by both arms
  double cascade_total = 0.0;        // coarsest + every cascade solve
  double cold_final = 0.0;           // cold solve at the finest scale
  double cold_total = 0.0;           // coarsest + every cold solve
  int valid_scales = 0;
  int cascade_not_slower = 0;  // valid scales with seconds_cascade <= seconds_cold
  int iterations_not_more = 0; // valid scales with iterations_cascade <= iterations_cold
};

struct BenchOptions {
  int repeats = 5;
  bool warmup = true;
};

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline ScaleSolve timed_solve(const GraphOperators& ops, const Matrix& guess, const SolverConfig& cfg, const BenchOptions& opt,
                              double& seconds) {
  if (opt.warmup) (void)solve_scale(ops, guess, cfg);
  std::vector<double> t;
  ScaleSolve last;
  for (int r = 0; r < opt.repeats; ++r) {
    last = solve_scale(ops, guess, cfg);
    t.push_back(last.seconds);
  }
  seconds = median(t);
  return last;
}

}  // namespace detail

/// Paired trials over a ladder. The cascade chain is computed once (untimed)
/// to fix each scale's warm-start block; then, per scale below the coarsest,
/// the cascade arm (warm start) and the cold arm (empty initial block) solve
/// the same operator with the same solver config, one arm at a time.
inline BenchSummary run_bench(const ScaleLadder& ladder, const std::vector<GraphOperators>& ops, const SolverConfig& cfg,
                              const BenchOptions& opt = {}) {
  detail::require(opt.repeats >= 3, "bench: at least 3 repeats are required");
  const auto chain = first_cascade(ladder, ops, cfg);
  BenchSummary S;
  {
    SolverConfig c = cfg;
    c.seed = cfg.seed;
    double t = 0.0;
    detail::with_scale(ladder, 0, [&] { return detail::timed_solve(ops[0], Matrix(ops[0].size(), 0), c, opt, t); });
    S.coarsest_seconds = t;
  }
  S.cascade_total = S.coarsest_seconds;
  S.cold_total = S.coarsest_seconds;
  for (std::size_t k = 1; k < ops.size(); ++k) {
    SolverConfig c = cfg;
    c.seed = cfg.seed + k;
    BenchRecord rec;
    rec.label = ladder.label(k);
    rec.n = ops[k].size();
    rec.nnz = ops[k].graph.weights().nonZeros();
    connected_components(ops[k].graph.weights(), &rec.components);
    const Matrix guess = ladder.transfers[k - 1] * chain[k - 1].packet.vectors;
    const ScaleSolve warm = detail::with_scale(ladder, k, [&] { return detail::timed_solve(ops[k], guess, c, opt, rec.seconds_cascade); });
    const ScaleSolve cold =
        detail::with_scale(ladder, k, [&] { return detail::timed_solve(ops[k], Matrix(ops[k].size(), 0), c, opt, rec.seconds_cold); });
    rec.iterations_cascade = warm.packet.iterations;
    rec.iterations_cold = cold.packet.iterations;
    rec.max_value_gap = (warm.packet.values - cold.packet.values).cwiseAbs().maxCoeff();
    rec.valid = warm.packet.converged && cold.packet.converged;
    if (!warm.packet.converged) rec.note += "cascade arm did not converge; ";
    if (!cold.packet.converged) rec.note += "cold arm did not converge; ";
    S.cascade_total += rec.seconds_cascade;
    S.cold_total += rec.seconds_cold;
    if (k + 1 == ops.size()) S.cold_final = rec.seconds_cold;
    if (rec.valid) {
      ++S.valid_scales;
      if (rec.seconds_cascade <= rec.seconds_cold) ++S.cascade_not_slower;
      if (rec.iterations_cascade <= rec.iterations_cold) ++S.iterations_not_more;
    }
    S.records.push_back(std::move(rec));
  }
  if (ops.size() == 1) S.cold_final = S.coarsest_seconds;
  return S;
}

}  // namespace eigencascade
