#include "eigencascade/cascade.hpp"
#include "eigencascade/cli.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace eigencascade;

namespace {

std::vector<std::vector<int>> blocks(const Vector& v, double delta, double eps) { return cluster_eigenvalues(v, delta, eps).blocks; }

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

SparseMatrix identity(Index n) {
  SparseMatrix I(n, n);
  I.setIdentity();
  return I;
}

GraphOperators random_ops(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Matrix W = oracle::random_dyadic_weights(n, 0.1, rng);
  for (Index i = 0; i + 1 < n; ++i) W(i, i + 1) = W(i + 1, i) = 1.0;
  return GraphOperators(WeightedGraph(oracle::sparse(W)));
}

// A hand-made first-cascade output with given vectors and values.
ScaleSolve packet(const Matrix& V, const Vector& values) {
  ScaleSolve s;
  s.packet.vectors = V;
  s.packet.values = values;
  s.packet.residual_norms = Vector::Zero(values.size());
  s.packet.converged = true;
  s.spectral_bound = 2.0;
  return s;
}

ScaleLadder two_scale_identity(Index n) {
  ScaleLadder L;
  L.sizes = {n, n};
  L.transfers = {identity(n)};
  L.labels = {1, 0};
  return L;
}

cli::CoverPipeline small_cantor() {
  cli::RunConfig c;
  c.dataset.name = "cantor";
  c.dataset.depth = 3;
  c.dataset.grid = 2;
  c.ratio = 1.5;
  c.m = 8;
  return cli::cover_pipeline(c);
}

}  // namespace

TEST_CASE("eigenvalue clustering examples") {
  using B = std::vector<std::vector<int>>;
  CHECK(blocks(vec({0, 1e-12, 1.0}), 1e-9, 0.01) == B{{0, 1}, {2}});
  CHECK(blocks(vec({1.0, 1.005, 2.0}), 1e-9, 0.01) == B{{0, 1}, {2}});
  CHECK(blocks(vec({0, 1, 2, 4}), 1e-9, 0.001) == B{{0}, {1}, {2}, {3}});
  // zero predecessor: only the absolute test applies
  CHECK(blocks(vec({0, 0.5}), 1e-9, 100.0) == B{{0}, {1}});
  CHECK_THROWS_AS(cluster_eigenvalues(vec({1, 0}), 1e-9, 0.01), InputError);
  CHECK_THROWS_AS(cluster_eigenvalues(vec({0, 1}), -1.0, 0.01), InputError);
}

TEST_CASE("clustering is deterministic and idempotent") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0.0, 2.0);
  for (int t = 0; t < 20; ++t) {
    Vector v(30);
    for (Index i = 0; i < 30; ++i) v(i) = U(rng);
    std::sort(v.data(), v.data() + v.size());
    const auto a = blocks(v, 1e-3, 0.02);
    CHECK(a == blocks(v, 1e-3, 0.02));
    // re-clustering any block on its own gives that block back
    for (const auto& b : a) {
      const Vector sub = v.segment(b.front(), static_cast<Index>(b.size()));
      CHECK(blocks(sub, 1e-3, 0.02).size() == 1);
    }
    int next = 0;
    for (const auto& b : a)
      for (int j : b) CHECK(j == next++);
    CHECK(next == 30);
  }
}

TEST_CASE("default delta uses the spectral bound for null blocks") {
  CHECK(default_delta(vec({0, 0, 0})) == 0.0);
  CHECK(default_delta(vec({0, 0}), 2.0) == 2e3 * std::numeric_limits<double>::epsilon());
  CHECK(default_delta(vec({0, 3.0}), 2.0) == 3e3 * std::numeric_limits<double>::epsilon());
}

TEST_CASE("identical scales with identity transfer need at most one iteration") {
  const GraphOperators g = random_ops(60, 2);
  const ScaleLadder L = two_scale_identity(60);
  SolverConfig cfg;
  cfg.m = 5;
  const auto first = first_cascade(L, {g, g}, cfg);
  REQUIRE(first[1].packet.converged);
  CHECK(first[1].packet.iterations <= 1);
  const auto r = second_cascade(first, L, std::nullopt, 0.02);
  // simple eigenvalues: the fine basis reproduces the coarse one
  CHECK((r.scales[1].w - r.scales[0].v).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("a single scale gives w = v") {
  const GraphOperators g = random_ops(30, 3);
  ScaleLadder L;
  L.sizes = {30};
  SolverConfig cfg;
  cfg.m = 4;
  const auto r = double_cascade(L, {g}, cfg, Matrix(), std::nullopt, 0.02);
  REQUIRE(r.scales.size() == 1);
  CHECK(r.scales[0].w == r.scales[0].v);
}

TEST_CASE("simple eigenvalues take the sign of the transferred vector") {
  const Matrix Vc = Matrix::Identity(4, 2);
  const Matrix Vf = -Vc;
  const auto r = second_cascade({packet(Vc, vec({0.5, 1.0})), packet(Vf, vec({0.5, 1.0}))}, two_scale_identity(4), 1e-9, 0.01);
  CHECK(r.scales[1].w == Vc);
  CHECK(r.scales[1].fallback_blocks.empty());
}

TEST_CASE("a rotated two-dimensional eigenspace is aligned to the transferred basis") {
  const double th = 0.7;
  const Matrix Vc = Matrix::Identity(5, 2);
  Matrix Vf = Matrix::Zero(5, 2);
  Vf(0, 0) = std::cos(th);
  Vf(1, 0) = std::sin(th);
  Vf(0, 1) = -std::sin(th);
  Vf(1, 1) = std::cos(th);
  const auto r = second_cascade({packet(Vc, vec({1.0, 1.0})), packet(Vf, vec({1.0, 1.0}))}, two_scale_identity(5), 1e-9, 0.01);
  REQUIRE(r.scales[1].partition.blocks.size() == 1);
  const Matrix& w = r.scales[1].w;
  CHECK((w - Vc).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((w * w.transpose() - Vf * Vf.transpose()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("a collapsed projection falls back to the eigenvectors and is flagged") {
  const Matrix Vc = Matrix::Identity(6, 2);
  Matrix Vf = Matrix::Zero(6, 2);
  Vf(2, 0) = 1.0;
  Vf(3, 1) = 1.0;
  const auto r = second_cascade({packet(Vc, vec({0.0, 0.0})), packet(Vf, vec({1.0, 1.0}))}, two_scale_identity(6), 1e-9, 0.01);
  const auto& s = r.scales[1];
  CHECK(s.fallback_blocks == std::vector<int>{0});
  CHECK((s.w.transpose() * s.w - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(oracle::principal_angle(s.w, Vf) < 1e-12);
  CHECK(s.projected.norm() == 0.0);
}

TEST_CASE("cascade on a cover tower: spans, optimality and cold-start agreement") {
  const auto p = small_cantor();
  SolverConfig cfg;
  cfg.m = 8;
  const auto r = double_cascade(p.ladder, p.ops, cfg, Matrix(), std::nullopt, 0.02);
  REQUIRE(r.scales.size() == p.ladder.num_scales());
  CHECK(r.scales[0].w == r.scales[0].v);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> N;
  for (std::size_t k = 0; k < r.scales.size(); ++k) {
    const auto& s = r.scales[k];
    REQUIRE(s.converged);
    // cold start gives the same values
    SolverConfig c = cfg;
    c.seed = 99;
    const auto cold = solve_scale(p.ops[k], Matrix(p.ops[k].size(), 0), c);
    CHECK((cold.packet.values - s.values).cwiseAbs().maxCoeff() < 1e-8);
    // dense oracle
    const auto dense = oracle::general_eigenvalues(Matrix(p.ops[k].rw));
    CHECK((dense.head(s.values.size()) - s.values).cwiseAbs().maxCoeff() < 1e-8);
    for (const auto& b : s.partition.blocks) {
      Matrix W(s.w.rows(), static_cast<Index>(b.size())), V(s.v.rows(), static_cast<Index>(b.size()));
      for (std::size_t a = 0; a < b.size(); ++a) {
        W.col(static_cast<Index>(a)) = s.w.col(b[a]);
        V.col(static_cast<Index>(a)) = s.v.col(b[a]);
      }
      CHECK(oracle::principal_angle(W, V) < 1e-8);
      if (k == 0) continue;
      const Matrix Vb = oracle::symmetric_eigen(V * V.transpose()).vectors.rightCols(static_cast<Index>(b.size()));
      const Matrix U = p.ladder.transfers[k - 1] * r.scales[k - 1].w;
      for (int j : b) {
        REQUIRE(s.has_projection[static_cast<std::size_t>(j)]);
        const Vector proj = s.projected.col(j);
        const double best = (U.col(j) - proj).norm();
        for (int t = 0; t < 100; ++t) {
          Vector c(Vb.cols());
          for (Index i = 0; i < c.size(); ++i) c(i) = N(rng);
          Vector z = Vb * c;
          z *= proj.norm() / z.norm();
          CHECK(best <= (U.col(j) - z).norm() + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("ladder validation") {
  ScaleLadder L = two_scale_identity(3);
  CHECK_NOTHROW(L.validate());
  L.transfers[0] = 0.5 * identity(3);
  CHECK_THROWS_AS(L.validate(), InputError);
  L.transfers[0] = identity(4);
  CHECK_THROWS_AS(L.validate(), InputError);
  L.transfers.clear();
  CHECK_THROWS_AS(L.validate(), InputError);
}

TEST_CASE("solver errors carry the scale label") {
  const GraphOperators g = random_ops(10, 5);
  ScaleLadder L = two_scale_identity(10);
  L.labels = {-3, -4};
  SolverConfig cfg;
  cfg.m = 3;
  cfg.tol = -1.0;
  try {
    (void)first_cascade(L, {g, g}, cfg);
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).rfind("scale -3: ", 0) == 0);
  }
  cfg.tol = 1e-10;
  CHECK_THROWS_AS(first_cascade(L, {g}, cfg), InputError);
}

TEST_CASE("scales smaller than m solve for every vertex") {
  const GraphOperators a = random_ops(3, 6), b = random_ops(8, 7);
  ScaleLadder L;
  L.sizes = {3, 8};
  std::vector<Triplet> t;
  for (Index i = 0; i < 8; ++i) t.emplace_back(i, i % 3, 1.0);
  SparseMatrix T(8, 3);
  T.setFromTriplets(t.begin(), t.end());
  L.transfers = {T};
  SolverConfig cfg;
  cfg.m = 5;
  const auto r = double_cascade(L, {a, b}, cfg, Matrix(), std::nullopt, 0.02);
  CHECK(r.scales[0].values.size() == 3);
  CHECK(r.scales[1].values.size() == 5);
  CHECK(r.scales[1].converged);
}

TEST_CASE("alignment matrix and diagonal dominance") {
  const Matrix A = Matrix::Identity(3, 3);
  const Matrix M = alignment_matrix(A, identity(3), -A);
  CHECK(M == Matrix::Identity(3, 3));
  CHECK(row_diagonally_dominant(M, 0));
  Matrix N = M;
  N(0, 1) = 1.0;
  CHECK_FALSE(row_diagonally_dominant(N, 0));
}
