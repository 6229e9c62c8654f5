#include "eigencascade/tower.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace eigencascade;

namespace {

struct Fixture {
  PointCloud X = uniform_cube(150, 2, 5);
  CoverTree T = build_cover_tree(X);
  CoverTower tower = tower_from_cover_tree(T, X, 1.5);
};

}  // namespace

TEST_CASE("refinement maps certify ball containment") {
  Fixture f;
  const auto& levels = f.tower.levels();
  REQUIRE(levels.size() == static_cast<std::size_t>(f.T.num_levels()));
  for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
    const int i = levels[k];
    const auto& fine = f.tower.cover(i);
    const auto& coarse = f.tower.cover(i + 1);
    const auto& p = f.tower.refinement(i);
    REQUIRE(p.size() == fine.size());
    for (std::size_t u = 0; u < fine.size(); ++u) {
      const auto& a = fine[u];
      const auto& b = coarse[static_cast<std::size_t>(p[u])];
      CHECK(a.radius == 1.5 * std::ldexp(1.0, i + 1));
      CHECK(distance(f.X, a.center, b.center) + a.radius <= b.radius);
      CHECK(b.center == f.T.grandparent(a.center, i + 1));
    }
  }
  CHECK_THROWS_AS(f.tower.refinement(levels.back()), InputError);
  CHECK_THROWS_AS(f.tower.cover(levels.back() + 5), InputError);
}

TEST_CASE("ratio below one is rejected") {
  Fixture f;
  CHECK_THROWS_AS(tower_from_cover_tree(f.T, f.X, 0.5), InputError);
}

TEST_CASE("partition of unity sums to one and errors when uncovered") {
  Fixture f;
  const PartitionOfUnity pou(f.tower, f.X);
  for (int level : f.tower.levels()) {
    for (Index y = 0; y < f.X.size(); ++y) {
      const auto w = pou.eval(level, f.X.point(y));
      double s = 0.0;
      for (auto [idx, v] : w) {
        CHECK(v > 0.0);
        s += v;
      }
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
  }
  const std::vector<double> far{100.0, 100.0};
  CHECK_THROWS_AS(pou.eval(f.tower.levels().front(), far), DomainError);
}

TEST_CASE("partition weights match the kernel ratio") {
  Fixture f;
  const PartitionOfUnity pou(f.tower, f.X);
  const int level = f.tower.levels()[2];
  const double r = f.tower.pou_radius(level);
  const auto& cover = f.tower.cover(level);
  const auto yp = f.X.point(17);
  const std::vector<double> y(yp.begin(), yp.end());
  std::vector<double> brute(cover.size());
  double total = 0.0;
  for (std::size_t c = 0; c < cover.size(); ++c) {
    const auto p = f.X.point(cover[c].center);
    const double d = std::hypot(p[0] - y[0], p[1] - y[1]);
    brute[c] = std::max(0.0, 1.0 - d / r);
    total += brute[c];
  }
  for (auto [idx, v] : pou.eval(level, y)) CHECK(std::abs(v - brute[static_cast<std::size_t>(idx)] / total) < 1e-14);
}

TEST_CASE("nerve weights match a brute-force build") {
  Fixture f;
  for (int level : f.tower.levels()) {
    const NerveGraph g = build_nerve_graph(f.tower, level, f.T, f.X);
    const Matrix W = Matrix(g.weights);
    const double h = 2.0 * 1.5 * std::ldexp(1.0, level);
    for (Index a = 0; a < g.size(); ++a) {
      CHECK(W(a, a) == 0.0);
      for (Index b = 0; b < g.size(); ++b) {
        if (a == b) continue;
        const double d = distance(f.X, g.centers[static_cast<std::size_t>(a)], g.centers[static_cast<std::size_t>(b)]);
        const double expect = d < h ? g.counts[static_cast<std::size_t>(a)] * g.counts[static_cast<std::size_t>(b)] * (1.0 - d / h) : 0.0;
        CHECK(std::abs(W(a, b) - expect) <= 1e-12 * std::max(1.0, expect));
        CHECK(W(a, b) == W(b, a));
      }
    }
  }
}

TEST_CASE("pullback is a row-stochastic selection") {
  Fixture f;
  const int level = f.tower.levels()[1];
  const auto& p = f.tower.refinement(level);
  const Index nc = static_cast<Index>(f.tower.cover(level + 1).size());
  const SparseMatrix P = pullback_matrix(p, nc);
  const Matrix D = Matrix(P);
  for (Index u = 0; u < D.rows(); ++u) {
    CHECK(D.row(u).sum() == 1.0);
    CHECK(D(u, p[static_cast<std::size_t>(u)]) == 1.0);
  }
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N;
  Vector g(nc);
  for (Index i = 0; i < nc; ++i) g(i) = N(rng);
  const Vector pulled = pullback_vertex_function(p, g);
  CHECK((pulled - P * g).norm() == 0.0);
  CHECK((P * Vector::Constant(nc, 2.5) - Vector::Constant(D.rows(), 2.5)).norm() == 0.0);
  std::vector<int> bad = p;
  bad[0] = static_cast<int>(nc);
  CHECK_THROWS_AS(pullback_matrix(bad, nc), InputError);
}

TEST_CASE("extension of a constant pulls back to the constant") {
  Fixture f;
  const PartitionOfUnity pou(f.tower, f.X);
  const int level = f.tower.levels()[3];
  const Index n = static_cast<Index>(f.tower.cover(level).size());
  const auto out = extend_and_pull_back(Vector::Constant(n, -0.75), pou, level, f.X);
  CHECK(out.uncovered.empty());
  CHECK((out.values.array() + 0.75).abs().maxCoeff() < 1e-14);
  const auto p0 = f.X.point(0);
  const PointCloud Y(std::vector<std::vector<double>>{{p0[0], p0[1]}, {50.0, 50.0}});
  const auto partial = extend_and_pull_back(Vector::Constant(n, 1.0), pou, level, Y);
  REQUIRE(partial.uncovered.size() == 1);
  CHECK(partial.uncovered[0] == 1);
  CHECK(std::isnan(partial.values(1)));
}
