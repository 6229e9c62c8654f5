#include "eigencascade/cover_tree.hpp"

#include <catch_amalgamated.hpp>

using namespace eigencascade;

namespace {

// Brute-force GP_j(x) by walking parent links from x's entry level.
int walk_up(const CoverTree& T, int x, int j) {
  int level = T.entry_level(x);
  if (level >= j) return x;
  int y = x;
  while (level < j) y = T.parent(y, level++);
  return y;
}

}  // namespace

TEST_CASE("random clouds satisfy every invariant") {
  for (int dim : {1, 2, 3}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const PointCloud X = uniform_cube(120, dim, seed);
      const CoverTree T = build_cover_tree(X);
      const auto rep = verify_invariants(T, X);
      CHECK(rep.ok());
      CHECK(T.level(T.bottom_level()).size() == static_cast<std::size_t>(X.size()));
      CHECK(T.level(T.top_level()).size() == 1);
    }
  }
}

TEST_CASE("synthetic datasets satisfy every invariant") {
  const PointCloud A = cantor_square(3, 2);
  CHECK(verify_invariants(build_cover_tree(A), A).ok());
  const PointCloud B = pinwheel(10);
  CHECK(verify_invariants(build_cover_tree(B), B).ok());
  const PointCloud C = sphere_annuli(3, 12, 20.0);
  CHECK(verify_invariants(build_cover_tree(C), C).ok());
}

TEST_CASE("single point tree") {
  const PointCloud X(std::vector<std::vector<double>>{{0.3, 0.4}});
  const CoverTree T = build_cover_tree(X);
  CHECK(T.num_levels() == 1);
  CHECK(T.grandparent(0, T.top_level()) == 0);
  CHECK(verify_invariants(T, X).ok());
}

TEST_CASE("duplicate and empty input are rejected") {
  const PointCloud X(std::vector<std::vector<double>>{{0, 0}, {1, 1}, {0, 0}});
  CHECK_THROWS_AS(build_cover_tree(X), InputError);
  CHECK_THROWS_AS(build_cover_tree(PointCloud(std::vector<std::vector<double>>{})), InputError);
}

TEST_CASE("hand-built trees with violations are reported") {
  const PointCloud X(std::vector<std::vector<double>>{{0.0}, {1.5}, {3.0}});
  SECTION("separation") {
    // C_0 = {0, 1}: d = 1.5 > 1 holds; C_1 = {0, 1}: d = 1.5 <= 2 fails.
    const CoverTree T(0, 1, 3, {{0, 1, 2}, {0, 1}}, {{-1, -1, 1}, {}});
    const auto rep = verify_invariants(T, X);
    REQUIRE_FALSE(rep.ok());
    bool found = false;
    for (const auto& v : rep.violations)
      if (v.kind == InvariantKind::separation && v.level_j == 1) found = true;
    CHECK(found);
  }
  SECTION("nesting") {
    const CoverTree T(0, 1, 3, {{0, 2}, {1}}, {{1, -1, 1}, {}});
    const auto rep = verify_invariants(T, X);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.first()->kind == InvariantKind::nesting);
    CHECK(rep.first()->a == 1);
  }
  SECTION("cover") {
    // GP_1(2) = 0 at distance 3, bound 2^2 - 2^0 = 3 is not strict.
    const CoverTree T(0, 1, 3, {{0, 1, 2}, {0}}, {{0, 0, 0}, {}});
    const auto rep = verify_invariants(T, X);
    bool found = false;
    for (const auto& v : rep.violations)
      if (v.kind == InvariantKind::cover && v.a == 2) {
        found = true;
        CHECK(v.dist == 3.0);
        CHECK(v.bound == 3.0);
      }
    CHECK(found);
  }
}

TEST_CASE("grandparent and descendant counts agree with brute force") {
  const PointCloud X = uniform_cube(200, 2, 11);
  const CoverTree T = build_cover_tree(X);
  for (int j = T.bottom_level(); j <= T.top_level(); ++j) {
    const auto counts = T.descendant_counts(j);
    const auto& Cj = T.level(j);
    int total = 0;
    for (std::size_t k = 0; k < Cj.size(); ++k) {
      int brute = 0;
      if (j == T.bottom_level()) {
        brute = 1;
      } else {
        for (int x : T.level(j - 1)) brute += walk_up(T, x, j) == Cj[k];
      }
      CHECK(counts[k] == brute);
      CHECK(T.descendant_count(Cj[k], j) == brute);
      total += counts[k];
    }
    const auto expect = j == T.bottom_level() ? Cj.size() : T.level(j - 1).size();
    CHECK(static_cast<std::size_t>(total) == expect);
    for (int x = 0; x < X.size(); ++x) CHECK(T.grandparent(x, j) == walk_up(T, x, j));
  }
}

TEST_CASE("grandparent rejects levels outside the tree") {
  const PointCloud X = uniform_cube(10, 2, 1);
  const CoverTree T = build_cover_tree(X);
  CHECK_THROWS_AS(T.grandparent(0, T.top_level() + 1), InputError);
  CHECK_THROWS_AS(T.grandparent(0, T.bottom_level() - 1), InputError);
  CHECK_THROWS_AS(T.descendant_count(-1, T.top_level()), InputError);
}

TEST_CASE("min_level truncates the tree") {
  const PointCloud X = uniform_cube(100, 2, 4);
  const CoverTree full = build_cover_tree(X);
  CoverTreeOptions opt;
  opt.min_level = full.bottom_level() + 2;
  const CoverTree T = build_cover_tree(X, opt);
  CHECK(T.bottom_level() == opt.min_level);
  CHECK(verify_invariants(T, X).ok());
  for (int j = T.bottom_level(); j <= T.top_level(); ++j) CHECK(T.level(j) == full.level(j));
}
