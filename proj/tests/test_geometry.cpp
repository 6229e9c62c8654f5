#include "eigencascade/geometry.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

using namespace eigencascade;

TEST_CASE("distance and hat profile") {
  const PointCloud X(std::vector<std::vector<double>>{{0, 0}, {3, 4}});
  CHECK(distance(X, 0, 1) == 5.0);
  CHECK(hat_profile(0.0) == 1.0);
  CHECK(hat_profile(0.25) == 0.75);
  CHECK(hat_profile(1.0) == 0.0);
  CHECK(hat_profile(2.0) == 0.0);
  const RadialKernel k{hat_profile, 2.0};
  CHECK(k.at_distance(1.0) == 0.5);
  CHECK(kernel_eval(k, X.point(0), X.point(0)) == 1.0);
}

TEST_CASE("point cloud rejects ragged and non-finite input") {
  CHECK_THROWS_AS(PointCloud(std::vector<std::vector<double>>{{0, 0}, {1}}), InputError);
  CHECK_THROWS_AS(PointCloud(std::vector<std::vector<double>>{{0, std::nan("")}}), InputError);
}

TEST_CASE("cantor square sizes and block labels") {
  const PointCloud X = cantor_square(2, 1);
  REQUIRE(X.size() == 16);
  // squares of side 1/9 at corners in {0, 2/9, 6/9, 8/9}
  std::set<std::pair<long, long>> centers;
  for (Index i = 0; i < X.size(); ++i) centers.insert({std::lround(X.coords()(i, 0) * 18), std::lround(X.coords()(i, 1) * 18)});
  const std::set<long> allowed{1, 5, 13, 17};
  for (auto [x, y] : centers) {
    CHECK(allowed.count(x));
    CHECK(allowed.count(y));
  }
  CHECK(centers.size() == 16);

  const auto lab1 = cantor_block_labels(2, 1, 1);
  // each level-1 block lies in one quadrant of the unit square
  for (Index i = 0; i < X.size(); ++i) {
    const int q = (X.coords()(i, 0) > 0.5 ? 1 : 0) + (X.coords()(i, 1) > 0.5 ? 2 : 0);
    for (Index j = 0; j < X.size(); ++j)
      if (lab1[static_cast<std::size_t>(i)] == lab1[static_cast<std::size_t>(j)])
        CHECK(q == (X.coords()(j, 0) > 0.5 ? 1 : 0) + (X.coords()(j, 1) > 0.5 ? 2 : 0));
  }
  CHECK(cantor_square(4, 2).size() == 256 * 4);
}

TEST_CASE("pinwheel is invariant under rotation by 120 degrees") {
  const PointCloud X = pinwheel(9);
  CHECK(X.coords().row(0).norm() == 0.0);
  const double th = 2.0 * std::numbers::pi / 3.0;
  for (Index i = 0; i < X.size(); ++i) {
    const double x = std::cos(th) * X.coords()(i, 0) - std::sin(th) * X.coords()(i, 1);
    const double y = std::sin(th) * X.coords()(i, 0) + std::cos(th) * X.coords()(i, 1);
    double best = 1e9;
    for (Index j = 0; j < X.size(); ++j) best = std::min(best, std::hypot(X.coords()(j, 0) - x, X.coords()(j, 1) - y));
    CHECK(best < 1e-12);
  }
}

TEST_CASE("sphere annuli lie on the unit sphere without duplicates") {
  const PointCloud X = sphere_annuli(4, 12, 20.0);
  for (Index i = 0; i < X.size(); ++i) CHECK(std::abs(X.coords().row(i).norm() - 1.0) < 1e-14);
  for (Index i = 0; i < X.size(); ++i)
    for (Index j = i + 1; j < X.size(); ++j) CHECK(distance(X, i, j) > 1e-9);
  CHECK_THROWS_AS(sphere_annuli(4, 10, 20.0), InputError);
}

TEST_CASE("uniform cube is seeded") {
  const PointCloud A = uniform_cube(50, 3, 7), B = uniform_cube(50, 3, 7), C = uniform_cube(50, 3, 8);
  CHECK(A.coords() == B.coords());
  CHECK(A.coords() != C.coords());
  CHECK(A.coords().minCoeff() >= 0.0);
  CHECK(A.coords().maxCoeff() < 1.0);
}

TEST_CASE("y shape and flares") {
  const PointCloud Y = y_shape(0.05);
  CHECK(Y.coords()(0, 0) == 0.0);
  CHECK(Y.coords()(0, 1) == -0.25);
  CHECK(Y.coords().col(1).minCoeff() == Catch::Approx(-1.0));
  CHECK(Y.coords().col(1).maxCoeff() == Catch::Approx(1.0));

  std::vector<int> lab;
  const PointCloud F = four_flares(0.025, {10, 12, 14, 16}, {1.02, 1.03, 1.04, 1.05}, &lab);
  REQUIRE(lab.size() == static_cast<std::size_t>(F.size()));
  std::vector<int> count(5, 0);
  for (int l : lab) ++count[static_cast<std::size_t>(l)];
  CHECK(count[1] == 10);
  CHECK(count[4] == 16);
  for (Index i = 0; i < F.size(); ++i)
    if (lab[static_cast<std::size_t>(i)] == 0) CHECK(F.coords().row(i).norm() <= 0.25 + 1e-12);
  CHECK_THROWS_AS(four_flares(0.025, {10, 10, 10}, {1, 1, 1}, nullptr), InputError);
}

TEST_CASE("csv round trip is exact") {
  const PointCloud X = uniform_cube(20, 2, 3);
  std::stringstream ss;
  write_csv(X, ss);
  const PointCloud Y = read_csv(ss);
  CHECK(Y.coords() == X.coords());
}

TEST_CASE("generate_dataset dispatches by name") {
  DatasetSpec s;
  s.name = "cantor";
  s.depth = 2;
  CHECK(generate_dataset(s).size() == 16);
  s.name = "nope";
  CHECK_THROWS_AS(generate_dataset(s), InputError);
  s.name = "csv";
  s.path = "/nonexistent/points.csv";
  CHECK_THROWS_AS(generate_dataset(s), InputError);
}
