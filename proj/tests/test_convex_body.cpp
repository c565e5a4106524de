#include <doctest.h>

#include <cmath>
#include <vector>

#include "geowalk/convex_body.hpp"
#include "geowalk/errors.hpp"
#include "geowalk/stats.hpp"
#include "test_support.hpp"

using namespace geowalk;

namespace {
const double kDeg = M_PI / 180.0;
}

TEST_CASE("cap membership") {
  const Manifold s2 = Manifold::sphere(2);
  const ConvexBody cap = ConvexBody::spherical_cap(s2, testing::north(2), M_PI / 3);
  CHECK(cap.contains(testing::north(2)));
  CHECK_FALSE(cap.contains(testing::point({1, 0, 0})));
  const double a = 59.9 * kDeg;
  CHECK(cap.contains(testing::point({std::sin(a), 0, std::cos(a)})));
  const double b = 60.1 * kDeg;
  CHECK_FALSE(cap.contains(testing::point({std::sin(b), 0, std::cos(b)})));
  CHECK_THROWS_AS(cap.contains(testing::point({0, 0, 0, 1})), ManifoldMismatch);
}

TEST_CASE("metadata of built-in bodies") {
  const Manifold s2 = Manifold::sphere(2);
  const auto cap = ConvexBody::spherical_cap(s2, testing::north(2), M_PI / 3);
  CHECK(cap.metadata().inner_radius == doctest::Approx(M_PI / 3));
  CHECK(cap.metadata().diameter == doctest::Approx(2 * M_PI / 3));
  CHECK(cap.strongly_convex());

  const auto hemi = ConvexBody::spherical_cap(s2, testing::north(2), M_PI / 2);
  CHECK_FALSE(hemi.strongly_convex());
  CHECK_THROWS_AS(ConvexBody::spherical_cap(s2, testing::north(2), 2.0), InvalidParams);
  CHECK_THROWS_AS(ConvexBody::spherical_cap(s2, testing::north(2), 0.0), InvalidParams);

  const Manifold r3 = Manifold::euclidean(3);
  const auto cube = ConvexBody::euclidean_box(r3, Eigen::Vector3d::Zero(), Eigen::Vector3d::Ones());
  CHECK(cube.metadata().inner_radius == doctest::Approx(0.5));
  CHECK(cube.metadata().diameter == doctest::Approx(std::sqrt(3.0)));
  CHECK((cube.metadata().inner_center.coords - Eigen::Vector3d::Constant(0.5)).norm() < 1e-15);

  const auto ball = ConvexBody::geodesic_ball(s2, testing::north(2), 0.2);
  CHECK(ball.metadata().inner_radius == doctest::Approx(0.2));
  CHECK(ball.metadata().diameter == doctest::Approx(0.4));
  CHECK_THROWS_AS(ConvexBody::geodesic_ball(s2, testing::north(2), 2.0), InvalidParams);
}

TEST_CASE("declared metadata survives spot checks") {
  RngStream rng(1);
  const Manifold s2 = Manifold::sphere(2);
  for (const auto& body : {ConvexBody::spherical_cap(s2, testing::north(2), M_PI / 3),
                           ConvexBody::geodesic_ball(Manifold::special_orthogonal(3),
                                                     Manifold::special_orthogonal(3).reference_point(), 1.0),
                           ConvexBody::euclidean_box(Manifold::euclidean(2), Eigen::Vector2d(-1, 0),
                                                     Eigen::Vector2d(2, 1))}) {
    const auto check = spot_check(body, rng, 10000, 10000);
    CHECK(check.ok());
    CHECK(check.ball_points == 10000);
  }
}

TEST_CASE("cap midpoints stay inside") {
  RngStream rng(2);
  const Manifold s4 = Manifold::sphere(4);
  const auto cap = ConvexBody::spherical_cap(s4, testing::north(4), 75 * kDeg);
  for (int i = 0; i < 10000; ++i) {
    const auto x = cap.rejection_sample_uniform(rng);
    const auto y = cap.rejection_sample_uniform(rng);
    const Eigen::VectorXd mid = (x.coords + y.coords).normalized();
    REQUIRE(cap.contains({mid}));
  }
}

TEST_CASE("parse body strings") {
  const Manifold s2 = Manifold::sphere(2);
  const auto cap = ConvexBody::parse(s2, "cap:north:1.0471975511965976");
  CHECK(cap.kind() == BodyKind::SphericalCap);
  CHECK(cap.cap_angle() == doctest::Approx(M_PI / 3));
  const auto cap2 = ConvexBody::parse(s2, "cap:1,0,0:0.5");
  CHECK(cap2.contains(testing::point({1, 0, 0})));
  const auto box = ConvexBody::parse(Manifold::euclidean(3), "box:0:1");
  CHECK(box.box_hi() == Eigen::Vector3d::Ones());
  const auto box2 = ConvexBody::parse(Manifold::euclidean(2), "box:0,-1:1,1");
  CHECK(box2.box_lo()[1] == -1.0);
  const auto ball = ConvexBody::parse(Manifold::special_orthogonal(3), "ball:identity:0.3");
  CHECK(ball.kind() == BodyKind::GeodesicBall);
  CHECK_THROWS(ConvexBody::parse(s2, "cube:1"));
  CHECK_THROWS(ConvexBody::parse(s2, "cap:north:abc"));
}

TEST_CASE("sine power integrals match Simpson") {
  for (int k = 0; k <= 9; ++k) {
    for (double angle : {0.3, 1.0, M_PI / 2, 2.5, M_PI}) {
      const double oracle = testing::simpson([k](double t) { return std::pow(std::sin(t), k); }, 0.0, angle);
      CHECK(sine_power_integral(k, angle) == doctest::Approx(oracle).epsilon(1e-10));
    }
  }
  CHECK(cap_volume_fraction(2, M_PI / 3) == doctest::Approx(0.25));
  CHECK(cap_volume_fraction(4, M_PI) == doctest::Approx(1.0));
}

TEST_CASE("hemisphere sampler has a sine polar density") {
  RngStream rng(3);
  const Manifold s2 = Manifold::sphere(2);
  const auto hemi = ConvexBody::spherical_cap(s2, testing::north(2), M_PI / 2);
  std::vector<double> angles(100000);
  for (auto& a : angles) a = testing::polar_angle(hemi.rejection_sample_uniform(rng));
  // normalized sin density on [0, pi/2] has CDF 1 - cos
  CHECK(stats::ks_statistic(angles, [](double t) { return 1.0 - std::cos(t); }) < 0.01);
  CHECK(cap_polar_angle_cdf(2, M_PI / 2, 0.7) == doctest::Approx(1.0 - std::cos(0.7)));
}

TEST_CASE("unit cube sampler is componentwise uniform") {
  RngStream rng(4);
  const auto cube = ConvexBody::euclidean_box(Manifold::euclidean(3), Eigen::Vector3d::Zero(), Eigen::Vector3d::Ones());
  std::vector<std::vector<double>> comps(3, std::vector<double>(100000));
  for (std::size_t i = 0; i < comps[0].size(); ++i) {
    const auto x = cube.rejection_sample_uniform(rng);
    for (int j = 0; j < 3; ++j) comps[j][i] = x.coords[j];
  }
  for (const auto& c : comps) CHECK(stats::ks_statistic(c, [](double t) { return t; }) < 0.01);
}

TEST_CASE("cap acceptance rate matches the volume fraction") {
  // acceptance of normalized Gaussians into a 30 degree cap on S4
  RngStream rng(5);
  const double theta = 30 * kDeg;
  const int draws = 200000;
  long hits = 0;
  for (int i = 0; i < draws; ++i) {
    Eigen::VectorXd g(5);
    for (int j = 0; j < 5; ++j) g[j] = rng.normal();
    hits += g.normalized()[4] >= std::cos(theta);
  }
  const double p = testing::simpson([](double t) { return std::pow(std::sin(t), 3); }, 0, theta) /
                   testing::simpson([](double t) { return std::pow(std::sin(t), 3); }, 0, M_PI);
  CHECK(cap_volume_fraction(4, theta) == doctest::Approx(p).epsilon(1e-10));
  const double se = std::sqrt(p * (1 - p) / draws);
  CHECK(std::abs(static_cast<double>(hits) / draws - p) < 3 * se);
}

TEST_CASE("rejection sampling gives up on tiny bodies") {
  const auto tiny = ConvexBody::spherical_cap(Manifold::sphere(9), testing::north(9), 1e-3);
  RngStream rng(6);
  CHECK_THROWS_AS(tiny.rejection_sample_uniform(rng), AcceptanceTooLow);
}

TEST_CASE("custom bodies") {
  const Manifold r2 = Manifold::euclidean(2);
  const auto disk = ConvexBody::custom(
      r2, [](const ManifoldPoint& x) { return x.coords.norm() <= 1.0; }, testing::point({0, 0}), 1.0, 2.0);
  CHECK(disk.contains(testing::point({0.5, 0.5})));
  CHECK_FALSE(disk.supports_rejection_sampling());
  RngStream rng(7);
  CHECK(spot_check(disk, rng, 2000, 2000).ok());
}

TEST_CASE("SO(n) ball membership agrees with the exact distance") {
  RngStream rng(8);
  const Manifold so3 = Manifold::special_orthogonal(3);
  const auto ball = ConvexBody::geodesic_ball(so3, so3.reference_point(), 1.2);
  for (int i = 0; i < 5000; ++i) {
    TangentVector u = so3.sample_tangent_gaussian(so3.reference_point(), rng);
    u.components *= 1.6 * rng.uniform() / so3.norm(u);
    const ManifoldPoint x = so3.exp_map(so3.reference_point(), u);
    REQUIRE(ball.contains(x) == (so3.distance(so3.reference_point(), x) <= 1.2));
  }
}
