#include <doctest.h>

#include <cmath>
#include <vector>

#include "geowalk/errors.hpp"
#include "geowalk/stats.hpp"
#include "geowalk/walker.hpp"
#include "test_support.hpp"

using namespace geowalk;

TEST_CASE("step size bound") {
  const double n = 9, r = M_PI / 3;
  const double first = std::sqrt(1.0 / (100.0 * std::sqrt(n) * 9.0));
  const double second = 0.5 * r / (4.0 * n * std::sqrt(n));
  CHECK(first == doctest::Approx(0.019245).epsilon(1e-4));
  CHECK(second == doctest::Approx(0.004848).epsilon(1e-3));
  CHECK(delta_bound(9, 9.0, r, 0.5) == doctest::Approx(std::min(first, second)).epsilon(1e-15));
  CHECK(delta_bound(3, 0.0, 0.5, 0.5) == doctest::Approx(0.5 * 0.5 / (4 * 3 * std::sqrt(3.0))).epsilon(1e-15));
  CHECK(delta_bound(3, 0.0, 1.0, 0.5) == doctest::Approx(2 * delta_bound(3, 0.0, 0.5, 0.5)).epsilon(1e-15));
  const Manifold s2 = Manifold::sphere(2);
  const auto cap = ConvexBody::spherical_cap(s2, testing::north(2), M_PI / 3);
  CHECK(delta_bound(s2.descriptor(), cap) == doctest::Approx(delta_bound(2, 2.0, M_PI / 3)).epsilon(1e-15));
}

TEST_CASE("step size validation") {
  const Manifold s2 = Manifold::sphere(2);
  const auto cap = ConvexBody::spherical_cap(s2, testing::north(2), M_PI / 3);
  WalkParams params;
  params.delta = 0.3;
  CHECK_THROWS_AS(validate_step_size(cap, params), InvalidParams);
  params.override_delta = true;
  CHECK(validate_step_size(cap, params).has_value());
  params.delta = 0.01;
  params.override_delta = false;
  CHECK_FALSE(validate_step_size(cap, params).has_value());
}

TEST_CASE("zero step keeps the state") {
  const Manifold s2 = Manifold::sphere(2);
  const auto cap = ConvexBody::spherical_cap(s2, testing::north(2), M_PI / 3);
  RngStream rng(1);
  WalkState state;
  state.point = testing::point({0.1, 0.0, std::sqrt(0.99)});
  const WalkState next = uniform_step(state, cap, 0.0, rng);
  CHECK((next.point.coords - state.point.coords).norm() < 1e-15);
  CHECK_FALSE(next.rejected_last);
  CHECK(next.step_index == 1);
}

TEST_CASE("proposals inside the inner ball are accepted") {
  const Manifold s2 = Manifold::sphere(2);
  const auto cap = ConvexBody::spherical_cap(s2, testing::north(2), M_PI / 3);
  RngStream rng(2);
  WalkState state;
  state.point = testing::north(2);
  // |u| stays below 10 for these draws; 10 * delta < r
  for (int i = 0; i < 1000; ++i) {
    const WalkState next = uniform_step(state, cap, 0.05, rng);
    REQUIRE_FALSE(next.rejected_last);
  }
}

TEST_CASE("lazy walk counts rejections") {
  const Manifold s2 = Manifold::sphere(2);
  const auto cap = ConvexBody::spherical_cap(s2, testing::north(2), 0.2);
  RngStream rng(3);
  WalkState state;
  state.point = testing::north(2);
  long rejected = 0;
  for (int i = 0; i < 1000; ++i) {
    const WalkState next = uniform_step(state, cap, 0.5, rng);
    if (next.rejected_last) {
      ++rejected;
      REQUIRE(next.point.coords == state.point.coords);
    }
    state = next;
  }
  CHECK(rejected == state.cumulative_rejections);
  CHECK(rejected > 100);
}

TEST_CASE("metropolis with constant objective matches the uniform walk exactly") {
  const Manifold s2 = Manifold::sphere(2);
  const auto cap = ConvexBody::spherical_cap(s2, testing::north(2), M_PI / 3);
  WalkParams params;
  params.delta = 0.3;
  params.override_delta = true;
  params.max_steps = 5000;
  params.seed = 99;
  ChainOptions options;
  options.burn_in = 0;
  const auto plain = run_chain(testing::north(2), cap, params, std::nullopt, options);
  const GibbsTarget flat{[](const ManifoldPoint&) { return 3.0; }, 1.0, 0.7};
  const auto filtered = run_chain(testing::north(2), cap, params, flat, options);
  REQUIRE(plain.samples.size() == filtered.samples.size());
  for (std::size_t i = 0; i < plain.samples.size(); ++i) {
    REQUIRE(plain.samples[i].point.coords == filtered.samples[i].point.coords);
  }
  CHECK(plain.stats.rejections == filtered.stats.rejections);
  CHECK(filtered.stats.filter_rejections == 0);
}

TEST_CASE("metropolis always accepts downhill moves") {
  const Manifold r1 = Manifold::euclidean(1);
  const auto box = ConvexBody::euclidean_box(r1, Eigen::VectorXd::Constant(1, -10), Eigen::VectorXd::Constant(1, 10));
  RngStream rng(4);
  const GibbsTarget target{[](const ManifoldPoint& x) { return x.coords[0]; }, 1.0, 1e-6};
  WalkState state;
  state.point = testing::point({0.0});
  for (int i = 0; i < 500; ++i) {
    const double before = state.point.coords[0];
    state = metropolis_step(state, box, target, 0.01, rng);
    REQUIRE(state.point.coords[0] <= before);
  }
}

TEST_CASE("non-finite objective values are reported with the step") {
  const Manifold s2 = Manifold::sphere(2);
  const auto cap = ConvexBody::spherical_cap(s2, testing::north(2), M_PI / 3);
  WalkParams params;
  params.delta = 0.01;
  params.max_steps = 100;
  int calls = 0;
  const GibbsTarget bad{[&calls](const ManifoldPoint&) { return ++calls > 10 ? NAN : 0.0; }, 1.0, 1.0};
  try {
    run_chain(testing::north(2), cap, params, bad, {});
    FAIL("expected an oracle error");
  } catch (const OracleError& e) {
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}

TEST_CASE("chain bookkeeping") {
  const Manifold s2 = Manifold::sphere(2);
  const auto cap = ConvexBody::spherical_cap(s2, testing::north(2), M_PI / 3);
  WalkParams params;
  params.delta = 0.02;
  params.seed = 5;
  params.max_steps = 0;
  CHECK(run_chain(testing::north(2), cap, params, std::nullopt, {}).samples.empty());

  params.max_steps = 1000;
  ChainOptions options;
  options.burn_in = 100;
  options.thin = 7;
  const auto a = run_chain(testing::north(2), cap, params, std::nullopt, options);
  const auto b = run_chain(testing::north(2), cap, params, std::nullopt, options);
  CHECK(a.samples.size() == 900 / 7);
  CHECK(a.samples.front().step == 107);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    REQUIRE(a.samples[i].point.coords == b.samples[i].point.coords);
    REQUIRE(cap.contains(a.samples[i].point));
  }
  CHECK_THROWS_AS(run_chain(testing::point({1, 0, 0}), cap, params, std::nullopt, options), InvalidStart);
  CHECK(default_burn_in(2, 0.1) == 4000);
}

TEST_CASE("tiny steps in the cube are rarely rejected") {
  const Manifold r3 = Manifold::euclidean(3);
  const auto cube = ConvexBody::euclidean_box(r3, Eigen::Vector3d::Zero(), Eigen::Vector3d::Ones());
  WalkParams params;
  params.delta = 0.001;
  params.max_steps = 20000;
  params.seed = 8;
  ChainOptions options;
  options.burn_in = 0;
  const auto chain = run_chain(cube.metadata().inner_center, cube, params, std::nullopt, options);
  CHECK(chain.stats.rejection_fraction() < 1e-3);
}

TEST_CASE("parallel chains are independent of the worker count") {
  const Manifold s2 = Manifold::sphere(2);
  const auto cap = ConvexBody::spherical_cap(s2, testing::north(2), M_PI / 3);
  WalkParams params;
  params.delta = 0.05;
  params.override_delta = true;
  params.seed = 17;
  params.max_steps = 500;
  ChainOptions options;
  options.burn_in = 0;
  const auto serial = run_chains(testing::north(2), cap, params, std::nullopt, options, 4, 1);
  const auto threaded = run_chains(testing::north(2), cap, params, std::nullopt, options, 4, 3);
  for (int c = 0; c < 4; ++c) {
    CHECK(serial[c].final_state.point.coords == threaded[c].final_state.point.coords);
  }
  CHECK(serial[0].final_state.point.coords != serial[1].final_state.point.coords);
}

TEST_CASE("local conductance") {
  RngStream rng(9);
  const Manifold s2 = Manifold::sphere(2);
  const auto cap = ConvexBody::spherical_cap(s2, testing::north(2), M_PI / 3);
  CHECK(estimate_local_conductance(testing::north(2), cap, 0.05, 10000, rng) >= 0.999);
  const double single = estimate_local_conductance(testing::north(2), cap, 2.0, 1, rng);
  CHECK((single == 0.0 || single == 1.0));

  // boundary of a half-space-like box face
  const Manifold r2 = Manifold::euclidean(2);
  const auto box = ConvexBody::euclidean_box(r2, Eigen::Vector2d(0, -100), Eigen::Vector2d(100, 100));
  const long trials = 20000;
  const double ell = estimate_local_conductance(testing::point({0, 0}), box, 0.3, trials, rng);
  CHECK(std::abs(ell - 0.5) < 3 * std::sqrt(0.25 / trials));
}

TEST_CASE("walk on the hemisphere reaches the sine polar law") {
  const Manifold s2 = Manifold::sphere(2);
  const auto hemi = ConvexBody::spherical_cap(s2, testing::north(2), M_PI / 2);
  RngStream start_rng(21);
  WalkParams params;
  params.delta = 0.5;
  params.override_delta = true;
  params.max_steps = 100000;
  params.seed = 22;
  ChainOptions options;
  options.burn_in = 0;
  options.thin = 10;
  const auto chain = run_chain(hemi.rejection_sample_uniform(start_rng), hemi, params, std::nullopt, options);
  std::vector<double> angles;
  for (const auto& s : chain.samples) angles.push_back(testing::polar_angle(s.point));
  CHECK(stats::ks_statistic(angles, [](double t) { return 1.0 - std::cos(t); }) < 0.02);
}

TEST_CASE("metropolis chain matches a reweighted reference") {
  const Manifold s2 = Manifold::sphere(2);
  const auto cap = ConvexBody::spherical_cap(s2, testing::north(2), 75 * M_PI / 180);
  const double a = 20 * M_PI / 180;
  const ManifoldPoint p = testing::point({std::sin(a), 0, std::cos(a)});
  const double temperature = 0.2;
  const Objective f = [&](const ManifoldPoint& x) { return s2.distance(p, x); };

  // reference: uniform samples accepted with weight exp(-f/T) (f >= 0)
  RngStream rng(31);
  std::vector<double> reference;
  while (reference.size() < 20000) {
    const auto x = cap.rejection_sample_uniform(rng);
    const double v = f(x);
    if (rng.uniform() < std::exp(-v / temperature)) reference.push_back(v);
  }

  WalkParams params;
  params.delta = 0.15;
  params.override_delta = true;
  params.max_steps = 200000;
  params.seed = 32;
  ChainOptions options;
  options.burn_in = 2000;
  options.thin = 10;
  const auto chain = run_chain(p, cap, params, GibbsTarget{f, 1.0, temperature}, options);
  std::vector<double> values;
  for (const auto& s : chain.samples) values.push_back(*s.f_value);
  CHECK(stats::ks_two_sample(values, reference) < 0.03);
}
