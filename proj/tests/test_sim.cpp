#include <doctest.h>

#include <cmath>
#include <mutex>
#include <random>

#include "vch/sim.hpp"

using namespace vch;

TEST_CASE("error_norm") {
  const Region r;
  const std::vector<Vec2> truth{{1, 2}, {3, -4}};
  CHECK(error_norm(truth, truth, r) == 0.0);
  CHECK(error_norm(std::vector<Vec2>{{21, 22}}, std::vector<Vec2>{{1, 2}}, r) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(error_norm(truth, std::vector<Vec2>{{0, 0}}, r), std::invalid_argument);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5, 15);
  for (int t = 0; t < 100; ++t) {
    std::vector<Vec2> e, x;
    for (int i = 0; i < 7; ++i) {
      e.push_back({u(rng), u(rng)});
      x.push_back({u(rng), u(rng)});
    }
    long double s = 0;
    for (int i = 0; i < 7; ++i) {
      const long double dx = (e[i].x - x[i].x) / 20.0L, dy = (e[i].y - x[i].y) / 20.0L;
      s += dx * dx + dy * dy;
    }
    CHECK(std::abs(error_norm(e, x, r) - double(0.5L * std::sqrt(s))) <= 1e-12);
  }
}

TEST_CASE("presets") {
  const auto a = preset("fig7_n3");
  CHECK(a.agents == 3);
  CHECK(a.anchors == 1);
  CHECK(a.noise.range_frac == 0.0);
  CHECK(a.radius == 2.0);
  CHECK(a.d_max == 5.0);
  CHECK(a.region.x_min == -5.0);
  CHECK(a.region.x_max == 15.0);
  CHECK(a.weights.self_weight == 0.2);
  CHECK(a.weights.anchor_min == 0.1);
  const auto b = preset("fig9_noanchor");
  CHECK(b.agents == 4);
  CHECK(b.anchors == 0);
  const auto c = preset("fig11_noise");
  CHECK(c.agents == 10);
  CHECK(c.anchors == 1);
  CHECK(c.noise.range_frac == 0.1);
  CHECK(c.noise.motion_frac == 0.01);
  CHECK(c.modifications);
  CHECK(preset("fig12_mc").trials == 20);
  for (const auto& n : preset_names()) CHECK_NOTHROW(preset(n).validate());
  CHECK_THROWS_AS(preset("nope"), UnknownPreset);
}

TEST_CASE("run_trial basics") {
  SimConfig cfg = preset("fig7_n3");
  SUBCASE("zero steps") {
    cfg.max_steps = 0;
    const auto r = run_trial(cfg);
    CHECK(r.summary.steps == 0);
    CHECK(r.frames.size() == 1);
    CHECK(r.events.empty());
    CHECK(r.summary.error_curve.size() == 1);
    CHECK(r.summary.final_error == r.summary.initial_error);
  }
  SUBCASE("invalid configuration") {
    cfg.agents = 0;
    CHECK_THROWS_AS(run_trial(cfg), ConfigError);
  }
  SUBCASE("determinism") {
    cfg.max_steps = 500;
    const auto a = run_trial(cfg);
    const auto b = run_trial(cfg);
    REQUIRE(a.frames.size() == b.frames.size());
    for (std::size_t k = 0; k < a.frames.size(); ++k) {
      for (std::size_t i = 0; i < cfg.agents; ++i) {
        REQUIRE(a.frames[k].truth[i] == b.frames[k].truth[i]);
        REQUIRE(a.frames[k].estimate[i] == b.frames[k].estimate[i]);
      }
    }
    CHECK(a.summary.error_curve == b.summary.error_curve);
  }
  SUBCASE("positions stay in the region and errors are consistent") {
    cfg.max_steps = 300;
    const auto r = run_trial(cfg);
    for (std::size_t k = 0; k < r.frames.size(); ++k) {
      for (const auto& p : r.frames[k].truth) REQUIRE(cfg.region.contains(p));
      CHECK(r.summary.error_curve[k] == error_norm(r.frames[k].estimate, r.frames[k].truth, cfg.region));
    }
  }
  SUBCASE("early stop") {
    cfg.early_stop = true;
    const auto r = run_trial(cfg);
    REQUIRE(r.summary.first_below.has_value());
    CHECK(r.summary.steps < cfg.max_steps);
    CHECK(r.summary.final_error < cfg.tolerance);
  }
}

TEST_CASE("noiseless N=3, M=1 run") {
  SimConfig cfg = preset("fig7_n3");
  cfg.max_steps = 2000;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    cfg.seed = seed;
    const auto r = run_trial(cfg);
    CHECK(r.summary.final_product_norm < 0.01);
    CHECK(r.summary.final_error < 0.01);
    CHECK(r.summary.barycentric_sums_exact);
    CHECK(r.summary.max_slice_norm < 1.0);
    const auto dyn = ltv::verify_error_dynamics(r.events, r.frames);
    CHECK(dyn.max_deviation <= 1e-10);
    CHECK(dyn.updates == r.events.size());
  }
}

TEST_CASE("N=3, M=1 converges within 2000 steps on most seeds") {
  SimConfig cfg = preset("fig7_n3");
  cfg.max_steps = 2000;
  const auto mc = run_monte_carlo(cfg, 20, 1);
  std::size_t below = 0;
  for (const auto& t : mc.trials) below += t.final_error < 0.01;
  CHECK(below >= 18);
}

TEST_CASE("every agent keeps updating") {
  // At least one update per agent per 500 steps on 95% of seeds.
  SimConfig cfg = preset("fig7_n3");
  cfg.max_steps = 2000;
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    cfg.seed = seed;
    const auto r = run_trial(cfg, RunOptions{false});
    bool ok = true;
    for (auto u : r.summary.updates) ok = ok && u >= cfg.max_steps / 500;
    good += ok;
  }
  CHECK(good >= 19);
}

TEST_CASE("no anchor: stochastic products and a standing error") {
  SimConfig cfg = preset("fig9_noanchor");
  cfg.max_steps = 1000;
  const auto r = run_trial(cfg);
  CHECK(r.summary.slice_count == 0);
  CHECK(r.summary.min_product_norm == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.summary.final_error > 0.01);
  CHECK(ltv::verify_error_dynamics(r.events, r.frames).max_deviation <= 1e-10);
}

TEST_CASE("Monte Carlo batches") {
  SimConfig cfg = preset("fig7_n3");
  cfg.max_steps = 300;
  SUBCASE("one trial equals run_trial") {
    const auto mc = run_monte_carlo(cfg, 1, 1);
    const auto t = run_trial(cfg, RunOptions{false});
    CHECK(mc.trials.at(0).error_curve == t.summary.error_curve);
    CHECK(mc.aggregate.median_final_error == t.summary.final_error);
  }
  SUBCASE("repeatable and thread-count independent") {
    const auto a = run_monte_carlo(cfg, 6, 1);
    const auto b = run_monte_carlo(cfg, 6, 3);
    CHECK(a.aggregate.median_curve == b.aggregate.median_curve);
    CHECK(a.aggregate.mean_curve == b.aggregate.mean_curve);
    for (std::size_t t = 0; t < 6; ++t) {
      CHECK(a.trials[t].seed == cfg.seed + t);
      CHECK(a.trials[t].error_curve == b.trials[t].error_curve);
    }
  }
  SUBCASE("sink receives every trial") {
    std::vector<int> seen(4, 0);
    std::mutex m;
    run_monte_carlo(cfg, 4, 2, [&](std::size_t t, const TrialResult& r) {
      std::lock_guard g(m);
      seen[t] += 1;
      CHECK(r.frames.size() == cfg.max_steps + 1);
    });
    CHECK(seen == std::vector<int>{1, 1, 1, 1});
  }
  CHECK_THROWS_AS(run_monte_carlo(cfg, 0), ConfigError);
}

TEST_CASE("aggregate statistics") {
  std::vector<TrialSummary> t(3);
  t[0].error_curve = {1, 0.5, 0.1};
  t[1].error_curve = {1, 0.7};
  t[2].error_curve = {1, 0.2, 0.3};
  for (auto& s : t) s.final_error = s.error_curve.back();
  t[0].first_below = 2;
  const auto a = aggregate(t);
  REQUIRE(a.median_curve.size() == 3);
  CHECK(a.median_curve[1] == doctest::Approx(0.5));
  CHECK(a.median_curve[2] == doctest::Approx(0.3));  // trial 1 holds 0.7
  CHECK(a.median_final_error == doctest::Approx(0.3));
  CHECK(a.converged == 1);
  CHECK(tail_median({1.0, 0.4, 0.2, 0.3, 0.1, 0.5}, 0.4) == doctest::Approx(0.3));
}
