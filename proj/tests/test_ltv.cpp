#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "vch/ltv.hpp"

using namespace vch;
using namespace vch::ltv;

namespace {

WeightEntry entry(NodeId node, double weight, bool anchor = false) {
  WeightEntry e;
  e.node = node;
  e.weight = weight;
  e.barycentric = weight / 0.8;
  e.anchor = anchor;
  return e;
}

UpdateEvent event(NodeId agent, double self, std::array<WeightEntry, 3> v) {
  UpdateEvent ev;
  ev.agent = agent;
  ev.self_weight = self;
  ev.vertices = v;
  ev.self_floor = 0.2;
  ev.anchor_min = 0.1;
  ev.agent_min = 0.05;
  return ev;
}

std::vector<StepMatrices> random_stream(std::mt19937_64& rng, std::size_t n, std::size_t m, std::size_t len) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<StepMatrices> s;
  for (std::size_t t = 0; t < len; ++t) {
    if (u(rng) < 0.3) {
      s.push_back(capture_step(nullptr, n, m, t, t));
    } else {
      const auto ev = oracle::random_event(rng, n, m, t);
      s.push_back(capture_step(&ev, n, m, t, t));
    }
  }
  return s;
}

}  // namespace

TEST_CASE("capture_step placement") {
  SUBCASE("no update") {
    const auto s = capture_step(nullptr, 4, 1, 0, 0);
    CHECK(s.identity());
    CHECK(s.dense_p() == oracle::identity(4));
    CHECK(s.dense_b() == std::vector<double>(4, 0.0));
  }
  SUBCASE("one anchor and two agents") {
    const auto ev = event(0, 0.2, {entry(1, 0.3), entry(2, 0.3), entry(4, 0.2, true)});
    const auto s = capture_step(&ev, 4, 1, 0, 0);
    const auto p = s.dense_p();
    CHECK(p[0] == 0.2);
    CHECK(p[1] == 0.3);
    CHECK(p[2] == 0.3);
    CHECK(p[3] == 0.0);
    CHECK(s.dense_b()[0] == 0.2);
    CHECK(s.row_sum() == doctest::Approx(0.8));
    CHECK(s.strictly_substochastic());
    for (std::size_t r = 1; r < 4; ++r) CHECK(p[r * 4 + r] == 1.0);
  }
  SUBCASE("anchorless update is stochastic") {
    const double a1 = 0.25, a2 = 0.35, a3 = 1.0 - a1 - a2;
    auto ev = event(1, 0.2, {entry(0, 0.8 * a1), entry(2, 0.8 * a2), entry(3, 0.8 * a3)});
    const auto s = capture_step(&ev, 4, 0, 0, 0);
    CHECK(s.row_sum() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_FALSE(s.strictly_substochastic());
  }
  SUBCASE("floor violations") {
    auto low_anchor = event(0, 0.2, {entry(1, 0.4), entry(2, 0.35), entry(4, 0.05, true)});
    CHECK_THROWS_AS(capture_step(&low_anchor, 4, 1, 0, 0), MalformedEvent);
    auto low_self = event(0, 0.1, {entry(1, 0.4), entry(2, 0.3), entry(3, 0.2)});
    CHECK_THROWS_AS(capture_step(&low_self, 4, 0, 0, 0), MalformedEvent);
    auto low_agent = event(0, 0.2, {entry(1, 0.02), entry(2, 0.48), entry(3, 0.3)});
    CHECK_NOTHROW(capture_step(&low_agent, 4, 0, 0, 0));
    low_agent.agent_floor = true;
    CHECK_THROWS_AS(capture_step(&low_agent, 4, 0, 0, 0), MalformedEvent);
    auto bad_sum = event(0, 0.2, {entry(1, 0.3), entry(2, 0.3), entry(3, 0.3)});
    CHECK_THROWS_AS(capture_step(&bad_sum, 4, 0, 0, 0), MalformedEvent);
    auto bad_anchor = event(0, 0.2, {entry(1, 0.3), entry(2, 0.3), entry(7, 0.2, true)});
    CHECK_THROWS_AS(capture_step(&bad_anchor, 4, 1, 0, 0), MalformedEvent);
  }
  SUBCASE("all-anchor hull with zero self-weight") {
    auto ev = event(0, 0.0, {entry(4, 0.3, true), entry(5, 0.3, true), entry(6, 0.4, true)});
    CHECK_THROWS_AS(capture_step(&ev, 4, 3, 0, 0), MalformedEvent);
    ev.zero_self_allowed = true;
    const auto s = capture_step(&ev, 4, 3, 0, 0);
    CHECK(s.row_sum() == 0.0);
  }
}

TEST_CASE("verify_error_dynamics on synthetic traces") {
  SUBCASE("zero error stays zero") {
    std::vector<TraceFrame> frames(5, TraceFrame{{{1, 2}, {3, 4}}, {{1, 2}, {3, 4}}});
    const auto rep = verify_error_dynamics({}, frames);
    CHECK(rep.max_deviation == 0.0);
    CHECK(rep.checked == 8);
  }
  SUBCASE("an agent that never updates keeps its error") {
    std::vector<TraceFrame> frames;
    for (int k = 0; k < 4; ++k) frames.push_back({{{double(k), 0}}, {{double(k) + 0.5, 1}}});
    CHECK(verify_error_dynamics({}, frames).max_deviation == 0.0);
    frames[2].estimate[0].x += 1e-3;
    CHECK(verify_error_dynamics({}, frames).max_deviation == doctest::Approx(1e-3));
  }
  SUBCASE("one update with a stale source") {
    // Step 0: agent 1 pulls toward anchors. Step 1: agent 0 uses the value it
    // received from agent 1 during step 0, before agent 1's update.
    std::vector<TraceFrame> f(3);
    f[0] = {{{0, 0}, {1, 1}}, {{1, 0}, {1, 3}}};    // errors (-1, 0), (0, -2)
    f[1] = {{{0, 0}, {1, 1}}, {{1, 0}, {1, 1.4}}};  // agent 1: 0.2 * (0, -2)
    UpdateEvent first = event(1, 0.2, {entry(5, 0.3, true), entry(6, 0.3, true), entry(7, 0.2, true)});
    UpdateEvent second = event(0, 0.5, {entry(1, 0.25), entry(5, 0.15, true), entry(6, 0.1, true)});
    second.step = 1;
    second.vertices[0].source_step = 0;
    const Vec2 e0 = 0.5 * Vec2{-1, 0} + 0.25 * Vec2{0, -2};
    f[2] = {{{0, 0}, {1, 1}}, {{-e0.x, -e0.y}, {1, 1.4}}};
    const auto rep = verify_error_dynamics(std::vector<UpdateEvent>{first, second}, f);
    CHECK(rep.max_deviation <= 1e-15);
    CHECK(rep.updates == 2);
    CHECK(rep.stale_columns == 1);
  }
}

TEST_CASE("slice decomposition") {
  SUBCASE("identity stream") {
    std::vector<StepMatrices> s;
    for (std::size_t t = 0; t < 50; ++t) s.push_back(capture_step(nullptr, 3, 1, t, t));
    const auto r = decompose_slices(s);
    CHECK(r.slices.empty());
    REQUIRE(r.segments.size() == 1);
    CHECK(r.segments[0].kind == SegmentKind::Gap);
  }
  SUBCASE("single agent, one sub-stochastic matrix") {
    UpdateEvent ev;
    ev.agent = 0;
    ev.self_weight = 0.8;
    ev.self_floor = 0.2;
    ev.anchor_min = 0.1;
    ev.vertices = {entry(1, 0.1, true), entry(1, 0.05, true), entry(1, 0.05, true)};
    ev.vertices[1].weight = 0.1;
    ev.vertices[2].weight = 0.0;
    ev.anchor_min = 0.0;
    const auto s = capture_step(&ev, 1, 1, 0, 0);
    const auto r = decompose_slices(std::vector<StepMatrices>{s});
    REQUIRE(r.slices.size() == 1);
    CHECK(r.slices[0].length == 1);
    CHECK(r.slices[0].norm == doctest::Approx(0.8));
  }
  SUBCASE("random admissible streams against the brute-force product") {
    std::mt19937_64 rng(21);
    for (std::size_t n : {2u, 3u, 5u, 8u}) {
      const auto stream = random_stream(rng, n, 2, 1000);
      oracle::Dense full = oracle::identity(n);
      for (const auto& s : stream) full = oracle::multiply(s.dense_p(), full, n);

      const auto r = decompose_slices(stream, true);
      oracle::Dense joined = oracle::identity(n);
      std::size_t next = 0;
      for (const auto& seg : r.segments) {
        CHECK(seg.start == next);
        next = seg.end + 1;
        joined = oracle::multiply(seg.product, joined, n);
        // Each segment's norm is the norm of its own product.
        oracle::Dense part = oracle::identity(n);
        for (std::size_t t = seg.start; t <= seg.end; ++t) part = oracle::multiply(stream[t].dense_p(), part, n);
        CHECK(std::abs(oracle::inf_norm(part, n) - seg.norm) <= 1e-12);
        CHECK(oracle::max_abs_diff(part, seg.product) <= 1e-12);
      }
      CHECK(next == stream.size());
      CHECK(oracle::max_abs_diff(full, joined) <= 1e-12);
      CHECK(!r.slices.empty());
      for (const auto& sl : r.slices) CHECK(sl.norm < 1.0);

      ProductTracker tracker(n);
      double last = 1.0;
      for (const auto& s : stream) {
        tracker.push(s);
        const double nn = tracker.norm();
        CHECK(nn <= last + 1e-15);
        last = nn;
      }
      CHECK(oracle::max_abs_diff(tracker.product(), full) <= 1e-12);
    }
  }
  SUBCASE("stochastic streams keep norm one") {
    std::mt19937_64 rng(5);
    const auto stream = random_stream(rng, 4, 0, 500);
    ProductTracker t(4);
    for (const auto& s : stream) {
      t.push(s);
      CHECK(std::abs(t.norm() - 1.0) <= 1e-12);
    }
    CHECK(decompose_slices(stream).slices.empty());
  }
}

TEST_CASE("growth bound") {
  SUBCASE("gamma1 = 0 makes the bound constant") {
    GrowthBoundParams p{0.2, 0.3, 0.0, 1.0};
    const double b1 = growth_bound(1, p);
    CHECK(growth_bound(10, p) == b1);
    CHECK(growth_bound(1000, p) == b1);
    CHECK(b1 == doctest::Approx(std::log((1 - std::exp(-1.0)) / 0.7) / std::log(0.2) + 1));
  }
  SUBCASE("parameters that make the second logarithm non-negative are rejected") {
    // beta2 = 0.8 is not below exp(-3) = 0.0498.
    CHECK_THROWS_AS(growth_bound(1, {0.2, 0.8, 0.0, 3.0}), InvalidParams);
    // The formula itself evaluates to about 0.0317 there.
    const double raw = std::log((1 - std::exp(-3.0)) / 0.2) / std::log(0.2) + 1;
    CHECK(raw == doctest::Approx(0.0317311).epsilon(1e-5));
  }
  SUBCASE("range checks") {
    CHECK_THROWS_AS(growth_bound(0, {0.2, 0.3, 0.0, 1.0}), InvalidParams);
    CHECK_THROWS_AS(growth_bound(1, {0.0, 0.5, 0.0, 1.0}), InvalidParams);
    CHECK_THROWS_AS(growth_bound(1, {0.2, 1.0, 0.0, 1.0}), InvalidParams);
    CHECK_THROWS_AS(growth_bound(1, {0.2, 0.5, 1.5, 1.0}), InvalidParams);
    CHECK_THROWS_AS(growth_bound(1, {0.2, 0.5, 0.0, 0.0}), InvalidParams);
  }
  SUBCASE("matches 100-digit evaluation on a grid") {
    double worst = 0.0;
    int checked = 0;
    for (double b1 : {0.05, 0.2, 0.5, 0.9, 0.99})
      for (double b2 : {0.0, 0.01, 0.1, 0.3, 0.5})
        for (double g1 : {0.0, 0.25, 0.5, 1.0})
          for (double g2 : {0.01, 0.1, 0.5, 1.0, 3.0})
            for (std::size_t i : {1u, 2u, 7u, 100u, 10000u}) {
              GrowthBoundParams q{b1, b2, g1, g2};
              const double x = g2 * std::pow(double(i), -g1);
              if (!(b2 < std::exp(-x))) {
                CHECK_THROWS_AS(growth_bound(i, q), InvalidParams);
                continue;
              }
              worst = std::max(worst, std::abs(growth_bound(i, q) - oracle::growth_bound(i, b1, b2, g1, g2)));
              ++checked;
            }
    CHECK(checked > 1000);
    CHECK(worst <= 1e-12);
  }
  SUBCASE("verdicts") {
    SliceReport r;
    for (std::size_t i = 1; i <= 4; ++i) r.slices.push_back(Slice{i, i, i, 1, 0.5});
    GrowthBoundParams q{0.5, 0.1, 0.0, 0.05};  // bound about 4.2
    const auto g = check_growth_bound(r, q);
    CHECK(g.fraction_satisfied == 1.0);
    CHECK(g.every_prefix_satisfied);
    r.slices[0].length = 100;
    const auto h = check_growth_bound(r, q);
    CHECK(h.fraction_satisfied == 0.75);
    CHECK_FALSE(h.every_prefix_satisfied);
  }
}
