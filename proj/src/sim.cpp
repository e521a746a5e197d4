#include "vch/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace vch {

double error_norm(std::span<const Vec2> estimates, std::span<const Vec2> truths, const Region& region) {
  if (estimates.size() != truths.size()) {
    throw std::invalid_argument("error_norm: estimate and truth counts differ");
  }
  const double dx = region.width();
  const double dy = region.height();
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double ex = (estimates[i].x - truths[i].x) / dx;
    const double ey = (estimates[i].y - truths[i].y) / dy;
    sx += ex * ex;
    sy += ey * ey;
  }
  return 0.5 * std::sqrt(sx + sy);
}

namespace {

constexpr std::size_t kEarlyStopRun = 50;

struct Anchor {
  Pose pose;
  Rng rng;
};

class Network {
 public:
  explicit Network(const SimConfig& cfg) : cfg_(cfg), opts_(cfg.search_options()) {
    Rng master = make_stream(cfg.seed, 0);
    std::uniform_real_distribution<double> heading(0.0, geometry::kTwoPi);
    agents_.reserve(cfg.agents);
    for (std::size_t i = 0; i < cfg.agents; ++i) {
      Pose p{cfg.region.sample(master), geometry::wrap_angle(heading(master))};
      const Vec2 guess = cfg.region.sample(master);
      agents_.emplace_back(i, p, guess, make_stream(cfg.seed, 1 + i));
    }
    for (std::size_t m = 0; m < cfg.anchors; ++m) {
      Pose p{cfg.region.sample(master), geometry::wrap_angle(heading(master))};
      anchors_.push_back({p, make_stream(cfg.seed, 1 + cfg.agents + m)});
    }
  }

  ltv::TraceFrame frame() const {
    ltv::TraceFrame f;
    f.truth.reserve(agents_.size());
    f.estimate.reserve(agents_.size());
    for (const auto& a : agents_) {
      f.truth.push_back(a.true_pose().position);
      f.estimate.push_back(a.estimate());
    }
    return f;
  }

  double error() const {
    const auto f = frame();
    return error_norm(f.estimate, f.truth, cfg_.region);
  }

  // One agent's turn: contact, exchange, hull search, update, motion.
  std::optional<std::pair<UpdateEvent, geometry::Barycentrics>> turn(std::size_t i, std::size_t k) {
    Agent& a = agents_[i];
    const Vec2 here = a.true_pose().position;

    std::optional<NodeId> best;
    double best_d = std::numeric_limits<double>::infinity();
    auto consider = [&](NodeId id, const Vec2& where) {
      const double d = distance(here, where);
      if (d <= cfg_.radius && d < best_d) {
        best = id;
        best_d = d;
      }
    };
    for (std::size_t j = 0; j < agents_.size(); ++j) {
      if (j != i) consider(j, agents_[j].true_pose().position);
    }
    for (std::size_t m = 0; m < anchors_.size(); ++m) consider(agents_.size() + m, anchors_[m].pose.position);

    double scan = 0.0;
    if (best) {
      const bool is_anchor = *best >= agents_.size();
      const Vec2 there = is_anchor ? anchors_[*best - agents_.size()].pose.position
                                   : agents_[*best].true_pose().position;
      const Vec2 dir = there - here;
      if (best_d > 0.0) scan = geometry::wrap_angle(std::atan2(dir.y, dir.x) - a.true_pose().heading);
      ContactInfo info;
      info.node = *best;
      info.measured_distance = noisy_range(best_d, cfg_.noise, a.rng());
      info.is_anchor = is_anchor;
      info.estimate = is_anchor ? there : agents_[*best].estimate();
      info.anchor_touched = is_anchor || agents_[*best].anchor_touched();
      a.on_contact(info, scan, k);
    }

    std::optional<std::pair<UpdateEvent, geometry::Barycentrics>> out;
    if (auto ts = a.find_triangulation(cfg_.weights, opts_)) {
      out.emplace(a.apply_update(*ts, cfg_.weights, opts_, k), ts->weights);
    }

    MotionCommand cmd = draw_motion(a.rng(), cfg_.d_max);
    cmd.scan = scan;
    const Pose next = apply_motion(a.true_pose(), cmd, cfg_.region, a.rng());
    const Vec2 measured = noisy_motion(next.position - here, cfg_.noise, a.rng());
    a.true_pose() = next;
    a.on_move(cmd, measured);
    return out;
  }

  void move_anchors() {
    if (!cfg_.mobile_anchors) return;
    for (auto& an : anchors_) {
      MotionCommand cmd = draw_motion(an.rng, cfg_.d_max);
      an.pose = apply_motion(an.pose, cmd, cfg_.region, an.rng);
    }
  }

  std::size_t agent_count() const { return agents_.size(); }

 private:
  const SimConfig& cfg_;
  SearchOptions opts_;
  std::vector<Agent> agents_;
  std::vector<Anchor> anchors_;
};

}  // namespace

TrialResult run_trial(const SimConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  TrialResult res;
  TrialSummary& sum = res.summary;
  sum.seed = cfg.seed;
  sum.updates.assign(cfg.agents, 0);

  Network net(cfg);
  const std::size_t n = cfg.agents;
  ltv::ProductTracker product(n);
  ltv::SliceDecomposer slicer(n);

  auto record = [&](const ltv::TraceFrame& f) {
    const double e = error_norm(f.estimate, f.truth, cfg.region);
    sum.error_curve.push_back(e);
    if (opts.keep_trace) res.frames.push_back(f);
    return e;
  };

  sum.initial_error = record(net.frame());
  if (sum.initial_error < cfg.tolerance) sum.first_below = 0;
  std::size_t below_run = sum.initial_error < cfg.tolerance ? 1 : 0;

  std::size_t index = 0;
  for (std::size_t k = 0; k < cfg.max_steps; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      auto upd = net.turn(i, k);
      if (upd) {
        const UpdateEvent& ev = upd->first;
        if (upd->second.sum() != 1.0) sum.barycentric_sums_exact = false;
        const ltv::StepMatrices s = ltv::capture_step(&ev, n, cfg.anchors, index, k);
        double total = s.row_sum();
        for (double b : s.b_row) total += b;
        sum.max_row_sum_defect = std::max(sum.max_row_sum_defect, std::abs(total - 1.0));
        product.push(s);
        slicer.push(s);
        ++sum.updates[i];
        if (std::any_of(ev.vertices.begin(), ev.vertices.end(), [](const WeightEntry& e) { return e.anchor; })) {
          ++sum.anchored_updates;
        }
        if (opts.keep_trace) res.events.push_back(ev);
      } else {
        const ltv::StepMatrices s = ltv::capture_step(nullptr, n, cfg.anchors, index, k);
        product.push(s);
        slicer.push(s);
      }
      ++index;
    }
    net.move_anchors();

    const double e = record(net.frame());
    sum.steps = k + 1;
    const double norm = product.norm();
    sum.min_product_norm = std::min(sum.min_product_norm, norm);
    sum.max_product_norm = std::max(sum.max_product_norm, norm);
    if (e < cfg.tolerance) {
      if (!sum.first_below) sum.first_below = k + 1;
      ++below_run;
    } else {
      below_run = 0;
    }
    if (cfg.early_stop && below_run >= kEarlyStopRun) break;
  }

  sum.final_error = sum.error_curve.back();
  sum.final_product_norm = product.norm();
  res.slices = slicer.report();
  sum.slice_count = res.slices.slices.size();
  double total_len = 0.0;
  for (const auto& s : res.slices.slices) {
    total_len += static_cast<double>(s.length);
    sum.max_slice_length = std::max(sum.max_slice_length, s.length);
    sum.max_slice_norm = std::max(sum.max_slice_norm, s.norm);
  }
  if (sum.slice_count > 0) sum.mean_slice_length = total_len / static_cast<double>(sum.slice_count);
  sum.growth_fraction = ltv::check_growth_bound(res.slices, cfg.growth_params()).fraction_satisfied;
  return res;
}

double tail_median(const std::vector<double>& curve, double fraction) {
  if (curve.size() <= 1) return curve.empty() ? 0.0 : curve.front();
  const std::size_t steps = curve.size() - 1;
  const auto window = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(steps))));
  std::vector<double> tail(curve.end() - static_cast<std::ptrdiff_t>(window), curve.end());
  const auto mid = tail.begin() + static_cast<std::ptrdiff_t>(tail.size() / 2);
  std::nth_element(tail.begin(), mid, tail.end());
  if (tail.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(tail.begin(), mid);
  return 0.5 * (lo + hi);
}

namespace {

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

Aggregate aggregate(std::span<const TrialSummary> trials) {
  Aggregate a;
  if (trials.empty()) return a;
  std::size_t len = 0;
  for (const auto& t : trials) len = std::max(len, t.error_curve.size());
  std::vector<double> column;
  for (std::size_t k = 0; k < len; ++k) {
    column.clear();
    for (const auto& t : trials) {
      // Early-stopped trials hold their last value.
      if (!t.error_curve.empty()) column.push_back(t.error_curve[std::min(k, t.error_curve.size() - 1)]);
    }
    double mean = 0.0;
    for (double v : column) mean += v;
    a.mean_curve.push_back(mean / static_cast<double>(column.size()));
    a.median_curve.push_back(quantile(column, 0.5));
    a.q10_curve.push_back(quantile(column, 0.1));
    a.q90_curve.push_back(quantile(column, 0.9));
  }
  std::vector<double> finals;
  std::vector<double> tails;
  for (const auto& t : trials) {
    finals.push_back(t.final_error);
    tails.push_back(tail_median(t.error_curve));
    if (t.first_below) ++a.converged;
  }
  a.median_final_error = quantile(finals, 0.5);
  double m = 0.0;
  for (double v : finals) m += v;
  a.mean_final_error = m / static_cast<double>(finals.size());
  a.median_tail_error = quantile(tails, 0.5);
  return a;
}

MonteCarloResult run_monte_carlo(const SimConfig& cfg, std::size_t trials, unsigned threads,
                                 const TrialSink& sink) {
  if (trials < 1) throw ConfigError("config key 'trials': need at least one trial");
  cfg.validate();
  MonteCarloResult out;
  out.trials.resize(trials);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, trials));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t t = next++; t < trials; t = next++) {
      try {
        SimConfig c = cfg;
        c.seed = cfg.seed + t;
        c.trials = 1;
        TrialResult r = run_trial(c, RunOptions{static_cast<bool>(sink)});
        if (sink) sink(t, r);
        out.trials[t] = std::move(r.summary);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  out.aggregate = aggregate(out.trials);
  return out;
}

}  // namespace vch
