#include "vch/ltv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace vch::ltv {

double StepMatrices::row_sum() const {
  if (!row) return 1.0;
  double s = 0.0;
  for (double v : p_row) s += v;
  return s;
}

bool StepMatrices::strictly_substochastic() const { return row && row_sum() < 1.0 - kRowSumTol; }

std::vector<double> StepMatrices::dense_p() const {
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 1.0;
  if (row) std::copy(p_row.begin(), p_row.end(), d.begin() + static_cast<std::ptrdiff_t>(*row * n));
  return d;
}

std::vector<double> StepMatrices::dense_b() const {
  std::vector<double> d(n * m, 0.0);
  if (row) std::copy(b_row.begin(), b_row.end(), d.begin() + static_cast<std::ptrdiff_t>(*row * m));
  return d;
}

StepMatrices capture_step(const UpdateEvent* ev, std::size_t n, std::size_t m,
                          std::size_t index, std::size_t step) {
  StepMatrices s;
  s.index = index;
  s.step = step;
  s.n = n;
  s.m = m;
  s.u.assign(m, Vec2{});
  if (ev == nullptr) return s;

  if (ev->agent >= n) throw MalformedEvent("update event names a non-agent row");
  s.row = ev->agent;
  s.p_row.assign(n, 0.0);
  s.b_row.assign(m, 0.0);

  const bool all_anchor = std::all_of(ev->vertices.begin(), ev->vertices.end(),
                                      [](const WeightEntry& e) { return e.anchor; });
  if (!(ev->self_weight >= 0.0 && ev->self_weight <= 1.0)) {
    throw MalformedEvent("self-weight outside [0, 1]");
  }
  if (ev->self_weight < ev->self_floor && !(ev->zero_self_allowed && all_anchor)) {
    throw MalformedEvent("self-weight below its floor");
  }
  s.p_row[ev->agent] = ev->self_weight;

  bool any_anchor = false;
  for (const WeightEntry& e : ev->vertices) {
    if (!(e.weight >= 0.0)) throw MalformedEvent("negative or NaN weight");
    if (e.anchor) {
      if (e.node < n || e.node >= n + m) throw MalformedEvent("anchor id out of range");
      if (e.weight < ev->anchor_min) throw MalformedEvent("anchor weight below the anchor floor");
      s.b_row[e.node - n] += e.weight;
      s.u[e.node - n] = e.value;
      any_anchor = true;
    } else {
      if (e.node >= n || e.node == ev->agent) throw MalformedEvent("agent id out of range");
      if (ev->agent_floor && e.weight < ev->agent_min) {
        throw MalformedEvent("agent weight below the agent floor");
      }
      s.p_row[e.node] += e.weight;
    }
  }

  const double total = s.row_sum() + [&] {
    double b = 0.0;
    for (double v : s.b_row) b += v;
    return b;
  }();
  if (std::abs(total - 1.0) > 1e-9) throw MalformedEvent("update row does not sum to one");
  if (any_anchor && s.row_sum() > 1.0 - ev->anchor_min + 1e-12) {
    throw MalformedEvent("anchored row sum exceeds 1 - anchor floor");
  }
  return s;
}

ErrorDynamicsReport verify_error_dynamics(std::span<const UpdateEvent> events,
                                          std::span<const TraceFrame> frames) {
  ErrorDynamicsReport rep;
  if (frames.empty()) return rep;
  const std::size_t n = frames.front().truth.size();
  auto err = [&](std::size_t k, std::size_t j) {
    return frames[k].truth[j] - frames[k].estimate[j];
  };
  // Error of agent j as seen during agent i's turn within step k.
  auto err_at_turn = [&](std::size_t k, std::size_t i, std::size_t j) {
    return j < i ? err(k + 1, j) : err(k, j);
  };

  std::size_t next = 0;
  for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      Vec2 predicted = err(k, i);
      while (next < events.size() &&
             (events[next].step < k || (events[next].step == k && events[next].agent < i))) {
        ++next;
      }
      if (next < events.size() && events[next].step == k && events[next].agent == i) {
        const UpdateEvent& ev = events[next++];
        ++rep.updates;
        predicted = ev.self_weight * err(k, i);
        for (const WeightEntry& e : ev.vertices) {
          if (e.anchor) continue;
          const Vec2 src = err_at_turn(e.source_step, i, e.node);
          if (!(src == err_at_turn(k, i, e.node))) ++rep.stale_columns;
          predicted += e.weight * src;
        }
      }
      const Vec2 actual = err(k + 1, i);
      const double dev = std::max(std::abs(actual.x - predicted.x), std::abs(actual.y - predicted.y));
      rep.max_deviation = std::max(rep.max_deviation, dev);
      ++rep.checked;
    }
  }
  return rep;
}

ProductTracker::ProductTracker(std::size_t n) : n_(n), prod_(n * n, 0.0) {
  for (std::size_t i = 0; i < n; ++i) prod_[i * n + i] = 1.0;
}

namespace {

// prod <- P * prod, where P differs from identity only in `row`.
void left_multiply(std::vector<double>& prod, std::size_t n, const StepMatrices& s) {
  if (!s.row) return;
  const std::size_t i = *s.row;
  std::vector<double> fresh(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double w = s.p_row[j];
    if (w == 0.0) continue;
    const double* src = prod.data() + j * n;
    for (std::size_t c = 0; c < n; ++c) fresh[c] += w * src[c];
  }
  std::copy(fresh.begin(), fresh.end(), prod.begin() + static_cast<std::ptrdiff_t>(i * n));
}

double inf_norm(const std::vector<double>& prod, std::size_t n) {
  double best = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += std::abs(prod[r * n + c]);
    best = std::max(best, s);
  }
  return best;
}

std::vector<double> identity(std::size_t n) {
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 1.0;
  return d;
}

}  // namespace

void ProductTracker::push(const StepMatrices& s) {
  left_multiply(prod_, n_, s);
  ++count_;
}

double ProductTracker::norm() const { return inf_norm(prod_, n_); }

SliceDecomposer::SliceDecomposer(std::size_t n, bool keep_products)
    : n_(n), keep_(keep_products), row_sums_(n, 1.0) {
  done_.n = n;
}

void SliceDecomposer::start_segment(SegmentKind kind, std::size_t index) {
  current_ = Segment{};
  current_.kind = kind;
  current_.start = index;
  current_.end = index;
  if (keep_) current_.product = identity(n_);
  segment_open_ = true;
}

void SliceDecomposer::apply(const StepMatrices& s) {
  current_.end = s.index;
  if (keep_) left_multiply(current_.product, n_, s);
  if (!in_slice_ || !s.row) return;
  const std::size_t i = *s.row;
  const bool was_at_one = row_sums_[i] >= 1.0 - kRowSumTol;
  double fresh = 0.0;
  for (std::size_t j = 0; j < n_; ++j) fresh += s.p_row[j] * row_sums_[j];
  row_sums_[i] = fresh;
  const bool at_one = fresh >= 1.0 - kRowSumTol;
  if (was_at_one && !at_one) --rows_at_one_;
  if (!was_at_one && at_one) ++rows_at_one_;
}

void SliceDecomposer::push(const StepMatrices& s) {
  if (!in_slice_ && s.strictly_substochastic()) {
    if (segment_open_) done_.segments.push_back(std::move(current_));
    start_segment(SegmentKind::Slice, s.index);
    in_slice_ = true;
    std::fill(row_sums_.begin(), row_sums_.end(), 1.0);
    rows_at_one_ = n_;
  } else if (!segment_open_) {
    start_segment(SegmentKind::Gap, s.index);
  }
  apply(s);
  ++processed_;
  done_.processed = processed_;

  if (in_slice_ && rows_at_one_ == 0) {
    current_.norm = *std::max_element(row_sums_.begin(), row_sums_.end());
    Slice sl;
    sl.number = done_.slices.size() + 1;
    sl.start = current_.start;
    sl.end = current_.end;
    sl.length = current_.end - current_.start + 1;
    sl.norm = current_.norm;
    done_.slices.push_back(sl);
    done_.segments.push_back(std::move(current_));
    segment_open_ = false;
    in_slice_ = false;
  }
}

SliceReport SliceDecomposer::report() const {
  SliceReport r = done_;
  if (segment_open_) {
    Segment tail = current_;
    if (in_slice_) {
      tail.kind = SegmentKind::Tail;
      tail.norm = *std::max_element(row_sums_.begin(), row_sums_.end());
    } else {
      tail.norm = 1.0;  // gaps hold stochastic matrices only
    }
    r.segments.push_back(std::move(tail));
  }
  return r;
}

SliceReport decompose_slices(std::span<const StepMatrices> stream, bool keep_products) {
  const std::size_t n = stream.empty() ? 0 : stream.front().n;
  SliceDecomposer d(n, keep_products);
  for (const auto& s : stream) d.push(s);
  return d.report();
}

namespace {

void validate(const GrowthBoundParams& p) {
  if (!(p.beta1 > 0.0 && p.beta1 <= 1.0)) throw InvalidParams("beta1 must lie in (0, 1]");
  if (!(p.beta2 >= 0.0 && p.beta2 < 1.0)) throw InvalidParams("beta2 must lie in [0, 1)");
  if (!(p.gamma1 >= 0.0 && p.gamma1 <= 1.0)) throw InvalidParams("gamma1 must lie in [0, 1]");
  if (!(p.gamma2 > 0.0)) throw InvalidParams("gamma2 must be positive");
}

}  // namespace

double growth_bound(std::size_t i, const GrowthBoundParams& p) {
  validate(p);
  if (i == 0) throw InvalidParams("slice numbers start at 1");
  const double x = p.gamma2 * std::pow(static_cast<double>(i), -p.gamma1);
  if (!(p.beta2 < std::exp(-x))) {
    throw InvalidParams("beta2 >= exp(-gamma2 * i^-gamma1) for slice " + std::to_string(i));
  }
  // ln(1 - e^-x) - ln(1 - beta2), both evaluated without cancellation.
  const double num = std::log(-std::expm1(-x)) - std::log1p(-p.beta2);
  if (p.beta1 == 1.0) return std::numeric_limits<double>::infinity();
  return num / std::log(p.beta1) + 1.0;
}

GrowthReport check_growth_bound(const SliceReport& report, const GrowthBoundParams& p) {
  GrowthReport g;
  growth_bound(1, p);
  std::size_t good = 0;
  bool seen = false;
  g.every_prefix_satisfied = true;
  for (const Slice& s : report.slices) {
    GrowthVerdict v;
    v.number = s.number;
    v.length = s.length;
    v.bound = growth_bound(s.number, p);
    v.satisfied = static_cast<double>(s.length) <= v.bound;
    if (v.satisfied) {
      ++good;
      seen = true;
    }
    if (!seen) g.every_prefix_satisfied = false;
    g.verdicts.push_back(v);
  }
  if (report.slices.empty()) g.every_prefix_satisfied = false;
  g.fraction_satisfied =
      report.slices.empty() ? 0.0 : static_cast<double>(good) / static_cast<double>(report.slices.size());
  return g;
}

}  // namespace vch::ltv
