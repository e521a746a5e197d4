#pragma once

// The network simulation loop, the normalized error metric, and Monte Carlo
// batching.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "vch/config.hpp"
#include "vch/event.hpp"
#include "vch/ltv.hpp"

namespace vch {

// (1/2) * sqrt( sum((x - x*) / dx)^2 + sum((y - y*) / dy)^2 ) over agents.
double error_norm(std::span<const Vec2> estimates, std::span<const Vec2> truths, const Region& region);

struct TrialSummary {
  std::uint64_t seed = 0;
  std::size_t steps = 0;  // global steps executed
  double initial_error = 0.0;
  double final_error = 0.0;
  std::optional<std::size_t> first_below;  // first k with error < tolerance
  std::vector<std::size_t> updates;        // per agent
  std::size_t anchored_updates = 0;
  bool barycentric_sums_exact = true;      // every update's weights summed to exactly 1
  double max_row_sum_defect = 0.0;         // max |row sum incl. B - 1| over updates
  std::size_t slice_count = 0;
  double mean_slice_length = 0.0;
  std::size_t max_slice_length = 0;
  double max_slice_norm = 0.0;             // over completed slices
  double growth_fraction = 0.0;
  double final_product_norm = 1.0;
  double min_product_norm = 1.0;
  double max_product_norm = 1.0;
  std::vector<double> error_curve;         // index k = 0..steps
};

struct TrialResult {
  TrialSummary summary;
  std::vector<ltv::TraceFrame> frames;  // k = 0..steps, when kept
  std::vector<UpdateEvent> events;      // in (step, agent) order, when kept
  ltv::SliceReport slices;
};

struct RunOptions {
  bool keep_trace = true;
};

// Throws ConfigError on an invalid configuration.
TrialResult run_trial(const SimConfig& cfg, const RunOptions& opts = {});

struct Aggregate {
  std::vector<double> mean_curve;
  std::vector<double> median_curve;
  std::vector<double> q10_curve;
  std::vector<double> q90_curve;
  double median_final_error = 0.0;
  double mean_final_error = 0.0;
  // Median over trials of each trial's median error in the last 20% of steps.
  double median_tail_error = 0.0;
  std::size_t converged = 0;  // trials with first_below set
};

struct MonteCarloResult {
  std::vector<TrialSummary> trials;
  Aggregate aggregate;
};

// Median error over the last `fraction` of a curve (k >= 1).
double tail_median(const std::vector<double>& curve, double fraction = 0.2);

Aggregate aggregate(std::span<const TrialSummary> trials);

// Receives each full trial (trace kept) as it finishes. Called from worker
// threads, possibly concurrently.
using TrialSink = std::function<void(std::size_t trial, const TrialResult&)>;

// Trials use seeds cfg.seed + 0 .. cfg.seed + trials - 1 and run on a thread
// pool; results come back in seed order.
MonteCarloResult run_monte_carlo(const SimConfig& cfg, std::size_t trials, unsigned threads = 0,
                                 const TrialSink& sink = {});

}  // namespace vch
