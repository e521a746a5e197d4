#pragma once

// Analysis of the network as a linear time-varying system: per-update system
// and input matrices, the error recursion check, the slice decomposition of
// the matrix chain, and the slice-length growth bound.
//
// Matrices are indexed by stream position. The simulator processes agents one
// at a time, so every stream element changes at most one row.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "vch/event.hpp"
#include "vch/vec2.hpp"

namespace vch {

class MalformedEvent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParams : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace ltv {

// A row sum counts as strictly below one when it is below 1 - kRowSumTol.
inline constexpr double kRowSumTol = 1e-12;

struct StepMatrices {
  std::size_t index = 0;  // position in the stream
  std::size_t step = 0;   // global simulation step
  std::size_t n = 0;      // agents
  std::size_t m = 0;      // anchors
  std::optional<std::size_t> row;  // the deviating row of P, if any
  std::vector<double> p_row;       // dense row of P (length n) when `row` is set
  std::vector<double> b_row;       // dense row of B (length m) when `row` is set
  std::vector<Vec2> u;             // anchor inputs (length m); zero where unused

  [[nodiscard]] bool identity() const { return !row.has_value(); }
  [[nodiscard]] double row_sum() const;
  [[nodiscard]] bool strictly_substochastic() const;
  [[nodiscard]] std::vector<double> dense_p() const;  // n*n row-major
  [[nodiscard]] std::vector<double> dense_b() const;  // n*m row-major
};

// Places an update event into P and B (identity / zero when `ev` is empty).
// Anchor node ids are n..n+m-1. Throws MalformedEvent when the event violates
// the floors it claims or the row-sum bounds.
StepMatrices capture_step(const UpdateEvent* ev, std::size_t n, std::size_t m,
                          std::size_t index, std::size_t step);

// Agent positions for one global step (agents only, in id order).
struct TraceFrame {
  std::vector<Vec2> truth;
  std::vector<Vec2> estimate;
};

struct ErrorDynamicsReport {
  double max_deviation = 0.0;
  std::size_t checked = 0;       // (step, agent) pairs compared
  std::size_t updates = 0;
  std::size_t stale_columns = 0; // columns whose source differs from the current state
};

// Predicts every agent's error at step k+1 from step-k errors: unchanged when
// the agent did not update, otherwise self * own error + sum of entry weight
// times the error the neighbor had when its estimate was received (anchors
// contribute zero error). Returns the largest deviation from the trace.
// Events must be sorted by (step, agent). Meaningful for noiseless runs.
ErrorDynamicsReport verify_error_dynamics(std::span<const UpdateEvent> events,
                                          std::span<const TraceFrame> frames);

// Running product P_t ... P_0 and its infinity norm.
class ProductTracker {
 public:
  explicit ProductTracker(std::size_t n);
  void push(const StepMatrices& s);
  [[nodiscard]] double norm() const;
  [[nodiscard]] const std::vector<double>& product() const { return prod_; }
  [[nodiscard]] std::size_t count() const { return count_; }

 private:
  std::size_t n_;
  std::size_t count_ = 0;
  std::vector<double> prod_;
};

enum class SegmentKind { Slice, Gap, Tail };

struct Segment {
  SegmentKind kind = SegmentKind::Gap;
  std::size_t start = 0;  // first stream index (inclusive)
  std::size_t end = 0;    // last stream index (inclusive)
  double norm = 1.0;
  std::vector<double> product;  // only with keep_products
};

struct Slice {
  std::size_t number = 0;  // 1-based
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t length = 0;
  double norm = 0.0;
};

struct SliceReport {
  std::size_t n = 0;
  std::size_t processed = 0;
  std::vector<Slice> slices;
  // Slices, the stochastic gaps between them, and an unfinished tail, in
  // stream order. Multiplying their products reproduces the full product.
  std::vector<Segment> segments;
};

// Streaming decomposition. A slice opens at the first strictly sub-stochastic
// matrix outside a slice and closes once every row sum of the product
// accumulated since the opening is strictly below one.
class SliceDecomposer {
 public:
  explicit SliceDecomposer(std::size_t n, bool keep_products = false);
  void push(const StepMatrices& s);
  // Snapshot including the current open segment as a tail.
  [[nodiscard]] SliceReport report() const;

 private:
  void start_segment(SegmentKind kind, std::size_t index);
  void apply(const StepMatrices& s);

  std::size_t n_;
  bool keep_;
  std::size_t processed_ = 0;
  bool in_slice_ = false;
  bool segment_open_ = false;
  Segment current_;
  std::vector<double> row_sums_;
  std::size_t rows_at_one_ = 0;
  SliceReport done_;
};

SliceReport decompose_slices(std::span<const StepMatrices> stream, bool keep_products = false);

struct GrowthBoundParams {
  double beta1 = 0.2;   // floor on the self-weight of stochastic updates
  double beta2 = 0.9;   // bound on sub-stochastic row sums
  double gamma1 = 0.0;  // [0, 1]
  double gamma2 = 0.1;  // > 0
};

// ln((1 - exp(-gamma2 * i^-gamma1)) / (1 - beta2)) / ln(beta1) + 1 for the
// 1-based slice number i. Throws InvalidParams when the parameters are out of
// range or beta2 >= exp(-gamma2 * i^-gamma1).
double growth_bound(std::size_t i, const GrowthBoundParams& p);

struct GrowthVerdict {
  std::size_t number = 0;
  std::size_t length = 0;
  double bound = 0.0;
  bool satisfied = false;
};

struct GrowthReport {
  std::vector<GrowthVerdict> verdicts;
  double fraction_satisfied = 0.0;
  // Every prefix of the slice sequence contains a slice within its bound.
  bool every_prefix_satisfied = false;
};

GrowthReport check_growth_bound(const SliceReport& report, const GrowthBoundParams& p);

}  // namespace ltv
}  // namespace vch
