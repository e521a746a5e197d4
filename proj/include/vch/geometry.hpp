#pragma once

// Distance-only plane geometry: triangle areas from side lengths, the
// area-additivity inclusion test, barycentric weights, and the
// law-of-cosines helpers used for distance tracking.
//
// Nothing in here ever sees a coordinate. Every input is a length or an angle.

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace vch {

class DegenerateInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateHull : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotInterior : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace geometry {

// Relative tolerance for triangle-inequality and determinant-sign checks.
inline constexpr double kTriTol = 1e-9;
// Hulls with a smaller area (squared region units) are not usable.
inline constexpr double kMinHullArea = 1e-6;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Wraps an angle into [0, 2*pi).
double wrap_angle(double a);

// Folds an angle difference into [0, pi].
double fold_angle(double a);

struct DistanceTriple {
  double ab = 0.0;
  double bc = 0.0;
  double ca = 0.0;
};

// The six pairwise distances among a query point i and hull vertices j, l, n.
struct HullDistances {
  double ij = 0.0;
  double il = 0.0;
  double in = 0.0;
  double jl = 0.0;
  double jn = 0.0;
  double ln = 0.0;
};

// Weights for hull vertices (j, l, n), in that order. `residual` is the index
// of the weight that was set to one minus the other two.
struct Barycentrics {
  std::array<double, 3> w{};
  int residual = 2;

  // Sums the two computed weights first and the residual last. In that order
  // the result is exactly 1.0.
  [[nodiscard]] double sum() const;
};

// 16 * area^2 of the triangle with the given sides, i.e. the negated 3-point
// Cayley-Menger determinant, evaluated in a cancellation-safe factored form.
// Negative for side triples violating the triangle inequality.
double cayley_menger_16a2(const DistanceTriple& t);

// Area from side lengths. Returns 0 for collinear triples; throws
// DegenerateInput when the sides are inconsistent beyond kTriTol.
double triangle_area(const DistanceTriple& t);

struct InclusionResult {
  bool inside = false;
  // |sum(sub areas) - hull area| / hull area
  double relative_error = 0.0;
  double hull_area = 0.0;
  // Area of the hull with i replacing vertex j, l, n respectively.
  std::array<double, 3> sub_areas{};
};

// Area-additivity test. Outside iff the sub-areas exceed the hull area by more
// than `tolerance` (relative); otherwise inside, with the relative mismatch
// carried for later gating. Throws DegenerateHull for hulls below
// kMinHullArea.
InclusionResult inclusion_test(const HullDistances& h, double tolerance = kTriTol);

// Barycentric weights of i with respect to (j, l, n). Two weights are area
// ratios; the residual vertex gets one minus their sum. `residual` picks the
// residual vertex explicitly; it must be eligible (the other two ratios sum to
// at most one) unless none is, in which case the pair is rescaled.
Barycentrics barycentric_coords(const HullDistances& h, int residual);

// Same, with the residual vertex drawn uniformly among the eligible ones.
Barycentrics barycentric_coords(const HullDistances& h, std::mt19937_64& rng);

// Same, for an already-evaluated inclusion result.
Barycentrics barycentric_from_areas(const InclusionResult& inc, std::mt19937_64& rng);
Barycentrics barycentric_from_areas(const InclusionResult& inc, int residual);

// How the residual vertex is chosen. Smallest gives the residual to the
// eligible vertex with the smallest area ratio: that ratio comes from the
// flattest sub-triangle, whose area is the least accurate. Uniform draws
// among the eligible vertices.
enum class ResidualPolicy { Smallest, Uniform };

std::string to_string(ResidualPolicy p);
ResidualPolicy residual_policy_from_string(const std::string& s);  // throws invalid_argument

int smallest_eligible(const InclusionResult& inc);
Barycentrics barycentric_from_areas(const InclusionResult& inc, ResidualPolicy policy, std::mt19937_64& rng);

// Distance to a fixed point after moving `move` along a direction that makes
// `turn_angle` with the ray toward that point.
double step_distance(double d_prev, double move, double turn_angle);

// Angle opposite side c in the triangle with sides (a, b, c).
double interior_angle(double a, double b, double c);

// Distance between the endpoints of two rays from a common origin.
double indirect_distance(double d_ij, double d_il, double angle_between);

}  // namespace geometry
}  // namespace vch
