#include "vch/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace vch::geometry {

double wrap_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative value can round up to exactly 2*pi.
  if (r >= kTwoPi) r = 0.0;
  return r;
}

double fold_angle(double a) {
  double r = wrap_angle(a);
  return r > kPi ? kTwoPi - r : r;
}

double Barycentrics::sum() const {
  const int p = (residual + 1) % 3;
  const int q = (residual + 2) % 3;
  return (w[p] + w[q]) + w[residual];
}

double cayley_menger_16a2(const DistanceTriple& t) {
  std::array<double, 3> s{t.ab, t.bc, t.ca};
  std::sort(s.begin(), s.end(), std::greater<>());
  const double a = s[0];
  const double b = s[1];
  const double c = s[2];
  // Kahan's ordering; only (c - (a - b)) can go negative.
  return (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
}

double triangle_area(const DistanceTriple& t) {
  if (t.ab < 0.0 || t.bc < 0.0 || t.ca < 0.0) {
    throw DegenerateInput("triangle_area: negative side length");
  }
  const double a = std::max({t.ab, t.bc, t.ca});
  const double slack = t.ab + t.bc + t.ca - 2.0 * a;  // c - (a - b) for sorted sides
  if (slack < -kTriTol * a) {
    throw DegenerateInput("triangle_area: sides violate the triangle inequality");
  }
  const double v = cayley_menger_16a2(t);
  if (v <= 0.0) return 0.0;
  return 0.25 * std::sqrt(v);
}

InclusionResult inclusion_test(const HullDistances& h, double tolerance) {
  InclusionResult r;
  r.hull_area = triangle_area({h.jl, h.ln, h.jn});
  if (r.hull_area < kMinHullArea) {
    throw DegenerateHull("inclusion_test: hull area below threshold");
  }
  r.sub_areas[0] = triangle_area({h.il, h.ln, h.in});
  r.sub_areas[1] = triangle_area({h.ij, h.in, h.jn});
  r.sub_areas[2] = triangle_area({h.jl, h.il, h.ij});
  const double total = r.sub_areas[0] + r.sub_areas[1] + r.sub_areas[2];
  const double diff = total - r.hull_area;
  r.relative_error = std::abs(diff) / r.hull_area;
  r.inside = diff <= tolerance * r.hull_area;
  return r;
}

namespace {

std::array<double, 3> ratios(const InclusionResult& inc) {
  std::array<double, 3> a{};
  for (int q = 0; q < 3; ++q) {
    a[q] = std::clamp(inc.sub_areas[q] / inc.hull_area, 0.0, 1.0);
  }
  return a;
}

bool eligible(const std::array<double, 3>& a, int q) {
  return a[(q + 1) % 3] + a[(q + 2) % 3] <= 1.0;
}

Barycentrics assemble(const std::array<double, 3>& a, int residual) {
  Barycentrics b;
  b.residual = residual;
  const int p = (residual + 1) % 3;
  const int q = (residual + 2) % 3;
  double wp = a[p];
  double wq = a[q];
  double pair = wp + wq;
  if (pair > 1.0) {
    wp /= pair;
    wq /= pair;
    pair = wp + wq;
    if (pair > 1.0) {
      wq = 1.0 - wp;
      pair = wp + wq;
    }
  }
  b.w[p] = wp;
  b.w[q] = wq;
  b.w[residual] = std::clamp(1.0 - pair, 0.0, 1.0);
  return b;
}

}  // namespace

Barycentrics barycentric_from_areas(const InclusionResult& inc, int residual) {
  if (!inc.inside) throw NotInterior("barycentric_coords: point is outside the hull");
  if (residual < 0 || residual > 2) {
    throw std::invalid_argument("barycentric_coords: residual index out of range");
  }
  const auto a = ratios(inc);
  const bool any = eligible(a, 0) || eligible(a, 1) || eligible(a, 2);
  if (any && !eligible(a, residual)) {
    throw std::invalid_argument("barycentric_coords: residual vertex not eligible");
  }
  return assemble(a, residual);
}

Barycentrics barycentric_from_areas(const InclusionResult& inc, std::mt19937_64& rng) {
  if (!inc.inside) throw NotInterior("barycentric_coords: point is outside the hull");
  const auto a = ratios(inc);
  std::array<int, 3> pool{};
  int count = 0;
  for (int q = 0; q < 3; ++q) {
    if (eligible(a, q)) pool[count++] = q;
  }
  if (count == 0) {
    // No pair sums below one: pick among all three and rescale.
    pool = {0, 1, 2};
    count = 3;
  }
  std::uniform_int_distribution<int> pick(0, count - 1);
  return assemble(a, pool[pick(rng)]);
}

int smallest_eligible(const InclusionResult& inc) {
  const auto a = ratios(inc);
  int best = -1;
  for (int q = 0; q < 3; ++q) {
    if (eligible(a, q) && (best < 0 || a[q] < a[best])) best = q;
  }
  if (best < 0) best = static_cast<int>(std::min_element(a.begin(), a.end()) - a.begin());
  return best;
}

Barycentrics barycentric_from_areas(const InclusionResult& inc, ResidualPolicy policy, std::mt19937_64& rng) {
  if (policy == ResidualPolicy::Uniform) return barycentric_from_areas(inc, rng);
  if (!inc.inside) throw NotInterior("barycentric_coords: point is outside the hull");
  return assemble(ratios(inc), smallest_eligible(inc));
}

std::string to_string(ResidualPolicy p) { return p == ResidualPolicy::Smallest ? "smallest" : "uniform"; }

ResidualPolicy residual_policy_from_string(const std::string& s) {
  if (s == "smallest") return ResidualPolicy::Smallest;
  if (s == "uniform") return ResidualPolicy::Uniform;
  throw std::invalid_argument("expected smallest or uniform, got '" + s + "'");
}

Barycentrics barycentric_coords(const HullDistances& h, int residual) {
  return barycentric_from_areas(inclusion_test(h), residual);
}

Barycentrics barycentric_coords(const HullDistances& h, std::mt19937_64& rng) {
  return barycentric_from_areas(inclusion_test(h), rng);
}

double step_distance(double d_prev, double move, double turn_angle) {
  // d^2 + m^2 - 2 d m cos(t), rewritten so nearly collinear moves keep their
  // relative accuracy.
  const double diff = d_prev - move;
  const double half = std::sin(0.5 * turn_angle);
  const double r = diff * diff + 4.0 * d_prev * move * half * half;
  return r > 0.0 ? std::sqrt(r) : 0.0;
}

double interior_angle(double a, double b, double c) {
  if (a < 0.0 || b < 0.0 || c < 0.0) {
    throw DegenerateInput("interior_angle: negative side length");
  }
  const double longest = std::max({a, b, c});
  if (a + b + c - 2.0 * longest < -kTriTol * longest) {
    throw DegenerateInput("interior_angle: sides violate the triangle inequality");
  }
  if (a == 0.0 || b == 0.0) {
    throw DegenerateInput("interior_angle: angle undefined for a zero-length side");
  }
  // Kahan's needle-triangle form; acos of the cosine loses half the digits
  // near 0 and pi.
  if (a < b) std::swap(a, b);
  const double mu = b >= c ? c - (a - b) : b - (a - c);
  const double num = ((a - b) + c) * std::max(mu, 0.0);
  const double den = (a + (b + c)) * std::max((a - c) + b, 0.0);
  if (den == 0.0) return kPi;
  return 2.0 * std::atan(std::sqrt(num / den));
}

double indirect_distance(double d_ij, double d_il, double angle_between) {
  return step_distance(d_ij, d_il, angle_between);
}

}  // namespace vch::geometry
