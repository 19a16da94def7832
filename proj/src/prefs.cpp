#include "specnet/prefs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "specnet/error.hpp"

namespace specnet::prefs {
namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kSqrt6 = std::sqrt(6.0);

std::string describe(double a, double b, double c) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << a << ", " << b << ", " << c << ")";
  return os.str();
}

// Snaps values within tolerance of the simplex back onto it.
ObjectiveWeights snap(double t, double l, double f) {
  t = std::clamp(t, 0.0, 1.0);
  l = std::clamp(l, 0.0, 1.0);
  f = std::clamp(f, 0.0, 1.0);
  const double sum = t + l + f;
  return {t / sum, l / sum, f / sum};
}

}  // namespace

bool is_valid(const ObjectiveWeights& w) noexcept {
  for (double x : {w.throughput, w.latency, w.fairness}) {
    if (!std::isfinite(x) || x < 0.0 || x > 1.0) return false;
  }
  return std::abs(w.throughput + w.latency + w.fairness - 1.0) <= kWeightTolerance;
}

void validate(const ObjectiveWeights& w) {
  if (!is_valid(w)) {
    throw Error(Errc::kInvalidWeights,
                "weights must lie on the unit simplex, got " +
                    describe(w.throughput, w.latency, w.fairness));
  }
}

ObjectiveWeights weights_from_distances(const CornerDistances& d) {
  for (double x : {d.to_throughput, d.to_latency, d.to_fairness}) {
    if (!std::isfinite(x) || x < -kConsistencyTolerance || x > kSqrt2 + kConsistencyTolerance) {
      throw Error(Errc::kInconsistentDistances,
                  "corner distance out of [0, sqrt2]: " +
                      describe(d.to_throughput, d.to_latency, d.to_fairness));
    }
  }
  const double t2 = d.to_throughput * d.to_throughput;
  const double l2 = d.to_latency * d.to_latency;
  const double f2 = d.to_fairness * d.to_fairness;

  // w_l - w_t = (t2 - l2) / 2 and w_f - w_l = (l2 - f2) / 2.
  const double lat_minus_thr = 0.5 * (t2 - l2);
  const double fair_minus_lat = 0.5 * (l2 - f2);
  const double t = (1.0 - 2.0 * lat_minus_thr - fair_minus_lat) / 3.0;
  const double l = t + lat_minus_thr;
  const double f = l + fair_minus_lat;

  // The linear system only pins differences of squares; the quadratic itself
  // must also hold, otherwise the triple is not a simplex point.
  const double residual = (t - 1.0) * (t - 1.0) + l * l + f * f - t2;
  const bool in_bounds = t >= -kConsistencyTolerance && l >= -kConsistencyTolerance &&
                         f >= -kConsistencyTolerance && t <= 1.0 + kConsistencyTolerance &&
                         l <= 1.0 + kConsistencyTolerance && f <= 1.0 + kConsistencyTolerance;
  if (!in_bounds || std::abs(residual) > kConsistencyTolerance) {
    throw Error(Errc::kInconsistentDistances,
                "distances " + describe(d.to_throughput, d.to_latency, d.to_fairness) +
                    " do not correspond to a simplex point");
  }
  return snap(t, l, f);
}

CornerDistances distances_from_weights(const ObjectiveWeights& w) {
  validate(w);
  const double t = w.throughput, l = w.latency, f = w.fairness;
  return {std::sqrt((t - 1.0) * (t - 1.0) + l * l + f * f),
          std::sqrt(t * t + (l - 1.0) * (l - 1.0) + f * f),
          std::sqrt(t * t + l * l + (f - 1.0) * (f - 1.0))};
}

std::array<TrianglePoint, 3> corners() {
  return {TrianglePoint{kSqrt2 / 2.0, kSqrt6 / 2.0}, TrianglePoint{0.0, 0.0},
          TrianglePoint{kSqrt2, 0.0}};
}

TrianglePoint centroid() {
  const auto c = corners();
  return {(c[0].u + c[1].u + c[2].u) / 3.0, (c[0].v + c[1].v + c[2].v) / 3.0};
}

double planar_distance(const TrianglePoint& a, const TrianglePoint& b) {
  return std::hypot(a.u - b.u, a.v - b.v);
}

ObjectiveWeights weights_from_planar(const TrianglePoint& p) {
  if (!std::isfinite(p.u) || !std::isfinite(p.v)) {
    throw Error(Errc::kOutsideTriangle, "non-finite triangle coordinates");
  }
  const auto [ct, cl, cf] = corners();
  // Barycentric coordinates via signed areas.
  const double det = (cl.v - cf.v) * (ct.u - cf.u) + (cf.u - cl.u) * (ct.v - cf.v);
  const double t = ((cl.v - cf.v) * (p.u - cf.u) + (cf.u - cl.u) * (p.v - cf.v)) / det;
  const double l = ((cf.v - ct.v) * (p.u - cf.u) + (ct.u - cf.u) * (p.v - cf.v)) / det;
  const double f = 1.0 - t - l;
  if (t < -kWeightTolerance || l < -kWeightTolerance || f < -kWeightTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "point (" << p.u << ", " << p.v << ") has barycentric coordinates "
       << describe(t, l, f);
    throw Error(Errc::kOutsideTriangle, os.str());
  }
  return snap(t, l, f);
}

TrianglePoint planar_from_weights(const ObjectiveWeights& w) {
  validate(w);
  const auto [ct, cl, cf] = corners();
  return {w.throughput * ct.u + w.latency * cl.u + w.fairness * cf.u,
          w.throughput * ct.v + w.latency * cl.v + w.fairness * cf.v};
}

}  // namespace specnet::prefs
