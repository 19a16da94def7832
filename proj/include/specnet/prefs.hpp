#pragma once

// Operator preferences on the throughput/latency/fairness triangle.
//
// The triangle is the unit simplex {w_t + w_l + w_f = 1, w >= 0}. A point is
// identified either by its weights, by its Euclidean distances to the three
// corners, or by planar coordinates in a fixed 2D drawing of the simplex:
//
//            T (throughput)
//           /  \   .
//          /    \  .
//         L------F
//   (latency)   (fairness)
//
// L = (0, 0), F = (sqrt2, 0), T = (sqrt2/2, sqrt6/2). The edge length is sqrt2,
// the same as the simplex edge, so planar corner distances equal simplex
// corner distances.

#include <array>

namespace specnet::prefs {

inline constexpr double kWeightTolerance = 1e-9;
inline constexpr double kConsistencyTolerance = 1e-6;

struct ObjectiveWeights {
  double throughput = 1.0 / 3.0;
  double latency = 1.0 / 3.0;
  double fairness = 1.0 / 3.0;

  bool operator==(const ObjectiveWeights&) const = default;
};

struct CornerDistances {
  double to_throughput = 0.0;
  double to_latency = 0.0;
  double to_fairness = 0.0;
};

struct TrianglePoint {
  double u = 0.0;
  double v = 0.0;
};

/// Throws InvalidWeights unless every weight is in [0, 1] and they sum to 1.
void validate(const ObjectiveWeights& w);
bool is_valid(const ObjectiveWeights& w) noexcept;

/// Solves the corner-distance system for the weights. Pairwise differences of
/// the three quadratic equations are linear in the weights, which together
/// with the unit-sum constraint gives a closed form. Throws
/// InconsistentDistances if the triple does not come from a simplex point.
ObjectiveWeights weights_from_distances(const CornerDistances& d);

CornerDistances distances_from_weights(const ObjectiveWeights& w);

/// Barycentric coordinates of p. Throws OutsideTriangle if any coordinate is
/// below -1e-9.
ObjectiveWeights weights_from_planar(const TrianglePoint& p);

TrianglePoint planar_from_weights(const ObjectiveWeights& w);

/// Corners in (throughput, latency, fairness) order.
std::array<TrianglePoint, 3> corners();
TrianglePoint centroid();

double planar_distance(const TrianglePoint& a, const TrianglePoint& b);

}  // namespace specnet::prefs
