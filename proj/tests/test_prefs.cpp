#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "specnet/error.hpp"
#include "specnet/prefs.hpp"

using namespace specnet;
using namespace specnet::prefs;

namespace {

const double kSqrt2 = std::sqrt(2.0);

// Uniform point on the simplex (sorted-uniform spacing).
ObjectiveWeights random_weights(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double a = u(rng), b = u(rng);
  if (a > b) std::swap(a, b);
  return {a, b - a, 1.0 - b};
}

// Independent oracle: squared distance between two simplex points in R^3.
double simplex_distance(const ObjectiveWeights& a, const ObjectiveWeights& b) {
  const double dt = a.throughput - b.throughput, dl = a.latency - b.latency,
               df = a.fairness - b.fairness;
  return std::sqrt(dt * dt + dl * dl + df * df);
}

Errc error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::kInvalidArgument;
}

}  // namespace

TEST_CASE("weights_from_distances: corner and centroid") {
  auto w = weights_from_distances({0.0, kSqrt2, kSqrt2});
  CHECK(std::abs(w.throughput - 1.0) < 1e-12);
  CHECK(std::abs(w.latency) < 1e-12);
  CHECK(std::abs(w.fairness) < 1e-12);

  const double d = std::sqrt(2.0 / 3.0);
  w = weights_from_distances({d, d, d});
  CHECK(std::abs(w.throughput - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(w.latency - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(w.fairness - 1.0 / 3.0) < 1e-12);
}

TEST_CASE("weights_from_distances: interior point (0.5, 0.3, 0.2)") {
  // (0.5-1)^2 + 0.3^2 + 0.2^2 = 0.38, 0.5^2 + 0.7^2 + 0.2^2 = 0.78,
  // 0.5^2 + 0.3^2 + 0.8^2 = 0.98.
  const auto w = weights_from_distances({std::sqrt(0.38), std::sqrt(0.78), std::sqrt(0.98)});
  CHECK(std::abs(w.throughput - 0.5) < 1e-9);
  CHECK(std::abs(w.latency - 0.3) < 1e-9);
  CHECK(std::abs(w.fairness - 0.2) < 1e-9);
}

TEST_CASE("weights_from_distances rejects triples that are not from a simplex point") {
  CHECK(error_of([] { weights_from_distances({0.0, 0.0, 0.0}); }) == Errc::kInconsistentDistances);
  CHECK(error_of([] { weights_from_distances({kSqrt2, kSqrt2, kSqrt2}); }) ==
        Errc::kInconsistentDistances);
  CHECK(error_of([] { weights_from_distances({-0.1, kSqrt2, kSqrt2}); }) ==
        Errc::kInconsistentDistances);
}

TEST_CASE("distances_from_weights examples") {
  auto d = distances_from_weights({1.0, 0.0, 0.0});
  CHECK(std::abs(d.to_throughput) < 1e-15);
  CHECK(std::abs(d.to_latency - kSqrt2) < 1e-15);
  CHECK(std::abs(d.to_fairness - kSqrt2) < 1e-15);

  d = distances_from_weights({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  CHECK(std::abs(d.to_throughput - d.to_latency) < 1e-15);
  CHECK(std::abs(d.to_latency - d.to_fairness) < 1e-15);

  d = distances_from_weights({0.5, 0.3, 0.2});
  CHECK(std::abs(d.to_throughput - std::sqrt(0.38)) < 1e-12);
  CHECK(std::abs(d.to_latency - std::sqrt(0.78)) < 1e-12);
  CHECK(std::abs(d.to_fairness - std::sqrt(0.98)) < 1e-12);

  CHECK(error_of([] { distances_from_weights({0.5, 0.5, 0.5}); }) == Errc::kInvalidWeights);
}

TEST_CASE("round trip over random simplex points matches the R^3 oracle") {
  std::mt19937_64 rng(7);
  const ObjectiveWeights t{1, 0, 0}, l{0, 1, 0}, f{0, 0, 1};
  for (int i = 0; i < 1000; ++i) {
    const auto w = random_weights(rng);
    const auto d = distances_from_weights(w);
    CHECK(std::abs(d.to_throughput - simplex_distance(w, t)) < 1e-12);
    CHECK(std::abs(d.to_latency - simplex_distance(w, l)) < 1e-12);
    CHECK(std::abs(d.to_fairness - simplex_distance(w, f)) < 1e-12);
    const auto back = weights_from_distances(d);
    CHECK(std::abs(back.throughput - w.throughput) < 1e-9);
    CHECK(std::abs(back.latency - w.latency) < 1e-9);
    CHECK(std::abs(back.fairness - w.fairness) < 1e-9);
  }
}

TEST_CASE("planar embedding keeps the simplex edge length") {
  const auto c = corners();
  CHECK(std::abs(planar_distance(c[0], c[1]) - kSqrt2) < 1e-15);
  CHECK(std::abs(planar_distance(c[1], c[2]) - kSqrt2) < 1e-15);
  CHECK(std::abs(planar_distance(c[0], c[2]) - kSqrt2) < 1e-15);
  // Throughput corner sits on top.
  CHECK(c[0].v > c[1].v);
  CHECK(c[0].v > c[2].v);
  CHECK(c[1].u < c[2].u);
}

TEST_CASE("weights_from_planar examples") {
  const auto c = corners();
  auto w = weights_from_planar(c[0]);
  CHECK(std::abs(w.throughput - 1.0) < 1e-12);
  CHECK(std::abs(w.latency) < 1e-12);
  CHECK(std::abs(w.fairness) < 1e-12);

  w = weights_from_planar(centroid());
  CHECK(std::abs(w.throughput - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(w.latency - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(w.fairness - 1.0 / 3.0) < 1e-12);

  w = weights_from_planar({(c[0].u + c[1].u) / 2, (c[0].v + c[1].v) / 2});
  CHECK(std::abs(w.throughput - 0.5) < 1e-12);
  CHECK(std::abs(w.latency - 0.5) < 1e-12);
  CHECK(std::abs(w.fairness) < 1e-12);
}

TEST_CASE("weights_from_planar agrees with weights_from_distances") {
  std::mt19937_64 rng(11);
  const auto c = corners();
  for (int i = 0; i < 500; ++i) {
    const auto p = planar_from_weights(random_weights(rng));
    const auto a = weights_from_planar(p);
    const auto b = weights_from_distances(
        {planar_distance(p, c[0]), planar_distance(p, c[1]), planar_distance(p, c[2])});
    CHECK(std::abs(a.throughput - b.throughput) < 1e-9);
    CHECK(std::abs(a.latency - b.latency) < 1e-9);
    CHECK(std::abs(a.fairness - b.fairness) < 1e-9);
  }
}

TEST_CASE("points outside the triangle are rejected") {
  const auto c = corners();
  CHECK(error_of([&] { weights_from_planar({c[0].u, c[0].v + 0.01}); }) == Errc::kOutsideTriangle);
  CHECK(error_of([] { weights_from_planar({-0.01, 0.0}); }) == Errc::kOutsideTriangle);
  CHECK(error_of([] { weights_from_planar({0.7, -0.001}); }) == Errc::kOutsideTriangle);
  CHECK(error_of([] { weights_from_planar({NAN, 0.1}); }) == Errc::kOutsideTriangle);
  // On the edge is inside.
  CHECK_NOTHROW(weights_from_planar({0.7, 0.0}));
}

TEST_CASE("validate") {
  CHECK(is_valid({1.0, 0.0, 0.0}));
  CHECK(is_valid({0.2, 0.3, 0.5}));
  CHECK_FALSE(is_valid({0.5, 0.5, 0.1}));
  CHECK_FALSE(is_valid({1.1, -0.1, 0.0}));
  CHECK_FALSE(is_valid({NAN, 0.5, 0.5}));
  CHECK(error_of([] { validate({0.4, 0.4, 0.4}); }) == Errc::kInvalidWeights);
}
