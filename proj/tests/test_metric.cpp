#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gapscope/metric.hpp"
#include "gapscope/torus.hpp"

using namespace gapscope;

namespace {

MetricOracle<Rational> circle_oracle(const std::vector<Rational>& pts) {
  return MetricOracle<Rational>(
      pts.size(),
      [pts](std::size_t i, std::size_t j) {
        Rational d = pts[i] - pts[j];
        if (d < 0) d = -d;
        Rational wrap = Rational(1) - d;
        return d < wrap ? d : wrap;
      },
      /*exact=*/true);
}

std::vector<Rational> random_rational_circle_orbit(std::mt19937_64& rng) {
  std::uniform_int_distribution<unsigned long> dden(2, 200);
  std::uniform_int_distribution<std::size_t> dn(2, 40);
  const unsigned long den = dden(rng);
  std::uniform_int_distribution<unsigned long> dnum(1, den - 1);
  Rational p(dnum(rng), den);
  p.canonicalize();
  const std::size_t n = dn(rng);
  std::vector<Rational> pts;
  Rational cur(0);
  for (std::size_t i = 0; i <= n; ++i) {
    bool dup = false;
    for (const auto& q : pts) dup = dup || q == cur;
    if (!dup) pts.push_back(cur);
    cur = mod_one(cur + p);
  }
  return pts;
}

}  // namespace

TEST_CASE("nnd_of_point basics") {
  // two points at distance d
  MetricOracle<double> two(2, [](std::size_t i, std::size_t j) { return i == j ? 0.0 : 2.5; },
                           false);
  auto [v0, a0] = nnd_of_point(0, two);
  auto [v1, a1] = nnd_of_point(1, two);
  CHECK(v0 == 2.5);
  CHECK(v1 == 2.5);
  CHECK(a0 == 1);
  CHECK(a1 == 0);

  // circle points {0, 1/3, 2/3}: everything at arc distance 1/3
  std::vector<Rational> thirds{Rational(0), Rational(1, 3), Rational(2, 3)};
  auto m = circle_oracle(thirds);
  auto [v, a] = nnd_of_point(0, m);
  CHECK(v == Rational(1, 3));
  CHECK(a == 1);  // lowest index wins the tie between 1/3 and 2/3

  CHECK_THROWS_AS(nnd_of_point(5, m), std::invalid_argument);
  MetricOracle<double> one(1, [](std::size_t, std::size_t) { return 0.0; }, false);
  CHECK_THROWS_AS(nnd_of_point(0, one), std::invalid_argument);
}

TEST_CASE("1.1 torus orbit: nnd of x_10 for primes (3,5), s = 1/900") {
  ManyGapsCertificate cert = many_gaps_construction({3, 5}, Rational(1, 900));
  auto orbit = many_gaps_orbit(cert);
  REQUIRE(orbit.size() == 15);
  TorusLattice L = many_gaps_lattice(cert);
  MetricOracle<Rational> m(
      orbit.size(),
      [&](std::size_t i, std::size_t j) { return torus_distance2(L, orbit[i], orbit[j]); },
      /*exact=*/true, 0.0, /*squared=*/true);

  auto [v, a] = nnd_of_point(10, m);
  CHECK(a == 0);  // nearest neighbor of x_10 is x_0
  // dist^2 = 1 - 2*10*s + 2*(10 s)^2 = 1 - 1/45 + 1/4050
  Rational expected = Rational(1) - Rational(1, 45) + Rational(1, 4050);
  CHECK(v == expected);
  CHECK(std::sqrt(to_double(v)) == doctest::Approx(0.988951).epsilon(1e-6));
}

TEST_CASE("nnd_spectrum examples") {
  std::vector<Rational> thirds{Rational(0), Rational(1, 3), Rational(2, 3)};
  auto spec = nnd_spectrum(circle_oracle(thirds), ClusterPolicy::exact());
  CHECK(spec.distinct_count() == 1);
  CHECK(spec.classes[0].value == Rational(1, 3));
  CHECK(spec.classes[0].count == 3);

  // p = 3/10, n = 3: points 0, .3, .6, .9 -> classes {1/10, 3/10}
  std::vector<Rational> pts{Rational(0), Rational(3, 10), Rational(6, 10), Rational(9, 10)};
  auto spec2 = nnd_spectrum(circle_oracle(pts), ClusterPolicy::exact());
  REQUIRE(spec2.distinct_count() == 2);
  CHECK(spec2.classes[0].value == Rational(1, 10));
  CHECK(spec2.classes[1].value == Rational(3, 10));
  CHECK(spec2.classes[0].count == 2);
  CHECK(spec2.classes[1].count == 2);
  // per-point values match nnd_of_point
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto [v, a] = nnd_of_point(i, circle_oracle(pts));
    CHECK(spec2.per_point[i] == v);
    CHECK(spec2.nearest[i] == a);
  }

  MetricOracle<Rational> tiny(1, [](std::size_t, std::size_t) { return Rational(0); }, true);
  CHECK_THROWS_AS(nnd_spectrum(tiny, ClusterPolicy::exact()), std::invalid_argument);
}

TEST_CASE("exact vs tolerance consistency when tau is below class separation") {
  std::vector<Rational> pts{Rational(0), Rational(3, 10), Rational(6, 10), Rational(9, 10)};
  auto exact_spec = nnd_spectrum(circle_oracle(pts), ClusterPolicy::exact());
  // same distances in double, tolerance clustering
  std::vector<double> dpts;
  for (const auto& q : pts) dpts.push_back(to_double(q));
  MetricOracle<double> md(
      dpts.size(),
      [dpts](std::size_t i, std::size_t j) {
        double d = std::abs(dpts[i] - dpts[j]);
        return std::min(d, 1.0 - d);
      },
      false);
  auto tol_spec = nnd_spectrum(md, ClusterPolicy::rel_tol(1e-9));
  CHECK(tol_spec.distinct_count() == exact_spec.distinct_count());
}

TEST_CASE("oracle equivalence: nnd_spectrum == brute_force_spectrum, 100 random circle orbits") {
  std::mt19937_64 rng(12345);
  for (int trial = 0; trial < 100; ++trial) {
    auto pts = random_rational_circle_orbit(rng);
    if (pts.size() < 2) continue;
    auto m = circle_oracle(pts);
    auto fast = nnd_spectrum(m, ClusterPolicy::exact());
    auto ref = brute_force_spectrum(m);
    REQUIRE(fast.per_point == ref.per_point);
    REQUIRE(fast.nearest == ref.nearest);
    REQUIRE(fast.distinct_count() == ref.distinct_count());
    for (std::size_t c = 0; c < fast.classes.size(); ++c) {
      CHECK(fast.classes[c].value == ref.classes[c].value);
      CHECK(fast.classes[c].count == ref.classes[c].count);
    }
  }
}

TEST_CASE("permutation invariance") {
  std::mt19937_64 rng(777);
  for (int trial = 0; trial < 25; ++trial) {
    auto pts = random_rational_circle_orbit(rng);
    if (pts.size() < 3) continue;
    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Rational> shuffled(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) shuffled[i] = pts[perm[i]];

    auto a = nnd_spectrum(circle_oracle(pts), ClusterPolicy::exact());
    auto b = nnd_spectrum(circle_oracle(shuffled), ClusterPolicy::exact());
    auto sa = a.per_point, sb = b.per_point;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    CHECK(sa == sb);
    REQUIRE(a.distinct_count() == b.distinct_count());
    for (std::size_t c = 0; c < a.classes.size(); ++c) {
      CHECK(a.classes[c].value == b.classes[c].value);
      CHECK(a.classes[c].count == b.classes[c].count);
    }
  }
}

TEST_CASE("scale covariance in exact mode") {
  std::mt19937_64 rng(999);
  auto pts = random_rational_circle_orbit(rng);
  REQUIRE(pts.size() >= 2);
  const Rational lambda(7, 3);
  auto base = circle_oracle(pts);
  MetricOracle<Rational> scaled(
      pts.size(), [&, lambda](std::size_t i, std::size_t j) { return lambda * base(i, j); }, true);
  auto a = nnd_spectrum(base, ClusterPolicy::exact());
  auto b = nnd_spectrum(scaled, ClusterPolicy::exact());
  REQUIRE(a.distinct_count() == b.distinct_count());
  for (std::size_t c = 0; c < a.classes.size(); ++c)
    CHECK(b.classes[c].value == lambda * a.classes[c].value);
}

TEST_CASE("monotone class count as tau refines") {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> unif(0.1, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> vals;
    for (int i = 0; i < 40; ++i) vals.push_back(unif(rng));
    std::sort(vals.begin(), vals.end());
    std::size_t prev = 0;
    for (double tau : {1e-1, 1e-3, 1e-6, 1e-12}) {
      auto classes = cluster_sorted_values(vals, ClusterPolicy::rel_tol(tau));
      CHECK(classes.size() >= prev);
      prev = classes.size();
    }
  }
}

TEST_CASE("metric oracle invariants on sampled indices") {
  std::vector<Rational> pts{Rational(0), Rational(1, 7), Rational(2, 7), Rational(4, 7),
                            Rational(5, 7)};
  auto m = circle_oracle(pts);
  std::vector<std::size_t> sample{0, 1, 2, 3, 4, 0, 2};
  CHECK(verify_metric_invariants(m, sample));
}

TEST_CASE("cluster policy validation") {
  CHECK_THROWS_AS(ClusterPolicy::rel_tol(0.0), std::invalid_argument);
  CHECK_THROWS_AS(ClusterPolicy::rel_tol(-1e-9), std::invalid_argument);
}
