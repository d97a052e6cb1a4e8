#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "gapscope/circle.hpp"

using namespace gapscope;

TEST_CASE("rotation_orbit residues") {
  auto o = rotation_orbit(Rational(1, 3), 2);
  REQUIRE(o.raw.size() == 3);
  CHECK(o.residue(0) == Rational(0));
  CHECK(o.residue(1) == Rational(1, 3));
  CHECK(o.residue(2) == Rational(2, 3));
  CHECK(o.distinct_count() == 3);

  auto o2 = rotation_orbit(Rational(3, 10), 3);
  CHECK(o2.residue(3) == Rational(9, 10));

  // periodic orbit: p = 1/3, n = 5 -> 3 distinct residues, multiplicity 2
  auto o3 = rotation_orbit(Rational(1, 3), 5);
  REQUIRE(o3.distinct_count() == 3);
  for (std::size_t m : o3.multiplicity) CHECK(m == 2);

  // reduction mod 1 and negative input
  auto o4 = rotation_orbit(Rational(7, 3), 2);
  CHECK(o4.p == Rational(1, 3));
  auto o5 = rotation_orbit(Rational(-1, 3), 1);
  CHECK(o5.p == Rational(2, 3));

  CHECK_THROWS_AS(rotation_orbit(Rational(1, 3), 0), std::invalid_argument);
}

TEST_CASE("circular_gap_spectrum examples") {
  CHECK(circular_gap_spectrum(rotation_orbit(Rational(1, 3), 2)) ==
        std::vector<Rational>{Rational(1, 3)});

  auto gaps = circular_gap_spectrum(rotation_orbit(Rational(3, 10), 3));
  CHECK(gaps == std::vector<Rational>{Rational(1, 10), Rational(3, 10)});

  CHECK(circular_gap_spectrum(rotation_orbit(Rational(2, 7), 4)).size() <= 3);

  // degenerate: p = 0
  CHECK_THROWS_AS(circular_gap_spectrum(rotation_orbit(Rational(0), 5)),
                  DegenerateOrbitError);
}

TEST_CASE("geometric_nnd_spectrum examples") {
  CHECK(geometric_nnd_spectrum(rotation_orbit(Rational(1, 3), 2)).distinct_count() == 1);

  auto spec = geometric_nnd_spectrum(rotation_orbit(Rational(3, 10), 3));
  REQUIRE(spec.distinct_count() == 2);
  CHECK(spec.classes[0].value == Rational(1, 10));
  CHECK(spec.classes[1].value == Rational(3, 10));
}

TEST_CASE("fast circle path agrees with the all-pairs oracle") {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<unsigned long> dden(2, 400);
  std::uniform_int_distribution<std::size_t> dn(1, 60);
  for (int trial = 0; trial < 200; ++trial) {
    const unsigned long den = dden(rng);
    std::uniform_int_distribution<unsigned long> dnum(1, den - 1);
    Rational p(dnum(rng), den);
    p.canonicalize();
    auto orbit = rotation_orbit(p, dn(rng));
    if (orbit.distinct_count() < 2) continue;

    auto fast = geometric_nnd_spectrum(orbit);
    auto baseline = nnd_spectrum(circle_arc_oracle(orbit), ClusterPolicy::exact());
    REQUIRE(fast.per_point == baseline.per_point);
    REQUIRE(fast.distinct_count() == baseline.distinct_count());
    for (std::size_t c = 0; c < fast.classes.size(); ++c) {
      CHECK(fast.classes[c].value == baseline.classes[c].value);
      CHECK(fast.classes[c].count == baseline.classes[c].count);
    }
  }
}

TEST_CASE("three-gap bounds over random rationals (property)") {
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<unsigned long> dden(2, 2000);
  std::uniform_int_distribution<std::size_t> dn(1, 300);
  for (int trial = 0; trial < 500; ++trial) {
    const unsigned long den = dden(rng);
    std::uniform_int_distribution<unsigned long> dnum(1, den - 1);
    Rational p(dnum(rng), den);
    p.canonicalize();
    auto orbit = rotation_orbit(p, dn(rng));
    if (orbit.distinct_count() < 2) continue;
    // both functions throw ThreeGapViolation if the theorem ever failed
    CHECK_NOTHROW(circular_gap_spectrum(orbit));
    CHECK_NOTHROW(geometric_nnd_spectrum(orbit));
  }
}

TEST_CASE("rotation and reflection invariance") {
  std::mt19937_64 rng(555);
  std::uniform_int_distribution<unsigned long> dden(3, 300);
  std::uniform_int_distribution<std::size_t> dn(2, 50);
  for (int trial = 0; trial < 60; ++trial) {
    const unsigned long den = dden(rng);
    std::uniform_int_distribution<unsigned long> dnum(1, den - 1);
    Rational p(dnum(rng), den);
    p.canonicalize();
    const std::size_t n = dn(rng);
    auto base = rotation_orbit(p, n);
    if (base.distinct_count() < 2) continue;

    // offset by c
    Rational c(dnum(rng), den + 1);
    auto shifted = rotation_orbit(p, n, c);
    CHECK(circular_gap_spectrum(base) == circular_gap_spectrum(shifted));
    CHECK(geometric_nnd_spectrum(base).distinct_count() ==
          geometric_nnd_spectrum(shifted).distinct_count());

    // p -> 1 - p
    auto reflected = rotation_orbit(Rational(1) - p, n);
    CHECK(circular_gap_spectrum(base) == circular_gap_spectrum(reflected));
    auto sb = geometric_nnd_spectrum(base), sr = geometric_nnd_spectrum(reflected);
    REQUIRE(sb.distinct_count() == sr.distinct_count());
    for (std::size_t k = 0; k < sb.classes.size(); ++k)
      CHECK(sb.classes[k].value == sr.classes[k].value);
  }
}

TEST_CASE("every NND class value is a circular gap value") {
  std::mt19937_64 rng(2718);
  std::uniform_int_distribution<unsigned long> dden(3, 500);
  std::uniform_int_distribution<std::size_t> dn(1, 80);
  for (int trial = 0; trial < 150; ++trial) {
    const unsigned long den = dden(rng);
    std::uniform_int_distribution<unsigned long> dnum(1, den - 1);
    Rational p(dnum(rng), den);
    p.canonicalize();
    auto orbit = rotation_orbit(p, dn(rng));
    if (orbit.distinct_count() < 2) continue;
    auto gaps = circular_gap_spectrum(orbit);
    std::set<Rational> gap_set(gaps.begin(), gaps.end());
    for (const auto& cls : geometric_nnd_spectrum(orbit).classes)
      CHECK(gap_set.count(cls.value) == 1);
  }
}

TEST_CASE("chord metric cross-check: same class structure as arc") {
  std::mt19937_64 rng(161803);
  std::uniform_int_distribution<unsigned long> dden(3, 200);
  std::uniform_int_distribution<std::size_t> dn(2, 60);
  for (int trial = 0; trial < 40; ++trial) {
    const unsigned long den = dden(rng);
    std::uniform_int_distribution<unsigned long> dnum(1, den - 1);
    Rational p(dnum(rng), den);
    p.canonicalize();
    auto orbit = rotation_orbit(p, dn(rng));
    if (orbit.distinct_count() < 2) continue;
    auto arc = geometric_nnd_spectrum(orbit);
    auto chord = geometric_nnd_spectrum_chord(orbit, 1e-12);
    CHECK(arc.distinct_count() == chord.distinct_count());
    // 2 sin(pi * arc) maps class representatives
    for (std::size_t k = 0; k < arc.classes.size(); ++k) {
      const double expect = 2.0 * std::sin(M_PI * to_double(arc.classes[k].value));
      CHECK(chord.classes[k].value == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("floating mode handles irrational p with tau clustering") {
  const double golden = 0.6180339887498949;
  auto orbit = rotation_orbit_float(golden, 200);
  auto gaps = circular_gap_spectrum(orbit, 1e-9);
  CHECK(gaps.size() <= 3);
  auto spec = geometric_nnd_spectrum(orbit, CircleMetric::Arc, 1e-9);
  CHECK(spec.distinct_count() <= 3);
}
