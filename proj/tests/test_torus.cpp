#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "gapscope/circle.hpp"
#include "gapscope/torus.hpp"

using namespace gapscope;

namespace {

std::size_t corollary_ceiling(std::size_t k) {  // 3^k + 1
  std::size_t b = 1;
  for (std::size_t i = 0; i < k; ++i) b *= 3;
  return b + 1;
}

// naive quotient distance oracle: enumerate all lattice vectors in a 3-box
Rational naive_distance2(const TorusLattice& L, const TorusPoint& x, const TorusPoint& y) {
  const std::size_t k = L.dim();
  std::vector<Rational> diff(k);
  for (std::size_t i = 0; i < k; ++i) diff[i] = x[i] - y[i];
  Rational best(-1);
  std::vector<long> z(k, -3);
  while (true) {
    std::vector<Rational> d = diff;
    if (L.is_rectangular()) {
      for (std::size_t i = 0; i < k; ++i) d[i] += Rational(z[i]) * L.sides()[i];
    } else {
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) d[i] += Rational(z[j]) * L.basis()[j][i];
    }
    Rational n2(0);
    for (const auto& c : d) n2 += c * c;
    if (best < 0 || n2 < best) best = n2;
    std::size_t pos = 0;
    while (pos < k && ++z[pos] > 3) z[pos++] = -3;
    if (pos == k) break;
  }
  return best;
}

Rational rand_rational(std::mt19937_64& rng, unsigned long max_den = 20, long span = 6) {
  std::uniform_int_distribution<unsigned long> dden(1, max_den);
  std::uniform_int_distribution<long> dnum(-span, span);
  const unsigned long den = dden(rng);
  Rational q(dnum(rng) * static_cast<long>(den) + static_cast<long>(dden(rng)),
             den);
  q.canonicalize();
  return q;
}

}  // namespace

TEST_CASE("torus_distance basics") {
  auto unit2 = TorusLattice::rectangular({Rational(1), Rational(1)});
  CHECK(torus_distance2(unit2, {Rational(0), Rational(0)}, {Rational(1, 2), Rational(1, 2)}) ==
        Rational(1, 2));

  auto L35 = TorusLattice::rectangular({Rational(3), Rational(5)});
  CHECK(torus_distance2(L35, {Rational(0), Rational(0)}, {Rational(5, 2), Rational(0)}) ==
        Rational(1, 4));  // wraps: distance 1/2
  CHECK(torus_distance2(L35, {Rational(0), Rational(0)}, {Rational(1), Rational(0)}) ==
        Rational(1));
}

TEST_CASE("general-basis CVP agrees with rectangular mode") {
  // rectangular lattice expressed as a general basis
  auto rect = TorusLattice::rectangular({Rational(3), Rational(5)});
  auto gen = TorusLattice::general({{Rational(3), Rational(0)}, {Rational(0), Rational(5)}});
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    TorusPoint x{rand_rational(rng), rand_rational(rng)};
    TorusPoint y{rand_rational(rng), rand_rational(rng)};
    CHECK(torus_distance2(rect, x, y) == torus_distance2(gen, x, y));
  }
}

TEST_CASE("torus_distance agrees with naive 3-box enumeration (property)") {
  std::mt19937_64 rng(123);
  // rectangular, dims 1..4
  for (int trial = 0; trial < 600; ++trial) {
    std::uniform_int_distribution<std::size_t> dk(1, 4);
    const std::size_t k = dk(rng);
    std::vector<Rational> sides;
    std::uniform_int_distribution<unsigned long> dside(1, 7);
    for (std::size_t i = 0; i < k; ++i)
      sides.push_back(Rational(dside(rng)) + Rational(1, 1 + dside(rng)));
    auto L = TorusLattice::rectangular(sides);
    TorusPoint x(k), y(k);
    for (std::size_t i = 0; i < k; ++i) {
      x[i] = mod_interval(rand_rational(rng), sides[i]);
      y[i] = mod_interval(rand_rational(rng), sides[i]);
    }
    CHECK(torus_distance2(L, x, y) == naive_distance2(L, x, y));
  }
  // general bases, dims 2..3 (skewed but not too ill-conditioned for the 3-box oracle)
  for (int trial = 0; trial < 400; ++trial) {
    std::uniform_int_distribution<std::size_t> dk(2, 3);
    const std::size_t k = dk(rng);
    std::vector<std::vector<Rational>> cols(k, std::vector<Rational>(k, Rational(0)));
    std::uniform_int_distribution<long> dskew(-2, 2);
    std::uniform_int_distribution<unsigned long> ddiag(2, 5);
    for (std::size_t i = 0; i < k; ++i) {
      cols[i][i] = Rational(ddiag(rng));
      for (std::size_t j = i + 1; j < k; ++j) cols[i][j] = Rational(dskew(rng), 2);
    }
    auto L = TorusLattice::general(cols);
    TorusPoint x(k), y(k);
    for (std::size_t i = 0; i < k; ++i) {
      x[i] = rand_rational(rng);
      y[i] = rand_rational(rng);
    }
    CHECK(torus_distance2(L, x, y) == naive_distance2(L, x, y));
  }
}

TEST_CASE("k > 4 general mode rejected") {
  std::vector<std::vector<Rational>> cols(5, std::vector<Rational>(5, Rational(0)));
  for (int i = 0; i < 5; ++i) cols[i][i] = 1;
  CHECK_THROWS_AS(TorusLattice::general(cols), std::invalid_argument);
}

TEST_CASE("translation_orbit examples") {
  // 1-torus as the unit circle
  auto circle = TorusLattice::rectangular({Rational(1)});
  auto orbit = translation_orbit(circle, {Rational(1, 3)}, {Rational(0)}, 2);
  REQUIRE(orbit.size() == 3);
  CHECK(orbit[1][0] == Rational(1, 3));
  CHECK(orbit[2][0] == Rational(2, 3));

  // (1,1) generates Z_3 x Z_5 by CRT: 15 distinct integer points
  auto L35 = TorusLattice::rectangular({Rational(3), Rational(5)});
  auto grid = translation_orbit(L35, {Rational(1), Rational(1)}, {Rational(0), Rational(0)}, 14);
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& p : grid)
    seen.insert({rational_to_string(p[0]), rational_to_string(p[1])});
  CHECK(seen.size() == 15);

  // degenerate v = 0
  CHECK(orbit_period(L35, {Rational(0), Rational(0)}, 10) == 1);
  CHECK(orbit_period(L35, {Rational(1), Rational(1)}, 20) == 15);
}

TEST_CASE("isometry identity dist(x_i, x_j) = dist(x_0, x_{|i-j|}) exactly") {
  std::mt19937_64 rng(456);
  auto L = TorusLattice::rectangular({Rational(3), Rational(5)});
  for (int trial = 0; trial < 20; ++trial) {
    TorusPoint v{rand_rational(rng), rand_rational(rng)};
    auto orbit = translation_orbit(L, v, {Rational(0), Rational(0)}, 12);
    for (std::size_t i = 0; i < orbit.size(); ++i)
      for (std::size_t j = 0; j < orbit.size(); ++j) {
        const std::size_t d = i > j ? i - j : j - i;
        CHECK(torus_distance2(L, orbit[i], orbit[j]) ==
              torus_distance2(L, orbit[0], orbit[d]));
      }
  }
}

TEST_CASE("many_gaps_construction spot values for primes (3,5)") {
  ManyGapsCertificate c = many_gaps_construction({3, 5});
  CHECK(c.N == 15);
  CHECK(c.inverses[0] == 2);  // inverse of 5 mod 3
  CHECK(c.inverses[1] == 2);  // inverse of 3 mod 5
  CHECK(c.a[0] == 10);
  CHECK(c.a[1] == 9);
  CHECK(c.delta[0] == +1);
  CHECK(c.delta[1] == -1);
  CHECK(c.s == Rational(1, 900));  // auto: 1/(2*2*15^2)
  CHECK(c.holds());
  CHECK(c.nnd_lower_bound == 2);
  CHECK(c.tie_count == 0);

  // s = 1/900 explicit: dist(x_9, x_0)^2 = 0.9802, dist(x_10, x_0)^2 = 1 - 1/45 + 1/4050
  ManyGapsCertificate c2 = many_gaps_construction({3, 5}, Rational(1, 900));
  CHECK(c2.dist2[1] == Rational(9802, 10000));
  CHECK(c2.dist2[0] == Rational(1) - Rational(1, 45) + Rational(1, 4050));
  CHECK(c2.dist2[0] < 1);
  CHECK(c2.dist2[1] < 1);
  CHECK(c2.dist2[0] != c2.dist2[1]);
}

TEST_CASE("many_gaps certificate cross-checked by exact brute force, primes (3,5) and (3,5,7)") {
  for (const std::vector<unsigned long>& primes :
       {std::vector<unsigned long>{3, 5}, std::vector<unsigned long>{3, 5, 7}}) {
    ManyGapsCertificate c = many_gaps_construction(primes);
    auto orbit = many_gaps_orbit(c);
    TorusLattice L = many_gaps_lattice(c);
    MetricOracle<Rational> m(
        orbit.size(),
        [&](std::size_t i, std::size_t j) { return torus_distance2(L, orbit[i], orbit[j]); },
        true, 0.0, true);
    auto spec = brute_force_spectrum(m);
    CHECK(spec.distinct_count() >= c.k);                 // |NND(X)| >= k
    CHECK(spec.distinct_count() <= corollary_ceiling(c.k));  // 3^k + 1
    // nearest neighbor of x_{a_j} is x_0 with the certified distance
    for (std::size_t j = 0; j < c.k; ++j) {
      const std::size_t aj = c.a[j].get_ui();
      CHECK(spec.nearest[aj] == 0);
      CHECK(spec.per_point[aj] == c.dist2[j]);
    }
  }
}

TEST_CASE("engines agree: int128 fast path vs generic mpq") {
  for (const auto& primes : {std::vector<unsigned long>{3, 5}, std::vector<unsigned long>{7, 11},
                             std::vector<unsigned long>{3, 5, 7}, std::vector<unsigned long>{23},
                             std::vector<unsigned long>{3, 5, 7, 11}}) {
    ManyGapsCertificate fast = many_gaps_construction(primes);
    ManyGapsCertificate slow = many_gaps_construction(primes, std::nullopt, true);
    CHECK(fast.engine == "int128");
    CHECK(slow.engine == "mpq");
    REQUIRE(fast.k == slow.k);
    for (std::size_t j = 0; j < fast.k; ++j) {
      CHECK(fast.dist2[j] == slow.dist2[j]);
      CHECK(fast.a[j] == slow.a[j]);
      CHECK(fast.delta[j] == slow.delta[j]);
    }
    CHECK(fast.holds());
    CHECK(slow.holds());
  }
}

TEST_CASE("many_gaps input validation and failure modes") {
  CHECK_THROWS_AS(many_gaps_construction({}), std::invalid_argument);
  CHECK_THROWS_AS(many_gaps_construction({3, 3}), std::invalid_argument);   // repeated
  CHECK_THROWS_AS(many_gaps_construction({2, 5}), std::invalid_argument);   // even
  CHECK_THROWS_AS(many_gaps_construction({9, 5}), std::invalid_argument);   // not prime
  CHECK_THROWS_AS(many_gaps_construction({3, 5}, Rational(1, 2)),
                  CertificateFailure);  // s too large
  try {
    many_gaps_construction({3, 5}, Rational(1, 2));
  } catch (const CertificateFailure& f) {
    CHECK(f.failing < 2);
    CHECK_FALSE(f.certificate.holds());
  }
}

TEST_CASE("monotone decrease of dist(x_{a_j}, x_0) in a_j within one certificate") {
  for (const auto& primes :
       {std::vector<unsigned long>{3, 5, 7}, std::vector<unsigned long>{5, 11, 13}}) {
    ManyGapsCertificate c = many_gaps_construction(primes);
    std::vector<std::pair<Integer, Rational>> pairs;
    for (std::size_t j = 0; j < c.k; ++j) pairs.push_back({c.a[j], c.dist2[j]});
    std::sort(pairs.begin(), pairs.end());
    for (std::size_t r = 0; r + 1 < pairs.size(); ++r) CHECK(pairs[r + 1].second < pairs[r].second);
  }
}

TEST_CASE("certificates hold for all odd-prime tuples with N <= 3000, fast == generic") {
  auto tuples = odd_prime_tuples_up_to(3000);
  CHECK(tuples.size() > 100);
  for (const auto& primes : tuples) {
    ManyGapsCertificate fast = many_gaps_construction(primes);
    CHECK(fast.holds());
    ManyGapsCertificate slow = many_gaps_construction(primes, std::nullopt, true);
    for (std::size_t j = 0; j < fast.k; ++j) CHECK(fast.dist2[j] == slow.dist2[j]);
  }
}

TEST_CASE("translation_orbit_spectrum equals all-pairs brute force") {
  std::mt19937_64 rng(31415);
  auto L = TorusLattice::rectangular({Rational(3), Rational(5)});
  for (int trial = 0; trial < 40; ++trial) {
    TorusPoint v{rand_rational(rng, 9, 2), rand_rational(rng, 9, 2)};
    const std::size_t n = 20;
    if (orbit_period(L, v, n) != 0) continue;  // keep the injective case here
    auto fast = translation_orbit_spectrum(L, v, n);
    auto orbit = translation_orbit(L, v, TorusPoint{Rational(0), Rational(0)}, n);
    MetricOracle<Rational> m(
        orbit.size(),
        [&](std::size_t i, std::size_t j) { return torus_distance2(L, orbit[i], orbit[j]); },
        true, 0.0, true);
    auto ref = brute_force_spectrum(m);
    REQUIRE(fast.per_point == ref.per_point);
    REQUIRE(fast.distinct_count() == ref.distinct_count());
  }
  // periodic case: v = (1,1), n beyond the period -> single homogeneous class
  auto spec = translation_orbit_spectrum(L, {Rational(1), Rational(1)}, 40);
  CHECK(spec.distinct_count() == 1);
  CHECK(spec.size() == 15);
  CHECK_THROWS_AS(translation_orbit_spectrum(L, {Rational(0), Rational(0)}, 5),
                  std::invalid_argument);
}
