// gapscope - experiment runner for nearest-neighbor-distance spectra on
// circles, flat quotients, model spaces and implicit surfaces.
//
// Exit codes: 0 = all asserted bounds hold, 1 = a bound failed (the
// counterexample is serialized), 2 = usage / config schema error.
#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <thread>

#include "gapscope/circle.hpp"
#include "gapscope/geodesic.hpp"
#include "gapscope/io.hpp"
#include "gapscope/klein.hpp"
#include "gapscope/metric.hpp"
#include "gapscope/model_spaces.hpp"
#include "gapscope/packing.hpp"
#include "gapscope/surfaces.hpp"
#include "gapscope/torus.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gapscope;

namespace {

struct GlobalOpts {
  std::uint64_t seed = 20240701;
  unsigned threads = 2;
  std::string out_dir = ".";
  std::string format = "csv";
};

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void write_file(const GlobalOpts& g, const std::string& name, const std::string& body) {
  fs::create_directories(g.out_dir);
  std::ofstream os(fs::path(g.out_dir) / name, std::ios::binary);
  os << body;
}

void echo_config(const GlobalOpts& g, const std::string& sub, json cfg) {
  cfg["seed"] = g.seed;
  cfg["threads"] = g.threads;
  cfg["format"] = g.format;
  write_file(g, sub + ".config.json", cfg.dump(2) + "\n");
}

// results slots are preallocated; fn(i) fills slot i, output order is fixed
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

void require_keys(const json& j, const std::vector<std::string>& allowed,
                  const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw CLI::ValidationError(where + ": unknown key '" + it.key() + "'");
  }
}

// ---------------------------------------------------------------------------
// three-gap

int run_three_gap(const GlobalOpts& g, const std::string& p_text, long n_single,
                  const std::string& offset_text, const std::string& metric,
                  const std::string& sweep, std::size_t count) {
  json cfg{{"subcommand", "three-gap"}, {"p", p_text},       {"n", n_single},
           {"offset", offset_text},     {"metric", metric},  {"sweep", sweep},
           {"count", count}};
  echo_config(g, "three-gap", cfg);

  std::string csv = "p,n,gap_count,nnd_count,gaps,nnd_values\n";
  bool ok = true;
  json counterexample;

  auto run_one = [&](const Rational& p, std::size_t n, const Rational& off, std::string* row) {
    ExactCircleOrbit orbit = rotation_orbit(p, n, off);
    std::string line = rational_to_string(p) + "," + std::to_string(n);
    try {
      auto gaps = circular_gap_spectrum(orbit);
      auto spec = geometric_nnd_spectrum(orbit);
      line += "," + std::to_string(gaps.size()) + "," + std::to_string(spec.distinct_count());
      std::string gap_list, nnd_list;
      for (const auto& q : gaps) gap_list += (gap_list.empty() ? "" : ";") + rational_to_string(q);
      for (const auto& c : spec.classes)
        nnd_list += (nnd_list.empty() ? "" : ";") + rational_to_string(c.value);
      line += "," + gap_list + "," + nnd_list;
      if (metric == "chord") {
        auto chord = geometric_nnd_spectrum_chord(orbit);
        line += "," + std::to_string(chord.distinct_count());
      }
    } catch (const ThreeGapViolation& v) {
      ok = false;
      counterexample = {{"p", rational_to_string(p)},
                        {"n", n},
                        {"offset", rational_to_string(off)},
                        {"error", v.what()}};
      line += ",VIOLATION,VIOLATION,,";
    }
    *row = line + "\n";
  };

  if (!sweep.empty()) {
    unsigned long denom_max = 0, n_max = 0;
    if (std::sscanf(sweep.c_str(), "%lu,%lu", &denom_max, &n_max) != 2 || denom_max < 2 ||
        n_max < 1)
      throw CLI::ValidationError("--sweep expects denom_max,n_max");
    // draw the instance list sequentially (thread-count independent)
    std::vector<std::pair<Rational, std::size_t>> instances(count);
    std::mt19937_64 rng(g.seed);
    std::uniform_int_distribution<unsigned long> dden(2, denom_max);
    std::uniform_int_distribution<std::size_t> dn(1, n_max);
    for (auto& inst : instances) {
      const unsigned long den = dden(rng);
      std::uniform_int_distribution<unsigned long> dnum(1, den - 1);
      Rational p(dnum(rng), den);
      p.canonicalize();
      inst = {p, dn(rng)};
    }
    std::vector<std::string> rows(count);
    parallel_for(count, g.threads, [&](std::size_t i) {
      run_one(instances[i].first, instances[i].second, Rational(0), &rows[i]);
    });
    for (const auto& r : rows) csv += r;
  } else {
    std::string row;
    run_one(parse_rational(p_text), static_cast<std::size_t>(n_single),
            parse_rational(offset_text), &row);
    csv += row;
  }

  write_file(g, "three_gap.csv", csv);
  if (!ok) {
    write_file(g, "three_gap.counterexample.json", counterexample.dump(2) + "\n");
    std::cout << "[FAIL] three-gap: bound exceeded; counterexample in three_gap.counterexample.json\n";
    return 1;
  }
  std::cout << "[PASS] three-gap: all gap counts <= 3 and |NND| <= 3\n";
  return 0;
}

// ---------------------------------------------------------------------------
// torus-gaps

json certificate_json(const ManyGapsCertificate& c) {
  json j;
  j["primes"] = c.primes;
  j["k"] = c.k;
  j["N"] = c.N.get_str();
  j["s"] = rational_to_string(c.s);
  j["s_auto"] = c.s_was_auto;
  j["engine"] = c.engine;
  json arr = json::array(), inv = json::array(), del = json::array(), d2 = json::array();
  for (std::size_t i = 0; i < c.k; ++i) {
    arr.push_back(c.a[i].get_str());
    inv.push_back(c.inverses[i].get_str());
    del.push_back(c.delta[i]);
    d2.push_back(rational_to_string(c.dist2[i]));
  }
  j["a"] = arr;
  j["pi"] = inv;
  j["delta"] = del;
  j["dist2"] = d2;
  j["nn_is_x0"] = c.nn_is_x0;
  j["formula_match"] = c.formula_match;
  j["distances_distinct"] = c.distances_distinct;
  j["monotone_decreasing"] = c.monotone_decreasing;
  j["points_distinct"] = c.points_distinct;
  j["tie_count"] = c.tie_count;
  j["nnd_lower_bound"] = c.nnd_lower_bound;
  j["holds"] = c.holds();
  return j;
}

int run_torus_gaps(const GlobalOpts& g, const std::string& primes_text, const std::string& s_text,
                   bool emit_orbit, unsigned long sweep_bound) {
  json cfg{{"subcommand", "torus-gaps"},
           {"primes", primes_text},
           {"s", s_text},
           {"emit_orbit", emit_orbit},
           {"sweep", sweep_bound}};
  echo_config(g, "torus-gaps", cfg);

  if (sweep_bound > 0) {
    auto tuples = odd_prime_tuples_up_to(sweep_bound);
    std::vector<std::string> rows(tuples.size());
    std::atomic<bool> all_ok{true};
    parallel_for(tuples.size(), g.threads, [&](std::size_t i) {
      std::string primes_str;
      for (std::size_t j = 0; j < tuples[i].size(); ++j)
        primes_str += (j ? ";" : "") + std::to_string(tuples[i][j]);
      try {
        ManyGapsCertificate c = many_gaps_construction(tuples[i]);
        rows[i] = primes_str + "," + c.N.get_str() + "," + std::to_string(c.k) + "," + c.engine +
                  ",ok\n";
      } catch (const CertificateFailure& f) {
        all_ok = false;
        rows[i] = primes_str + ",,,," + std::string("FAIL: ") + f.what() + "\n";
      }
    });
    std::string csv = "primes,N,k,engine,status\n";
    for (const auto& r : rows) csv += r;
    write_file(g, "torus_gaps.csv", csv);
    if (!all_ok) {
      std::cout << "[FAIL] torus-gaps sweep: some certificate failed\n";
      return 1;
    }
    std::cout << "[PASS] torus-gaps: certificates hold for all " << tuples.size()
              << " odd-prime tuples with N <= " << sweep_bound << "\n";
    return 0;
  }

  std::vector<unsigned long> primes;
  {
    std::stringstream ss(primes_text);
    std::string item;
    while (std::getline(ss, item, ',')) primes.push_back(std::stoul(item));
  }
  std::optional<Rational> s;
  if (s_text != "auto") s = parse_rational(s_text);

  try {
    ManyGapsCertificate cert = many_gaps_construction(primes, s);
    write_file(g, "torus_gaps.json", certificate_json(cert).dump(2) + "\n");
    if (emit_orbit) {
      auto orbit = many_gaps_orbit(cert);
      std::ostringstream os;
      write_point_set(os, orbit);
      write_file(g, "torus_gaps.orbit.txt", os.str());
    }
    std::cout << "[PASS] torus-gaps: certificate holds, |NND(X)| >= " << cert.nnd_lower_bound
              << " (engine " << cert.engine << ")\n";
    return 0;
  } catch (const CertificateFailure& f) {
    json j = certificate_json(f.certificate);
    j["failure"] = f.what();
    j["failing_j"] = f.failing;
    write_file(g, "torus_gaps.json", j.dump(2) + "\n");
    std::cout << "[FAIL] torus-gaps: " << f.what() << "\n";
    return 1;
  }
}

// ---------------------------------------------------------------------------
// klein

int run_klein(const GlobalOpts& g, const std::string& slope, const std::string& length_text,
              const std::string& w_text, const std::string& h_text, const std::string& start_text) {
  json cfg{{"subcommand", "klein"}, {"slope", slope},   {"length", length_text},
           {"w", w_text},           {"h", h_text},      {"start", start_text}};
  echo_config(g, "klein", cfg);

  long p = 0, q = 1;
  if (std::sscanf(slope.c_str(), "%ld/%ld", &p, &q) != 2) {
    if (std::sscanf(slope.c_str(), "%ld", &p) == 1)
      q = 1;
    else
      throw CLI::ValidationError("--slope expects P/Q");
  }
  // slope dy/dx = p/q -> direction (q, p); q = 0 means vertical
  KleinQuotient K(parse_rational(w_text), parse_rational(h_text));
  auto start_list = parse_rational_list(start_text);
  if (start_list.size() != 2) throw CLI::ValidationError("--start expects x,y");
  PlanePoint start{start_list[0], start_list[1]};

  auto report = klein_geodesic_intersections(K, start, q, p, parse_rational(length_text));

  std::string csv = "t1,t2,s,t,alpha,m,n,loc_x,loc_y\n";
  for (const auto& rec : report.records) {
    csv += rational_to_string(rec.t1) + "," + rational_to_string(rec.t2) + "," +
           format_double(rec.s) + "," + format_double(rec.t) + "," + format_double(rec.alpha) +
           "," + std::to_string(rec.m) + "," + std::to_string(rec.n) + "," +
           rational_to_string(rec.location[0]) + "," + rational_to_string(rec.location[1]) + "\n";
  }
  write_file(g, "klein.csv", csv);

  json j{{"total", report.total},
         {"distinct_locations", report.locations.size()},
         {"overlap", report.overlap}};
  j["multiplicities"] = report.multiplicities;
  write_file(g, "klein.json", j.dump(2) + "\n");
  std::cout << "[PASS] klein: " << report.total << " transverse self-intersections ("
            << report.locations.size() << " locations)"
            << (report.overlap ? ", overlap detected" : "") << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// orbit-nnd

SpacePtr parse_space(const std::string& text) {
  auto parse_factor = [](const std::string& f) -> SpacePtr {
    if (f == "s2") return std::make_shared<SphereSpace>(2);
    if (f.rfind("s", 0) == 0 && f.size() > 1 && std::isdigit(static_cast<unsigned char>(f[1])))
      return std::make_shared<SphereSpace>(std::stoul(f.substr(1)));
    if (f == "rp2") return std::make_shared<ProjectiveSpace>(2);
    if (f.rfind("rp", 0) == 0) return std::make_shared<ProjectiveSpace>(std::stoul(f.substr(2)));
    if (f.rfind("e", 0) == 0 && f.size() > 1 && std::isdigit(static_cast<unsigned char>(f[1])))
      return std::make_shared<EuclideanSpace>(std::stoul(f.substr(1)));
    if (f.rfind("h", 0) == 0) {
      const auto colon = f.find(':');
      const std::size_t k = std::stoul(f.substr(1, colon - 1));
      const double kappa = colon == std::string::npos ? -1.0 : std::stod(f.substr(colon + 1));
      return std::make_shared<HyperbolicSpace>(k, kappa);
    }
    if (f.rfind("torus:", 0) == 0) return std::make_shared<TorusSpace>(parse_rational_list(f.substr(6)));
    throw CLI::ValidationError("unknown space: " + f);
  };
  if (text.rfind("product:", 0) == 0) {
    std::vector<SpacePtr> factors;
    std::stringstream ss(text.substr(8));
    std::string item;
    while (std::getline(ss, item, '+')) factors.push_back(parse_factor(item));
    if (factors.size() < 2)
      throw CLI::ValidationError("product spaces use product:f1+f2 (e.g. product:s2+s2)");
    return std::make_shared<ProductSpace>(std::move(factors));
  }
  return parse_factor(text);
}

// random transvection-style isometry + base point for a single space
std::pair<IsometryPtr, Vector> random_orbit_config(const ModelSpace& S, std::mt19937_64& rng,
                                                   double T, double ratio) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto unit = [&](std::size_t d) {
    Vector v(d);
    do {
      for (auto i = 0; i < v.size(); ++i) v[i] = gauss(rng);
    } while (v.norm() < 1e-6);
    v.normalize();
    return v;
  };

  if (dynamic_cast<const SphereSpace*>(&S) || dynamic_cast<const ProjectiveSpace*>(&S)) {
    Vector p = unit(S.ambient_dim());
    Vector u = unit(S.ambient_dim());
    u -= u.dot(p) * p;
    u.normalize();
    return {transvection(S, p, u, T), p};
  }
  if (dynamic_cast<const EuclideanSpace*>(&S)) {
    Vector p = Vector::Zero(S.ambient_dim());
    Vector u = unit(S.ambient_dim());
    return {transvection(S, p, u, T), p};
  }
  if (const auto* H = dynamic_cast<const HyperbolicSpace*>(&S)) {
    Vector p = H->base_point();
    Vector u(S.ambient_dim());
    for (auto i = 0; i < u.size(); ++i) u[i] = gauss(rng);
    const double coef = HyperbolicSpace::minkowski(u, p) * H->kappa();
    u -= coef * p;
    u /= std::sqrt(HyperbolicSpace::minkowski(u, u));
    return {transvection(S, p, u, T), p};
  }
  if (const auto* prod = dynamic_cast<const ProductSpace*>(&S)) {
    const auto& fs = prod->factors();
    if (fs.size() != 2)
      throw CLI::ValidationError("orbit-nnd products support exactly two factors");
    const double c1 = ratio, c2 = std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
    auto [i1, p1] = random_orbit_config(*fs[0], rng, c1 * T, 0.5);
    auto [i2, p2] = random_orbit_config(*fs[1], rng, c2 * T, 0.5);
    std::vector<IsometryPtr> parts{i1, i2};
    return {std::make_shared<ProductIsometry>(*prod, std::move(parts)),
            prod->assemble({p1, p2})};
  }
  throw CLI::ValidationError("random orbit config unsupported for " + S.name());
}

int run_orbit_nnd(const GlobalOpts& g, const std::string& space_text, double T,
                  const std::string& step_text, long n, const std::string& sweep_file,
                  double ratio, double tau) {
  json cfg{{"subcommand", "orbit-nnd"}, {"space", space_text}, {"T", T},
           {"step", step_text},         {"n", n},              {"sweep", sweep_file},
           {"ratio", ratio},            {"tau", tau}};
  echo_config(g, "orbit-nnd", cfg);

  struct Row {
    std::size_t config_id;
    std::size_t n;
    std::size_t nnd_count;
    double min_class, max_class;
    bool violation = false;
  };
  std::vector<Row> rows;
  bool ok = true;
  json counterexample;

  auto spectrum_for_torus = [&](const std::string& space, const std::string& step, std::size_t nn,
                                std::size_t id) {
    auto sides = parse_rational_list(space.substr(6));
    TorusLattice L = TorusLattice::rectangular(sides);
    TorusPoint v = parse_rational_list(step);
    auto spec = translation_orbit_spectrum(L, v, nn);
    const std::size_t k = L.dim();
    const std::size_t ceiling = euclidean_packing_bound(static_cast<unsigned>(k)) + 1;
    Row row{id, nn, spec.distinct_count(), std::sqrt(to_double(spec.classes.front().value)),
            std::sqrt(to_double(spec.classes.back().value))};
    if (spec.distinct_count() > ceiling) {
      row.violation = true;
      ok = false;
      counterexample = {{"space", space}, {"step", step}, {"n", nn},
                        {"nnd_count", spec.distinct_count()}, {"ceiling", ceiling}};
    }
    rows.push_back(row);
  };

  if (!sweep_file.empty()) {
    std::ifstream is(sweep_file);
    if (!is) throw CLI::ValidationError("cannot open sweep file " + sweep_file);
    json sweep;
    try {
      sweep = json::parse(is);
    } catch (const json::parse_error& e) {
      throw CLI::ValidationError(std::string("sweep file: ") + e.what());
    }
    require_keys(sweep, {"space", "count", "n_max", "T_max", "tau", "denom_max", "ratio"},
                 "sweep config");
    const std::string space_name = sweep.value("space", space_text);
    const std::size_t count = sweep.value("count", 100);
    const std::size_t n_max = sweep.value("n_max", 500);
    const double T_max = sweep.value("T_max", 3.0);
    const double tau_s = sweep.value("tau", tau);
    const unsigned long denom_max = sweep.value("denom_max", 50);

    std::mt19937_64 rng(g.seed);
    if (space_name.rfind("torus:", 0) == 0) {
      auto sides = parse_rational_list(space_name.substr(6));
      for (std::size_t c = 0; c < count; ++c) {
        std::uniform_int_distribution<unsigned long> dden(1, denom_max);
        std::uniform_int_distribution<std::size_t> dn(2, n_max);
        std::string step;
        for (std::size_t d = 0; d < sides.size(); ++d) {
          const unsigned long den = dden(rng);
          std::uniform_int_distribution<unsigned long> dnum(0, 3 * den);
          step += (d ? "," : "") + std::to_string(dnum(rng)) + "/" + std::to_string(den);
        }
        spectrum_for_torus(space_name, step, dn(rng), c);
      }
    } else {
      SpacePtr S = parse_space(space_name);
      const std::size_t ceiling =
          S->nonneg_curved()
              ? euclidean_packing_bound(static_cast<unsigned>(S->manifold_dim())) + 1
              : 0;
      std::uniform_real_distribution<double> dT(0.01, T_max);
      std::uniform_int_distribution<std::size_t> dn(2, n_max);
      std::uniform_real_distribution<double> dratio(0.1, 0.9);
      for (std::size_t c = 0; c < count; ++c) {
        const double Tc = dT(rng);
        const std::size_t nc = dn(rng);
        const double rc = dratio(rng);
        auto [iso, p0] = random_orbit_config(*S, rng, Tc, rc);
        auto res = isometry_orbit_spectrum(*S, *iso, p0, nc, tau_s);
        if (res.degenerate) continue;
        Row row{c, nc, res.spectrum.distinct_count(), res.spectrum.classes.front().value,
                res.spectrum.classes.back().value};
        if (ceiling && res.spectrum.distinct_count() > ceiling) {
          row.violation = true;
          ok = false;
          counterexample = {{"space", space_name}, {"T", Tc}, {"n", nc},
                            {"nnd_count", res.spectrum.distinct_count()}, {"ceiling", ceiling}};
        }
        rows.push_back(row);
      }
    }
  } else if (space_text.rfind("torus:", 0) == 0) {
    if (step_text.empty()) throw CLI::ValidationError("torus spaces need --step v1,v2,...");
    spectrum_for_torus(space_text, step_text, static_cast<std::size_t>(n), 0);
  } else {
    SpacePtr S = parse_space(space_text);
    std::mt19937_64 rng(g.seed);
    auto [iso, p0] = random_orbit_config(*S, rng, T, ratio);
    auto res = isometry_orbit_spectrum(*S, *iso, p0, static_cast<std::size_t>(n), tau);
    if (res.degenerate) {
      std::cout << "[WARN] orbit-nnd: degenerate orbit (fixed point)\n";
      write_file(g, "orbit_nnd.csv", "config_id,n,nnd_count,max_class,min_class\n");
      return 0;
    }
    const std::size_t ceiling =
        S->nonneg_curved() ? euclidean_packing_bound(static_cast<unsigned>(S->manifold_dim())) + 1
                           : 0;
    Row row{0, static_cast<std::size_t>(n), res.spectrum.distinct_count(),
            res.spectrum.classes.front().value, res.spectrum.classes.back().value};
    if (ceiling && res.spectrum.distinct_count() > ceiling) {
      row.violation = true;
      ok = false;
      counterexample = {{"space", space_text}, {"T", T}, {"n", n},
                        {"nnd_count", res.spectrum.distinct_count()}, {"ceiling", ceiling}};
    }
    rows.push_back(row);
  }

  std::string csv = "config_id,n,nnd_count,max_class,min_class\n";
  std::size_t max_count = 0;
  for (const auto& r : rows) {
    csv += std::to_string(r.config_id) + "," + std::to_string(r.n) + "," +
           std::to_string(r.nnd_count) + "," + format_double(r.max_class) + "," +
           format_double(r.min_class) + "\n";
    max_count = std::max(max_count, r.nnd_count);
  }
  write_file(g, "orbit_nnd.csv", csv);
  if (!ok) {
    write_file(g, "orbit_nnd.counterexample.json", counterexample.dump(2) + "\n");
    std::cout << "[FAIL] orbit-nnd: ceiling exceeded; see orbit_nnd.counterexample.json\n";
    return 1;
  }
  std::cout << "[PASS] orbit-nnd: max |NND| = " << max_count << " over " << rows.size()
            << " configs\n";
  return 0;
}

// ---------------------------------------------------------------------------
// packing

int run_packing(const GlobalOpts& g, const std::string& space_text, double r, std::size_t trials,
                const std::string& radii_text) {
  json cfg{{"subcommand", "packing"},
           {"space", space_text},
           {"r", r},
           {"trials", trials},
           {"radii", radii_text}};
  echo_config(g, "packing", cfg);

  if (!radii_text.empty()) {
    // hyperbolic monotonicity scan
    if (space_text.rfind("h", 0) != 0)
      throw CLI::ValidationError("--radii scans are for hyperbolic spaces (h2:-1 etc.)");
    auto S = parse_space(space_text);
    const auto* H = dynamic_cast<const HyperbolicSpace*>(S.get());
    std::vector<double> radii;
    {
      std::stringstream ss(radii_text);
      std::string item;
      while (std::getline(ss, item, ',')) radii.push_back(std::stod(item));
    }
    auto scan = hyperbolic_monotonicity_scan(H->manifold_dim(), H->kappa(), radii, trials, g.seed);
    std::string csv = "radius,count\n";
    bool monotone = true;
    for (std::size_t i = 0; i < scan.radii.size(); ++i) {
      csv += format_double(scan.radii[i]) + "," + std::to_string(scan.counts[i]) + "\n";
      if (i > 0 && scan.counts[i] < scan.counts[i - 1]) monotone = false;
    }
    write_file(g, "packing.csv", csv);
    if (!monotone) {
      std::cout << "[FAIL] packing: hyperbolic counts decreased\n";
      return 1;
    }
    std::cout << "[PASS] packing: nondecreasing counts over " << scan.radii.size() << " radii\n";
    return 0;
  }

  SpacePtr S = parse_space(space_text);
  Vector center;
  if (const auto* H = dynamic_cast<const HyperbolicSpace*>(S.get())) {
    center = H->base_point();
  } else if (dynamic_cast<const SphereSpace*>(S.get()) ||
             dynamic_cast<const ProjectiveSpace*>(S.get())) {
    center = Vector::Zero(S->ambient_dim());
    center[0] = 1.0;
  } else {
    center = Vector::Zero(S->ambient_dim());
  }

  PackingResult res = greedy_packing(*S, center, r, trials, g.seed);
  json j{{"space", res.space},
         {"r", res.radius},
         {"count", res.count()},
         {"trials", res.trials},
         {"seed", res.seed},
         {"min_pairwise", res.min_pairwise},
         {"max_center_dist", res.max_center_dist},
         {"boundary_pairs", res.boundary_pairs}};
  json pts = json::array();
  for (const auto& p : res.points) {
    json pt = json::array();
    for (auto i = 0; i < p.size(); ++i) pt.push_back(p[i]);
    pts.push_back(pt);
  }
  j["points"] = pts;
  write_file(g, "packing.json", j.dump(2) + "\n");

  if (S->nonneg_curved()) {
    const unsigned long ceiling =
        euclidean_packing_bound(static_cast<unsigned>(S->manifold_dim()));
    if (res.count() > ceiling) {
      std::cout << "[FAIL] packing: count " << res.count() << " exceeds 3^k = " << ceiling << "\n";
      return 1;
    }
  }
  std::cout << "[PASS] packing: certified count " << res.count() << " in " << space_text
            << " at r=" << r << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// geo-scan

int run_geo_scan(const GlobalOpts& g, const std::string& surface_text,
                 const std::string& config_file, double T, long n_single, double h, double tau) {
  json cfg{{"subcommand", "geo-scan"}, {"surface", surface_text}, {"config", config_file},
           {"T", T},                   {"n", n_single},           {"h", h},
           {"tau", tau}};
  echo_config(g, "geo-scan", cfg);

  SurfacePtr S = make_surface(surface_text);
  std::vector<BgcGeodesicConfig> configs;
  double h_used = h, tau_used = tau;

  if (!config_file.empty()) {
    std::ifstream is(config_file);
    if (!is) throw CLI::ValidationError("cannot open config " + config_file);
    json jc;
    try {
      jc = json::parse(is);
    } catch (const json::parse_error& e) {
      throw CLI::ValidationError(std::string("scan config: ") + e.what());
    }
    require_keys(jc, {"configs", "h", "tau"}, "scan config");
    h_used = jc.value("h", h);
    tau_used = jc.value("tau", tau);
    if (!jc.contains("configs") || !jc["configs"].is_array())
      throw CLI::ValidationError("scan config: 'configs' array required");
    for (const auto& item : jc["configs"]) {
      require_keys(item, {"x0", "v0", "T", "n"}, "scan config entry");
      BgcGeodesicConfig c;
      auto x0 = item.at("x0"), v0 = item.at("v0");
      if (!x0.is_array() || x0.size() != 3 || !v0.is_array() || v0.size() != 3)
        throw CLI::ValidationError("scan config: x0/v0 must be 3-vectors");
      c.x0 = Vec3(x0[0].get<double>(), x0[1].get<double>(), x0[2].get<double>());
      c.v0 = Vec3(v0[0].get<double>(), v0[1].get<double>(), v0[2].get<double>());
      c.T = item.at("T").get<double>();
      if (item.at("n").is_array())
        for (const auto& nn : item.at("n")) c.n_values.push_back(nn.get<std::size_t>());
      else
        c.n_values.push_back(item.at("n").get<std::size_t>());
      configs.push_back(std::move(c));
    }
  } else {
    BgcGeodesicConfig c;
    c.x0 = Vec3(1.01, 0.1, 0.2);
    c.v0 = Vec3(0.1, 1.0, 0.35);
    c.T = T;
    c.n_values.push_back(static_cast<std::size_t>(n_single));
    configs.push_back(std::move(c));
  }

  auto rows = bgc_scan(S, configs, h_used, tau_used);
  std::string csv = "config_id,T,n,nnd_count,refined_pairs,warnings\n";
  std::size_t max_count = 0, warn = 0;
  for (const auto& r : rows) {
    csv += std::to_string(r.config_id) + "," + format_double(r.T) + "," + std::to_string(r.n) +
           "," + std::to_string(r.nnd_count) + "," + std::to_string(r.refined_pairs) + "," +
           std::to_string(r.warnings) + "\n";
    max_count = std::max(max_count, r.nnd_count);
    warn += r.warnings;
  }
  write_file(g, "geo_scan.csv", csv);
  std::cout << "[PASS] geo-scan: max |NND| = " << max_count << " over " << rows.size()
            << " rows (" << warn << " refinement warnings)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// derivative-check

int run_derivative_check(const GlobalOpts& g, bool klein, const std::string& slope,
                         const std::string& length_text, const std::string& w_text,
                         const std::string& h_text, const std::string& start_text,
                         const std::string& surface_text, double length_d, double tol) {
  json cfg{{"subcommand", "derivative-check"}, {"klein", klein},       {"slope", slope},
           {"length", length_text},            {"surface", surface_text}, {"tol", tol}};
  echo_config(g, "derivative-check", cfg);

  std::string csv = "s,t,alpha,d1_fd,d1,d2_fd,d2,d3_fd,d3,max_rel_err\n";
  double worst = 0;
  std::size_t checked = 0;

  auto add_row = [&](const FdTriple& f, double s, double t, double alpha) {
    csv += format_double(s) + "," + format_double(t) + "," + format_double(alpha);
    for (int i = 0; i < 3; ++i)
      csv += "," + format_double(f.fd[i]) + "," + format_double(f.analytic[i]);
    csv += "," + format_double(f.max_rel_err) + "\n";
    worst = std::max(worst, f.max_rel_err);
    ++checked;
  };

  if (klein) {
    long p = 0, q = 1;
    if (std::sscanf(slope.c_str(), "%ld/%ld", &p, &q) != 2)
      throw CLI::ValidationError("--slope expects P/Q");
    KleinQuotient K(parse_rational(w_text), parse_rational(h_text));
    auto start_list = parse_rational_list(start_text);
    PlanePoint start{start_list.at(0), start_list.at(1)};
    auto report = klein_geodesic_intersections(K, start, q, p, parse_rational(length_text));
    for (const auto& rec : report.records) {
      FdTriple f = derivative_triple_fd_klein(K, start, q, p, rec);
      add_row(f, rec.s, rec.t, rec.alpha);
    }
  } else {
    SurfacePtr S = make_surface(surface_text);
    Vec3 x0(1.01, 0.1, 0.2), v0(0.15, 1.0, 0.4);
    GeodesicTrajectory traj = integrate_geodesic(S, x0, v0, length_d, 1e-3);
    auto report = count_self_intersections(traj, 1e-2);
    for (const auto& rec : report.records) {
      if (rec.s < 0.5 || rec.t > traj.length() - 0.5) continue;  // room for FD offsets
      FdTriple f = derivative_triple_fd(traj, rec);
      add_row(f, rec.s, rec.t, rec.angle);
    }
  }

  write_file(g, "derivative_check.csv", csv);
  if (checked == 0) {
    std::cout << "[WARN] derivative-check: no certified intersections found\n";
    return 0;
  }
  if (worst > tol) {
    std::cout << "[FAIL] derivative-check: max relative error " << worst << " > " << tol << "\n";
    return 1;
  }
  std::cout << "[PASS] derivative-check: " << checked << " triples, max relative error " << worst
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// conjugate

int run_conjugate(const GlobalOpts& g, const std::string& surface_text, const std::string& x0_text,
                  const std::string& v0_text, double length, double h) {
  json cfg{{"subcommand", "conjugate"}, {"surface", surface_text}, {"x0", x0_text},
           {"v0", v0_text},             {"length", length},        {"h", h}};
  echo_config(g, "conjugate", cfg);

  auto parse_vec3 = [](const std::string& text) {
    auto v = parse_rational_list(text);
    if (v.size() != 3) throw CLI::ValidationError("expected x,y,z");
    return Vec3(to_double(v[0]), to_double(v[1]), to_double(v[2]));
  };
  SurfacePtr S = make_surface(surface_text);
  GeodesicTrajectory traj = integrate_geodesic(S, parse_vec3(x0_text), parse_vec3(v0_text),
                                               length, h);
  auto zeros = conjugate_points(traj, length);
  std::string csv = "index,conjugate_time\n";
  for (std::size_t i = 0; i < zeros.size(); ++i)
    csv += std::to_string(i) + "," + format_double(zeros[i]) + "\n";
  write_file(g, "conjugate.csv", csv);
  std::cout << "[PASS] conjugate: " << zeros.size() << " conjugate times along length " << length
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gapscope: nearest-neighbor-distance spectra of isometry orbits and geodesics"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "master RNG seed");
  app.add_option("--threads", g.threads, "worker threads");
  app.add_option("--out", g.out_dir, "output directory");
  app.add_option("--format", g.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));

  // three-gap
  auto* tg = app.add_subcommand("three-gap", "Three Gap Theorem on circle rotation orbits");
  std::string tg_p = "1/3", tg_offset = "0", tg_metric = "arc", tg_sweep;
  long tg_n = 10;
  std::size_t tg_count = 10000;
  tg->add_option("--p", tg_p, "rotation amount (rational)");
  tg->add_option("--n", tg_n, "orbit length (points 0..n)");
  tg->add_option("--offset", tg_offset, "basepoint offset");
  tg->add_option("--metric", tg_metric)->check(CLI::IsMember({"arc", "chord"}));
  tg->add_option("--sweep", tg_sweep, "denom_max,n_max random sweep");
  tg->add_option("--count", tg_count, "sweep instance count");

  // torus-gaps
  auto* tog = app.add_subcommand("torus-gaps", "prime-sided torus many-gaps certificate");
  std::string tog_primes = "3,5", tog_s = "auto";
  bool tog_emit = false;
  unsigned long tog_sweep = 0;
  tog->add_option("--primes", tog_primes, "comma-separated distinct odd primes");
  tog->add_option("--s", tog_s, "perturbation (rational) or 'auto'");
  tog->add_flag("--emit-orbit", tog_emit, "write the exact orbit point set");
  tog->add_option("--sweep", tog_sweep, "verify all odd-prime tuples with N <= bound");

  // klein
  auto* kl = app.add_subcommand("klein", "flat Klein bottle geodesic self-intersections");
  std::string kl_slope = "1/2", kl_length = "10", kl_w = "1", kl_h = "1", kl_start = "1/7,1/11";
  kl->add_option("--slope", kl_slope, "direction slope P/Q");
  kl->add_option("--length", kl_length, "arc length (rational)");
  kl->add_option("--w", kl_w, "glide width");
  kl->add_option("--h", kl_h, "translation height");
  kl->add_option("--start", kl_start, "start point x,y");

  // orbit-nnd
  auto* on = app.add_subcommand("orbit-nnd", "isometry orbit NND experiments");
  std::string on_space = "s2", on_step, on_sweep;
  double on_T = 0.7, on_ratio = 0.6, on_tau = 1e-9;
  long on_n = 100;
  on->add_option("--space", on_space, "s2|rp2|e2|h2:-1|torus:3,5|product:s2+s2");
  on->add_option("--T", on_T, "transvection step");
  on->add_option("--step", on_step, "torus translation vector (rationals)");
  on->add_option("--n", on_n, "orbit length");
  on->add_option("--sweep", on_sweep, "JSON sweep config file");
  on->add_option("--ratio", on_ratio, "product mixed-speed ratio c1");
  on->add_option("--tau", on_tau, "clustering tolerance");

  // packing
  auto* pk = app.add_subcommand("packing", "greedy packing lower bounds P(M, r)");
  std::string pk_space = "e2", pk_radii;
  double pk_r = 1.0;
  std::size_t pk_trials = 200;
  pk->add_option("--space", pk_space, "e1|e2|s2|h2:-1 ...");
  pk->add_option("--r", pk_r, "packing radius");
  pk->add_option("--trials", pk_trials, "greedy restarts");
  pk->add_option("--radii", pk_radii, "hyperbolic monotonicity scan radii");

  // geo-scan
  auto* gs = app.add_subcommand("geo-scan", "bounded geodesic combinatorics scan");
  std::string gs_surface = "sphere", gs_config;
  double gs_T = 0.5, gs_h = 1e-3, gs_tau = 1e-7;
  long gs_n = 100;
  gs->add_option("--surface", gs_surface, "sphere|ellipsoid:a,b,c|torus-rev:R,r");
  gs->add_option("--config", gs_config, "JSON scan config");
  gs->add_option("--T", gs_T, "sample spacing");
  gs->add_option("--n", gs_n, "sample count");
  gs->add_option("--h", gs_h, "integrator step");
  gs->add_option("--tau", gs_tau, "clustering tolerance");

  // derivative-check
  auto* dc = app.add_subcommand("derivative-check", "FD vs analytic second-derivative triple");
  bool dc_klein = false;
  std::string dc_slope = "1/2", dc_length = "10", dc_w = "1", dc_h = "1", dc_start = "1/7,1/11";
  std::string dc_surface = "ellipsoid:1,1.2,1.5";
  double dc_len = 25.0, dc_tol = 1e-3;
  dc->add_flag("--klein", dc_klein, "run on the flat Klein bottle (exact geometry)");
  dc->add_option("--slope", dc_slope);
  dc->add_option("--length", dc_length, "klein: rational arc length");
  dc->add_option("--w", dc_w);
  dc->add_option("--h", dc_h);
  dc->add_option("--start", dc_start);
  dc->add_option("--surface", dc_surface);
  dc->add_option("--arc", dc_len, "surface: trajectory length");
  dc->add_option("--tol", dc_tol, "max relative error allowed");

  // conjugate
  auto* cj = app.add_subcommand("conjugate", "conjugate points along a geodesic");
  std::string cj_surface = "sphere", cj_x0 = "1,0,0", cj_v0 = "0,1,0";
  double cj_len = 10.0, cj_h = 1e-3;
  cj->add_option("--surface", cj_surface);
  cj->add_option("--x0", cj_x0);
  cj->add_option("--v0", cj_v0);
  cj->add_option("--length", cj_len);
  cj->add_option("--h", cj_h);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (tg->parsed())
      return run_three_gap(g, tg_p, tg_n, tg_offset, tg_metric, tg_sweep, tg_count);
    if (tog->parsed()) return run_torus_gaps(g, tog_primes, tog_s, tog_emit, tog_sweep);
    if (kl->parsed()) return run_klein(g, kl_slope, kl_length, kl_w, kl_h, kl_start);
    if (on->parsed())
      return run_orbit_nnd(g, on_space, on_T, on_step, on_n, on_sweep, on_ratio, on_tau);
    if (pk->parsed()) return run_packing(g, pk_space, pk_r, pk_trials, pk_radii);
    if (gs->parsed()) return run_geo_scan(g, gs_surface, gs_config, gs_T, gs_n, gs_h, gs_tau);
    if (dc->parsed())
      return run_derivative_check(g, dc_klein, dc_slope, dc_length, dc_w, dc_h, dc_start,
                                  dc_surface, dc_len, dc_tol);
    if (cj->parsed()) return run_conjugate(g, cj_surface, cj_x0, cj_v0, cj_len, cj_h);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
