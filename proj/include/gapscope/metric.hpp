// gapscope - nearest-neighbor distance spectra over abstract metric oracles.
//
// A point set is addressed by index; the oracle maps an index pair to a
// distance value. Exact oracles return Rational values (often squared
// distances, which is fine: x -> x^2 is monotone on nonnegative reals, so
// argmins and distinct-value counts are unchanged). Floating oracles return
// double.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "gapscope/rational.hpp"

namespace gapscope {

enum class ClusterMode { Exact, RelTol };

// How per-point values are merged into distinct classes. The paper's
// statements are about exact reals; tolerance clustering exists only to keep
// floating-point rounding from splitting classes.
struct ClusterPolicy {
  ClusterMode mode = ClusterMode::RelTol;
  double tau = 1e-9;

  static ClusterPolicy exact() { return {ClusterMode::Exact, 0.0}; }
  static ClusterPolicy rel_tol(double tau) {
    if (!(tau > 0)) throw std::invalid_argument("ClusterPolicy: tau must be positive");
    return {ClusterMode::RelTol, tau};
  }
};

template <class D>
struct NndClass {
  D value;  // representative = smallest member (class reps strictly increase)
  std::size_t count = 0;
};

template <class D>
struct NndSpectrum {
  std::vector<D> per_point;            // nnd(x_i, X), length |X|
  std::vector<std::size_t> nearest;    // argmin neighbor index, lowest on ties
  std::vector<std::size_t> class_of;   // per-point class id
  std::vector<NndClass<D>> classes;    // ascending by representative value
  ClusterPolicy policy;

  std::size_t size() const { return per_point.size(); }
  std::size_t distinct_count() const { return classes.size(); }
};

// Callable distance contract over an indexed point set.
template <class D>
class MetricOracle {
 public:
  using Fn = std::function<D(std::size_t, std::size_t)>;

  MetricOracle(std::size_t n, Fn fn, bool exact, double abs_error = 0.0, bool squared = false)
      : n_(n), fn_(std::move(fn)), exact_(exact), abs_error_(abs_error), squared_(squared) {
    if (abs_error_ < 0) throw std::invalid_argument("MetricOracle: abs_error must be >= 0");
  }

  D operator()(std::size_t i, std::size_t j) const { return fn_(i, j); }
  std::size_t size() const { return n_; }
  bool exact() const { return exact_; }
  double abs_error() const { return abs_error_; }
  bool squared() const { return squared_; }

 private:
  std::size_t n_;
  Fn fn_;
  bool exact_;
  double abs_error_;
  bool squared_;
};

namespace detail {

inline double cluster_key(double v) { return v; }
inline double cluster_key(const Rational& v) { return to_double(v); }

}  // namespace detail

// Merge sorted values into distinct classes. Exact mode groups equal values;
// RelTol chains adjacent sorted values v <= w whenever w - v <= tau * max(1, v).
template <class D>
std::vector<NndClass<D>> cluster_sorted_values(const std::vector<D>& sorted, const ClusterPolicy& policy) {
  std::vector<NndClass<D>> classes;
  const D* last_in_class = nullptr;
  for (const D& v : sorted) {
    bool merge = false;
    if (last_in_class != nullptr) {
      if (policy.mode == ClusterMode::Exact) {
        merge = (v == *last_in_class);
      } else {
        const double w = detail::cluster_key(v);
        const double p = detail::cluster_key(*last_in_class);
        merge = (w - p) <= policy.tau * std::max(1.0, p);
      }
    }
    if (merge) {
      classes.back().count += 1;
    } else {
      classes.push_back(NndClass<D>{v, 1});
    }
    last_in_class = &v;
  }
  return classes;
}

// min over y in X\{x} of dist(x, y), plus the argmin (lowest index on ties).
template <class D>
std::pair<D, std::size_t> nnd_of_point(std::size_t x, const MetricOracle<D>& m) {
  const std::size_t n = m.size();
  if (n < 2) throw std::invalid_argument("nnd_of_point: need at least 2 points");
  if (x >= n) throw std::invalid_argument("nnd_of_point: point not in set");
  bool have = false;
  D best{};
  std::size_t arg = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == x) continue;
    D d = m(x, j);
    if (!have || d < best) {
      best = d;
      arg = j;
      have = true;
    }
  }
  return {best, arg};
}

// Build a spectrum from already-computed per-point values (shared by the
// all-pairs baseline and by structure-exploiting accelerators).
template <class D>
NndSpectrum<D> spectrum_from_values(std::vector<D> per_point, std::vector<std::size_t> nearest,
                                    const ClusterPolicy& policy) {
  NndSpectrum<D> s;
  s.policy = policy;
  s.per_point = std::move(per_point);
  s.nearest = std::move(nearest);
  const std::size_t n = s.per_point.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return s.per_point[a] < s.per_point[b]; });
  std::vector<D> sorted;
  sorted.reserve(n);
  for (std::size_t i : order) sorted.push_back(s.per_point[i]);

  s.classes = cluster_sorted_values(sorted, policy);

  s.class_of.assign(n, 0);
  std::size_t cls = 0, used = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (used == s.classes[cls].count) {
      ++cls;
      used = 0;
    }
    s.class_of[order[r]] = cls;
    ++used;
  }
  return s;
}

// All-pairs baseline: each unordered pair is evaluated once and feeds both
// endpoints' minima.
template <class D>
NndSpectrum<D> nnd_spectrum(const MetricOracle<D>& m, const ClusterPolicy& policy) {
  const std::size_t n = m.size();
  if (n < 2) throw std::invalid_argument("nnd_spectrum: need at least 2 points");
  std::vector<D> best(n);
  std::vector<std::size_t> arg(n, 0);
  std::vector<bool> have(n, false);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      D d = m(i, j);
      if (!have[i] || d < best[i]) {
        best[i] = d;
        arg[i] = j;
        have[i] = true;
      }
      if (!have[j] || d < best[j]) {
        best[j] = d;
        arg[j] = i;
        have[j] = true;
      }
    }
  }
  return spectrum_from_values(std::move(best), std::move(arg), policy);
}

// Reference implementation used as a testing oracle: plain per-point loops,
// no pair sharing, exact-equality clustering only.
template <class D>
NndSpectrum<D> brute_force_spectrum(const MetricOracle<D>& m) {
  const std::size_t n = m.size();
  if (n < 2) throw std::invalid_argument("brute_force_spectrum: need at least 2 points");
  std::vector<D> vals(n);
  std::vector<std::size_t> args(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto [v, a] = nnd_of_point(i, m);
    vals[i] = v;
    args[i] = a;
  }
  return spectrum_from_values(std::move(vals), std::move(args), ClusterPolicy::exact());
}

// Metric sanity checks on sampled pairs/triples (symmetry within 2*err,
// identity, triangle inequality within 3*err). Returns true when all sampled
// checks pass; used by tests and by the CLI's self-check mode.
template <class D>
bool verify_metric_invariants(const MetricOracle<D>& m, const std::vector<std::size_t>& sample) {
  const double err = m.abs_error();
  for (std::size_t a : sample) {
    if (a >= m.size()) return false;
    D da = m(a, a);
    if (!(da == D{})) return false;
  }
  for (std::size_t i = 0; i + 1 < sample.size(); ++i) {
    std::size_t a = sample[i], b = sample[i + 1];
    D dab = m(a, b), dba = m(b, a);
    if (m.exact()) {
      if (!(dab == dba)) return false;
    } else {
      if (std::abs(detail::cluster_key(dab) - detail::cluster_key(dba)) > 2 * err) return false;
    }
  }
  if (!m.squared()) {
    for (std::size_t i = 0; i + 2 < sample.size(); ++i) {
      std::size_t a = sample[i], b = sample[i + 1], c = sample[i + 2];
      const double ab = detail::cluster_key(m(a, b));
      const double bc = detail::cluster_key(m(b, c));
      const double ac = detail::cluster_key(m(a, c));
      if (ac > ab + bc + 3 * err) return false;
    }
  }
  return true;
}

}  // namespace gapscope
