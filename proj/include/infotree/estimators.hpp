#pragma once

// Entropy and (conditional) mutual information estimators, in nats.

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include "infotree/approx.hpp"
#include "infotree/histogram.hpp"
#include "infotree/rng.hpp"

namespace infotree {

enum class EstimatorKind { mle, miller_madow, poly };

inline std::string_view to_string(EstimatorKind k) noexcept {
  switch (k) {
    case EstimatorKind::mle: return "mle";
    case EstimatorKind::miller_madow: return "mm";
    case EstimatorKind::poly: return "poly";
  }
  return "?";
}

inline EstimatorKind parse_estimator(std::string_view s) {
  if (s == "mle") return EstimatorKind::mle;
  if (s == "mm" || s == "miller_madow") return EstimatorKind::miller_madow;
  if (s == "poly") return EstimatorKind::poly;
  throw std::invalid_argument("unknown estimator '" + std::string(s) + "'");
}

/// Tuning of the two-regime polynomial estimator.
///
/// A symbol with count c is non-smooth when c <= c1 ln n. Non-smooth symbols
/// are estimated through a degree K = min(ceil(c2 ln n), max_degree_cap, n)
/// approximant of -p ln p on [0, min(1, interval_slack * c1 ln n / n)].
struct EstimatorConfig {
  double c1 = 4.0;
  double c2 = 1.2;
  double interval_slack = 1.0;
  int max_degree_cap = 30;
  bool smooth_correction = true;
  bool clamp_entropy = false;
  bool clamp_mi_nonnegative = false;

  void validate() const {
    if (!(c1 > 0.0) || !std::isfinite(c1)) throw std::invalid_argument("EstimatorConfig: c1 must be positive");
    if (!(c2 > 0.0) || !std::isfinite(c2)) throw std::invalid_argument("EstimatorConfig: c2 must be positive");
    if (!(interval_slack >= 1.0) || !std::isfinite(interval_slack)) {
      throw std::invalid_argument("EstimatorConfig: interval_slack must be >= 1");
    }
    if (max_degree_cap < 0 || max_degree_cap > ApproxOptions{}.max_degree) {
      throw std::invalid_argument("EstimatorConfig: max_degree_cap must lie in [0, 40]");
    }
  }
};

/// Regime boundaries and approximant degree the polynomial estimator uses at
/// sample size n.
struct PolyPlan {
  double threshold = 0.0;  // counts <= threshold are non-smooth
  int degree = 0;
  double interval = 1.0;
};

inline PolyPlan plan_poly(Count n, const EstimatorConfig& cfg) {
  const double ln_n = std::log(static_cast<double>(n));
  PolyPlan p;
  p.threshold = cfg.c1 * ln_n;
  const double k = std::ceil(cfg.c2 * ln_n);
  p.degree = static_cast<int>(std::min<double>({k, static_cast<double>(cfg.max_degree_cap), static_cast<double>(n)}));
  p.interval = std::min(1.0, cfg.interval_slack * cfg.c1 * ln_n / static_cast<double>(n));
  return p;
}

/// (x)_k / (n)_k, the unbiased estimator of p^k from a Binomial(n, p) count x.
inline double falling_factorial_moment(Count x, Count n, Count k) {
  if (n == 0) throw std::invalid_argument("falling_factorial_moment: n must be positive");
  if (x > n) throw std::invalid_argument("falling_factorial_moment: x exceeds n");
  if (k > n) throw std::invalid_argument("falling_factorial_moment: k exceeds n (p^k not unbiasedly estimable)");
  if (x < k) return 0.0;
  double m = 1.0;
  for (Count i = 0; i < k; ++i) m *= static_cast<double>(x - i) / static_cast<double>(n - i);
  return m;
}

namespace detail {

inline void require_samples(Count n, Count minimum, std::string_view who) {
  if (n < minimum) {
    throw std::invalid_argument(std::string(who) + ": needs at least " + std::to_string(minimum) + " samples, got " +
                                std::to_string(n));
  }
}

inline double plug_in_term(Count c, Count n) {
  const double p = static_cast<double>(c) / static_cast<double>(n);
  return -p * std::log(p);
}

/// sum_k b_k (c)_k / (n)_k
inline double unbiased_poly_value(std::span<const double> b, Count c, Count n) {
  double acc = b.empty() ? 0.0 : b[0];
  double m = 1.0;
  for (std::size_t k = 1; k < b.size(); ++k) {
    if (c < k) break;
    m *= static_cast<double>(c - (k - 1)) / static_cast<double>(n - (k - 1));
    acc += b[k] * m;
  }
  return acc;
}

}  // namespace detail

inline double entropy_mle(const CountProfile& p) {
  detail::require_samples(p.n, 1, "entropy_mle");
  double h = 0.0;
  for (const auto& [c, mult] : p.multiplicity) h += static_cast<double>(mult) * detail::plug_in_term(c, p.n);
  return h;
}
inline double entropy_mle(const Histogram& h) { return entropy_mle(h.profile()); }

/// Plug-in entropy plus (S+ - 1) / (2n), S+ the number of observed symbols.
inline double entropy_miller_madow(const CountProfile& p) {
  const double h = entropy_mle(p);
  return h + (static_cast<double>(p.observed()) - 1.0) / (2.0 * static_cast<double>(p.n));
}
inline double entropy_miller_madow(const Histogram& h) { return entropy_miller_madow(h.profile()); }

/// Two-regime estimator: bias-corrected plug-in for symbols well away from
/// p = 0, unbiased estimate of the best polynomial approximant of -p ln p for
/// the rest (unobserved symbols included, each contributing b_0).
inline double entropy_poly(const CountProfile& p, const EstimatorConfig& cfg = {}) {
  cfg.validate();
  detail::require_samples(p.n, 2, "entropy_poly");
  const auto plan = plan_poly(p.n, cfg);
  const auto n = static_cast<double>(p.n);

  RescaledPoly poly;
  const bool any_nonsmooth =
      p.zeros > 0 || (!p.multiplicity.empty() && static_cast<double>(p.multiplicity.begin()->first) <= plan.threshold);
  if (any_nonsmooth) poly = rescale_to_interval(*cached_entropy_poly(plan.degree), plan.interval);

  double h = 0.0;
  if (p.zeros > 0) h += static_cast<double>(p.zeros) * poly.coeffs[0];
  for (const auto& [c, mult] : p.multiplicity) {
    double term;
    if (static_cast<double>(c) > plan.threshold) {
      const double ph = static_cast<double>(c) / n;
      term = -ph * std::log(ph);
      if (cfg.smooth_correction) term += (1.0 - ph) / (2.0 * n);
    } else {
      term = detail::unbiased_poly_value(poly.coeffs, c, p.n);
    }
    h += static_cast<double>(mult) * term;
  }
  if (cfg.clamp_entropy) h = std::clamp(h, 0.0, std::log(static_cast<double>(p.alphabet_size())));
  return h;
}
inline double entropy_poly(const Histogram& h, const EstimatorConfig& cfg = {}) {
  return entropy_poly(h.profile(), cfg);
}

/// Splits a histogram's samples uniformly at random into two halves of sizes
/// floor(n/2) and n - floor(n/2) (multivariate hypergeometric thinning).
inline std::array<Histogram, 2> split_histogram(const Histogram& h, SeededGenerator& gen) {
  std::vector<Symbol> pool;
  pool.reserve(h.n());
  for (std::size_t s = 0; s < h.alphabet_size(); ++s) pool.insert(pool.end(), h.counts()[s], static_cast<Symbol>(s));
  gen.shuffle(pool);
  const auto half = pool.size() / 2;
  std::span<const Symbol> all(pool);
  return {Histogram::from_symbols(all.first(half), h.alphabet_size()),
          Histogram::from_symbols(all.subspan(half), h.alphabet_size())};
}

/// Sample-splitting variant of entropy_poly: regimes are classified on one
/// half and the estimate is computed from the other half's counts.
inline double entropy_poly_split(const Histogram& h, const EstimatorConfig& cfg, SeededGenerator& gen) {
  cfg.validate();
  detail::require_samples(h.n(), 4, "entropy_poly_split");
  const auto halves = split_histogram(h, gen);
  const auto& classify = halves[0];
  const auto& estimate = halves[1];
  const Count n = estimate.n();
  const auto plan_c = plan_poly(classify.n(), cfg);
  const auto plan_e = plan_poly(n, cfg);
  const auto poly = rescale_to_interval(*cached_entropy_poly(plan_e.degree), plan_e.interval);
  double total = 0.0;
  for (std::size_t s = 0; s < h.alphabet_size(); ++s) {
    const Count c = estimate.counts()[s];
    if (static_cast<double>(classify.counts()[s]) > plan_c.threshold) {
      if (c == 0) continue;
      const double ph = static_cast<double>(c) / static_cast<double>(n);
      total += -ph * std::log(ph) + (cfg.smooth_correction ? (1.0 - ph) / (2.0 * static_cast<double>(n)) : 0.0);
    } else {
      total += detail::unbiased_poly_value(poly.coeffs, c, n);
    }
  }
  if (cfg.clamp_entropy) total = std::clamp(total, 0.0, std::log(static_cast<double>(h.alphabet_size())));
  return total;
}

inline double entropy(const CountProfile& p, EstimatorKind kind, const EstimatorConfig& cfg = {}) {
  switch (kind) {
    case EstimatorKind::mle: return entropy_mle(p);
    case EstimatorKind::miller_madow: return entropy_miller_madow(p);
    case EstimatorKind::poly: return entropy_poly(p, cfg);
  }
  throw std::invalid_argument("entropy: unknown estimator kind");
}
inline double entropy(const Histogram& h, EstimatorKind kind, const EstimatorConfig& cfg = {}) {
  return entropy(h.profile(), kind, cfg);
}

/// H(X1) + H(X2) - H(X1, X2) with the chosen entropy estimator on each term.
/// The polynomial estimate is not sign-constrained unless
/// cfg.clamp_mi_nonnegative is set.
inline double mutual_information(const JointHistogram& j, EstimatorKind kind, const EstimatorConfig& cfg = {}) {
  detail::require_samples(j.n(), kind == EstimatorKind::poly ? 2 : 1, "mutual_information");
  const double mi = entropy(j.row_marginal(), kind, cfg) + entropy(j.col_marginal(), kind, cfg) -
                    entropy(j.flattened(), kind, cfg);
  return cfg.clamp_mi_nonnegative ? std::max(0.0, mi) : mi;
}

/// I(X;Y|C) = H(X,C) + H(Y,C) - H(C) - H(X,Y,C) over a sparse (X, Y, C) table.
inline double conditional_mutual_information(const SparseJointHistogram& t, EstimatorKind kind,
                                             const EstimatorConfig& cfg = {}) {
  if (t.arity() != 3) throw std::invalid_argument("conditional_mutual_information: expects an (X, Y, C) table");
  detail::require_samples(t.n(), kind == EstimatorKind::poly ? 2 : 1, "conditional_mutual_information");
  constexpr std::array<std::size_t, 2> xc{0, 2};
  constexpr std::array<std::size_t, 2> yc{1, 2};
  constexpr std::array<std::size_t, 1> c{2};
  const double cmi = entropy(t.marginalize(xc).profile(), kind, cfg) +
                     entropy(t.marginalize(yc).profile(), kind, cfg) -
                     entropy(t.marginalize(c).profile(), kind, cfg) - entropy(t.profile(), kind, cfg);
  return cfg.clamp_mi_nonnegative ? std::max(0.0, cmi) : cmi;
}

}  // namespace infotree
