#pragma once

// Best uniform polynomial approximation of the entropy kernel -x ln x.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace infotree {

/// -x ln x, with the continuous extension f(0) = 0.
inline double entropy_kernel(double x) noexcept { return x > 0.0 ? -x * std::log(x) : 0.0; }

/// Horner evaluation of sum_k coeffs[k] x^k. Empty coefficients evaluate to 0.
inline double eval_poly(std::span<const double> coeffs, double x) noexcept {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

/// Clenshaw evaluation of sum_k cheb[k] T_k(2x - 1), i.e. a Chebyshev series
/// on the reference interval [0, 1].
inline double eval_chebyshev01(std::span<const double> cheb, double x) noexcept {
  const double t = 2.0 * x - 1.0;
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t k = cheb.size(); k-- > 1;) {
    const double b0 = 2.0 * t * b1 - b2 + cheb[k];
    b2 = b1;
    b1 = b0;
  }
  return cheb.empty() ? 0.0 : t * b1 - b2 + cheb[0];
}

enum class ApproxMethod { remez, chebyshev_projection };

inline std::string_view to_string(ApproxMethod m) noexcept {
  return m == ApproxMethod::remez ? "remez" : "cheb";
}

inline ApproxMethod parse_approx_method(std::string_view s) {
  if (s == "remez") return ApproxMethod::remez;
  if (s == "cheb" || s == "chebyshev" || s == "chebyshev_projection") return ApproxMethod::chebyshev_projection;
  throw std::invalid_argument("unknown approximation method '" + std::string(s) + "'");
}

/// Degree-K approximant of -x ln x on [0, 1].
///
/// `chebyshev` is the authoritative representation (coefficients of
/// T_k(2x - 1)); `coeffs` is the same polynomial in the monomial basis, which
/// the moment estimator needs. `sup_error` is certified on the Chebyshev form
/// over a dense grid with local refinement, so it is a (tight) lower estimate
/// of the true sup-norm error rather than a rigorous bound. The monomial form
/// loses accuracy to cancellation once the degree passes ~20; its own
/// certified error is kept in `monomial_sup_error` so callers can see that.
struct PolynomialApprox {
  int degree = 0;
  std::vector<double> coeffs;
  std::vector<double> chebyshev;
  double sup_error = 0.0;
  double monomial_sup_error = 0.0;
  std::size_t grid_points = 0;
  ApproxMethod method = ApproxMethod::remez;
  /// Remez did not converge and the Chebyshev projection was returned instead.
  bool fell_back = false;
  int iterations = 0;
  /// Final Remez reference set (x-coordinates) and residuals p - f there.
  std::vector<double> reference;
  std::vector<double> reference_residuals;

  double operator()(double x) const noexcept { return eval_chebyshev01(chebyshev, x); }
};

/// Approximant of -x ln x on [0, delta] in the monomial basis.
struct RescaledPoly {
  std::vector<double> coeffs;
  double interval_width = 1.0;
  double sup_error = 0.0;

  double operator()(double x) const noexcept { return eval_poly(coeffs, x); }
};

struct ApproxOptions {
  int max_degree = 40;
  std::size_t grid_points = 1'000'000;
  int max_iterations = 100;
  double tolerance = 1e-6;
  /// Quadrature nodes for the Chebyshev projection.
  std::size_t projection_nodes = 8192;
};

namespace detail {

/// max_{x in [lo, hi]} |g(x) - entropy_kernel(x)| estimated on a uniform grid of
/// `points` nodes, then refined by golden-section search around every grid
/// local maximum within 10% of the grid maximum.
template <typename Eval>
double certify_sup_error(Eval&& g, double lo, double hi, std::size_t points) {
  if (points < 3) points = 3;
  const double step = (hi - lo) / static_cast<double>(points - 1);
  std::vector<double> err(points);
  double grid_max = 0.0;
  for (std::size_t j = 0; j < points; ++j) {
    const double x = j + 1 == points ? hi : lo + step * static_cast<double>(j);
    err[j] = std::abs(g(x) - entropy_kernel(x));
    grid_max = std::max(grid_max, err[j]);
  }
  if (!std::isfinite(grid_max)) return std::numeric_limits<double>::infinity();
  double best = grid_max;
  const auto abs_err = [&](double x) { return std::abs(g(x) - entropy_kernel(x)); };
  for (std::size_t j = 0; j < points; ++j) {
    const bool left_ok = j == 0 || err[j] >= err[j - 1];
    const bool right_ok = j + 1 == points || err[j] >= err[j + 1];
    if (!left_ok || !right_ok || err[j] < 0.9 * grid_max) continue;
    double a = std::max(lo, lo + step * (static_cast<double>(j) - 1.0));
    double b = std::min(hi, lo + step * (static_cast<double>(j) + 1.0));
    constexpr double inv_phi = 0.6180339887498949;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = abs_err(c), fd = abs_err(d);
    for (int it = 0; it < 60 && b - a > 1e-15; ++it) {
      if (fc > fd) {
        b = d; d = c; fd = fc;
        c = b - inv_phi * (b - a); fc = abs_err(c);
      } else {
        a = c; c = d; fc = fd;
        d = a + inv_phi * (b - a); fd = abs_err(d);
      }
    }
    best = std::max({best, fc, fd, abs_err(a), abs_err(b)});
  }
  return best;
}

/// Solves A x = b in place (row-major, n x n) by Gaussian elimination with
/// partial pivoting. Returns false if the matrix is numerically singular.
inline bool solve_dense(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    }
    if (!(std::abs(a[piv * n + col]) > 1e-300)) return false;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i * n + c] * b[c];
    b[i] = s / a[i * n + i];
  }
  return true;
}

/// Monomial coefficients of sum_k cheb[k] T_k(2x - 1).
///
/// The shifted Chebyshev polynomials have exact integer coefficients, held in
/// __int128 (|coefficient| < 2^100 for degree <= 40); the products are
/// accumulated in long double with Neumaier compensation.
inline std::vector<double> chebyshev01_to_monomial(std::span<const double> cheb) {
  const std::size_t n = cheb.size();
  using Int = __int128;
  std::vector<std::vector<Int>> shifted(n);
  for (std::size_t k = 0; k < n; ++k) {
    shifted[k].assign(k + 1, 0);
    if (k == 0) {
      shifted[0][0] = 1;
    } else if (k == 1) {
      shifted[1][0] = -1;
      shifted[1][1] = 2;
    } else {
      // T*_k = (4x - 2) T*_{k-1} - T*_{k-2}
      const auto& p1 = shifted[k - 1];
      const auto& p2 = shifted[k - 2];
      for (std::size_t j = 0; j < p1.size(); ++j) {
        shifted[k][j + 1] += 4 * p1[j];
        shifted[k][j] -= 2 * p1[j];
      }
      for (std::size_t j = 0; j < p2.size(); ++j) shifted[k][j] -= p2[j];
    }
  }
  std::vector<double> out(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    long double sum = 0.0L, comp = 0.0L;
    for (std::size_t k = j; k < n; ++k) {
      const long double term = static_cast<long double>(cheb[k]) * static_cast<long double>(shifted[k][j]);
      const long double t = sum + term;
      if (std::abs(sum) >= std::abs(term)) {
        comp += (sum - t) + term;
      } else {
        comp += (term - t) + sum;
      }
      sum = t;
    }
    out[j] = static_cast<double>(sum + comp);
  }
  return out;
}

/// Truncated Chebyshev series of -x ln x on [0, 1], coefficients by
/// Gauss-Chebyshev quadrature.
inline std::vector<double> chebyshev_projection_coeffs(int degree, std::size_t nodes) {
  std::vector<double> c(static_cast<std::size_t>(degree) + 1, 0.0);
  const double n = static_cast<double>(nodes);
  for (std::size_t j = 0; j < nodes; ++j) {
    const double theta = std::numbers::pi * (static_cast<double>(j) + 0.5) / n;
    // x = (1 + cos theta) / 2 = cos^2(theta / 2), accurate near both ends.
    const double ch = std::cos(0.5 * theta);
    const double fx = entropy_kernel(ch * ch);
    for (int k = 0; k <= degree; ++k) c[static_cast<std::size_t>(k)] += fx * std::cos(k * theta);
  }
  for (auto& v : c) v *= 2.0 / n;
  c[0] *= 0.5;
  return c;
}

struct RemezResult {
  std::vector<double> cheb;
  std::vector<double> reference;
  std::vector<double> residuals;
  double levelled_error = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct Extremum {
  double x;
  double r;
};

/// Remez exchange for -x ln x on [0, 1] in the Chebyshev basis, started from
/// the Chebyshev extrema, with a multi-point exchange against all local
/// extrema of the residual on a Chebyshev-clustered grid.
inline RemezResult remez_entropy(int degree, int max_iterations, double tolerance) {
  const auto n_ref = static_cast<std::size_t>(degree) + 2;
  const auto kdeg = static_cast<std::size_t>(degree);
  RemezResult res;

  std::vector<double> ref(n_ref);
  for (std::size_t i = 0; i < n_ref; ++i) {
    // x_i = (1 - cos(pi i / (K+1))) / 2 = sin^2(pi i / (2(K+1)))
    const double s = std::sin(std::numbers::pi * static_cast<double>(i) / (2.0 * static_cast<double>(kdeg + 1)));
    ref[i] = s * s;
  }

  const std::size_t grid_n = std::max<std::size_t>(2000, 200 * n_ref);
  std::vector<double> grid(grid_n + 1);
  for (std::size_t j = 0; j <= grid_n; ++j) {
    const double s = std::sin(std::numbers::pi * static_cast<double>(j) / (2.0 * static_cast<double>(grid_n)));
    grid[j] = s * s;
  }
  grid.front() = 0.0;
  grid.back() = 1.0;
  std::vector<double> fgrid(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) fgrid[j] = entropy_kernel(grid[j]);

  std::vector<double> cheb(kdeg + 1, 0.0);
  const auto residual = [&](double x) { return eval_chebyshev01(cheb, x) - entropy_kernel(x); };

  for (int iter = 1; iter <= max_iterations; ++iter) {
    res.iterations = iter;
    // Levelled system: sum_k c_k T_k(t_i) + (-1)^i E = f(x_i)
    std::vector<double> a(n_ref * n_ref), b(n_ref);
    for (std::size_t i = 0; i < n_ref; ++i) {
      const double t = 2.0 * ref[i] - 1.0;
      double tkm1 = 1.0, tk = t;
      for (std::size_t k = 0; k <= kdeg; ++k) {
        double v;
        if (k == 0) {
          v = 1.0;
        } else if (k == 1) {
          v = t;
        } else {
          v = 2.0 * t * tk - tkm1;
          tkm1 = tk;
          tk = v;
        }
        a[i * n_ref + k] = v;
      }
      a[i * n_ref + kdeg + 1] = (i % 2 == 0) ? 1.0 : -1.0;
      b[i] = entropy_kernel(ref[i]);
    }
    if (!solve_dense(a, b, n_ref)) return res;
    std::copy(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(kdeg + 1), cheb.begin());
    res.levelled_error = std::abs(b[kdeg + 1]);

    // Local extrema of the residual on the grid, refined by golden section.
    std::vector<double> rg(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) rg[j] = eval_chebyshev01(cheb, grid[j]) - fgrid[j];
    std::vector<Extremum> ext;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double v = rg[j];
      const bool is_max = (j == 0 || v >= rg[j - 1]) && (j + 1 == grid.size() || v >= rg[j + 1]);
      const bool is_min = (j == 0 || v <= rg[j - 1]) && (j + 1 == grid.size() || v <= rg[j + 1]);
      if (!is_max && !is_min) continue;
      if (j == 0 || j + 1 == grid.size()) {
        ext.push_back({grid[j], v});
        continue;
      }
      const double sign = is_max ? 1.0 : -1.0;
      double lo = grid[j - 1], hi = grid[j + 1];
      constexpr double inv_phi = 0.6180339887498949;
      double c = hi - inv_phi * (hi - lo), d = lo + inv_phi * (hi - lo);
      double fc = sign * residual(c), fd = sign * residual(d);
      for (int it = 0; it < 80 && hi - lo > 4e-16 * std::max(1e-300, hi); ++it) {
        if (fc > fd) {
          hi = d; d = c; fd = fc;
          c = hi - inv_phi * (hi - lo); fc = sign * residual(c);
        } else {
          lo = c; c = d; fc = fd;
          d = lo + inv_phi * (hi - lo); fd = sign * residual(d);
        }
      }
      Extremum e{grid[j], v};
      if (fc > sign * e.r) e = {c, sign * fc};
      if (fd > sign * e.r) e = {d, sign * fd};
      ext.push_back(e);
    }
    // Merge runs of equal sign, keeping the largest magnitude in each run.
    std::vector<Extremum> alt;
    for (const auto& e : ext) {
      if (!alt.empty() && ((alt.back().r >= 0.0) == (e.r >= 0.0))) {
        if (std::abs(e.r) > std::abs(alt.back().r)) alt.back() = e;
      } else {
        alt.push_back(e);
      }
    }
    if (alt.size() < n_ref) return res;
    // Trim to K + 2 points while preserving alternation.
    while (alt.size() > n_ref) {
      const auto excess = alt.size() - n_ref;
      auto smallest = static_cast<std::size_t>(
          std::min_element(alt.begin(), alt.end(),
                           [](const Extremum& l, const Extremum& r) { return std::abs(l.r) < std::abs(r.r); }) -
          alt.begin());
      if (smallest == 0 || smallest + 1 == alt.size()) {
        alt.erase(alt.begin() + static_cast<std::ptrdiff_t>(smallest));
      } else if (excess == 1) {
        if (std::abs(alt.front().r) < std::abs(alt.back().r)) {
          alt.erase(alt.begin());
        } else {
          alt.pop_back();
        }
      } else {
        const std::size_t other =
            std::abs(alt[smallest - 1].r) < std::abs(alt[smallest + 1].r) ? smallest - 1 : smallest + 1;
        const std::size_t first = std::min(smallest, other);
        alt.erase(alt.begin() + static_cast<std::ptrdiff_t>(first),
                  alt.begin() + static_cast<std::ptrdiff_t>(first + 2));
      }
    }
    double rmax = 0.0, rmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_ref; ++i) {
      ref[i] = alt[i].x;
      rmax = std::max(rmax, std::abs(alt[i].r));
      rmin = std::min(rmin, std::abs(alt[i].r));
    }
    if (rmin > 0.0 && rmax / rmin - 1.0 <= tolerance) {
      res.converged = true;
      res.cheb = cheb;
      res.reference = ref;
      res.residuals.resize(n_ref);
      for (std::size_t i = 0; i < n_ref; ++i) res.residuals[i] = alt[i].r;
      return res;
    }
  }
  return res;
}

}  // namespace detail

/// Near-best uniform approximation of -x ln x on [0, 1] of the given degree.
///
/// Remez results that fail to converge within `max_iterations` fall back to
/// the Chebyshev projection with `fell_back` set.
inline PolynomialApprox best_entropy_poly(int degree, ApproxMethod method = ApproxMethod::remez,
                                          const ApproxOptions& opts = {}) {
  if (degree < 0) throw std::invalid_argument("best_entropy_poly: degree must be non-negative");
  if (degree > opts.max_degree) {
    throw std::invalid_argument("best_entropy_poly: degree " + std::to_string(degree) + " exceeds max_degree " +
                                std::to_string(opts.max_degree));
  }
  PolynomialApprox out;
  out.degree = degree;
  out.method = method;
  if (method == ApproxMethod::remez) {
    auto r = detail::remez_entropy(degree, opts.max_iterations, opts.tolerance);
    out.iterations = r.iterations;
    if (r.converged) {
      out.chebyshev = std::move(r.cheb);
      out.reference = std::move(r.reference);
      out.reference_residuals = std::move(r.residuals);
    } else {
      out.fell_back = true;
      out.method = ApproxMethod::chebyshev_projection;
    }
  }
  if (out.chebyshev.empty()) out.chebyshev = detail::chebyshev_projection_coeffs(degree, opts.projection_nodes);
  out.coeffs = detail::chebyshev01_to_monomial(out.chebyshev);
  out.grid_points = opts.grid_points;
  const auto& cheb = out.chebyshev;
  out.sup_error = detail::certify_sup_error([&](double x) { return eval_chebyshev01(cheb, x); }, 0.0, 1.0,
                                            opts.grid_points);
  const auto& mono = out.coeffs;
  out.monomial_sup_error = detail::certify_sup_error([&](double x) { return eval_poly(mono, x); }, 0.0, 1.0,
                                                     std::max<std::size_t>(opts.grid_points / 10, 1000));
  return out;
}

/// Process-wide read-consistent cache of default-option approximants, keyed by
/// (degree, method). Entries are immutable once published.
inline std::shared_ptr<const PolynomialApprox> cached_entropy_poly(int degree,
                                                                   ApproxMethod method = ApproxMethod::remez) {
  static std::shared_mutex mutex;
  static std::map<std::pair<int, ApproxMethod>, std::shared_ptr<const PolynomialApprox>> cache;
  const auto key = std::make_pair(degree, method);
  {
    std::shared_lock lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto fresh = std::make_shared<const PolynomialApprox>(best_entropy_poly(degree, method));
  std::unique_lock lock(mutex);
  auto [it, inserted] = cache.emplace(key, std::move(fresh));
  return it->second;
}

/// Carries an approximant of -y ln y on [0, 1] to one of -x ln x on [0, delta]:
/// b_k = a_k delta^(1-k) for k != 1 and b_1 = a_1 - ln(delta).
inline RescaledPoly rescale_to_interval(const PolynomialApprox& poly, double delta) {
  if (!(delta > 0.0) || !(delta <= 1.0)) {
    throw std::invalid_argument("rescale_to_interval: delta must lie in (0, 1]");
  }
  RescaledPoly out;
  out.interval_width = delta;
  out.sup_error = delta * poly.sup_error;
  out.coeffs.resize(poly.coeffs.size());
  const double log_delta = std::log(delta);
  for (std::size_t k = 0; k < poly.coeffs.size(); ++k) {
    out.coeffs[k] = poly.coeffs[k] * std::exp((1.0 - static_cast<double>(k)) * log_delta);
  }
  if (out.coeffs.size() > 1) {
    out.coeffs[1] = poly.coeffs[1] - log_delta;
  } else {
    // Degree 0 still needs the linear term that undoes x ln delta.
    out.coeffs.push_back(-log_delta);
  }
  return out;
}

}  // namespace infotree
