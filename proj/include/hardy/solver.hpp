#pragma once

// Lower bounds for the best constant sup_h ||K h||_{q,w} / ||h||_{p,v} of a
// discretised inequality.  Every method returns a witness whose ratio is the
// reported value, so each estimate is a certified lower bound of the
// discrete optimum.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hardy/discrete.hpp"
#include "hardy/errors.hpp"
#include "hardy/inequality.hpp"

namespace hardy {

enum class Method { atom, k_atom, power_iteration, multistart_ascent };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::atom: return "atom";
    case Method::k_atom: return "k_atom";
    case Method::power_iteration: return "power_iteration";
    case Method::multistart_ascent: return "multistart_ascent";
  }
  return "?";
}

struct BestConstantEstimate {
  double value = 0.0;
  GridFunction witness;
  Method method = Method::atom;
  std::size_t iterations = 0;
  bool converged = false;
};

struct SolverOptions {
  bool k_atom = false;
  bool power = true;
  bool ascent = true;
  int k = 2;
  std::size_t subgrid = 16;
  std::size_t budget = 100000;
  int restarts = 32;
  int ascent_steps = 300;
  std::optional<std::uint64_t> seed;  // falls back to the spec's seed
};

namespace detail {

/// Ratio evaluations with reusable buffers, plus the per-cell normalisation
/// s_j = ||e_j||_{p,v}^{-1}.  Cells of infinite (or zero) right-hand mass are
/// inadmissible and always carry h = 0.
class Evaluator {
 public:
  explicit Evaluator(const DiscreteInequality& ineq) : ineq_(ineq), scale_(ineq.size(), 0.0) {
    for (std::size_t j = 0; j < ineq.size(); ++j) {
      const double m = std::isinf(ineq.p) ? ineq.rhs_point[j] : ineq.rhs_mass[j];
      if (m > 0.0 && std::isfinite(m)) {
        scale_[j] = std::isinf(ineq.p) ? 1.0 / m : std::pow(m, -1.0 / ineq.p);
        admissible_.push_back(j);
      }
    }
  }

  double operator()(std::span<const double> h) {
    ++count_;
    const double den = ineq_.rhs(h);
    if (!(den > 0.0) || std::isinf(den)) return 0.0;
    return ineq_.lhs(h, ws_, g_) / den;
  }

  const DiscreteInequality& ineq() const { return ineq_; }
  std::size_t size() const { return ineq_.size(); }
  std::span<const double> scale() const { return scale_; }
  const std::vector<std::size_t>& admissible() const { return admissible_; }
  std::size_t count() const { return count_; }
  Workspace& ws() { return ws_; }
  std::vector<double>& g() { return g_; }

 private:
  const DiscreteInequality& ineq_;
  std::vector<double> scale_;
  std::vector<std::size_t> admissible_;
  Workspace ws_;
  std::vector<double> g_;
  std::size_t count_ = 0;
};

/// Grid-scan then golden-section maximisation of f on [a, b] with `evals` calls.
template <class F>
std::pair<double, double> line_max(F&& f, double a, double b, int evals) {
  const int scan = std::max(3, evals / 3);
  double best_x = a, best = -1.0;
  const double step = (b - a) / (scan - 1);
  for (int k = 0; k < scan; ++k) {
    const double x = a + step * k;
    const double v = f(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  double lo = std::max(a, best_x - step), hi = std::min(b, best_x + step);
  const double invphi = 0.6180339887498949;
  double c = hi - invphi * (hi - lo), d = lo + invphi * (hi - lo);
  double fc = f(c), fd = f(d);
  for (int it = scan + 2; it < evals; ++it) {
    if (fc > fd) {
      hi = d, d = c, fd = fc;
      c = hi - invphi * (hi - lo);
      fc = f(c);
    } else {
      lo = c, c = d, fc = fd;
      d = lo + invphi * (hi - lo);
      fd = f(d);
    }
  }
  if (fc > best) best = fc, best_x = c;
  if (fd > best) best = fd, best_x = d;
  return {best_x, best};
}

inline BestConstantEstimate finish(const DiscreteInequality& ineq, std::vector<double> h, Method m, std::size_t iters,
                                   bool converged) {
  GridFunction witness(ineq.grid, std::move(h));
  const double value = witness.is_zero() ? 0.0 : ineq.ratio(witness.values());
  return {value, std::move(witness), m, iters, converged};
}

inline constexpr double kHeightRange = 25.0;  // relative log-heights searched by k_atom

}  // namespace detail

/// Best single cell of height one.
inline BestConstantEstimate atom_search(const DiscreteInequality& ineq) {
  detail::Evaluator eval(ineq);
  std::vector<double> h(ineq.size(), 0.0);
  double best = -1.0;
  std::size_t arg = 0;
  for (std::size_t j : eval.admissible()) {
    h[j] = 1.0;
    const double r = eval(h);
    h[j] = 0.0;
    if (r > best) {
      best = r;
      arg = j;
    }
  }
  if (best < 0.0) throw DegenerateInstance("no cell has finite right-hand mass");
  h[arg] = 1.0;
  return detail::finish(ineq, std::move(h), Method::atom, eval.count(), true);
}

/// Number of ratio evaluations k_atom_search will spend.
inline std::size_t k_atom_cost(std::size_t admissible, int k, std::size_t subgrid) {
  const std::size_t m = std::min(subgrid, admissible);
  std::size_t cost = admissible;
  if (k >= 2) cost += m * (m - 1) / 2 * 32;
  if (k >= 3) cost += m * (m - 1) * (m - 2) / 6 * 64;
  return cost;
}

/**
 * Supports of at most k cells on a coarse subgrid; heights relative to the
 * first cell are found by 1-D searches in log scale (32 evaluations per
 * pair, two coordinate sweeps of 16 per coordinate for triples).
 */
inline BestConstantEstimate k_atom_search(const DiscreteInequality& ineq, int k = 2, std::size_t subgrid = 16,
                                          std::size_t budget = 100000) {
  if (k < 1 || k > 3) throw std::invalid_argument("k_atom_search supports k in {1, 2, 3}");
  if (subgrid < 2 || subgrid > 24) throw std::invalid_argument("k_atom_search subgrid size must be in [2, 24]");
  detail::Evaluator eval(ineq);
  const auto& adm = eval.admissible();
  const auto cost = k_atom_cost(adm.size(), k, subgrid);
  if (cost > budget)
    throw BudgetExceeded("k_atom_search needs " + std::to_string(cost) + " evaluations, budget is " +
                         std::to_string(budget));
  auto best = atom_search(ineq);
  best.method = Method::k_atom;
  if (k == 1) return best;

  const std::size_t m = std::min(subgrid, adm.size());
  std::vector<std::size_t> sub(m);
  for (std::size_t a = 0; a < m; ++a) sub[a] = adm[m == 1 ? 0 : a * (adm.size() - 1) / (m - 1)];
  const auto s = eval.scale();
  std::vector<double> h(ineq.size(), 0.0);
  std::vector<double> best_h(best.witness.values().begin(), best.witness.values().end());
  double best_val = best.value;
  const double R = detail::kHeightRange;
  auto consider = [&](double val) {
    if (val > best_val) {
      best_val = val;
      best_h = h;
    }
  };

  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b) {
      const auto i = sub[a], j = sub[b];
      h[i] = s[i];
      auto f = [&](double tau) {
        h[j] = s[j] * std::exp(tau);
        return eval(h);
      };
      const auto [tau, val] = detail::line_max(f, -R, R, 32);
      f(tau);
      consider(val);
      h[i] = h[j] = 0.0;
    }

  if (k == 3) {
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b)
        for (std::size_t c = b + 1; c < m; ++c) {
          const auto i = sub[a], j = sub[b], l = sub[c];
          double tj = 0.0, tl = 0.0;
          h[i] = s[i];
          auto set = [&] {
            h[j] = s[j] * std::exp(tj);
            h[l] = s[l] * std::exp(tl);
          };
          double val = 0.0;
          for (int sweep = 0; sweep < 2; ++sweep) {
            auto fj = [&](double t) {
              tj = t;
              set();
              return eval(h);
            };
            tj = detail::line_max(fj, -R, R, 16).first;
            auto fl = [&](double t) {
              tl = t;
              set();
              return eval(h);
            };
            std::tie(tl, val) = detail::line_max(fl, -R, R, 16);
          }
          set();
          consider(eval(h));
          h[i] = h[j] = h[l] = 0.0;
        }
  }
  return detail::finish(ineq, std::move(best_h), Method::k_atom, eval.count(), true);
}

/**
 * Nonlinear power iteration h <- (K^T (g^{q-1} w) / v)^{1/(p-1)}, the
 * stationarity condition of the ratio.  Applicable for 1 < p <= q, q >= 1.
 * Tracks the running maximum.
 */
inline BestConstantEstimate power_iteration(const DiscreteInequality& ineq, int max_iter = 500, double tol = 1e-8) {
  const double p = ineq.p, q = ineq.q;
  if (!(p > 1.0) || std::isinf(p) || !(q >= p) || !(q >= 1.0))
    throw NotApplicable("power iteration needs 1 < p <= q and q >= 1");
  detail::Evaluator eval(ineq);
  const auto n = ineq.size();
  const auto s = eval.scale();
  std::vector<double> h(s.begin(), s.end()), seed(n), grad(n), best_h = h;
  double best = eval(h), last = best;
  bool converged = false;
  int it = 0;
  for (; it < max_iter; ++it) {
    std::vector<double>& g = eval.g();
    ineq.kernel.apply(h, g, eval.ws());
    if (std::isinf(q)) {
      std::size_t arg = 0;
      double m = -1.0;
      for (std::size_t i = 0; i < n; ++i)
        if (g[i] * ineq.outer.point[i] > m) m = g[i] * ineq.outer.point[i], arg = i;
      std::fill(seed.begin(), seed.end(), 0.0);
      seed[arg] = ineq.outer.point[arg];
    } else {
      for (std::size_t i = 0; i < n; ++i) seed[i] = g[i] > 0.0 ? std::pow(g[i], q - 1.0) * ineq.outer.mass[i] : 0.0;
    }
    ineq.kernel.vjp(h, seed, grad, eval.ws());
    double top = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      h[j] = s[j] > 0.0 && grad[j] > 0.0 ? std::pow(grad[j] / ineq.rhs_mass[j], 1.0 / (p - 1.0)) : 0.0;
      top = std::max(top, h[j]);
    }
    if (!(top > 0.0) || !std::isfinite(top)) break;
    for (auto& x : h) x /= top;
    const double r = eval(h);
    if (r > best) {
      best = r;
      best_h = h;
    }
    if (std::abs(r - last) <= tol * r) {
      converged = true;
      ++it;
      break;
    }
    last = r;
  }
  return detail::finish(ineq, std::move(best_h), Method::power_iteration, static_cast<std::size_t>(it), converged);
}

/**
 * Multiplicative ascent in y = log h: steps along the normalised gradient of
 * log ratio, accepted only when the ratio increases, with an adaptive step.
 * Starts: the best few atoms over a faint background, then random
 * log-normal bumps.  Deterministic for a fixed seed.
 */
inline BestConstantEstimate multistart_ascent(const DiscreteInequality& ineq, int restarts = 32,
                                              std::uint64_t seed = 0, int steps = 300) {
  detail::Evaluator eval(ineq);
  const auto n = ineq.size();
  const auto s = eval.scale();
  const auto& adm = eval.admissible();
  if (adm.empty()) throw DegenerateInstance("no cell has finite right-hand mass");
  const double p = ineq.p, q = ineq.q;

  // atom seeds: best cells by single-atom ratio
  std::vector<std::pair<double, std::size_t>> atoms;
  {
    std::vector<double> h(n, 0.0);
    for (std::size_t j : adm) {
      h[j] = s[j];
      atoms.emplace_back(eval(h), j);
      h[j] = 0.0;
    }
    std::stable_sort(atoms.begin(), atoms.end(), [](auto& a, auto& b) { return a.first > b.first; });
  }
  const int n_atom = std::min<int>(std::max(1, restarts / 4), static_cast<int>(atoms.size()));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> y(n), trial(n), h(n), seedv(n), grad(n), d(n);
  auto to_h = [&](const std::vector<double>& yy, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t j : adm) out[j] = std::exp(yy[j]);
  };

  std::vector<double> best_h(n, 0.0);
  best_h[atoms.front().second] = s[atoms.front().second];
  double best = atoms.front().first;
  std::size_t total_steps = 0;
  bool all_converged = true;

  for (int start = 0; start < restarts; ++start) {
    if (start < n_atom) {
      const auto c = atoms[start].second;
      for (std::size_t j : adm) y[j] = std::log(s[j]) + (j == c ? 0.0 : -8.0);
    } else {
      const double centre = unit(rng) * static_cast<double>(adm.size() - 1);
      const double width = std::exp(unit(rng) * std::log(std::max(2.0, adm.size() / 4.0)));
      for (std::size_t a = 0; a < adm.size(); ++a) {
        const double z = (static_cast<double>(a) - centre) / width;
        const double bump = std::exp(-0.5 * z * z) + 1e-4;
        y[adm[a]] = std::log(s[adm[a]]) + std::log(bump) + 0.5 * normal(rng);
      }
    }
    to_h(y, h);
    double cur = eval(h);
    double eta = 0.5;
    bool converged = false;
    for (int step = 0; step < steps; ++step, ++total_steps) {
      // gradient of log LHS and log RHS with respect to h
      std::vector<double>& g = eval.g();
      ineq.kernel.apply(h, g, eval.ws());
      if (std::isinf(q)) {
        std::size_t arg = 0;
        double m = -1.0;
        for (std::size_t i = 0; i < n; ++i)
          if (g[i] * ineq.outer.point[i] > m) m = g[i] * ineq.outer.point[i], arg = i;
        std::fill(seedv.begin(), seedv.end(), 0.0);
        seedv[arg] = m > 0.0 ? ineq.outer.point[arg] / m : 0.0;
      } else {
        double L = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          if (g[i] > 0.0) L += std::pow(g[i], q) * ineq.outer.mass[i];
        for (std::size_t i = 0; i < n; ++i)
          seedv[i] = g[i] > 0.0 && L > 0.0 ? std::pow(g[i], q - 1.0) * ineq.outer.mass[i] / L : 0.0;
      }
      ineq.kernel.vjp(h, seedv, grad, eval.ws());
      double Rp = 0.0;
      std::size_t rarg = adm.front();
      if (std::isinf(p)) {
        double m = -1.0;
        for (std::size_t j : adm)
          if (h[j] * ineq.rhs_point[j] > m) m = h[j] * ineq.rhs_point[j], rarg = j;
      } else {
        for (std::size_t j : adm) Rp += std::pow(h[j], p) * ineq.rhs_mass[j];
      }
      double dmax = 0.0;
      for (std::size_t j : adm) {
        const double gr = std::isinf(p) ? (j == rarg ? 1.0 / h[j] : 0.0) : std::pow(h[j], p - 1.0) * ineq.rhs_mass[j] / Rp;
        d[j] = h[j] * (grad[j] - gr);
        if (!std::isfinite(d[j])) d[j] = 0.0;
        dmax = std::max(dmax, std::abs(d[j]));
      }
      if (!(dmax > 0.0)) {
        converged = true;
        break;
      }
      for (std::size_t j : adm) trial[j] = y[j] + eta * d[j] / dmax;
      to_h(trial, h);
      const double r = eval(h);
      if (r > cur) {
        cur = r;
        y.swap(trial);
        eta = std::min(4.0, eta * 1.5);
      } else {
        eta *= 0.3;
        to_h(y, h);
        if (eta < 1e-5) {
          converged = true;
          break;
        }
      }
    }
    all_converged = all_converged && converged;
    if (cur > best) {
      best = cur;
      to_h(y, best_h);
    }
  }
  return detail::finish(ineq, std::move(best_h), Method::multistart_ascent, total_steps, all_converged);
}

/// Atom search always; power iteration when applicable; k-atom and ascent per options.
inline BestConstantEstimate best_constant(const DiscreteInequality& ineq, const SolverOptions& opts,
                                          std::uint64_t spec_seed = 0) {
  auto best = atom_search(ineq);
  auto take = [&](BestConstantEstimate e) {
    if (e.value > best.value) best = std::move(e);
  };
  if (opts.k_atom) take(k_atom_search(ineq, opts.k, opts.subgrid, opts.budget));
  if (opts.power) {
    try {
      take(power_iteration(ineq));
    } catch (const NotApplicable&) {
    }
  }
  if (opts.ascent) take(multistart_ascent(ineq, opts.restarts, opts.seed.value_or(spec_seed), opts.ascent_steps));
  best.value = ineq.ratio(best.witness.values());
  return best;
}

inline BestConstantEstimate atom_search(const InequalitySpec& s) { return atom_search(discretize(s)); }
inline BestConstantEstimate k_atom_search(const InequalitySpec& s, int k = 2, std::size_t subgrid = 16,
                                          std::size_t budget = 100000) {
  return k_atom_search(discretize(s), k, subgrid, budget);
}
inline BestConstantEstimate power_iteration(const InequalitySpec& s) { return power_iteration(discretize(s)); }
inline BestConstantEstimate multistart_ascent(const InequalitySpec& s, int restarts = 32) {
  return multistart_ascent(discretize(s), restarts, s.seed);
}
inline BestConstantEstimate best_constant(const InequalitySpec& s, const SolverOptions& opts = {}) {
  return best_constant(discretize(s), opts, s.seed);
}

}  // namespace hardy
