#pragma once

/**
 * @file functionals.hpp
 * @brief Closed-form characterization functionals for Hardy, Copson and
 * iterated Hardy-type inequalities.
 *
 * Every functional is built from exact cumulative integrals of the weights
 * plus one outer numeric pass: a supremum (grid samples refined by
 * golden-section search) or an integral (Gauss panels in log x over a log
 * grid merged with the weights' breakpoints).
 *
 * The L^1 families (right-hand side int h v) and the L^p families (right-hand
 * side (int h^p v)^{1/p}) share one engine.  Writing K for the v-factor,
 *
 *   L^1:  p = 1,  K = ess sup of 1/v over (lo, x]  (or [x, hi)),
 *   L^p:  p > 1,  K = (int v^{1-p'})^{1/p'} from the same end,
 *
 * the exponents q/(p-q) and r/(p-r) reduce to q' and r' at p = 1, and the
 * L^p formulas are exactly the L^1 ones after q -> q/p, r -> r/p,
 * v -> Phi^{1-2p} and a p-th root.
 */

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hardy/errors.hpp"
#include "hardy/quadrature.hpp"
#include "hardy/transforms.hpp"
#include "hardy/weights.hpp"

namespace hardy {

struct FunctionalValue {
  double value = 0.0;
  std::string regime;
  std::vector<std::pair<std::string, double>> parts;
  bool finite = true;

  double part(const std::string& name) const {
    for (const auto& [k, v] : parts)
      if (k == name) return v;
    throw std::out_of_range("no part named " + name);
  }
};

struct FunctionalOptions {
  std::size_t n = 512;  // log grid points for the outer pass
};

namespace detail {

using Fn = std::function<double(double)>;

inline void require_common_domain(std::initializer_list<const PiecewisePowerWeight*> ws) {
  const auto* first = *ws.begin();
  for (const auto* w : ws)
    if (!first->same_domain(*w)) throw InvalidWeight("weights must share a domain");
}

inline quad::Partition outer_partition(std::initializer_list<const PiecewisePowerWeight*> ws, std::size_t n,
                                       std::vector<double> extra = {}) {
  const auto* first = *ws.begin();
  for (const auto* w : ws) extra.insert(extra.end(), w->breakpoints().begin(), w->breakpoints().end());
  return quad::Partition::log_spaced(first->lo(), first->hi(), std::max<std::size_t>(n, 16), extra);
}

inline double safe_pow(double x, double e) {
  if (x > 0.0) return std::pow(x, e);
  if (e == 0.0) return 1.0;
  return e > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

/// sup over the partition points, refined around the best sample.
template <class F>
double sup_over(const quad::Partition& part, F&& f) {
  return quad::sup_refined(f, part.points());
}

/// int_a^b f, with a possibly singular integrand at `end` (a or b) of the
/// panel containing it: that partial panel goes to tanh-sinh.
template <class F>
double integrate_singular(const quad::Partition& part, F&& f, double a, double b, bool singular_at_b) {
  if (!(b > a)) return 0.0;
  const auto pts = part.points();
  const auto ka = part.panel_of(a), kb = part.panel_of(b);
  if (ka == kb) return quad::tanh_sinh(f, a, b, 1e-12);
  double s = 0.0;
  if (singular_at_b) {
    s += quad::integrate(part, f, a, pts[kb]);
    s += quad::tanh_sinh(f, pts[kb], b, 1e-12);
  } else {
    s += quad::tanh_sinh(f, a, pts[ka + 1], 1e-12);
    s += quad::integrate(part, f, pts[ka + 1], b);
  }
  return s;
}

/**
 * Non-increasing envelope S(x) = sup_{t >= x} g(t) of a piecewise smooth g.
 * g is sampled on the partition points; every interior local maximum is
 * refined by golden-section search and kept as an extra candidate.
 */
class SuffixSup {
 public:
  SuffixSup(const quad::Partition& part, Fn g) : g_(std::move(g)) {
    const auto pts = part.points();
    std::vector<double> val(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) val[i] = g_(pts[i]);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      loc_.push_back(pts[i]);
      best_.push_back(val[i]);
      const bool left = i == 0 || val[i] >= val[i - 1];
      const bool right = i + 1 == pts.size() || val[i] >= val[i + 1];
      if (left && right && val[i] > 0.0) {
        // refine on both brackets and keep the argmax as a candidate
        for (int side = -1; side <= 1; side += 2) {
          if ((side < 0 && i == 0) || (side > 0 && i + 1 == pts.size())) continue;
          const double a = side < 0 ? pts[i - 1] : pts[i];
          const double b = side < 0 ? pts[i] : pts[i + 1];
          const auto [x, v] = argmax(a, b);
          if (v > val[i]) {
            loc_.push_back(x);
            best_.push_back(v);
            peaks_.push_back(x);
          }
        }
      }
    }
    std::vector<std::size_t> idx(loc_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return loc_[a] < loc_[b]; });
    std::vector<double> l, s;
    for (auto i : idx) {
      l.push_back(loc_[i]);
      s.push_back(best_[i]);
    }
    for (std::size_t i = s.size() - 1; i-- > 0;) s[i] = std::max(s[i], s[i + 1]);
    loc_ = std::move(l);
    best_ = std::move(s);
  }

  double operator()(double x) const {
    auto it = std::lower_bound(loc_.begin(), loc_.end(), x);
    double s = g_(x);
    if (it != loc_.end()) s = std::max(s, best_[static_cast<std::size_t>(it - loc_.begin())]);
    return s;
  }

  /// Refined interior maxima of g (extra panel boundaries for the outer pass).
  const std::vector<double>& peaks() const { return peaks_; }

 private:
  std::pair<double, double> argmax(double a, double b) const {
    const double invphi = 0.6180339887498949;
    double lo = std::log(a), hi = std::log(b);
    double c = hi - invphi * (hi - lo), d = lo + invphi * (hi - lo);
    double fc = g_(std::exp(c)), fd = g_(std::exp(d));
    for (int it = 0; it < 80 && hi - lo > 1e-15 * (1 + std::abs(lo)); ++it) {
      if (fc > fd) {
        hi = d, d = c, fd = fc;
        c = hi - invphi * (hi - lo);
        fc = g_(std::exp(c));
      } else {
        lo = c, c = d, fc = fd;
        d = lo + invphi * (hi - lo);
        fd = g_(std::exp(d));
      }
    }
    const double x = std::exp(0.5 * (lo + hi));
    return {x, g_(x)};
  }

  Fn g_;
  std::vector<double> loc_, best_, peaks_;
};

/// Exponent case from comparing q and r with the right-hand exponent p.
inline char regime_of(double p, double q, double r) {
  const bool q_ge = q >= p, r_ge = r >= p;
  if (q_ge && r_ge) return 'a';
  if (!q_ge && r_ge) return 'b';
  if (q_ge && !r_ge) return 'c';
  return 'd';
}

inline void finish(FunctionalValue& f) {
  f.value = 0.0;
  for (const auto& [k, v] : f.parts) f.value += v;
  f.finite = std::isfinite(f.value);
}

/// Single-level family: Hardy (tail weight) or Copson (head weight) with v-factor K.
inline FunctionalValue single_level(const PiecewisePowerWeight& w, const PiecewisePowerWeight& v, bool hardy, const Fn& K, double p, double q,
                                    std::size_t n, const std::string& family) {
  const auto Wc = hardy ? upper_cumulative(w) : lower_cumulative(w);
  const auto part = outer_partition({&w, &v}, n);
  FunctionalValue out;
  if (q >= p) {
    out.regime = family + "(a)";
    const double s = sup_over(part, [&](double x) { return safe_pow(Wc(x), 1.0 / q) * K(x); });
    out.parts.emplace_back("F", s);
  } else {
    out.regime = family + "(b)";
    const double rho = q / (p - q);
    const double I = quad::integrate(
        part, [&](double x) { return safe_pow(Wc(x), rho) * w(x) * safe_pow(K(x), p * rho); }, part.lo(), part.hi());
    out.parts.emplace_back("F", safe_pow(I, 1.0 / (p * rho)));
  }
  finish(out);
  return out;
}

/**
 * Iterated family for ( int ( int_x^hi (int_lo^t h)^r u dt )^{q/r} w dx )^{1/q}.
 * K is non-decreasing.
 */
inline FunctionalValue hardy_copson_family(const PiecewisePowerWeight& u, const PiecewisePowerWeight& v,
                                           const PiecewisePowerWeight& w, const Fn& K,
                                           double p, double q, double r, std::size_t n, const std::string& family,
                                           const std::string& tag) {
  const auto W = lower_cumulative(w);
  const auto Us = upper_cumulative(u);
  auto part = outer_partition({&u, &v, &w}, n);
  const char regime = regime_of(p, q, r);
  FunctionalValue out;
  out.regime = family + "(" + regime + ")";
  const double rho = q < p ? q / (p - q) : 0.0;
  const double sigma = r < p ? r / (p - r) : 0.0;
  auto name = [&](int k) { return tag + std::to_string(k); };

  // B(x) = int_x^hi Us^{q/r} w
  auto b_integrand = [&](double t) { return safe_pow(Us(t), q / r) * w(t); };
  const quad::Cumulative B(part, std::function<double(double)>(b_integrand));
  // D(t) = int_t^hi Us^sigma u K^{p sigma}
  auto d_integrand = [&](double x) { return safe_pow(Us(x), sigma) * u(x) * safe_pow(K(x), p * sigma); };
  const quad::Cumulative D(part, std::function<double(double)>(d_integrand));

  auto F1 = [&] {
    return sup_over(part, [&](double x) { return safe_pow(W(x), 1.0 / q) * safe_pow(Us(x), 1.0 / r) * K(x); });
  };
  auto F2 = [&] { return sup_over(part, [&](double x) { return safe_pow(B.tail(x), 1.0 / q) * K(x); }); };
  auto F3 = [&] {
    SuffixSup S(part, [&](double t) { return safe_pow(Us(t), 1.0 / r) * K(t); });
    std::vector<double> extra(S.peaks());
    const auto fine = outer_partition({&u, &v, &w}, n, extra);
    const double I = quad::integrate(
        fine, [&](double x) { return safe_pow(S(x), p * rho) * safe_pow(W(x), rho) * w(x); }, fine.lo(), fine.hi());
    return safe_pow(I, 1.0 / (p * rho));
  };
  auto F4 = [&] {
    const double I = quad::integrate(
        part,
        [&](double x) {
          return safe_pow(B.tail(x), rho) * safe_pow(Us(x), q / r) * safe_pow(K(x), p * rho) * w(x);
        },
        part.lo(), part.hi());
    return safe_pow(I, 1.0 / (p * rho));
  };
  auto F5 = [&] {
    return sup_over(part, [&](double t) { return safe_pow(W(t), 1.0 / q) * safe_pow(D.tail(t), 1.0 / (p * sigma)); });
  };
  auto F6 = [&] {
    const double I = quad::integrate(
        part, [&](double t) { return safe_pow(W(t), rho) * w(t) * safe_pow(D.tail(t), rho / sigma); }, part.lo(),
        part.hi());
    return safe_pow(I, 1.0 / (p * rho));
  };

  switch (regime) {
    case 'a':
      out.parts = {{name(1), F1()}, {name(2), F2()}};
      break;
    case 'b':
      out.parts = {{name(3), F3()}, {name(4), F4()}};
      break;
    case 'c':
      out.parts = {{name(2), F2()}, {name(5), F5()}};
      break;
    default:
      out.parts = {{name(4), F4()}, {name(6), F6()}};
      break;
  }
  finish(out);
  return out;
}

/**
 * Iterated family for ( int ( int_x^hi (int_t^hi h)^r u dt )^{q/r} w dx )^{1/q}.
 * K is non-increasing.
 */
inline FunctionalValue copson_copson_family(const PiecewisePowerWeight& u, const PiecewisePowerWeight& v,
                                            const PiecewisePowerWeight& w, const Fn& K,
                                            double p, double q, double r, std::size_t n, const std::string& family,
                                            const std::string& tag) {
  const auto U = lower_cumulative(u);
  const auto W = lower_cumulative(w);
  const auto part = outer_partition({&u, &v, &w}, n);
  const char regime = regime_of(p, q, r);
  FunctionalValue out;
  out.regime = family + "(" + regime + ")";
  const double rho = q < p ? q / (p - q) : 0.0;
  const double sigma = r < p ? r / (p - r) : 0.0;
  auto name = [&](int k) { return tag + std::to_string(k); };

  // J(t) = int_lo^t w(s) (U(t) - U(s))^{q/r} ds
  auto J = [&](double t) {
    const double Ut = U(t);
    return integrate_singular(
        part, [&](double s) { return w(s) * safe_pow(Ut - U(s), q / r); }, part.lo(), t, true);
  };
  // L(t) = int_t^hi (U(x) - U(t))^sigma u K^{p sigma}
  auto L = [&](double t) {
    const double Ut = U(t);
    return integrate_singular(
        part, [&](double x) { return safe_pow(U(x) - Ut, sigma) * u(x) * safe_pow(K(x), p * sigma); }, t, part.hi(),
        false);
  };
  // sup_{x >= t} (U(x) - U(t))^a K(x)^b
  auto tail_sup = [&](double t, double a, double b) {
    const double Ut = U(t);
    const auto pts = part.points();
    std::vector<double> cand{t};
    for (double x : pts)
      if (x > t) cand.push_back(x);
    return quad::sup_refined([&](double x) { return safe_pow(U(x) - Ut, a) * safe_pow(K(x), b); }, cand);
  };

  auto E1 = [&] { return sup_over(part, [&](double t) { return safe_pow(J(t), 1.0 / q) * K(t); }); };
  auto E2 = [&] {
    const double I = quad::integrate(
        part, [&](double t) { return safe_pow(W(t), rho) * w(t) * safe_pow(tail_sup(t, 1.0 / r, 1.0), p * rho); },
        part.lo(), part.hi());
    return safe_pow(I, 1.0 / (p * rho));
  };
  auto E3 = [&] {
    const double I = quad::integrate(
        part, [&](double t) { return safe_pow(J(t), rho) * w(t) * tail_sup(t, q / r, p * rho); }, part.lo(),
        part.hi());
    return safe_pow(I, 1.0 / (p * rho));
  };
  auto E4 = [&] {
    return sup_over(part, [&](double t) { return safe_pow(W(t), 1.0 / q) * safe_pow(L(t), 1.0 / (p * sigma)); });
  };
  auto E5 = [&] {
    const double I = quad::integrate(
        part, [&](double t) { return safe_pow(W(t), rho) * w(t) * safe_pow(L(t), rho / sigma); }, part.lo(),
        part.hi());
    return safe_pow(I, 1.0 / (p * rho));
  };

  switch (regime) {
    case 'a':
      out.parts = {{name(1), E1()}};
      break;
    case 'b':
      out.parts = {{name(2), E2()}, {name(3), E3()}};
      break;
    case 'c':
      out.parts = {{name(1), E1()}, {name(4), E4()}};
      break;
    default:
      out.parts = {{name(3), E3()}, {name(5), E5()}};
      break;
  }
  finish(out);
  return out;
}

inline void check_exponent(double e, const char* name) {
  if (!(e > 0.0) || !std::isfinite(e)) throw std::invalid_argument(std::string(name) + " must be in (0, inf)");
}

inline void check_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must be in (1, inf)");
}

/// (int v^{1-p'})^{1/p'} from the lower (hardy) or upper (copson) end.
inline Fn conjugate_factor(const PiecewisePowerWeight& v, double p, ReductionKind kind) {
  const ReductionPair pair(v, p, kind);  // throws ConditionViolated on divergence
  const double pc = pair.p_conjugate();
  auto V = pair.cumulative();
  return [V, pc](double x) { return safe_pow(V(x), 1.0 / pc); };
}

}  // namespace detail

/// sup_h ||int_lo^x h||_{q,w} / ||h||_{1,v}: sup form for q >= 1, integral form for q < 1.
inline FunctionalValue l1_hardy_constant(const PiecewisePowerWeight& w, const PiecewisePowerWeight& v, double q,
                                         const FunctionalOptions& opt = {}) {
  detail::check_exponent(q, "q");
  detail::require_common_domain({&w, &v});
  const double lo = v.lo();
  auto K = [&v, lo](double x) { return v.inverse_sup(lo, x); };
  return detail::single_level(w, v, true, K, 1.0, q, opt.n, "l1_hardy");
}

/// Copson mirror of l1_hardy_constant.
inline FunctionalValue l1_copson_constant(const PiecewisePowerWeight& w, const PiecewisePowerWeight& v, double q,
                                          const FunctionalOptions& opt = {}) {
  detail::check_exponent(q, "q");
  detail::require_common_domain({&w, &v});
  const double hi = v.hi();
  auto K = [&v, hi](double x) { return v.inverse_sup(x, hi); };
  return detail::single_level(w, v, false, K, 1.0, q, opt.n, "l1_copson");
}

/// Characterization of ||int_lo^x h||_{q,w} <= C ||h||_{p,v}: case (a) p <= q, (b) q < p.
inline FunctionalValue hardy_constant(const PiecewisePowerWeight& w, const PiecewisePowerWeight& v, double p,
                                      double q, const FunctionalOptions& opt = {}) {
  detail::check_p(p);
  detail::check_exponent(q, "q");
  detail::require_common_domain({&w, &v});
  return detail::single_level(w, v, true, detail::conjugate_factor(v, p, ReductionKind::hardy), p, q, opt.n, "hardy");
}

inline FunctionalValue copson_constant(const PiecewisePowerWeight& w, const PiecewisePowerWeight& v, double p,
                                       double q, const FunctionalOptions& opt = {}) {
  detail::check_p(p);
  detail::check_exponent(q, "q");
  detail::require_common_domain({&w, &v});
  return detail::single_level(w, v, false, detail::conjugate_factor(v, p, ReductionKind::copson), p, q, opt.n, "copson");
}

/// ( int ( int_x^hi (int_lo^t h)^r u )^{q/r} w )^{1/q} <= C int h v; parts F1..F6.
inline FunctionalValue iterated_hardy_copson_l1(const PiecewisePowerWeight& u, const PiecewisePowerWeight& v,
                                                const PiecewisePowerWeight& w, double q, double r,
                                                const FunctionalOptions& opt = {}) {
  detail::check_exponent(q, "q");
  detail::check_exponent(r, "r");
  detail::require_common_domain({&u, &v, &w});
  const double lo = v.lo();
  auto K = [&v, lo](double x) { return v.inverse_sup(lo, x); };
  return detail::hardy_copson_family(u, v, w, K, 1.0, q, r, opt.n, "hardy_copson_l1", "F");
}

/// Same inequality with ||h||_{p,v} on the right.
inline FunctionalValue iterated_hardy_copson(const PiecewisePowerWeight& u, const PiecewisePowerWeight& v,
                                             const PiecewisePowerWeight& w, double p, double q, double r,
                                             const FunctionalOptions& opt = {}) {
  detail::check_p(p);
  detail::check_exponent(q, "q");
  detail::check_exponent(r, "r");
  detail::require_common_domain({&u, &v, &w});
  return detail::hardy_copson_family(u, v, w, detail::conjugate_factor(v, p, ReductionKind::hardy), p, q, r, opt.n,
                                     "hardy_copson", "F");
}

/// ( int ( int_x^hi (int_t^hi h)^r u )^{q/r} w )^{1/q} <= C int h v; parts E1..E5.
inline FunctionalValue iterated_copson_copson_l1(const PiecewisePowerWeight& u, const PiecewisePowerWeight& v,
                                                 const PiecewisePowerWeight& w, double q, double r,
                                                 const FunctionalOptions& opt = {}) {
  detail::check_exponent(q, "q");
  detail::check_exponent(r, "r");
  detail::require_common_domain({&u, &v, &w});
  const double hi = v.hi();
  auto K = [&v, hi](double x) { return v.inverse_sup(x, hi); };
  return detail::copson_copson_family(u, v, w, K, 1.0, q, r, opt.n, "copson_copson_l1", "E");
}

inline FunctionalValue iterated_copson_copson(const PiecewisePowerWeight& u, const PiecewisePowerWeight& v,
                                              const PiecewisePowerWeight& w, double p, double q, double r,
                                              const FunctionalOptions& opt = {}) {
  detail::check_p(p);
  detail::check_exponent(q, "q");
  detail::check_exponent(r, "r");
  detail::require_common_domain({&u, &v, &w});
  return detail::copson_copson_family(u, v, w, detail::conjugate_factor(v, p, ReductionKind::copson), p, q, r, opt.n,
                                      "copson_copson", "E");
}

/**
 * The L^p functional computed the long way round: the L^1 functional of the
 * reduced inequality (q/p, r/p, right weight Phi^{1-2p}, whose inverse
 * running sup is Phi^{2p-1}), each part raised to 1/p.  Agrees part by part
 * with iterated_hardy_copson since (2p-1)/(p'+1) = p-1.
 */
inline FunctionalValue iterated_hardy_copson_composed(const PiecewisePowerWeight& u, const PiecewisePowerWeight& v,
                                                      const PiecewisePowerWeight& w, double p, double q, double r,
                                                      const FunctionalOptions& opt = {}) {
  detail::check_p(p);
  detail::require_common_domain({&u, &v, &w});
  const ReductionPair pair(v, p, ReductionKind::hardy);
  auto M = [pair, p](double x) { return detail::safe_pow(pair.primitive(x), 2.0 * p - 1.0); };
  auto f = detail::hardy_copson_family(u, v, w, M, 1.0, q / p, r / p, opt.n, "hardy_copson_composed", "F");
  for (auto& [k, val] : f.parts) val = detail::safe_pow(val, 1.0 / p);
  detail::finish(f);
  return f;
}

inline FunctionalValue iterated_copson_copson_composed(const PiecewisePowerWeight& u, const PiecewisePowerWeight& v,
                                                       const PiecewisePowerWeight& w, double p, double q, double r,
                                                       const FunctionalOptions& opt = {}) {
  detail::check_p(p);
  detail::require_common_domain({&u, &v, &w});
  const ReductionPair pair(v, p, ReductionKind::copson);
  auto M = [pair, p](double x) { return detail::safe_pow(pair.primitive(x), 2.0 * p - 1.0); };
  auto f = detail::copson_copson_family(u, v, w, M, 1.0, q / p, r / p, opt.n, "copson_copson_composed", "E");
  for (auto& [k, val] : f.parts) val = detail::safe_pow(val, 1.0 / p);
  detail::finish(f);
  return f;
}

}  // namespace hardy
