#pragma once

/**
 * @file weights.hpp
 * @brief Piecewise-power weights on a truncated half-line.
 *
 * A weight is w(x) = c_i * x^{a_i} on (x_i, x_{i+1}) for a strictly increasing
 * partition x_0 < ... < x_n of a window (x_0, x_n) inside (0, inf).  The class
 * is closed under real powers and positive scaling, and every single-level
 * integral has a closed form, so cumulative functions
 *
 *     V(x)   = int_{x_0}^{x}   w(t) dt      (lower)
 *     V_*(x) = int_{x}^{x_n}   w(t) dt      (upper)
 *
 * are evaluated exactly up to rounding.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hardy/errors.hpp"

namespace hardy {

/// Exponents this close to -1 are treated as -1 (logarithmic antiderivative).
inline constexpr double kLogSnap = 1e-12;

namespace detail {

/// Exact int_a^b c t^e dt for 0 < a <= b.
inline double power_integral(double c, double e, double a, double b) {
  if (b <= a) return 0.0;
  const double lr = std::log(b / a);
  const double k = e + 1.0;
  if (std::abs(k) <= kLogSnap) return c * lr;
  // a^k * (exp(k lr) - 1) / k, stable for small k and for b/a close to 1
  return c * std::pow(a, k) * std::expm1(k * lr) / k;
}

}  // namespace detail

/// One piece of a piecewise-power weight: c * x^a on (from, to).
struct PowerSegment {
  double from;
  double to;
  double c;
  double a;
};

class PiecewisePowerWeight {
 public:
  PiecewisePowerWeight() = default;

  explicit PiecewisePowerWeight(std::span<const PowerSegment> segments) {
    if (segments.empty()) throw InvalidWeight("weight needs at least one segment");
    breaks_.reserve(segments.size() + 1);
    breaks_.push_back(segments.front().from);
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const auto& s = segments[i];
      if (!(s.from > 0.0) || !std::isfinite(s.to) || !(s.to > s.from))
        throw InvalidWeight("segment " + std::to_string(i) + " has an invalid interval");
      if (i > 0 && s.from != segments[i - 1].to)
        throw InvalidWeight("segment " + std::to_string(i) + " is not contiguous with its predecessor");
      if (!(s.c > 0.0) || !std::isfinite(s.c))
        throw InvalidWeight("segment " + std::to_string(i) + " has a non-positive coefficient");
      if (!std::isfinite(s.a))
        throw InvalidWeight("segment " + std::to_string(i) + " has a non-finite exponent");
      breaks_.push_back(s.to);
      coef_.push_back(s.c);
      expo_.push_back(std::abs(s.a + 1.0) <= kLogSnap ? -1.0 : s.a);
    }
  }

  PiecewisePowerWeight(std::initializer_list<PowerSegment> segments)
      : PiecewisePowerWeight(std::span<const PowerSegment>(segments.begin(), segments.size())) {}

  /// c * x^a on (lo, hi).
  static PiecewisePowerWeight power(double c, double a, double lo, double hi) {
    const PowerSegment s{lo, hi, c, a};
    return PiecewisePowerWeight(std::span<const PowerSegment>(&s, 1));
  }
  static PiecewisePowerWeight constant(double c, double lo, double hi) { return power(c, 0.0, lo, hi); }

  double lo() const { return breaks_.front(); }
  double hi() const { return breaks_.back(); }
  std::size_t segments() const { return coef_.size(); }
  std::span<const double> breakpoints() const { return breaks_; }
  PowerSegment segment(std::size_t i) const { return {breaks_[i], breaks_[i + 1], coef_[i], expo_[i]}; }

  std::vector<PowerSegment> segment_list() const {
    std::vector<PowerSegment> out;
    for (std::size_t i = 0; i < segments(); ++i) out.push_back(segment(i));
    return out;
  }

  /// Index of the segment containing x; a breakpoint belongs to its right segment.
  std::size_t segment_of(double x) const {
    if (!(x >= lo() && x <= hi()))
      throw OutOfDomain("x = " + std::to_string(x) + " outside (" + std::to_string(lo()) + ", " +
                        std::to_string(hi()) + ")");
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    auto idx = static_cast<std::size_t>(it - breaks_.begin());
    return std::min(idx == 0 ? 0 : idx - 1, segments() - 1);
  }

  double operator()(double x) const {
    const auto i = segment_of(x);
    return coef_[i] * std::pow(x, expo_[i]);
  }

  /// Exact int_a^b w.
  double integrate(double a, double b) const {
    if (!(a >= lo() && b <= hi() && a <= b))
      throw OutOfDomain("integration interval outside the weight's domain");
    double sum = 0.0;
    for (std::size_t i = segment_of(a); i < segments() && breaks_[i] < b; ++i) {
      const double s0 = std::max(a, breaks_[i]);
      const double s1 = std::min(b, breaks_[i + 1]);
      sum += detail::power_integral(coef_[i], expo_[i], s0, s1);
    }
    return sum;
  }

  double total() const { return integrate(lo(), hi()); }

  /// w^s, segment-wise (c, a) -> (c^s, a s).
  PiecewisePowerWeight pow(double s) const {
    auto segs = segment_list();
    for (auto& g : segs) {
      g.c = std::pow(g.c, s);
      g.a *= s;
    }
    return PiecewisePowerWeight(segs);
  }

  PiecewisePowerWeight scaled(double lambda) const {
    auto segs = segment_list();
    for (auto& g : segs) g.c *= lambda;
    return PiecewisePowerWeight(segs);
  }

  PiecewisePowerWeight operator*(const PiecewisePowerWeight& o) const;

  /// Restriction to (a, b) inside the current domain.
  PiecewisePowerWeight restricted(double a, double b) const {
    if (!(a >= lo() * (1 - 1e-14) && b <= hi() * (1 + 1e-14) && a < b))
      throw OutOfDomain("restriction window not inside the weight's domain");
    std::vector<PowerSegment> out;
    for (const auto& g : segment_list()) {
      const double s0 = std::max(a, g.from);
      const double s1 = std::min(b, g.to);
      if (s1 > s0) out.push_back({s0, s1, g.c, g.a});
    }
    return PiecewisePowerWeight(out);
  }

  /// sup of 1/w over the closed interval [a, b]; segment end values count, so
  /// the result is the upper-semicontinuous envelope of the essential supremum.
  double inverse_sup(double a, double b) const {
    double best = 0.0;
    for (std::size_t i = segment_of(a); i < segments(); ++i) {
      if (breaks_[i] > b) break;
      const double s0 = std::max(a, breaks_[i]);
      const double s1 = std::min(b, breaks_[i + 1]);
      const double e = -expo_[i];
      // c^{-1} t^{-a} is monotone on the piece: check both ends
      best = std::max({best, std::pow(s0, e) / coef_[i], std::pow(s1, e) / coef_[i]});
    }
    return best;
  }

  /// The untruncated integral from 0 would diverge.
  bool diverges_at_zero() const { return expo_.front() <= -1.0; }
  /// The untruncated integral to infinity would diverge.
  bool diverges_at_infinity() const { return expo_.back() >= -1.0; }

  bool same_domain(const PiecewisePowerWeight& o, double rel = 1e-12) const {
    return std::abs(lo() - o.lo()) <= rel * lo() && std::abs(hi() - o.hi()) <= rel * hi();
  }

  std::string describe() const {
    std::string s = "[";
    for (std::size_t i = 0; i < segments(); ++i) {
      if (i) s += ", ";
      s += "(" + std::to_string(breaks_[i]) + "," + std::to_string(breaks_[i + 1]) +
           "): " + std::to_string(coef_[i]) + "*x^" + std::to_string(expo_[i]);
    }
    return s + "]";
  }

 private:
  std::vector<double> breaks_;
  std::vector<double> coef_;
  std::vector<double> expo_;
};

/// Pointwise product on the common refinement of both partitions.
inline PiecewisePowerWeight PiecewisePowerWeight::operator*(const PiecewisePowerWeight& o) const {
  if (!same_domain(o)) throw InvalidWeight("product of weights with different domains");
  std::vector<double> pts(breaks_.begin(), breaks_.end());
  pts.insert(pts.end(), o.breaks_.begin(), o.breaks_.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  pts.front() = lo();
  pts.back() = hi();
  std::vector<PowerSegment> out;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    if (!(pts[k + 1] > pts[k])) continue;
    const double mid = std::sqrt(pts[k] * pts[k + 1]);
    const auto i = segment_of(mid);
    const auto j = o.segment_of(mid);
    out.push_back({pts[k], pts[k + 1], coef_[i] * o.coef_[j], expo_[i] + o.expo_[j]});
  }
  return PiecewisePowerWeight(out);
}

enum class Direction { lower, upper };

/**
 * Exact cumulative integral of a piecewise-power weight.
 *
 * lower: V(x) = int_{x_0}^x w, non-decreasing, V(x_0) = 0.
 * upper: V_*(x) = int_x^{x_n} w, non-increasing, V_*(x_n) = 0.
 *
 * `diverges` flags that the untruncated integral (from 0, resp. to infinity)
 * would be infinite.
 */
class CumulativeFn {
 public:
  CumulativeFn() = default;
  CumulativeFn(PiecewisePowerWeight w, Direction dir) : w_(std::move(w)), dir_(dir) {
    const auto n = w_.segments();
    partial_.assign(n + 1, 0.0);
    std::vector<double> piece(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto s = w_.segment(i);
      piece[i] = detail::power_integral(s.c, s.a, s.from, s.to);
    }
    if (dir_ == Direction::lower) {
      for (std::size_t i = 0; i < n; ++i) partial_[i + 1] = partial_[i] + piece[i];
    } else {
      for (std::size_t i = n; i-- > 0;) partial_[i] = partial_[i + 1] + piece[i];
    }
    diverges_ = dir_ == Direction::lower ? w_.diverges_at_zero() : w_.diverges_at_infinity();
  }

  double operator()(double x) const {
    const auto i = w_.segment_of(x);
    const auto s = w_.segment(i);
    if (dir_ == Direction::lower) return partial_[i] + detail::power_integral(s.c, s.a, s.from, x);
    return partial_[i + 1] + detail::power_integral(s.c, s.a, x, s.to);
  }

  Direction direction() const { return dir_; }
  bool diverges() const { return diverges_; }
  const PiecewisePowerWeight& weight() const { return w_; }
  double lo() const { return w_.lo(); }
  double hi() const { return w_.hi(); }

 private:
  PiecewisePowerWeight w_;
  Direction dir_ = Direction::lower;
  std::vector<double> partial_;
  bool diverges_ = false;
};

inline CumulativeFn lower_cumulative(const PiecewisePowerWeight& w) { return {w, Direction::lower}; }
inline CumulativeFn upper_cumulative(const PiecewisePowerWeight& w) { return {w, Direction::upper}; }

}  // namespace hardy
