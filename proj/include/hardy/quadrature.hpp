#pragma once

// Panel quadrature in the logarithmic variable t = log x, plus the small
// 1-D maximisation helpers used for suprema of closed-form expressions.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace hardy::quad {

inline constexpr unsigned kGaussPoints = 7;

struct Rule {
  std::array<double, kGaussPoints> node{};    // on [-1, 1]
  std::array<double, kGaussPoints> weight{};
};

inline const Rule& gauss_rule() {
  static const Rule rule = [] {
    using G = boost::math::quadrature::gauss<double, kGaussPoints>;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    Rule r;
    std::size_t k = 0;
    for (std::size_t i = x.size(); i-- > 0;) {
      if (x[i] == 0.0) continue;
      r.node[k] = -x[i];
      r.weight[k++] = w[i];
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      r.node[k] = x[i];
      r.weight[k++] = w[i];
    }
    return r;
  }();
  return rule;
}

/// int_a^b f(x) dx with one Gauss panel in log x (0 < a <= b).
template <class F>
double log_gauss(F&& f, double a, double b) {
  if (!(b > a)) return 0.0;
  const auto& rule = gauss_rule();
  const double la = std::log(a), lb = std::log(b);
  const double half = 0.5 * (lb - la), mid = 0.5 * (lb + la);
  double sum = 0.0;
  for (unsigned k = 0; k < kGaussPoints; ++k) {
    const double x = std::exp(mid + half * rule.node[k]);
    sum += rule.weight[k] * f(x) * x;
  }
  return sum * half;
}

/// Sorted panel boundaries: a log grid merged with weight breakpoints.
class Partition {
 public:
  Partition() = default;
  explicit Partition(std::vector<double> pts) : pts_(std::move(pts)) {
    std::sort(pts_.begin(), pts_.end());
    std::vector<double> merged;
    for (double p : pts_) {
      if (merged.empty() || p > merged.back() * (1 + 1e-13)) merged.push_back(p);
    }
    pts_ = std::move(merged);
  }

  /// n log-spaced points on [lo, hi] plus extra breakpoints inside the window.
  static Partition log_spaced(double lo, double hi, std::size_t n, std::span<const double> extra = {}) {
    std::vector<double> pts;
    const double step = std::log(hi / lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) pts.push_back(lo * std::exp(step * static_cast<double>(i)));
    pts.back() = hi;
    for (double e : extra)
      if (e > lo && e < hi) pts.push_back(e);
    return Partition(std::move(pts));
  }

  std::span<const double> points() const { return pts_; }
  std::size_t panels() const { return pts_.size() - 1; }
  double lo() const { return pts_.front(); }
  double hi() const { return pts_.back(); }

  /// Panel k with pts[k] <= x < pts[k+1] (x == hi maps to the last panel).
  std::size_t panel_of(double x) const {
    auto it = std::upper_bound(pts_.begin(), pts_.end(), x);
    auto k = static_cast<std::size_t>(it - pts_.begin());
    return std::min(k == 0 ? 0 : k - 1, panels() - 1);
  }

 private:
  std::vector<double> pts_;
};

/// int_a^b f over the partition's panels, split at every partition point.
template <class F>
double integrate(const Partition& part, F&& f, double a, double b) {
  if (!(b > a)) return 0.0;
  const auto pts = part.points();
  double sum = 0.0;
  for (std::size_t k = part.panel_of(a); k < part.panels() && pts[k] < b; ++k) {
    sum += log_gauss(f, std::max(a, pts[k]), std::min(b, pts[k + 1]));
  }
  return sum;
}

/// Flattened Gauss nodes of a partition, for integrands that are expensive
/// to evaluate and reused across several integrals.
struct Nodes {
  std::vector<double> x;
  std::vector<double> weight;  // dx-measure weights
  std::vector<std::size_t> panel;

  explicit Nodes(const Partition& part) {
    const auto& rule = gauss_rule();
    const auto pts = part.points();
    for (std::size_t k = 0; k < part.panels(); ++k) {
      const double la = std::log(pts[k]), lb = std::log(pts[k + 1]);
      const double half = 0.5 * (lb - la), mid = 0.5 * (lb + la);
      for (unsigned j = 0; j < kGaussPoints; ++j) {
        const double xx = std::exp(mid + half * rule.node[j]);
        x.push_back(xx);
        weight.push_back(rule.weight[j] * half * xx);
        panel.push_back(k);
      }
    }
  }
  std::size_t size() const { return x.size(); }
};

/**
 * Running integral of a fixed integrand: head(x) = int_lo^x g, tail(x) =
 * int_x^hi g.  Whole panels are cached; the partial panel is integrated on
 * demand.
 */
template <class G>
class Cumulative {
 public:
  Cumulative(const Partition& part, G g) : part_(&part), g_(std::move(g)) {
    const auto pts = part.points();
    head_.assign(pts.size(), 0.0);
    for (std::size_t k = 0; k < part.panels(); ++k) head_[k + 1] = head_[k] + log_gauss(g_, pts[k], pts[k + 1]);
  }
  double total() const { return head_.back(); }
  double head(double x) const {
    const auto k = part_->panel_of(x);
    return head_[k] + log_gauss(g_, part_->points()[k], x);
  }
  double tail(double x) const {
    const auto k = part_->panel_of(x);
    return (head_.back() - head_[k + 1]) + log_gauss(g_, x, part_->points()[k + 1]);
  }

 private:
  const Partition* part_;
  G g_;
  std::vector<double> head_;
};

/// Adaptive double-exponential rule, robust to endpoint singularities.
template <class F>
double tanh_sinh(F&& f, double a, double b, double tol = 1e-13) {
  static thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, a, b, tol);
}

/// Golden-section maximisation of f on [a, b] in the variable log x.
template <class F>
double golden_max(F&& f, double a, double b, int iterations = 60) {
  const double invphi = 0.6180339887498949;
  double lo = std::log(a), hi = std::log(b);
  double c = hi - invphi * (hi - lo), d = lo + invphi * (hi - lo);
  double fc = f(std::exp(c)), fd = f(std::exp(d));
  double best = std::max({f(a), f(b), fc, fd});
  for (int it = 0; it < iterations && hi - lo > 1e-14 * (1 + std::abs(lo)); ++it) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - invphi * (hi - lo);
      fc = f(std::exp(c));
      best = std::max(best, fc);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + invphi * (hi - lo);
      fd = f(std::exp(d));
      best = std::max(best, fd);
    }
  }
  return best;
}

/**
 * sup of f over [candidates.front(), candidates.back()]: f is sampled on the
 * sorted candidates and the best sample is refined on both neighbouring
 * brackets.  Exact when the maximiser is a candidate or f is unimodal on the
 * bracket around it.
 */
template <class F>
double sup_refined(F&& f, std::span<const double> candidates) {
  if (candidates.empty()) return 0.0;
  std::size_t arg = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double v = f(candidates[i]);
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  if (arg > 0) best = std::max(best, golden_max(f, candidates[arg - 1], candidates[arg]));
  if (arg + 1 < candidates.size()) best = std::max(best, golden_max(f, candidates[arg], candidates[arg + 1]));
  return best;
}

}  // namespace hardy::quad
