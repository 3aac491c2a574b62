#pragma once

/**
 * @file discrete.hpp
 * @brief Log grids, grid functions and the discretised Hardy-type kernels.
 *
 * A LogGrid has geometrically spaced points x_0 = lo < ... < x_{n-1} = hi and
 * cells [b_i, b_{i+1}] with b_0 = lo, b_n = hi and interior boundaries at the
 * geometric midpoints sqrt(x_{i-1} x_i).  Grid functions are read as piecewise
 * constant per cell, so every integral of h against a weight reduces to the
 * weight's cell masses; operator outputs are the exact point values at x_i of
 * the operator applied to that piecewise-constant h.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hardy/errors.hpp"
#include "hardy/quadrature.hpp"
#include "hardy/weights.hpp"

namespace hardy {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class LogGrid {
 public:
  LogGrid(double lo, double hi, std::size_t n) : lo_(lo), hi_(hi) {
    if (n < 16) throw std::invalid_argument("log grid needs at least 16 points");
    if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi)) throw std::invalid_argument("log grid needs 0 < lo < hi < inf");
    step_ = std::log(hi / lo) / static_cast<double>(n - 1);
    points_.resize(n);
    for (std::size_t i = 0; i < n; ++i) points_[i] = lo * std::exp(step_ * static_cast<double>(i));
    points_.front() = lo;
    points_.back() = hi;
    bounds_.resize(n + 1);
    bounds_.front() = lo;
    bounds_.back() = hi;
    for (std::size_t i = 1; i < n; ++i) bounds_[i] = std::sqrt(points_[i - 1] * points_[i]);
  }

  std::size_t size() const { return points_.size(); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double log_step() const { return step_; }
  double operator[](std::size_t i) const { return points_[i]; }
  std::span<const double> points() const { return points_; }
  std::span<const double> bounds() const { return bounds_; }

  /// Cell index containing x.
  std::size_t cell_of(double x) const {
    auto it = std::upper_bound(bounds_.begin(), bounds_.end(), x);
    auto k = static_cast<std::size_t>(it - bounds_.begin());
    return std::min(k == 0 ? 0 : k - 1, size() - 1);
  }

 private:
  double lo_, hi_, step_;
  std::vector<double> points_;
  std::vector<double> bounds_;
};

using GridPtr = std::shared_ptr<const LogGrid>;

inline GridPtr make_grid(double lo, double hi, std::size_t n) { return std::make_shared<const LogGrid>(lo, hi, n); }

/// Non-negative samples on a grid, one per cell.
class GridFunction {
 public:
  GridFunction(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->size()) throw std::invalid_argument("grid function length does not match grid");
    for (double v : values_)
      if (!(v >= 0.0)) throw std::invalid_argument("grid function values must be non-negative");
  }

  static GridFunction zeros(GridPtr grid) {
    const auto n = grid->size();
    return {std::move(grid), std::vector<double>(n, 0.0)};
  }

  template <class F>
  static GridFunction sample(GridPtr grid, F&& f) {
    std::vector<double> v(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f((*grid)[i]);
    return {std::move(grid), std::move(v)};
  }

  /// Indicator of the cells whose point lies in (a, b).
  static GridFunction indicator(GridPtr grid, double a, double b) {
    return sample(grid, [=](double x) { return x > a && x < b ? 1.0 : 0.0; });
  }

  /// Single cell of height one.
  static GridFunction atom(GridPtr grid, std::size_t cell) {
    auto g = zeros(std::move(grid));
    g.values_.at(cell) = 1.0;
    return g;
  }

  const LogGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  GridFunction scaled(double lambda) const {
    auto v = values_;
    for (auto& x : v) x *= lambda;
    return {grid_, std::move(v)};
  }

  bool is_zero() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
  }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/**
 * A weight known only pointwise (e.g. a power of a reduction primitive).
 * Cell masses come from Gauss panels in log x split at `breaks`.
 */
struct SampledWeight {
  std::function<double(double)> f;
  double from = 0.0;
  double to = 0.0;
  std::vector<double> breaks;
  std::string label;

  double lo() const { return from; }
  double hi() const { return to; }
  double operator()(double x) const { return f(x); }

  double integrate(double a, double b) const {
    if (!(b > a)) return 0.0;
    std::vector<double> pts{a, b};
    for (double e : breaks)
      if (e > a && e < b) pts.push_back(e);
    // sub-panels of log width at most 0.25 so smooth pieces are resolved
    const double width = 0.25;
    const auto extra = static_cast<std::size_t>(std::ceil(std::log(b / a) / width));
    for (std::size_t k = 1; k < extra; ++k) pts.push_back(a * std::exp(std::log(b / a) * static_cast<double>(k) / extra));
    const quad::Partition part(std::move(pts));
    return quad::integrate(part, f, a, b);
  }
};

using Weight = std::variant<PiecewisePowerWeight, SampledWeight>;

inline double weight_lo(const Weight& w) {
  return std::visit([](const auto& x) { return x.lo(); }, w);
}
inline double weight_hi(const Weight& w) {
  return std::visit([](const auto& x) { return x.hi(); }, w);
}
inline double weight_at(const Weight& w, double x) {
  return std::visit([x](const auto& ww) { return ww(x); }, w);
}
inline double weight_integral(const Weight& w, double a, double b) {
  return std::visit([a, b](const auto& ww) { return ww.integrate(a, b); }, w);
}
/// int_a^b x w(x) dx.
inline double weight_moment(const Weight& w, double a, double b) {
  if (const auto* p = std::get_if<PiecewisePowerWeight>(&w))
    return (*p * PiecewisePowerWeight::power(1.0, 1.0, p->lo(), p->hi())).integrate(a, b);
  const auto& s = std::get<SampledWeight>(w);
  SampledWeight xs = s;
  xs.f = [f = s.f](double x) { return x * f(x); };
  return xs.integrate(a, b);
}

inline std::string describe(const Weight& w) {
  if (const auto* p = std::get_if<PiecewisePowerWeight>(&w)) return p->describe();
  return "sampled:" + std::get<SampledWeight>(w).label;
}

inline Weight lebesgue(double lo, double hi) { return PiecewisePowerWeight::constant(1.0, lo, hi); }

/// Cell masses of a weight on a grid: whole cells, left/right halves, point values.
struct DiscreteWeight {
  std::vector<double> mass;
  std::vector<double> left;   // int_{b_i}^{x_i}
  std::vector<double> right;  // int_{x_i}^{b_{i+1}}
  std::vector<double> point;

  std::size_t size() const { return mass.size(); }
};

inline DiscreteWeight discretize(const Weight& w, const LogGrid& grid) {
  const double rel = 1e-12;
  if (weight_lo(w) > grid.lo() * (1 + rel) || weight_hi(w) < grid.hi() * (1 - rel))
    throw OutOfDomain("weight does not cover the grid window");
  const auto n = grid.size();
  DiscreteWeight d;
  d.mass.resize(n);
  d.left.resize(n);
  d.right.resize(n);
  d.point.resize(n);
  const auto b = grid.bounds();
  const double lo = std::max(grid.lo(), weight_lo(w));
  const double hi = std::min(grid.hi(), weight_hi(w));
  auto clamp = [&](double x) { return std::clamp(x, lo, hi); };
  for (std::size_t i = 0; i < n; ++i) {
    d.left[i] = weight_integral(w, clamp(b[i]), clamp(grid[i]));
    d.right[i] = weight_integral(w, clamp(grid[i]), clamp(b[i + 1]));
    d.mass[i] = d.left[i] + d.right[i];
    d.point[i] = weight_at(w, clamp(grid[i]));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Operators

enum class OperatorTag { hardy, copson, hardy_then_copson, copson_then_copson, copson_then_hardy, hardy_then_hardy };

inline std::string to_string(OperatorTag t) {
  switch (t) {
    case OperatorTag::hardy: return "hardy";
    case OperatorTag::copson: return "copson";
    case OperatorTag::hardy_then_copson: return "hardy_then_copson";
    case OperatorTag::copson_then_copson: return "copson_then_copson";
    case OperatorTag::copson_then_hardy: return "copson_then_hardy";
    case OperatorTag::hardy_then_hardy: return "hardy_then_hardy";
  }
  return "?";
}

inline std::optional<OperatorTag> operator_tag_from_string(const std::string& s) {
  for (auto t : {OperatorTag::hardy, OperatorTag::copson, OperatorTag::hardy_then_copson, OperatorTag::copson_then_copson,
                 OperatorTag::copson_then_hardy, OperatorTag::hardy_then_hardy})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

inline bool is_iterated(OperatorTag t) { return t != OperatorTag::hardy && t != OperatorTag::copson; }
/// The operator applied to h first is the Hardy (head) integral.
inline bool inner_is_hardy(OperatorTag t) {
  return t == OperatorTag::hardy || t == OperatorTag::hardy_then_copson || t == OperatorTag::hardy_then_hardy;
}
/// The outer integral of an iterated operator runs over (x, inf).
inline bool outer_is_tail(OperatorTag t) {
  return t == OperatorTag::hardy_then_copson || t == OperatorTag::copson_then_copson;
}

/// Operator tag plus, for iterated tags, the inner exponent r and weight u.
struct OperatorKind {
  OperatorTag tag = OperatorTag::hardy;
  double r = 1.0;
  std::optional<Weight> u;

  OperatorKind() = default;
  explicit OperatorKind(OperatorTag t) : tag(t) {
    if (is_iterated(t)) throw std::invalid_argument("iterated operator needs r and u");
  }
  OperatorKind(OperatorTag t, double r_, Weight u_) : tag(t), r(r_), u(std::move(u_)) {
    if (!is_iterated(t)) throw std::invalid_argument("plain operator takes no r or u");
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("inner exponent r must be in (0, inf)");
  }
};

/// Linear positive map applied to h before the operator.
enum class PreMapKind { none, cone_non_increasing, cone_non_decreasing, average_down, average_up };

struct PreMap {
  PreMapKind kind = PreMapKind::none;
  std::vector<double> scale;  // per point factor for averaging maps
  DiscreteWeight mass;        // masses of the averaging density

  void apply(std::span<const double> h, std::span<double> f) const {
    const auto n = h.size();
    switch (kind) {
      case PreMapKind::none:
        std::copy(h.begin(), h.end(), f.begin());
        break;
      case PreMapKind::cone_non_increasing: {
        double s = 0.0;
        for (std::size_t i = n; i-- > 0;) f[i] = (s += h[i]);
        break;
      }
      case PreMapKind::cone_non_decreasing: {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) f[i] = (s += h[i]);
        break;
      }
      case PreMapKind::average_down: {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          f[i] = scale[i] * (s + h[i] * mass.left[i]);
          s += h[i] * mass.mass[i];
        }
        break;
      }
      case PreMapKind::average_up: {
        double s = 0.0;
        for (std::size_t i = n; i-- > 0;) {
          f[i] = scale[i] * (s + h[i] * mass.right[i]);
          s += h[i] * mass.mass[i];
        }
        break;
      }
    }
  }

  void transpose(std::span<const double> df, std::span<double> dh) const {
    const auto n = df.size();
    switch (kind) {
      case PreMapKind::none:
        std::copy(df.begin(), df.end(), dh.begin());
        break;
      case PreMapKind::cone_non_increasing: {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) dh[k] = (s += df[k]);
        break;
      }
      case PreMapKind::cone_non_decreasing: {
        double s = 0.0;
        for (std::size_t k = n; k-- > 0;) dh[k] = (s += df[k]);
        break;
      }
      case PreMapKind::average_down: {
        double s = 0.0;
        for (std::size_t j = n; j-- > 0;) {
          const double y = scale[j] * df[j];
          dh[j] = mass.mass[j] * s + mass.left[j] * y;
          s += y;
        }
        break;
      }
      case PreMapKind::average_up: {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double y = scale[j] * df[j];
          dh[j] = mass.mass[j] * s + mass.right[j] * y;
          s += y;
        }
        break;
      }
    }
  }

};

struct Workspace {
  std::vector<double> f, G, A, t, tmp;
  void resize(std::size_t n) {
    f.resize(n);
    G.resize(n);
    A.resize(n);
    t.resize(n);
    tmp.resize(n);
  }
};

/**
 * Discretised operator h -> g = Outer(Inner(Pre h)) on a fixed grid.
 *
 * Inner: Hardy G(x) = int_lo^x f or Copson G(x) = int_x^hi f.
 * Outer: none, tail (int_x^hi G^r u)^{1/r} or head (int_lo^x G^r u)^{1/r}.
 * apply() is O(n); vjp() returns J(h)^T seed, also O(n).
 */
class Kernel {
 public:
  /// `sampling`: inner values G are the rho-weighted cell means of the
  /// piecewise-linear G (rho = u for iterated operators, `sampling` for plain
  /// ones) instead of point values; by Jensen, sum mass_i G_i^s <= int G^s rho
  /// for s >= 1.
  Kernel(const LogGrid& grid, const OperatorKind& kind, PreMap pre = {}, const Weight* sampling = nullptr)
      : lebesgue_(discretize(lebesgue(grid.lo(), grid.hi()), grid)),
        hardy_inner_(inner_is_hardy(kind.tag)),
        iterated_(is_iterated(kind.tag)),
        tail_outer_(outer_is_tail(kind.tag)),
        r_(kind.r),
        pre_(std::move(pre)) {
    offset_ = hardy_inner_ ? lebesgue_.left : lebesgue_.right;
    if (iterated_) {
      if (!kind.u) throw std::invalid_argument("iterated operator needs an inner weight u");
      inner_weight_ = discretize(*kind.u, grid);
      sampling = &*kind.u;
    }
    if (sampling) {
      const auto b = grid.bounds();
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double m = weight_integral(*sampling, b[i], b[i + 1]);
        if (!(m > 0.0) || !std::isfinite(m)) continue;
        const double mean_x = weight_moment(*sampling, b[i], b[i + 1]) / m;
        offset_[i] = std::clamp(hardy_inner_ ? mean_x - b[i] : b[i + 1] - mean_x, 0.0, b[i + 1] - b[i]);
      }
    }
  }

  /// Cell i carries a point mass at its anchored end (left for Hardy, right
  /// for Copson), so G is constant on every cell and exact.
  void concentrate_at_anchor() {
    for (std::size_t i = 0; i < offset_.size(); ++i) offset_[i] = lebesgue_.mass[i];
  }

  std::size_t size() const { return lebesgue_.size(); }
  bool iterated() const { return iterated_; }
  bool hardy_inner() const { return hardy_inner_; }

  void apply(std::span<const double> h, std::span<double> g, Workspace& ws) const {
    const auto n = size();
    ws.resize(n);
    pre_.apply(h, ws.f);
    inner_apply(ws.f, ws.G);
    if (!iterated_) {
      std::copy(ws.G.begin(), ws.G.end(), g.begin());
      return;
    }
    outer_sums(ws.G, ws.A);
    for (std::size_t i = 0; i < n; ++i) g[i] = ws.A[i] > 0.0 ? std::pow(ws.A[i], 1.0 / r_) : 0.0;
  }

  /// grad = J(h)^T seed.  Structural zeros of intermediate values contribute 0.
  void vjp(std::span<const double> h, std::span<const double> seed, std::span<double> grad, Workspace& ws) const {
    const auto n = size();
    ws.resize(n);
    pre_.apply(h, ws.f);
    inner_apply(ws.f, ws.G);
    std::vector<double>& dG = ws.tmp;
    if (!iterated_) {
      std::copy(seed.begin(), seed.end(), dG.begin());
    } else {
      outer_sums(ws.G, ws.A);
      for (std::size_t i = 0; i < n; ++i)
        ws.t[i] = ws.A[i] > 0.0 ? seed[i] * std::pow(ws.A[i], 1.0 / r_ - 1.0) / r_ : 0.0;
      const auto& U = inner_weight_;
      if (tail_outer_) {
        double prefix = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double kt = U.mass[j] * prefix + U.right[j] * ws.t[j];
          prefix += ws.t[j];
          dG[j] = ws.G[j] > 0.0 ? r_ * std::pow(ws.G[j], r_ - 1.0) * kt : 0.0;
        }
      } else {
        double suffix = 0.0;
        for (std::size_t j = n; j-- > 0;) {
          const double kt = U.mass[j] * suffix + U.left[j] * ws.t[j];
          suffix += ws.t[j];
          dG[j] = ws.G[j] > 0.0 ? r_ * std::pow(ws.G[j], r_ - 1.0) * kt : 0.0;
        }
      }
    }
    // inner transpose into ws.f
    const auto& L = lebesgue_;
    if (hardy_inner_) {
      double suffix = 0.0;
      for (std::size_t j = n; j-- > 0;) {
        ws.f[j] = L.mass[j] * suffix + offset_[j] * dG[j];
        suffix += dG[j];
      }
    } else {
      double prefix = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        ws.f[j] = L.mass[j] * prefix + offset_[j] * dG[j];
        prefix += dG[j];
      }
    }
    pre_.transpose(ws.f, grad);
  }

 private:
  void inner_apply(std::span<const double> f, std::span<double> G) const {
    const auto n = size();
    const auto& L = lebesgue_;
    if (hardy_inner_) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        G[i] = s + f[i] * offset_[i];
        s += f[i] * L.mass[i];
      }
    } else {
      double s = 0.0;
      for (std::size_t i = n; i-- > 0;) {
        G[i] = s + f[i] * offset_[i];
        s += f[i] * L.mass[i];
      }
    }
  }

  void outer_sums(std::span<const double> G, std::span<double> A) const {
    const auto n = size();
    const auto& U = inner_weight_;
    auto powr = [this](double x) { return x > 0.0 ? std::pow(x, r_) : 0.0; };
    if (tail_outer_) {
      double s = 0.0;
      for (std::size_t i = n; i-- > 0;) {
        const double gr = powr(G[i]);
        A[i] = s + gr * U.right[i];
        s += gr * U.mass[i];
      }
    } else {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double gr = powr(G[i]);
        A[i] = s + gr * U.left[i];
        s += gr * U.mass[i];
      }
    }
  }

  DiscreteWeight lebesgue_;
  DiscreteWeight inner_weight_;
  std::vector<double> offset_;  // length of the cell part of G inside cell i
  bool hardy_inner_;
  bool iterated_;
  bool tail_outer_;
  double r_;
  PreMap pre_;
};

// ---------------------------------------------------------------------------
// Norms

/// (sum f_i^p mass_i)^{1/p} for p < inf, max f_i point_i for p = inf.
/// Cells with f_i = 0 contribute nothing even where the mass is infinite.
inline double weighted_norm(std::span<const double> f, double p, std::span<const double> mass,
                            std::span<const double> point) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (f[i] > 0.0) m = std::max(m, f[i] * point[i]);
    return m;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f[i] > 0.0) s += std::pow(f[i], p) * mass[i];
  return std::pow(s, 1.0 / p);
}

inline double weighted_norm(const GridFunction& f, double p, const Weight& w) {
  const auto d = discretize(w, f.grid());
  return weighted_norm(f.values(), p, d.mass, d.point);
}

inline GridFunction apply_operator(const OperatorKind& kind, const GridFunction& h) {
  const Kernel k(h.grid(), kind);
  Workspace ws;
  std::vector<double> g(h.size());
  k.apply(h.values(), g, ws);
  return {h.grid_ptr(), std::move(g)};
}

/**
 * A fully discretised inequality ||K h||_{q,W} <= C ||h||_{p,R}.
 * `rhs_mass` is R's cell mass (for cone inequalities, the mass of each
 * generator); `outer` carries W's masses and point values.
 */
struct DiscreteInequality {
  GridPtr grid;
  Kernel kernel;
  DiscreteWeight outer;
  double q;
  std::vector<double> rhs_mass;
  std::vector<double> rhs_point;
  double p;

  std::size_t size() const { return grid->size(); }

  double lhs(std::span<const double> h, Workspace& ws, std::vector<double>& g) const {
    g.resize(size());
    kernel.apply(h, g, ws);
    return weighted_norm(g, q, outer.mass, outer.point);
  }
  double rhs(std::span<const double> h) const { return weighted_norm(h, p, rhs_mass, rhs_point); }

  double ratio(std::span<const double> h) const {
    Workspace ws;
    std::vector<double> g;
    return ratio(h, ws, g);
  }
  double ratio(std::span<const double> h, Workspace& ws, std::vector<double>& g) const {
    const double den = rhs(h);
    if (!(den > 0.0)) throw ZeroWitness("ratio undefined for h = 0");
    if (std::isinf(den)) return 0.0;
    return lhs(h, ws, g) / den;
  }
};

/// ||h||_{1,v} when cell i holds mass h_i * width_i at its anchored end.
inline std::vector<double> anchored_mass(const Weight& v, const LogGrid& grid, bool hardy_inner) {
  const auto b = grid.bounds();
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = hardy_inner ? b[i] : std::nextafter(b[i + 1], 0.0);
    out[i] = (b[i + 1] - b[i]) * weight_at(v, x);
  }
  return out;
}

/// LHS/RHS of the plain or iterated inequality for one h.
inline double ratio(const OperatorKind& kind, const GridFunction& h, double p, double q, const Weight& w,
                    const Weight& v) {
  if (h.is_zero()) throw ZeroWitness("ratio undefined for h = 0");
  const auto& grid = h.grid();
  const auto dv = discretize(v, grid);
  DiscreteInequality ineq{h.grid_ptr(), Kernel(grid, kind, {}, std::isinf(q) ? nullptr : &w), discretize(w, grid), q,
                          dv.mass, dv.point, p};
  return ineq.ratio(h.values());
}

}  // namespace hardy
