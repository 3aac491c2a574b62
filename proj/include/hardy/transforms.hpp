#pragma once

// Reduction functions built from v^{1-p'} and the V-averaging transforms
//   h -> V(x)^{-(alpha+1)} int_lo^x h V^alpha     (down)
//   h -> V_*(x)^{-(alpha+1)} int_x^hi h V_*^alpha (up)

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "hardy/discrete.hpp"
#include "hardy/errors.hpp"
#include "hardy/weights.hpp"

namespace hardy {

/// Conjugate exponent: p/(p-1) for p > 1, p/(1-p) for p < 1, inf for p = 1.
inline double conjugate(double p) {
  if (!(p > 0.0)) throw std::invalid_argument("conjugate exponent needs p > 0");
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  if (std::isinf(p)) return 1.0;
  return p > 1.0 ? p / (p - 1.0) : p / (1.0 - p);
}

enum class ReductionKind { hardy, copson };

/**
 * Density/primitive pair attached to (v, p).
 *
 * With V the lower (hardy) or upper (copson) cumulative of v^{1-p'}:
 *   primitive(x) = V(x)^{1/(p'+1)}
 *   density(x)   = V(x)^{-p'/(p'+1)} v(x)^{1-p'}
 * The primitive is taken in closed form; the integral of the density over
 * (lo, x) (resp. (x, hi)) equals (p'+1) * primitive(x).
 */
class ReductionPair {
 public:
  ReductionPair(const PiecewisePowerWeight& v, double p, ReductionKind kind) : kind_(kind), p_(p) {
    if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("reduction pair needs p in (1, inf)");
    pc_ = conjugate(p);
    source_ = v.pow(1.0 - pc_);
    cum_ = kind == ReductionKind::hardy ? lower_cumulative(source_) : upper_cumulative(source_);
    if (cum_.diverges())
      throw ConditionViolated(kind == ReductionKind::hardy
                                  ? "int_0^x v^{1-p'} diverges: v^{1-p'} is not integrable at 0"
                                  : "int_x^inf v^{1-p'} diverges: v^{1-p'} is not integrable at infinity");
  }

  ReductionKind kind() const { return kind_; }
  double p() const { return p_; }
  double p_conjugate() const { return pc_; }
  double lo() const { return source_.lo(); }
  double hi() const { return source_.hi(); }
  const CumulativeFn& cumulative() const { return cum_; }
  std::span<const double> breakpoints() const { return source_.breakpoints(); }

  double primitive(double x) const { return std::pow(cum_(x), 1.0 / (pc_ + 1.0)); }

  double density(double x) const {
    const double V = cum_(x);
    if (!(V > 0.0)) return std::numeric_limits<double>::infinity();
    return std::pow(V, -pc_ / (pc_ + 1.0)) * source_(x);
  }

  /// int of the density from the anchored end to x.
  double density_integral(double x) const { return (pc_ + 1.0) * primitive(x); }

  /// primitive^s as a pointwise weight (infinite where the primitive vanishes and s < 0).
  SampledWeight primitive_power(double s, std::string label) const {
    auto self = *this;
    SampledWeight w;
    w.f = [self, s](double x) {
      const double P = self.primitive(x);
      if (P > 0.0) return std::pow(P, s);
      return s < 0.0 ? std::numeric_limits<double>::infinity() : (s == 0.0 ? 1.0 : 0.0);
    };
    w.from = lo();
    w.to = hi();
    w.breaks.assign(breakpoints().begin(), breakpoints().end());
    w.label = std::move(label);
    return w;
  }

 private:
  ReductionKind kind_;
  double p_;
  double pc_;
  PiecewisePowerWeight source_;
  CumulativeFn cum_;
};

inline ReductionPair make_reduction_pair(const PiecewisePowerWeight& v, double p, ReductionKind kind) {
  return {v, p, kind};
}

/**
 * Pre-map h -> V^{-(alpha+1)} int h V^alpha rho on a grid (down: V from lo,
 * up: V_* to hi).  rho defaults to Lebesgue measure; passing rho = v gives
 * the weighted form f -> V^{-(alpha+1)} int f V^alpha v used for step
 * functions.
 */
inline PreMap make_averaging(const LogGrid& grid, const PiecewisePowerWeight& v, double alpha, Direction dir,
                             const std::optional<Weight>& rho = std::nullopt) {
  if (!(alpha > 0.0)) throw std::invalid_argument("averaging exponent alpha must be positive");
  const auto V = dir == Direction::lower ? lower_cumulative(v) : upper_cumulative(v);
  SampledWeight density;
  density.from = v.lo();
  density.to = v.hi();
  density.breaks.assign(v.breakpoints().begin(), v.breakpoints().end());
  if (rho) {
    density.f = [V, alpha, r = *rho](double x) { return std::pow(V(x), alpha) * weight_at(r, x); };
    if (const auto* pw = std::get_if<PiecewisePowerWeight>(&*rho))
      density.breaks.insert(density.breaks.end(), pw->breakpoints().begin(), pw->breakpoints().end());
    density.label = "V^alpha rho";
  } else {
    density.f = [V, alpha](double x) { return std::pow(V(x), alpha); };
    density.label = "V^alpha";
  }
  PreMap m;
  m.kind = dir == Direction::lower ? PreMapKind::average_down : PreMapKind::average_up;
  m.mass = discretize(density, grid);
  m.scale.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double Vi = V(grid[i]);
    m.scale[i] = Vi > 0.0 ? std::pow(Vi, -(alpha + 1.0)) : 0.0;
  }
  return m;
}

namespace detail {
inline GridFunction average(const GridFunction& h, const PiecewisePowerWeight& v, double alpha, Direction dir,
                            const std::optional<Weight>& rho) {
  const auto m = make_averaging(h.grid(), v, alpha, dir, rho);
  std::vector<double> g(h.size());
  m.apply(h.values(), g);
  return {h.grid_ptr(), std::move(g)};
}
}  // namespace detail

/// g(x) = V(x)^{-(alpha+1)} int_lo^x h V^alpha, with g = 0 where V = 0.
inline GridFunction reduce_down(const GridFunction& h, const PiecewisePowerWeight& v, double alpha) {
  return detail::average(h, v, alpha, Direction::lower, std::nullopt);
}

/// g(x) = V_*(x)^{-(alpha+1)} int_x^hi h V_*^alpha, with g = 0 where V_* = 0.
inline GridFunction reduce_up(const GridFunction& h, const PiecewisePowerWeight& v, double alpha) {
  return detail::average(h, v, alpha, Direction::upper, std::nullopt);
}

/// Weighted forms: int h V^alpha rho in place of int h V^alpha.
inline GridFunction reduce_down(const GridFunction& h, const PiecewisePowerWeight& v, double alpha, const Weight& rho) {
  return detail::average(h, v, alpha, Direction::lower, rho);
}
inline GridFunction reduce_up(const GridFunction& h, const PiecewisePowerWeight& v, double alpha, const Weight& rho) {
  return detail::average(h, v, alpha, Direction::upper, rho);
}

}  // namespace hardy
