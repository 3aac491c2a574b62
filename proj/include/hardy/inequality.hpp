#pragma once

// A machine-readable inequality instance and its discretisation.

#include <cstdint>
#include <optional>
#include <string>

#include "hardy/discrete.hpp"
#include "hardy/transforms.hpp"

namespace hardy {

struct GridSpec {
  std::size_t n = 512;
  double lo = 1e-3;
  double hi = 1e3;
};

/// Linear map applied to h before the operator.
///   cone_*:    h is the generator of a monotone f; the right side is ||f||_{1,v}
///   average_*: h -> V^{-(alpha+1)} int h V^alpha with V built from `source`
struct PreMapSpec {
  PreMapKind kind = PreMapKind::none;
  double alpha = 1.0;
  std::optional<PiecewisePowerWeight> source;
};

/// ||K h||_{q,w} <= C ||h||_{p,v}, K = operator after the optional pre-map.
struct InequalitySpec {
  OperatorKind kind;
  double p = 2.0;
  double q = 2.0;
  Weight w;
  Weight v;
  PreMapSpec pre;
  GridSpec grid;
  std::uint64_t seed = 0;
  std::string label;
};

inline void validate(const InequalitySpec& s) {
  if (!(s.p > 0.0)) throw std::invalid_argument("p must be positive");
  if (!(s.q > 0.0)) throw std::invalid_argument("q must be positive");
  if (!(s.grid.lo > 0.0) || !(s.grid.hi > s.grid.lo)) throw std::invalid_argument("grid window must satisfy 0 < lo < hi");
  if (s.grid.n < 16) throw std::invalid_argument("grid needs n >= 16");
  const bool cone = s.pre.kind == PreMapKind::cone_non_increasing || s.pre.kind == PreMapKind::cone_non_decreasing;
  if (cone && s.p != 1.0) throw std::invalid_argument("cone inequalities are implemented for p = 1 only");
  const bool avg = s.pre.kind == PreMapKind::average_down || s.pre.kind == PreMapKind::average_up;
  if (avg && !s.pre.source) throw std::invalid_argument("averaging pre-map needs a source weight");
}

inline DiscreteInequality discretize(const InequalitySpec& s) {
  validate(s);
  auto grid = make_grid(s.grid.lo, s.grid.hi, s.grid.n);
  PreMap pre;
  switch (s.pre.kind) {
    case PreMapKind::average_down:
      pre = make_averaging(*grid, *s.pre.source, s.pre.alpha, Direction::lower);
      break;
    case PreMapKind::average_up:
      pre = make_averaging(*grid, *s.pre.source, s.pre.alpha, Direction::upper);
      break;
    default:
      pre.kind = s.pre.kind;
      break;
  }
  auto dv = discretize(s.v, *grid);
  std::vector<double> rhs_mass = dv.mass;
  // generator k of a non-increasing f = sum_{k >= i} h_k carries mass int_lo^{b_{k+1}} v
  if (s.pre.kind == PreMapKind::cone_non_increasing) {
    for (std::size_t i = 1; i < rhs_mass.size(); ++i) rhs_mass[i] += rhs_mass[i - 1];
  } else if (s.pre.kind == PreMapKind::cone_non_decreasing) {
    for (std::size_t i = rhs_mass.size() - 1; i-- > 0;) rhs_mass[i] += rhs_mass[i + 1];
  }
  Kernel kernel(*grid, s.kind, std::move(pre), std::isinf(s.q) ? nullptr : &s.w);
  // p = 1: extremals are point masses, which a cell-wise constant h only
  // reaches at first order; put each cell's mass at its anchored end instead
  if (s.p == 1.0 && s.pre.kind == PreMapKind::none) {
    kernel.concentrate_at_anchor();
    rhs_mass = anchored_mass(s.v, *grid, kernel.hardy_inner());
  }
  return DiscreteInequality{grid, std::move(kernel), discretize(s.w, *grid), s.q, std::move(rhs_mass),
                            std::move(dv.point), s.p};
}

}  // namespace hardy
