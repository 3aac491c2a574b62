#pragma once

// Equivalence statements as spec-to-spec rewrites, checked numerically by
// comparing best-constant estimates of both sides.

#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hardy/errors.hpp"
#include "hardy/functionals.hpp"
#include "hardy/inequality.hpp"
#include "hardy/solver.hpp"
#include "hardy/transforms.hpp"

namespace hardy {

// Supported rewrites.
//   composed_hardy / composed_copson     ||T(int h)|| in L^q(w), L^p(v)  ->  ||T((int h)^{1/p})^p||_{q/p,w}, L^1(P^{1-2p})
//   composed_*_sup                       the same with q = inf and w -> w^p
//   flipped_hardy / flipped_copson       ||T(P^{2(1-1/p)} (int h)^{1/p})||_{q,w}, L^1(P^{-1})
//   hardy_identity / copson_identity     T = I
//   iterated_hardy_copson / iterated_copson_copson   T = outer tail integral with exponent r
//   cone_down / cone_up                  L^1(v) over monotone f  ->  averaging pre-map, L^1
//   identity                             the spec itself
// P is the reduction primitive of (v, p).
inline const std::vector<std::string>& theorem_ids() {
  static const std::vector<std::string> ids{
      "composed_hardy",    "composed_copson",       "composed_hardy_sup",     "composed_copson_sup", "flipped_hardy",
      "flipped_copson",    "hardy_identity",        "copson_identity",        "iterated_hardy_copson",
      "iterated_copson_copson", "cone_down",        "cone_up",                "identity"};
  return ids;
}

inline bool is_theorem_id(const std::string& id) {
  for (const auto& t : theorem_ids())
    if (t == id) return true;
  return false;
}

struct ReducedSpec {
  InequalitySpec original;
  InequalitySpec reduced;
  double theta = 1.0;  // C_orig ~ C_red^theta
};

namespace detail {

inline bool ends_with(const std::string& s, const std::string& tail) {
  return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
}

inline const PiecewisePowerWeight& need_ppw(const Weight& w, const char* what) {
  if (const auto* p = std::get_if<PiecewisePowerWeight>(&w)) return *p;
  throw HypothesisViolated(std::string(what) + " must be a piecewise-power weight");
}

inline SampledWeight sampled(std::function<double(double)> f, const PiecewisePowerWeight& base,
                             std::vector<double> extra_breaks, std::string label) {
  SampledWeight s;
  s.f = std::move(f);
  s.from = base.lo();
  s.to = base.hi();
  s.breaks.assign(base.breakpoints().begin(), base.breakpoints().end());
  s.breaks.insert(s.breaks.end(), extra_breaks.begin(), extra_breaks.end());
  s.label = std::move(label);
  return s;
}

inline std::vector<double> breaks_of(const Weight& w) {
  if (const auto* p = std::get_if<PiecewisePowerWeight>(&w)) return {p->breakpoints().begin(), p->breakpoints().end()};
  return std::get<SampledWeight>(w).breaks;
}

inline Weight times(const Weight& a, std::function<double(double)> m, std::vector<double> extra, std::string label) {
  SampledWeight s;
  s.f = [a, m = std::move(m)](double x) { return weight_at(a, x) * m(x); };
  s.from = weight_lo(a);
  s.to = weight_hi(a);
  s.breaks = breaks_of(a);
  s.breaks.insert(s.breaks.end(), extra.begin(), extra.end());
  s.label = std::move(label);
  return s;
}

inline Weight power_of(const Weight& w, double s) {
  if (const auto* p = std::get_if<PiecewisePowerWeight>(&w)) return p->pow(s);
  const auto& sw = std::get<SampledWeight>(w);
  SampledWeight out = sw;
  out.f = [f = sw.f, s](double x) { return std::pow(f(x), s); };
  out.label = "(" + sw.label + ")^" + std::to_string(s);
  return out;
}

inline ReductionPair pair_for(const InequalitySpec& s, ReductionKind kind) {
  const auto& v = need_ppw(s.v, "right-hand weight v");
  if (!(s.p > 1.0) || std::isinf(s.p)) throw HypothesisViolated("reduction needs 1 < p < inf");
  try {
    return ReductionPair(v, s.p, kind);
  } catch (const ConditionViolated& e) {
    throw HypothesisViolated(std::string(kind == ReductionKind::hardy ? "condition int_0^x v^{1-p'} < inf fails: "
                                                                      : "condition int_x^inf v^{1-p'} < inf fails: ") +
                             e.what());
  }
}

}  // namespace detail

/**
 * Original/reduced pair for a theorem id.  For the cone ids the original is
 * the spec read over monotone functions (its pre-map is replaced by the cone
 * map); for all other ids the original is the spec itself.
 */
inline ReducedSpec reduce_spec(const InequalitySpec& spec, const std::string& id) {
  if (!is_theorem_id(id)) throw std::invalid_argument("unknown theorem id '" + id + "'");
  ReducedSpec out{spec, spec, 1.0};
  if (id == "identity") return out;
  if (spec.pre.kind != PreMapKind::none) throw HypothesisViolated("the original inequality must not carry a pre-map");

  const auto tag = spec.kind.tag;
  if (id == "cone_down" || id == "cone_up") {
    if (spec.p != 1.0) throw HypothesisViolated("cone reduction needs p = 1");
    const auto& v = detail::need_ppw(spec.v, "right-hand weight v");
    const bool down = id == "cone_down";
    out.original.pre.kind = down ? PreMapKind::cone_non_increasing : PreMapKind::cone_non_decreasing;
    out.reduced.pre = {down ? PreMapKind::average_down : PreMapKind::average_up, 1.0, v};
    out.reduced.v = lebesgue(v.lo(), v.hi());
    out.reduced.label = spec.label + " [" + id + "]";
    return out;
  }

  const bool hardy_side = id == "composed_hardy" || id == "composed_hardy_sup" || id == "flipped_hardy" ||
                          id == "hardy_identity" || id == "iterated_hardy_copson";
  if (hardy_side != inner_is_hardy(tag))
    throw HypothesisViolated("operator '" + to_string(tag) + "' does not start with the " +
                             (hardy_side ? "Hardy" : "Copson") + " integral");
  if (id == "hardy_identity" && tag != OperatorTag::hardy) throw HypothesisViolated("expected the plain Hardy operator");
  if (id == "copson_identity" && tag != OperatorTag::copson) throw HypothesisViolated("expected the plain Copson operator");
  if (id == "iterated_hardy_copson" && tag != OperatorTag::hardy_then_copson)
    throw HypothesisViolated("expected the hardy_then_copson operator");
  if (id == "iterated_copson_copson" && tag != OperatorTag::copson_then_copson)
    throw HypothesisViolated("expected the copson_then_copson operator");
  const bool sup = detail::ends_with(id, "_sup");
  const bool flipped = id.rfind("flipped", 0) == 0;
  if (sup && !std::isinf(spec.q)) throw HypothesisViolated("this rewrite needs q = inf");
  if (!sup && !flipped && std::isinf(spec.q)) throw HypothesisViolated("this rewrite needs q < inf");

  const double p = spec.p;
  const auto P = detail::pair_for(spec, hardy_side ? ReductionKind::hardy : ReductionKind::copson);
  const std::vector<double> pb(P.breakpoints().begin(), P.breakpoints().end());
  auto& red = out.reduced;
  out.theta = 1.0 / p;
  red.p = 1.0;
  red.q = std::isinf(spec.q) ? spec.q : spec.q / p;
  if (std::isinf(spec.q)) red.w = detail::power_of(spec.w, p);
  if (is_iterated(tag)) red.kind = OperatorKind(tag, spec.kind.r / p, *spec.kind.u);
  red.label = spec.label + " [" + id + "]";

  if (!flipped) {
    red.v = P.primitive_power(1.0 - 2.0 * p, "P^{1-2p}");
    return out;
  }
  // flipped: multiplier m = P^{2(1-1/p)} on the argument of T
  red.v = P.primitive_power(-1.0, "P^{-1}");
  const double me = 2.0 * (1.0 - 1.0 / p);
  auto m_pow = [P](double e) { return [P, e](double x) { return std::pow(P.primitive(x), e); }; };
  if (is_iterated(tag)) {
    red.kind.u = detail::times(*spec.kind.u, m_pow(me * spec.kind.r), pb, "u m^r");
  } else if (std::isinf(spec.q)) {
    red.w = detail::times(detail::power_of(spec.w, p), m_pow(me * p), pb, "(w m)^p");
  } else {
    red.w = detail::times(spec.w, m_pow(me * spec.q), pb, "w m^q");
  }
  return out;
}

struct EquivalenceReport {
  std::string theorem;
  std::string label;
  std::string regime;
  std::optional<BestConstantEstimate> original;
  std::optional<BestConstantEstimate> reduced;
  double c_orig = 0.0;
  double c_red = 0.0;
  double theta = 1.0;
  double ratio = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  bool pass = false;
  std::string message;
};

/// C_orig / C_red^theta inside [1/K, K].
inline EquivalenceReport verify_equivalence(const InequalitySpec& spec, const std::string& id, double K = 16.0,
                                            const SolverOptions& opts = {}) {
  if (!(K > 1.0)) throw std::invalid_argument("pass window K must exceed 1");
  const auto rs = reduce_spec(spec, id);
  EquivalenceReport rep;
  rep.theorem = id;
  rep.label = spec.label;
  rep.theta = rs.theta;
  rep.window_lo = 1.0 / K;
  rep.window_hi = K;
  rep.original = best_constant(rs.original, opts);
  rep.reduced = id == "identity" ? rep.original : best_constant(rs.reduced, opts);
  rep.c_orig = rep.original->value;
  rep.c_red = rep.reduced->value;
  if (rep.c_orig < 1e-12 || rep.c_red < 1e-12)
    throw DegenerateInstance("best constant below 1e-12 (" + std::to_string(rep.c_orig) + ", " +
                             std::to_string(rep.c_red) + "): the inequality is vacuous");
  rep.ratio = rep.c_orig / std::pow(rep.c_red, rs.theta);
  rep.pass = rep.ratio >= rep.window_lo && rep.ratio <= rep.window_hi;
  return rep;
}

struct CharacterizationOptions {
  std::optional<double> A;  // C_est <= A F
  std::optional<double> B;  // C_est >= F / B
  std::size_t n = 512;      // outer grid of the functional
};

/// The characterising functional matching the spec's operator and exponents.
inline FunctionalValue characterizing_functional(const InequalitySpec& s, std::size_t n = 512) {
  if (s.pre.kind != PreMapKind::none) throw RegimeMismatch("no characterisation for inequalities with a pre-map");
  const auto* w = std::get_if<PiecewisePowerWeight>(&s.w);
  const auto* v = std::get_if<PiecewisePowerWeight>(&s.v);
  if (!w || !v) throw RegimeMismatch("characterisations need piecewise-power weights");
  if (std::isinf(s.q) || std::isinf(s.p)) throw RegimeMismatch("no characterisation for infinite exponents");
  const bool l1 = s.p == 1.0;
  if (!l1 && !(s.p > 1.0)) throw RegimeMismatch("no characterisation for p < 1");
  const FunctionalOptions fo{n};
  switch (s.kind.tag) {
    case OperatorTag::hardy:
      return l1 ? l1_hardy_constant(*w, *v, s.q, fo) : hardy_constant(*w, *v, s.p, s.q, fo);
    case OperatorTag::copson:
      return l1 ? l1_copson_constant(*w, *v, s.q, fo) : copson_constant(*w, *v, s.p, s.q, fo);
    case OperatorTag::hardy_then_copson:
    case OperatorTag::copson_then_copson: {
      const auto* u = std::get_if<PiecewisePowerWeight>(&*s.kind.u);
      if (!u) throw RegimeMismatch("characterisations need a piecewise-power inner weight");
      const double r = s.kind.r;
      if (s.kind.tag == OperatorTag::hardy_then_copson)
        return l1 ? iterated_hardy_copson_l1(*u, *v, *w, s.q, r, fo) : iterated_hardy_copson(*u, *v, *w, s.p, s.q, r, fo);
      return l1 ? iterated_copson_copson_l1(*u, *v, *w, s.q, r, fo) : iterated_copson_copson(*u, *v, *w, s.p, s.q, r, fo);
    }
    default:
      throw RegimeMismatch("no characterisation for operator '" + to_string(s.kind.tag) + "'");
  }
}

/// The L^1 plain cases with q >= 1 are equalities; everything else holds up to constants.
inline bool characterization_is_exact(const InequalitySpec& s) {
  return s.p == 1.0 && s.q >= 1.0 && !is_iterated(s.kind.tag);
}

/// Solver lower bound against the functional: F/B <= C_est <= A F.
inline EquivalenceReport verify_characterization(const InequalitySpec& spec, const CharacterizationOptions& co = {},
                                                 const SolverOptions& opts = {}) {
  const auto F = characterizing_functional(spec, co.n);
  const bool exact = characterization_is_exact(spec);
  const double A = co.A.value_or(exact ? 1.05 : 8.0);
  const double B = co.B.value_or(exact ? 1.05 : 8.0);
  EquivalenceReport rep;
  rep.theorem = "characterization";
  rep.label = spec.label;
  rep.regime = F.regime;
  rep.original = best_constant(spec, opts);
  rep.c_orig = rep.original->value;
  rep.c_red = F.value;
  rep.window_lo = 1.0 / B;
  rep.window_hi = A;
  if (!(F.value > 0.0) || !F.finite) {
    rep.message = "functional is not a positive finite number";
    return rep;
  }
  rep.ratio = rep.c_orig / F.value;
  rep.pass = rep.ratio >= rep.window_lo && rep.ratio <= rep.window_hi;
  return rep;
}

// ---------------------------------------------------------------------------
// Random admissible instances

namespace detail {

/// Two or three segments with log-uniform breaks and exponents in [lo, hi].
inline PiecewisePowerWeight random_ppw(std::mt19937_64& rng, const GridSpec& g, double lo, double hi) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int segs = 2 + static_cast<int>(U(rng) * 2.0);
  const double L = std::log(g.hi / g.lo);
  std::vector<double> br{g.lo};
  for (int k = 1; k < segs; ++k) br.push_back(g.lo * std::exp(L * (k + (U(rng) - 0.5) * 0.6) / segs));
  br.push_back(g.hi);
  std::vector<PowerSegment> out;
  double c = std::exp(U(rng) * 2.0 - 1.0);
  for (int k = 0; k < segs; ++k) {
    const double a = lo + (hi - lo) * U(rng);
    if (k > 0) {
      // continuous at the break
      const auto& prev = out.back();
      c = prev.c * std::pow(br[k], prev.a) / std::pow(br[k], a);
    }
    out.push_back({br[k], br[k + 1], c, a});
  }
  return PiecewisePowerWeight(out);
}

}  // namespace detail

/**
 * A random instance satisfying the hypotheses of `id`.  Exponents of v are
 * drawn so that v^{1-p'} is integrable at the anchored end; w (and u) are
 * drawn around the exponent that balances the characterising functional.
 */
inline InequalitySpec random_admissible_spec(const std::string& id, std::uint64_t seed, const GridSpec& grid = {256, 1e-4, 1e4}) {
  if (!is_theorem_id(id)) throw std::invalid_argument("unknown theorem id '" + id + "'");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto in = [&](double a, double b) { return a + (b - a) * U(rng); };

  InequalitySpec s;
  s.grid = grid;
  s.seed = seed;
  s.label = id + "#" + std::to_string(seed);
  const bool cone = id == "cone_down" || id == "cone_up";
  const bool hardy_side = id == "composed_hardy" || id == "composed_hardy_sup" || id == "flipped_hardy" ||
                          id == "hardy_identity" || id == "iterated_hardy_copson" || id == "cone_down" ||
                          id == "identity";
  s.p = cone ? 1.0 : in(1.5, 3.0);
  s.q = in(0.5, 4.0);
  if (detail::ends_with(id, "_sup")) s.q = std::numeric_limits<double>::infinity();
  const double p = s.p, pc = cone ? 0.0 : conjugate(p);

  // v: v^{1-p'} integrable at 0 (Hardy side) or at infinity (Copson side)
  double alo, ahi;
  if (cone) {
    alo = -0.5, ahi = 0.5;
  } else if (hardy_side) {
    alo = -0.5, ahi = std::min(1.0, p - 1.0) - 0.1;
  } else {
    alo = p - 1.0 + 0.1, ahi = p;
  }
  const auto v = detail::random_ppw(rng, grid, alo, ahi);
  s.v = v;
  // w balanced against the mean v exponent
  const double abar = 0.5 * (alo + ahi);
  const double qq = std::isinf(s.q) ? 2.0 : s.q;
  const double bstar = cone ? (hardy_side ? -2.0 : 0.0) : -1.0 + qq * (abar / p - 1.0 / pc);
  s.w = detail::random_ppw(rng, grid, bstar - 0.4, bstar + 0.4);

  OperatorTag tag = hardy_side ? OperatorTag::hardy : OperatorTag::copson;
  if (id == "composed_hardy" || id == "composed_hardy_sup") tag = OperatorTag::hardy_then_hardy;
  if (id == "composed_copson" || id == "composed_copson_sup") tag = OperatorTag::copson_then_hardy;
  if (id == "iterated_hardy_copson") tag = OperatorTag::hardy_then_copson;
  if (id == "iterated_copson_copson") tag = OperatorTag::copson_then_copson;
  if (is_iterated(tag)) {
    const double r = in(0.5, 4.0);
    const auto u = detail::random_ppw(rng, grid, -1.5, 0.5);
    s.kind = OperatorKind(tag, r, u);
    // outer weight near x^{-1}
    s.w = detail::random_ppw(rng, grid, -1.4, -0.6);
  } else {
    s.kind = OperatorKind(tag);
  }
  return s;
}

}  // namespace hardy
