// Acceptance run: one PASS/FAIL line per criterion, exit code 0 only if all pass.
// Desk scale: grids n <= 1024 on (1e-4, 1e4).

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "hardy/hardy.hpp"
#include "oracle.hpp"

using namespace hardy;
using PPW = PiecewisePowerWeight;

namespace {

// Pinned tolerances.
constexpr double kL1Rel = 0.05;          // 1: solver vs exact L^1 functional
constexpr double kClassicalLo = 1.95;    // 2: required window for the classical constant
constexpr double kClassicalHi = 2.0;
constexpr double kTwoSidedLowSlack = 0.01;   // 3: C_est >= (1 - slack) F (solver is a lower bound)
constexpr double kTwoSidedHi = 2.1;          // 3: C_est <= 2.1 F
constexpr double kEquivK = 16.0;         // 4: ratio in [1/16, 16]
constexpr double kFtcRel = 1e-10;        // 5
constexpr double kDominationRel = 1e-4;  // 5
constexpr double kComposeRel = 1e-6;     // 6
constexpr double kSevenTwelfths = 1e-3;  // 7
constexpr double kGridRel = 0.01;        // 8

constexpr double X0 = 1e-4, XN = 1e4;
constexpr int kRestarts = 8;

bool all_ok = true;

void report(int id, const char* name, bool ok, const std::string& detail, double seconds) {
  std::printf("[%s] %d %-28s %s (%.1fs)\n", ok ? "PASS" : "FAIL", id, name, detail.c_str(), seconds);
  std::fflush(stdout);
  all_ok = all_ok && ok;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

InequalitySpec plain(OperatorTag t, double p, double q, PPW w, PPW v, std::size_t n) {
  InequalitySpec s;
  s.kind = OperatorKind(t);
  s.p = p;
  s.q = q;
  s.w = std::move(w);
  s.v = std::move(v);
  s.grid = {n, X0, XN};
  return s;
}

double solve(InequalitySpec s, std::size_t n) {
  s.grid.n = n;
  return best_constant(s, {.restarts = kRestarts}).value;
}

// Relative change from n = 512 to n = 1024, collected for criterion 8.
struct Drift {
  double worst = 0.0;
  std::string where;
  void add(double a512, double a1024, const std::string& what) {
    const double d = std::abs(a1024 - a512) / std::abs(a1024);
    if (d > worst) worst = d, where = what;
  }
};
Drift drift;

PPW two_piece(std::mt19937_64& rng, double alo, double ahi) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double br = std::pow(10.0, -2.0 + 4.0 * U(rng));
  const double a1 = alo + (ahi - alo) * U(rng), a2 = alo + (ahi - alo) * U(rng);
  const double c1 = std::exp(U(rng) * 2.0 - 1.0);
  const double c2 = c1 * std::pow(br, a1 - a2);
  return PPW{{X0, br, c1, a1}, {br, XN, c2, a2}};
}

// 1. p = 1: best constant equals the sup-form functional
void exact_l1_suite() {
  Timer t;
  std::mt19937_64 rng(2024);
  const double qs[] = {1.0, 1.5, 2.0, 4.0};
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const bool hardy_side = k % 2 == 0;
    const double q = qs[k % 4];
    const auto v = hardy_side ? two_piece(rng, -0.5, 0.8) : two_piece(rng, 0.3, 1.5);
    const auto w = hardy_side ? two_piece(rng, -3.0, -1.3) : two_piece(rng, -0.8, 0.5);
    const auto s = plain(hardy_side ? OperatorTag::hardy : OperatorTag::copson, 1.0, q, w, v, 1024);
    const auto F = hardy_side ? l1_hardy_constant(w, v, q, {1024}) : l1_copson_constant(w, v, q, {1024});
    const auto F512 = hardy_side ? l1_hardy_constant(w, v, q, {512}) : l1_copson_constant(w, v, q, {512});
    const double c1024 = solve(s, 1024), c512 = solve(s, 512);
    worst = std::max(worst, std::abs(c1024 - F.value) / F.value);
    drift.add(F512.value, F.value, fmt("l1 functional #%d", k));
    drift.add(c512, c1024, fmt("l1 best constant #%d", k));
  }
  report(1, "exact_l1_constants", worst <= kL1Rel, fmt("10 pairs, worst |C-F|/F = %.4f (tol %.2f)", worst, kL1Rel),
         t.seconds());
}

// Sharp constant of the classical inequality truncated to (a, b): the
// extremal is x^{1/2} sin(omega log(x/a)) with tan(omega L) = -2 omega.
double truncated_classical(double a, double b) {
  const double L = std::log(b / a), pi = std::acos(-1.0);
  double lo = 0.5 * pi / L, hi = pi / L;
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    (std::sin(m * L) + 2.0 * m * std::cos(m * L) > 0.0 ? lo : hi) = m;
  }
  const double w = 0.5 * (lo + hi);
  return 1.0 / std::sqrt(0.25 + w * w);
}

InequalitySpec classical() {
  return plain(OperatorTag::hardy, 2, 2, PPW::power(1, -2, X0, XN), PPW::constant(1, X0, XN), 1024);
}

// 2. classical constant
void classical_constant() {
  Timer t;
  const auto s = classical();
  const double c = solve(s, 1024);
  drift.add(solve(s, 512), c, "classical best constant");
  const double dense = power_iteration(discretize([&] {
                                          auto d = s;
                                          d.grid.n = 4096;
                                          return d;
                                        }()))
                           .value;
  const double ode = truncated_classical(X0, XN);
  const bool ok = c >= kClassicalLo && c <= kClassicalHi;
  report(2, "classical_sharp_constant", ok,
         fmt("C(n=1024) = %.5f, required [%.2f, %.2f]; dense n=4096: %.5f; truncated sharp value on (1e-4,1e4): %.5f "
             "(the window caps C below 1.95)",
             c, kClassicalLo, kClassicalHi, dense, ode),
         t.seconds());
}

// 3. F <= C <= 2.1 F in regime (a)
void two_sided_bound() {
  Timer t;
  std::vector<InequalitySpec> suite{
      classical(),
      plain(OperatorTag::copson, 2, 2, PPW::constant(1, X0, XN), PPW::power(1, 2, X0, XN), 1024)};
  for (std::uint64_t seed = 1; suite.size() < 7; ++seed) {
    auto s = random_admissible_spec(seed % 2 ? "hardy_identity" : "copson_identity", seed, {1024, X0, XN});
    if (s.q >= s.p) suite.push_back(std::move(s));
  }
  double lo = 1e300, hi = 0.0;
  bool regime_ok = true;
  for (std::size_t k = 0; k < suite.size(); ++k) {
    const auto F = characterizing_functional(suite[k], 1024);
    regime_ok = regime_ok && F.regime.ends_with("(a)");
    const double c = solve(suite[k], 1024);
    drift.add(characterizing_functional(suite[k], 512).value, F.value, fmt("two-sided functional #%zu", k));
    drift.add(solve(suite[k], 512), c, fmt("two-sided best constant #%zu", k));
    lo = std::min(lo, c / F.value);
    hi = std::max(hi, c / F.value);
  }
  const bool ok = regime_ok && lo >= 1.0 - kTwoSidedLowSlack && hi <= kTwoSidedHi;
  report(3, "two_sided_bound", ok,
         fmt("7 instances, C/F in [%.4f, %.4f] (allowed [%.2f, %.1f])%s", lo, hi, 1.0 - kTwoSidedLowSlack, kTwoSidedHi,
             regime_ok ? "" : ", regime not (a)"),
         t.seconds());
}

// 4. equivalence suites from the instance file
void equivalence_suites() {
  Timer t;
  std::ifstream f(std::string(HARDY_SAMPLES) + "/equivalence_suite.json");
  std::stringstream ss;
  ss << f.rdbuf();
  const auto instances = io::parse_instances(ss.str());
  std::size_t passed = 0;
  double lo = 1e300, hi = 0.0;
  std::string first_bad;
  for (const auto& in : instances) {
    try {
      const auto rep = verify_equivalence(in.spec, in.theorem, kEquivK, {.restarts = kRestarts});
      lo = std::min(lo, rep.ratio);
      hi = std::max(hi, rep.ratio);
      if (rep.pass) ++passed;
      else if (first_bad.empty()) first_bad = in.id;
    } catch (const std::exception& e) {
      if (first_bad.empty()) first_bad = in.id + " (" + e.what() + ")";
    }
  }
  const bool ok = passed == instances.size() && instances.size() == 200;
  report(4, "equivalence_suites", ok,
         fmt("%zu/%zu instances in [1/16, 16], ratios in [%.3f, %.3f]%s%s", passed, instances.size(), lo, hi,
             first_bad.empty() ? "" : ", first failure ", first_bad.c_str()),
         t.seconds());
}

// Independent upper cumulative of a piecewise power weight.
double upper_cum(const std::vector<PowerSegment>& segs, double x) {
  double s = 0.0;
  for (const auto& g : segs) {
    const double a = std::max(x, g.from), b = g.to;
    if (b <= a) continue;
    const double k = g.a + 1.0;
    s += std::abs(k) < 1e-12 ? g.c * std::log(b / a) : g.c * (std::pow(b, k) - std::pow(a, k)) / k;
  }
  return s;
}

// 5. FTC identity and domination of non-decreasing steps
void reduction_invariants() {
  Timer t;
  boost::math::quadrature::tanh_sinh<double> ts;
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst_ftc = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double br = std::pow(10.0, -3.0 + 6.0 * U(rng));
    const double a1 = -3.0 + 4.0 * U(rng), a2 = -3.5 + 3.0 * U(rng);
    const std::vector<PowerSegment> segs{{X0, br, 0.3 + 3.0 * U(rng), a1}, {br, XN, 0.3 + 3.0 * U(rng), a2}};
    const PPW v(segs);
    const auto Vs = upper_cumulative(v);
    const double alpha = 0.2 + 4.8 * U(rng), x = std::pow(10.0, -3.9 + 7.8 * U(rng));
    // int_x^xn V_*^alpha v in t = log s, split at the break; V_*^alpha has an
    // endpoint singularity at xn, hence tanh-sinh
    auto f = [&](double lt) {
      const double s = std::exp(lt);
      return std::pow(upper_cum(segs, s), alpha) * v(s) * s;
    };
    double lhs = 0.0;
    std::vector<double> pts{x};
    if (br > x) pts.push_back(br);
    pts.push_back(XN);
    for (std::size_t j = 0; j + 1 < pts.size(); ++j)
      lhs += ts.integrate(f, std::log(pts[j]), std::log(pts[j + 1]), 1e-14);
    lhs *= alpha + 1.0;
    const double rhs = std::pow(Vs(x), alpha + 1.0) - std::pow(Vs(XN), alpha + 1.0);
    worst_ftc = std::max(worst_ftc, std::abs(lhs - rhs) / std::abs(rhs));
  }
  // (alpha + 1) reduce_up(f) >= f for non-decreasing steps, grid interior
  const auto g = make_grid(X0, XN, 512);
  double worst_dom = 0.0;
  for (int k = 0; k < 20; ++k) {
    const PPW v{{X0, 1.0, 1.0, 0.0}, {1.0, XN, 1.0, -1.5 - U(rng)}};
    const double alpha = 0.5 + 3.0 * U(rng);
    std::vector<double> f(g->size());
    double level = 0.1;
    for (auto& y : f) {
      if (U(rng) < 0.05) level += U(rng);
      y = level;
    }
    const auto out = reduce_up(GridFunction(g, f), v, alpha, Weight(v));
    for (std::size_t i = 0; i < g->size(); ++i) {
      if ((*g)[i] > XN / 10) break;
      worst_dom = std::max(worst_dom, (f[i] - (alpha + 1.0) * out[i]) / f[i]);
    }
  }
  const bool ok = worst_ftc <= kFtcRel && worst_dom <= kDominationRel;
  report(5, "reduction_invariants", ok,
         fmt("FTC worst rel %.2e (tol %.0e) over 1000 triples; domination worst shortfall %.2e (tol %.0e)", worst_ftc,
             kFtcRel, worst_dom, kDominationRel),
         t.seconds());
}

// 6. direct vs composed iterated functional in regime (a)
void composition_consistency() {
  Timer t;
  std::mt19937_64 rng(66);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0.0;
  bool finite = true;
  for (int k = 0; k < 10; ++k) {
    const double p = 1.5 + U(rng), q = p + (4.0 - p) * U(rng), r = p + (4.0 - p) * U(rng);
    const auto v = two_piece(rng, -0.5, std::min(1.0, p - 1.0) - 0.1);
    const auto u = two_piece(rng, -1.5, 0.5);
    const auto w = two_piece(rng, -1.4, -0.6);
    const auto a = iterated_hardy_copson(u, v, w, p, q, r, {1024});
    const auto b = iterated_hardy_copson_composed(u, v, w, p, q, r, {1024});
    finite = finite && a.finite && b.finite && a.regime.ends_with("(a)");
    worst = std::max(worst, std::abs(a.value - b.value) / a.value);
    drift.add(iterated_hardy_copson(u, v, w, p, q, r, {512}).value, a.value, fmt("iterated functional #%d", k));
  }
  report(6, "composition_consistency", finite && worst <= kComposeRel,
         fmt("10 instances, worst rel diff %.2e (tol %.0e)", worst, kComposeRel), t.seconds());
}

// 7. the (7/12)^{1/2} value
void seven_twelfths() {
  Timer t;
  const PPW w{{X0, 1.0, 1.0, 0.0}, {1.0, XN, 1.0, -3.0}};
  const auto v = PPW::constant(1.0, X0, XN);
  const auto F = hardy_constant(w, v, 2.0, 1.0, {1024});
  drift.add(hardy_constant(w, v, 2.0, 1.0, {512}).value, F.value, "seven-twelfths functional");
  // exact piecewise integration on the half-line: int_0^1 (4/3 - x)^2 ... gives 7/12
  const double want = std::sqrt(7.0 / 12.0);
  const double err = std::abs(F.value - want);
  report(7, "seven_twelfths_value", err <= kSevenTwelfths && F.regime == "hardy(b)",
         fmt("F = %.6f, exact %.6f, |diff| %.1e (tol %.0e), regime %s", F.value, want, err, kSevenTwelfths,
             F.regime.c_str()),
         t.seconds());
}

// 8. n = 512 vs n = 1024 over everything collected above
void grid_convergence() {
  report(8, "grid_convergence", drift.worst < kGridRel,
         fmt("worst relative change %.4f (tol %.2f) at %s", drift.worst, kGridRel, drift.where.c_str()), 0.0);
}

}  // namespace

int main() {
  exact_l1_suite();
  classical_constant();
  two_sided_bound();
  equivalence_suites();
  reduction_invariants();
  composition_consistency();
  seven_twelfths();
  grid_convergence();
  std::printf("%s\n", all_ok ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
  return all_ok ? 0 : 1;
}
