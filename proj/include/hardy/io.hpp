#pragma once

// Instance files (JSON) and report records (JSON lines or CSV).
//
// Instance file: a JSON array of objects
//   {"id": "...", "kind": "hardy", "theorem": "hardy_identity",
//    "exponents": {"p": 2, "q": 1, "r": 2},
//    "weights": {"v": [{"from": 1e-3, "to": 1e3, "c": 1, "a": 0}], "w": [...], "u": [...]}}
// or a generator entry {"theorem": "composed_hardy", "random": 20, "seed": 7}.
// p defaults to 1; "inf" is accepted for q.

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hardy/errors.hpp"
#include "hardy/inequality.hpp"
#include "hardy/verify.hpp"

namespace hardy::io {

using nlohmann::json;

struct Instance {
  std::string id;
  std::size_t line = 0;
  std::string theorem;  // empty when not given
  InequalitySpec spec;
};

struct ParseDefaults {
  std::optional<GridSpec> domain;  // overrides the weights' own window
  std::size_t n = 512;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) line += text[i] == '\n';
  return line;
}

/// Line of each element of the top-level array.
inline std::vector<std::size_t> element_lines(const std::string& text) {
  std::vector<std::size_t> out;
  int depth = 0;
  bool str = false, esc = false, expect = false;
  std::size_t line = 1;
  for (char ch : text) {
    if (ch == '\n') ++line;
    if (str) {
      if (esc) esc = false;
      else if (ch == '\\') esc = true;
      else if (ch == '"') str = false;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) continue;
    if (depth == 1 && expect) {
      out.push_back(line);
      expect = false;
    }
    switch (ch) {
      case '"': str = true; break;
      case '[': case '{':
        if (++depth == 1 && ch == '[') expect = true;
        break;
      case ']': case '}': --depth; break;
      case ',':
        if (depth == 1) expect = true;
        break;
      default: break;
    }
  }
  return out;
}

inline double number(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity" || s == "Infinity") return std::numeric_limits<double>::infinity();
  }
  throw ParseError(where + ": expected a number");
}

inline PiecewisePowerWeight weight(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ParseError(where + ": expected a non-empty list of segments");
  std::vector<PowerSegment> segs;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const auto& s = j[k];
    const auto at = where + "[" + std::to_string(k) + "]";
    if (!s.is_object()) throw ParseError(at + ": expected {from, to, c, a}");
    for (const char* key : {"from", "to", "c", "a"})
      if (!s.contains(key)) throw ParseError(at + ": missing '" + key + "'");
    segs.push_back({number(s["from"], at + ".from"), number(s["to"], at + ".to"), number(s["c"], at + ".c"),
                    number(s["a"], at + ".a")});
  }
  try {
    return PiecewisePowerWeight(segs);
  } catch (const InvalidWeight& e) {
    throw ParseError(where + ": " + e.what());
  }
}

inline void restrict_to(PiecewisePowerWeight& w, const GridSpec& g, const std::string& name) {
  if (w.lo() > g.lo * (1 + 1e-12) || w.hi() < g.hi * (1 - 1e-12))
    throw ParseError("weight " + name + " does not cover the domain " + std::to_string(g.lo) + ":" + std::to_string(g.hi));
  w = w.restricted(std::max(w.lo(), g.lo), std::min(w.hi(), g.hi));
}

inline std::vector<Instance> instance(const json& j, std::size_t index, const ParseDefaults& d) {
  if (!j.is_object()) throw ParseError("expected an object");
  const std::string theorem = j.value("theorem", std::string());
  if (!theorem.empty() && theorem != "characterization" && !is_theorem_id(theorem))
    throw ParseError("unknown theorem id '" + theorem + "'");
  const std::string id = j.contains("id") ? j["id"].get<std::string>() : "i" + std::to_string(index);

  if (j.contains("random")) {
    if (theorem.empty() || theorem == "characterization")
      throw ParseError("random instances need an equivalence theorem id");
    const auto count = j["random"].get<int>();
    const auto seed = j.value("seed", d.seed);
    GridSpec g = d.domain.value_or(GridSpec{256, 1e-4, 1e4});
    g.n = j.value("n", d.domain ? d.n : std::size_t{256});
    std::vector<Instance> out;
    for (int k = 0; k < count; ++k) {
      Instance in;
      in.id = id + "/" + std::to_string(k);
      in.theorem = theorem;
      in.spec = random_admissible_spec(theorem, seed + static_cast<std::uint64_t>(k), g);
      out.push_back(std::move(in));
    }
    return out;
  }

  Instance in;
  in.id = id;
  in.theorem = theorem;
  auto& s = in.spec;
  if (!j.contains("kind")) throw ParseError("missing 'kind'");
  const auto tag = operator_tag_from_string(j["kind"].get<std::string>());
  if (!tag) throw ParseError("unknown operator kind '" + j["kind"].get<std::string>() + "'");
  if (!j.contains("weights") || !j["weights"].is_object()) throw ParseError("missing 'weights'");
  if (!j.contains("exponents") || !j["exponents"].is_object()) throw ParseError("missing 'exponents'");
  const auto& W = j["weights"];
  const auto& E = j["exponents"];
  for (const char* key : {"v", "w"})
    if (!W.contains(key)) throw ParseError(std::string("missing weight '") + key + "'");
  if (!E.contains("q")) throw ParseError("missing exponent 'q'");
  auto v = weight(W["v"], "weights.v");
  auto w = weight(W["w"], "weights.w");
  std::optional<PiecewisePowerWeight> u;
  if (W.contains("u")) u = weight(W["u"], "weights.u");
  s.p = E.contains("p") ? number(E["p"], "exponents.p") : 1.0;
  s.q = number(E["q"], "exponents.q");
  if (!(s.p > 0.0) || !(s.q > 0.0)) throw ParseError("exponents must be positive");

  GridSpec g;
  if (d.domain) {
    g = *d.domain;
  } else {
    if (!v.same_domain(w) || (u && !u->same_domain(v))) throw ParseError("weights must share a domain (or pass --domain)");
    g = {d.n, v.lo(), v.hi()};
  }
  g.n = j.value("n", d.n);
  restrict_to(v, g, "v");
  restrict_to(w, g, "w");
  if (u) restrict_to(*u, g, "u");
  s.v = v;
  s.w = w;
  s.grid = g;
  s.seed = j.value("seed", d.seed);
  s.label = id;
  if (is_iterated(*tag)) {
    if (!u) throw ParseError("iterated operator needs weight 'u'");
    if (!E.contains("r")) throw ParseError("iterated operator needs exponent 'r'");
    const double r = number(E["r"], "exponents.r");
    if (!(r > 0.0) || std::isinf(r)) throw ParseError("exponent r must be in (0, inf)");
    s.kind = OperatorKind(*tag, r, *u);
  } else {
    s.kind = OperatorKind(*tag);
  }
  return {std::move(in)};
}

}  // namespace detail

/// Parse an instance file; errors carry the line of the offending element.
inline std::vector<Instance> parse_instances(const std::string& text, const ParseDefaults& d = {}) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("line " + std::to_string(detail::line_of(text, e.byte)) + ": " + e.what());
  }
  if (!doc.is_array()) throw ParseError("line 1: instance file must be a JSON array");
  const auto lines = detail::element_lines(text);
  std::vector<Instance> out;
  for (std::size_t k = 0; k < doc.size(); ++k) {
    const std::size_t line = k < lines.size() ? lines[k] : 0;
    try {
      for (auto& in : detail::instance(doc[k], k, d)) {
        in.line = line;
        out.push_back(std::move(in));
      }
    } catch (const json::exception& e) {
      throw ParseError("line " + std::to_string(line) + " (instance " + std::to_string(k) + "): " + e.what());
    } catch (const Error& e) {
      throw ParseError("line " + std::to_string(line) + " (instance " + std::to_string(k) + "): " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Records

struct Record {
  std::string record;  // eval | best | verify | characterize | error | skipped
  std::string instance_id;
  std::string theorem;
  std::string regime;  // functional regime, or the winning solver method
  std::optional<double> value;
  std::vector<std::pair<std::string, double>> parts;
  std::optional<double> c_orig;
  std::optional<double> c_red;
  std::optional<double> ratio;
  std::string verdict;  // pass | fail | error | skipped, empty for eval/best
  std::string witness;  // "cell:height;..." for best
  std::string message;

  bool operator==(const Record& o) const {
    auto same = [](const std::optional<double>& a, const std::optional<double>& b) {
      if (a.has_value() != b.has_value()) return false;
      if (!a) return true;
      return *a == *b || (std::isnan(*a) && std::isnan(*b));
    };
    return record == o.record && instance_id == o.instance_id && theorem == o.theorem && regime == o.regime &&
           same(value, o.value) && parts == o.parts && same(c_orig, o.c_orig) && same(c_red, o.c_red) &&
           same(ratio, o.ratio) && verdict == o.verdict && witness == o.witness && message == o.message;
  }
};

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{"record", "instance_id", "theorem", "regime", "value", "parts",
                                             "c_orig", "c_red",       "ratio",   "verdict", "witness", "message"};
  return cols;
}

/// %.17g, with inf/nan spelled out.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double x = std::stod(s, &used);
  if (used != s.size()) throw ParseError("bad number '" + s + "'");
  return x;
}

namespace detail {
inline json number_json(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}
inline double json_number(const json& j) { return j.is_string() ? parse_double(j.get<std::string>()) : j.get<double>(); }

inline std::string parts_string(const std::vector<std::pair<std::string, double>>& parts) {
  std::string s;
  for (const auto& [k, v] : parts) s += (s.empty() ? "" : ";") + k + "=" + format_double(v);
  return s;
}
inline std::vector<std::pair<std::string, double>> parse_parts(const std::string& s) {
  std::vector<std::pair<std::string, double>> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ParseError("bad parts entry '" + item + "'");
    out.emplace_back(item.substr(0, eq), parse_double(item.substr(eq + 1)));
  }
  return out;
}
}  // namespace detail

inline std::string to_json_line(const Record& r) {
  json j = json::object();
  j["record"] = r.record;
  j["instance_id"] = r.instance_id;
  j["theorem"] = r.theorem;
  j["regime"] = r.regime;
  j["value"] = r.value ? detail::number_json(*r.value) : json(nullptr);
  json parts = json::array();
  for (const auto& [k, v] : r.parts) parts.push_back({{"name", k}, {"value", detail::number_json(v)}});
  j["parts"] = parts;
  j["c_orig"] = r.c_orig ? detail::number_json(*r.c_orig) : json(nullptr);
  j["c_red"] = r.c_red ? detail::number_json(*r.c_red) : json(nullptr);
  j["ratio"] = r.ratio ? detail::number_json(*r.ratio) : json(nullptr);
  j["verdict"] = r.verdict;
  j["witness"] = r.witness;
  j["message"] = r.message;
  return j.dump();
}

inline Record parse_json_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("bad record: ") + e.what());
  }
  Record r;
  auto opt = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return detail::json_number(j[key]);
  };
  r.record = j.at("record").get<std::string>();
  r.instance_id = j.at("instance_id").get<std::string>();
  r.theorem = j.at("theorem").get<std::string>();
  r.regime = j.at("regime").get<std::string>();
  r.value = opt("value");
  for (const auto& p : j.at("parts")) r.parts.emplace_back(p.at("name").get<std::string>(), detail::json_number(p.at("value")));
  r.c_orig = opt("c_orig");
  r.c_red = opt("c_red");
  r.ratio = opt("ratio");
  r.verdict = j.at("verdict").get<std::string>();
  r.witness = j.at("witness").get<std::string>();
  r.message = j.at("message").get<std::string>();
  return r;
}

namespace detail {
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}
inline std::string opt_field(const std::optional<double>& x) { return x ? format_double(*x) : std::string(); }
inline std::optional<double> opt_parse(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}
}  // namespace detail

inline std::string csv_header() {
  std::string s;
  for (const auto& c : csv_columns()) s += (s.empty() ? "" : ",") + c;
  return s;
}

inline std::string to_csv_row(const Record& r) {
  using namespace detail;
  const std::vector<std::string> f{r.record,       r.instance_id,     r.theorem,         r.regime,
                                   opt_field(r.value), parts_string(r.parts), opt_field(r.c_orig), opt_field(r.c_red),
                                   opt_field(r.ratio), r.verdict,       r.witness,         r.message};
  std::string s;
  for (std::size_t k = 0; k < f.size(); ++k) s += (k ? "," : "") + csv_field(f[k]);
  return s;
}

inline Record parse_csv_row(const std::string& line) {
  std::vector<std::string> f(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') f.back() += '"', ++i;
      else if (c == '"') quoted = false;
      else f.back() += c;
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      f.emplace_back();
    } else {
      f.back() += c;
    }
  }
  if (f.size() != csv_columns().size())
    throw ParseError("record has " + std::to_string(f.size()) + " fields, expected " + std::to_string(csv_columns().size()));
  using namespace detail;
  Record r;
  r.record = f[0];
  r.instance_id = f[1];
  r.theorem = f[2];
  r.regime = f[3];
  r.value = opt_parse(f[4]);
  r.parts = parse_parts(f[5]);
  r.c_orig = opt_parse(f[6]);
  r.c_red = opt_parse(f[7]);
  r.ratio = opt_parse(f[8]);
  r.verdict = f[9];
  r.witness = f[10];
  r.message = f[11];
  return r;
}

// ---------------------------------------------------------------------------
// Record builders

inline Record eval_record(const Instance& in, const FunctionalValue& f) {
  Record r;
  r.record = "eval";
  r.instance_id = in.id;
  r.theorem = in.theorem;
  r.regime = f.regime;
  r.value = f.value;
  r.parts = f.parts;
  return r;
}

/// Up to `top` largest cells of the witness, in grid order, heights relative to the max.
inline std::string witness_summary(const GridFunction& h, std::size_t top = 8) {
  std::vector<std::size_t> idx;
  double m = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i)
    if (h[i] > 0.0) idx.push_back(i), m = std::max(m, h[i]);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return h[a] > h[b]; });
  const auto support = idx.size();
  if (idx.size() > top) idx.resize(top);
  std::sort(idx.begin(), idx.end());
  std::string s = "support=" + std::to_string(support);
  for (auto i : idx) {
    char buf[64];
    std::snprintf(buf, sizeof buf, ";%zu@%.6g:%.6g", i, h.grid()[i], h[i] / m);
    s += buf;
  }
  return s;
}

inline Record best_record(const Instance& in, const BestConstantEstimate& e) {
  Record r;
  r.record = "best";
  r.instance_id = in.id;
  r.theorem = in.theorem;
  r.regime = to_string(e.method);
  r.value = e.value;
  r.parts = {{"iterations", static_cast<double>(e.iterations)}, {"converged", e.converged ? 1.0 : 0.0}};
  r.witness = witness_summary(e.witness);
  return r;
}

inline Record verify_record(const Instance& in, const EquivalenceReport& rep) {
  Record r;
  r.record = rep.theorem == "characterization" ? "characterize" : "verify";
  r.instance_id = in.id;
  r.theorem = rep.theorem;
  r.regime = rep.regime;
  r.value = rep.ratio;
  r.parts = {{"theta", rep.theta}, {"window_lo", rep.window_lo}, {"window_hi", rep.window_hi}};
  r.c_orig = rep.c_orig;
  r.c_red = rep.c_red;
  r.ratio = rep.ratio;
  r.verdict = rep.pass ? "pass" : "fail";
  r.message = rep.message;
  return r;
}

inline Record error_record(const Instance& in, const std::string& command, const std::exception& e) {
  Record r;
  const auto* he = dynamic_cast<const Error*>(&e);
  const bool skip = dynamic_cast<const HypothesisViolated*>(&e) != nullptr;
  r.record = command;
  r.instance_id = in.id;
  r.theorem = in.theorem;
  r.verdict = skip ? "skipped" : "error";
  r.message = std::string(he ? he->kind() : "Error") + ": " + e.what();
  return r;
}

}  // namespace hardy::io
