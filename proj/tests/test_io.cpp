#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "hardy/io.hpp"

namespace io = hardy::io;

namespace {

io::Record sample_record() {
  io::Record r;
  r.record = "verify";
  r.instance_id = "suite/3";
  r.theorem = "composed_hardy";
  r.regime = "hardy(a)";
  r.value = 0.1 + 0.2;
  r.parts = {{"F1", 1.0 / 3.0}, {"F2", std::numeric_limits<double>::infinity()}};
  r.c_orig = 1e-300;
  r.c_red = std::numeric_limits<double>::quiet_NaN();
  r.ratio = -std::numeric_limits<double>::infinity();
  r.verdict = "fail";
  r.witness = "support=2;3@0.5:1;9@2:0.25";
  r.message = "quoted \"text\", with a comma";
  return r;
}

std::string read(const std::string& name) {
  std::ifstream f(std::string(HARDY_SAMPLES) + "/" + name);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string parse_error(const std::string& text) {
  try {
    io::parse_instances(text);
  } catch (const hardy::ParseError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Records, JsonRoundTripIsExact) {
  const auto r = sample_record();
  const auto line = io::to_json_line(r);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(io::parse_json_line(line), r);
  io::Record empty;
  empty.record = "eval";
  EXPECT_EQ(io::parse_json_line(io::to_json_line(empty)), empty);
}

TEST(Records, CsvRoundTripIsExact) {
  const auto r = sample_record();
  EXPECT_EQ(io::parse_csv_row(io::to_csv_row(r)), r);
  EXPECT_EQ(io::csv_header(), "record,instance_id,theorem,regime,value,parts,c_orig,c_red,ratio,verdict,witness,message");
}

TEST(Records, NanDiffersFromValue) {
  auto a = sample_record(), b = a;
  b.c_red = 1.0;
  EXPECT_FALSE(a == b);
}

TEST(Parse, ExplicitInstances) {
  const auto in = io::parse_instances(read("hardy_examples.json"));
  ASSERT_EQ(in.size(), 3u);
  EXPECT_EQ(in[0].id, "power-pair");
  EXPECT_EQ(in[0].spec.kind.tag, hardy::OperatorTag::hardy);
  EXPECT_GT(in[1].line, in[0].line);
}

TEST(Parse, DomainOverride) {
  io::ParseDefaults d;
  d.domain = hardy::GridSpec{64, 2.0, 5.0};
  d.n = 64;
  const auto in = io::parse_instances(read("hardy_examples.json"), d);
  EXPECT_EQ(in[0].spec.grid.n, 64u);
  EXPECT_EQ(hardy::weight_lo(in[0].spec.v), 2.0);
  EXPECT_EQ(hardy::weight_hi(in[0].spec.w), 5.0);
}

TEST(Parse, SyntaxErrorCarriesLine) {
  const auto msg = parse_error(read("malformed.json"));
  EXPECT_EQ(msg.rfind("line 7:", 0), 0u) << msg;
}

TEST(Parse, BadWeightCarriesLineAndIndex) {
  const auto msg = parse_error(read("bad_weight.json"));
  EXPECT_EQ(msg.rfind("line 5 (instance 1):", 0), 0u) << msg;
  EXPECT_NE(msg.find("contiguous"), std::string::npos) << msg;
}

TEST(Parse, SemanticErrors) {
  EXPECT_NE(parse_error(R"([{"kind": "sideways", "weights": {}}])"), "");
  EXPECT_NE(parse_error(R"([{"theorem": "no_such", "random": 2}])"), "");
  EXPECT_NE(parse_error(R"({"kind": "hardy"})"), "");
}

TEST(Parse, InfiniteExponentAndDefaultP) {
  const auto in = io::parse_instances(R"([{"kind": "hardy", "exponents": {"q": "inf"},
    "weights": {"v": [{"from": 1, "to": 10, "c": 1, "a": 0}], "w": [{"from": 1, "to": 10, "c": 2, "a": -1}]}}])");
  ASSERT_EQ(in.size(), 1u);
  EXPECT_EQ(in[0].spec.p, 1.0);
  EXPECT_TRUE(std::isinf(in[0].spec.q));
}

TEST(Parse, RandomGeneratorsExpand) {
  const auto in = io::parse_instances(read("equivalence_suite.json"));
  ASSERT_EQ(in.size(), 200u);
  EXPECT_EQ(in[0].id, "composed-hardy/0");
  EXPECT_EQ(in[0].theorem, "composed_hardy");
  EXPECT_EQ(in[0].spec.seed, 100u);
  EXPECT_EQ(in[199].spec.seed, 1019u);
  // same entry, same instances
  const auto again = io::parse_instances(read("equivalence_suite.json"));
  EXPECT_EQ(again[57].spec.p, in[57].spec.p);
  EXPECT_EQ(again[57].spec.q, in[57].spec.q);
}

TEST(Records, ErrorRecordKinds) {
  io::Instance in;
  in.id = "x";
  in.theorem = "hardy_identity";
  const auto skipped = io::error_record(in, "verify", hardy::HypothesisViolated("wrong side"));
  EXPECT_EQ(skipped.verdict, "skipped");
  EXPECT_EQ(skipped.record, "verify");
  const auto err = io::error_record(in, "verify", hardy::BudgetExceeded("too many"));
  EXPECT_EQ(err.verdict, "error");
  EXPECT_NE(err.message.find("too many"), std::string::npos);
}
