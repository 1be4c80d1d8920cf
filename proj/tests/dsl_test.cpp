#include "support.hpp"

#include <gtest/gtest.h>

using namespace bitfrag;
using namespace bitfrag::testing;

TEST(Parse, AddDefinition) {
  auto dfg = parse_ok("design d; input A: u16; input B: u16; C: add u16 = A + B; output C;");
  ASSERT_EQ(dfg.operations.size(), 1u);
  const auto &c = dfg.operations[0];
  EXPECT_EQ(c.kind, OpKind::Add);
  EXPECT_EQ(c.width, 16u);
  EXPECT_EQ(c.signedness, Signedness::Unsigned);
  EXPECT_EQ(c.operands[0], Operand::input("A"));
}

TEST(Parse, SlicedOperandTruncatesRight) {
  auto dfg = parse_ok(R"(design d; input a: u8; input b: u8; input D: u5;
    F: add u8 = a + b; H: add u5 = F[7:3] + D; output H;)");
  const auto &op = *dfg.find_op("H");
  ASSERT_TRUE(op.operands[0].slice);
  EXPECT_EQ(*op.operands[0].slice, (Slice{7, 3}));
  EXPECT_EQ(op.operands[0].truncated_right(), 3u);
}

TEST(Parse, EmptyInputIsSyntaxError) {
  auto r = parse("");
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.diagnostics.front().kind, Diagnostic::Kind::Syntax);
}

TEST(Parse, DiagnosticsCarrySpansInsideInput) {
  const std::vector<std::string> bad = {
      "design",
      "design d; input a u4;",
      "design d; input a: u4; b: add u4 = a + ;",
      "design d; input a: u4; b: add u4 = a + c; output b;",
      "design d; input a: u4; b: add u4 = a[9:0] + a; output b;",
      "design d; input a: u4; b: frob u4 = a + a;",
      "design d; input a: u4; b: add u4 = a + a # ;",
  };
  for (const auto &text : bad) {
    auto r = parse(text);
    ASSERT_FALSE(r.ok()) << text;
    for (const auto &d : r.diagnostics) {
      ASSERT_TRUE(d.span) << text;
      EXPECT_LE(d.span->end, text.size()) << text;
      EXPECT_LE(d.span->begin, d.span->end) << text;
      EXPECT_GE(d.span->line, 1u) << text;
    }
  }
}

TEST(Parse, CarryConcatConstantAndSelect) {
  auto dfg = parse_ok(R"(design d;
    input a: u4; input b: u4; input s: u1;
    x: add u4 carry(1) = a + {b[2:0], const(1)};
    y: add u2 carry(x) = a[3:2] + b[3:2];   // linked carry
    z: select u4 = s ? x : const(1010);
    w: not u1 = carry(y);
    output z; output w;)");
  EXPECT_EQ(dfg.find_op("x")->carry_in, CarryIn::one());
  EXPECT_EQ(dfg.find_op("y")->carry_in, CarryIn::of("x"));
  EXPECT_EQ(dfg.find_op("x")->operands[1].kind, Operand::Kind::Concat);
  EXPECT_EQ(dfg.find_op("w")->operands[0], Operand::carry("y"));
  EXPECT_EQ(dfg.find_op("z")->operands[2], Operand::constant("1010"));
}

TEST(Emit, RoundTripsChain) {
  auto dfg = load_design("chain");
  EXPECT_EQ(parse_ok(emit(dfg)), dfg);
}

TEST(Emit, RoundTripsFragmentedDesign) {
  auto dfg = load_design("chain");
  auto m = mobility(dfg, 6, 3);
  auto f = fragment(dfg, m);
  auto text = emit(f.transformed);
  EXPECT_NE(text.find("carry(C_0)"), std::string::npos);
  EXPECT_NE(text.find('{'), std::string::npos);
  EXPECT_EQ(parse_ok(text), f.transformed);
}

TEST(Emit, RoundTripsConstantsAndEveryKind) {
  const char *text = R"(design k;
    input a: s4; input b: u3;
    p: mult s8 = a * a;
    q: sub u4 = b - const(011);
    r: lt s1 = a < const(0101);
    m: max u4 = a, b;
    n: min s4 = a, b;
    t: not u3 = b;
    output p; output q; output r; output m; output n; output t;)";
  auto dfg = parse_ok(text);
  EXPECT_EQ(parse_ok(emit(dfg)), dfg);
  auto kernel = extract_kernel(dfg).dfg;
  EXPECT_EQ(parse_ok(emit(kernel)), kernel);
}

TEST(Emit, RandomDesignsRoundTrip) {
  Rng rng(11);
  for (int t = 0; t < 30; ++t) {
    auto dfg = random_mixed(rng);
    EXPECT_EQ(parse_ok(emit(dfg)), dfg);
    auto adds = random_add_dag(rng);
    EXPECT_EQ(parse_ok(emit(adds)), adds);
  }
}

TEST(Emit, Deterministic) {
  auto dfg = load_design("eight");
  EXPECT_EQ(emit(dfg), emit(parse_ok(emit(dfg))));
  EXPECT_EQ(emit_dot(dfg), emit_dot(dfg));
}

namespace {

std::size_t count(const std::string &s, const std::string &needle) {
  std::size_t n = 0;
  for (auto at = s.find(needle); at != std::string::npos; at = s.find(needle, at + 1))
    ++n;
  return n;
}

} // namespace

TEST(EmitDot, ChainHasThreeOpNodes) {
  auto dot = emit_dot(load_design("chain"));
  EXPECT_EQ(count(dot, "shape=box"), 3u);
  EXPECT_NE(dot.find("\"op:C\" -> \"op:E\""), std::string::npos);
}

TEST(EmitDot, PassThroughHasNoOpNodes) {
  auto dot = emit_dot(parse_ok("design p; input x: u4; output x;"));
  EXPECT_EQ(count(dot, "shape=box"), 0u);
  EXPECT_NE(dot.find("\"in:x\""), std::string::npos);
}

TEST(EmitDot, EightAddsHaveEightOpNodes) {
  auto dot = emit_dot(load_design("eight"));
  EXPECT_EQ(count(dot, "shape=box"), 8u);
  EXPECT_NE(dot.find("[5:1]"), std::string::npos);
}
