#include "support.hpp"

#include <gtest/gtest.h>

using namespace bitfrag;
using namespace bitfrag::testing;

namespace {

const char *kChain = R"(design chain;
input A: u16; input B: u16; input D: u16; input F: u16;
C: add u16 = A + B;
E: add u16 = C + D;
G: add u16 = E + F;
output G;
)";

bool has_kind(const std::vector<Diagnostic> &ds, Diagnostic::Kind k) {
  return std::any_of(ds.begin(), ds.end(), [&](const Diagnostic &d) { return d.kind == k; });
}

DataFlowGraph chain() { return parse_ok(kChain); }

} // namespace

TEST(Validate, ThreeChainedAddsAreValid) { EXPECT_TRUE(validate(chain()).empty()); }

TEST(Validate, SelfReferenceIsACycle) {
  auto dfg = chain();
  dfg.operations[1].operands[1] = Operand::result("E");
  auto ds = validate(dfg);
  EXPECT_TRUE(has_kind(ds, Diagnostic::Kind::Cycle));
  EXPECT_EQ(ds.front().op, "E");
}

TEST(Validate, SliceBeyondProducerWidth) {
  auto dfg = chain();
  dfg.operations[1].operands[0] = Operand::result("C", Slice{17, 0});
  EXPECT_TRUE(has_kind(validate(dfg), Diagnostic::Kind::SliceOutOfRange));
}

TEST(Validate, UndefinedReferenceAndBadArity) {
  auto dfg = chain();
  dfg.operations[0].operands[1] = Operand::result("nope");
  EXPECT_TRUE(has_kind(validate(dfg), Diagnostic::Kind::UndefinedReference));

  auto two = chain();
  two.operations[0].operands.pop_back();
  EXPECT_TRUE(has_kind(validate(two), Diagnostic::Kind::BadArity));
}

TEST(Validate, CarryInOnlyOnAdd) {
  auto dfg = parse_ok("design d; input a: u4; n: not u4 = a; output n;");
  dfg.operations[0].carry_in = CarryIn::one();
  EXPECT_TRUE(has_kind(validate(dfg), Diagnostic::Kind::BadCarry));
}

TEST(Validate, ZeroWidthRejected) {
  auto dfg = chain();
  dfg.operations[2].width = 0;
  EXPECT_TRUE(has_kind(validate(dfg), Diagnostic::Kind::BadWidth));
}

TEST(TopoOrder, ChainOrder) {
  EXPECT_EQ(topo_order(chain()), (std::vector<std::string>{"C", "E", "G"}));
}

TEST(TopoOrder, DiamondPutsSourceFirstAndSinkLast) {
  auto dfg = parse_ok(R"(design d; input x: u4;
    A: add u4 = x + x; B: add u4 = A + x; C: add u4 = A + x; D: add u4 = B + C; output D;)");
  auto order = topo_order(dfg);
  ASSERT_EQ(order.size(), 4u);
  EXPECT_EQ(order.front(), "A");
  EXPECT_EQ(order.back(), "D");
}

TEST(TopoOrder, IndependentOpsBothPresent) {
  auto dfg = parse_ok("design d; input x: u4; A: add u4 = x + x; B: add u4 = x + x; output A; output B;");
  auto order = topo_order(dfg);
  EXPECT_EQ(std::set<std::string>(order.begin(), order.end()), (std::set<std::string>{"A", "B"}));
}

TEST(BitDeps, RippleBitDependsOnOperandsAndOwnLowerBit) {
  auto deps = bit_deps(chain());
  std::set<BitSource> expected{{BitSource::Kind::Result, "C", 5},
                               {BitSource::Kind::Input, "D", 5},
                               {BitSource::Kind::Result, "E", 4}};
  EXPECT_EQ(deps.at({"E", 5}), expected);
}

TEST(BitDeps, BitZeroWithoutCarryHasOnlyOperandBits) {
  auto deps = bit_deps(chain());
  std::set<BitSource> expected{{BitSource::Kind::Input, "A", 0}, {BitSource::Kind::Input, "B", 0}};
  EXPECT_EQ(deps.at({"C", 0}), expected);
}

TEST(BitDeps, SlicedOperandOffsetsProducerBit) {
  auto dfg = parse_ok(R"(design d; input a: u8; input b: u8; input k: u5;
    F: add u8 = a + b; H: add u5 = F[7:3] + k; output H;)");
  auto deps = bit_deps(dfg);
  std::set<BitSource> expected{{BitSource::Kind::Result, "F", 3}, {BitSource::Kind::Input, "k", 0}};
  EXPECT_EQ(deps.at({"H", 0}), expected);
}

TEST(BitDeps, EveryAddBitAboveZeroContainsOwnLowerBit) {
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    auto dfg = random_add_dag(rng);
    auto deps = bit_deps(dfg);
    for (const auto &op : dfg.operations) {
      for (unsigned i = 0; i < op.width; ++i) {
        ASSERT_TRUE(deps.count({op.id, i}));
        if (i > 0) {
          EXPECT_TRUE(deps.at({op.id, i}).count({BitSource::Kind::Result, op.id, i - 1}));
        }
      }
      EXPECT_FALSE(deps.count({op.id, op.width}));
    }
  }
}

TEST(BitDeps, ZeroExtensionBeyondOperandWidth) {
  auto dfg = parse_ok("design d; input a: u2; input b: u4; s: add u4 = a + b; output s;");
  auto deps = bit_deps(dfg);
  std::set<BitSource> expected{{BitSource::Kind::Input, "b", 3}, {BitSource::Kind::Result, "s", 2}};
  EXPECT_EQ(deps.at({"s", 3}), expected);
}

TEST(Operands, PackBitsBuildsSlicesAndConcats) {
  auto dfg = chain();
  std::vector<BitSource> bits{{BitSource::Kind::Result, "C", 4},
                              {BitSource::Kind::Result, "C", 5},
                              {BitSource::Kind::Input, "D", 0}};
  Operand packed = pack_bits(dfg, bits);
  ASSERT_EQ(packed.kind, Operand::Kind::Concat);
  EXPECT_EQ(operand_bits(dfg, packed), bits);
  EXPECT_EQ(packed.parts.front(), Operand::input("D", Slice{0, 0}));
}

TEST(Operands, TruncatedRightIsSliceLow) {
  EXPECT_EQ(Operand::result("F", Slice{7, 3}).truncated_right(), 3u);
  EXPECT_EQ(Operand::result("F").truncated_right(), 0u);
}

TEST(Transformations, OutputsRevalidate) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    auto dfg = random_mixed(rng);
    ASSERT_TRUE(is_valid(dfg)) << emit(dfg);
    auto kernel = extract_kernel(dfg).dfg;
    EXPECT_TRUE(is_valid(kernel)) << emit(kernel);
    auto r = run_fitting(dfg, 3);
    EXPECT_TRUE(is_valid(r.transformed)) << emit(r.transformed);
  }
}
