#include "support.hpp"

#include <gtest/gtest.h>

using namespace bitfrag;
using namespace bitfrag::testing;

namespace {

struct Span {
  unsigned lo, hi;
  int asap, alap;
};

void expect_fragments(const std::vector<Fragment> &fs, const std::string &parent,
                      const std::vector<Span> &want) {
  auto got = fragments_of(fs, parent);
  ASSERT_EQ(got.size(), want.size()) << parent;
  for (std::size_t k = 0; k < want.size(); ++k) {
    EXPECT_EQ(got[k]->lo, want[k].lo) << parent << " #" << k;
    EXPECT_EQ(got[k]->hi, want[k].hi) << parent << " #" << k;
    EXPECT_EQ(got[k]->asap_cycle, want[k].asap) << parent << " #" << k;
    EXPECT_EQ(got[k]->alap_cycle, want[k].alap) << parent << " #" << k;
    EXPECT_EQ(got[k]->index, k);
  }
}

unsigned ceil_div(unsigned a, unsigned b) { return (a + b - 1) / b; }

/// Latest time of every add bit from the bit dependency relation alone:
/// latency * n_bits minus the longest chain of add bits that still follows.
std::map<std::pair<std::string, unsigned>, unsigned>
alap_times(const DataFlowGraph &dfg, unsigned horizon) {
  auto deps = bit_deps(dfg);
  std::map<std::pair<std::string, unsigned>, unsigned> tail;
  auto order = topo_order(dfg);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    unsigned w = dfg.width_of(*it);
    for (unsigned b = w; b-- > 0;) {
      unsigned t = tail[{*it, b}];
      for (const auto &src : deps.at({*it, b}))
        if (src.kind == BitSource::Kind::Result) {
          auto &up = tail[{src.ref, src.bit}];
          up = std::max(up, t + 1);
        }
    }
  }
  std::map<std::pair<std::string, unsigned>, unsigned> out;
  for (const auto &[key, t] : tail)
    out[key] = horizon - t;
  return out;
}

} // namespace

TEST(Mobility, ChainIsFullyPinned) {
  auto m = mobility(load_design("chain"), 6, 3);
  for (const char *id : {"C", "E", "G"})
    EXPECT_EQ(m.asap.at(id), m.alap.at(id)) << id;
  EXPECT_EQ(m.asap.at("C")[5], (Slot{1, 6}));
  EXPECT_EQ(m.asap.at("C")[6], (Slot{2, 1}));
  EXPECT_EQ(m.asap.at("G")[15], (Slot{3, 6}));
}

TEST(Mobility, SlackWithLargerLatency) {
  auto m = mobility(load_design("chain"), 6, 4);
  EXPECT_EQ(m.asap.at("C")[0].cycle, 1);
  EXPECT_EQ(m.alap.at("C")[0].cycle, 2);
}

TEST(Mobility, TooFewBitsPerCycleIsInfeasible) {
  EXPECT_FALSE(bit_alap(load_design("chain"), 5, 3));
  try {
    mobility(load_design("chain"), 5, 3);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Error::Code::Infeasible);
  }
  EXPECT_THROW(bit_asap(load_design("chain"), 0), Error);
}

TEST(Mobility, RandomDagsMatchArrivalOracle) {
  Rng rng(31);
  for (int t = 0; t < 60; ++t) {
    auto dfg = random_add_dag(rng);
    unsigned time = max_arrival(dfg);
    unsigned latency = uniform(rng, 1, 6);
    unsigned n = std::max(1u, ceil_div(time, latency));
    auto m = mobility(dfg, n, latency);
    auto arrivals = bit_arrivals(dfg);
    auto late = alap_times(dfg, latency * n);
    for (const auto &op : dfg.operations)
      for (unsigned b = 0; b < op.width; ++b) {
        unsigned early = arrivals.at(op.id)[b];
        Slot a = m.asap.at(op.id)[b];
        ASSERT_EQ(static_cast<unsigned>((a.cycle - 1) * static_cast<int>(n) + a.depth), early)
            << emit(dfg) << op.id << "[" << b << "]";
        Slot z = m.alap.at(op.id)[b];
        ASSERT_EQ(static_cast<unsigned>((z.cycle - 1) * static_cast<int>(n) + z.depth),
                  late.at({op.id, b}))
            << emit(dfg) << op.id << "[" << b << "]";
        ASSERT_GE(z.depth, 1);
        ASSERT_LE(z.depth, static_cast<int>(n));
      }
  }
}

TEST(Fragments, ChainAtLatencyThree) {
  auto f = fragment(load_design("chain"), mobility(load_design("chain"), 6, 3));
  expect_fragments(f.fragments, "C", {{0, 5, 1, 1}, {6, 11, 2, 2}, {12, 15, 3, 3}});
  expect_fragments(f.fragments, "E", {{0, 4, 1, 1}, {5, 10, 2, 2}, {11, 15, 3, 3}});
  expect_fragments(f.fragments, "G", {{0, 3, 1, 1}, {4, 9, 2, 2}, {10, 15, 3, 3}});
  for (const auto &fr : f.fragments)
    EXPECT_TRUE(fr.prescheduled());
  EXPECT_EQ(find_fragment(f.fragments, "C", 6)->label(), "C[11:6]");
}

TEST(Fragments, EightAdds) {
  auto dfg = load_design("eight");
  auto f = fragment(dfg, mobility(dfg, 3, 3));
  expect_fragments(f.fragments, "F", {{0, 2, 1, 1}, {3, 5, 2, 2}, {6, 7, 3, 3}});
  expect_fragments(f.fragments, "B", {{0, 1, 1, 1}, {2, 2, 1, 2}, {3, 4, 2, 2}, {5, 5, 2, 3}});
  EXPECT_EQ(find_fragment(f.fragments, "B", 2)->label(), "B[2]");
  EXPECT_FALSE(find_fragment(f.fragments, "B", 5)->prescheduled());
}

TEST(Fragments, TileEveryOpAndAreMaximal) {
  Rng rng(37);
  for (int t = 0; t < 60; ++t) {
    auto dfg = random_add_dag(rng);
    unsigned latency = uniform(rng, 1, 5);
    unsigned n = std::max(1u, ceil_div(max_arrival(dfg), latency)) + uniform(rng, 0, 2);
    auto m = mobility(dfg, n, latency);
    auto fs = compute_fragments(dfg, m);
    for (const auto &op : dfg.operations) {
      auto parts = fragments_of(fs, op.id);
      ASSERT_FALSE(parts.empty());
      unsigned next = 0;
      for (std::size_t k = 0; k < parts.size(); ++k) {
        const auto *p = parts[k];
        EXPECT_EQ(p->lo, next);
        next = p->hi + 1;
        EXPECT_LE(p->asap_cycle, p->alap_cycle);
        EXPECT_GE(p->asap_cycle, 1);
        EXPECT_LE(p->alap_cycle, static_cast<int>(latency));
        for (unsigned b = p->lo; b <= p->hi; ++b) {
          EXPECT_EQ(m.asap.at(op.id)[b].cycle, p->asap_cycle);
          EXPECT_EQ(m.alap.at(op.id)[b].cycle, p->alap_cycle);
        }
        if (k > 0) {
          EXPECT_TRUE(p->asap_cycle != parts[k - 1]->asap_cycle ||
                      p->alap_cycle != parts[k - 1]->alap_cycle);
        }
      }
      EXPECT_EQ(next, op.width);
    }
  }
}

TEST(Fragments, MultiplierCoreStaysWhole) {
  auto dfg = extract_kernel(parse_ok(R"(design m; input a: u6; input b: u6;
    s: add u6 = a + b; p: mult u12 = s * b; t: add u12 = p + a; output t;)")).dfg;
  auto m = mobility(dfg, 3, 8);
  auto fs = compute_fragments(dfg, m);
  auto core = fragments_of(fs, "p");
  ASSERT_EQ(core.size(), 1u);
  EXPECT_TRUE(core[0]->atomic);
  EXPECT_EQ(core[0]->width(), 12u);
  // s[5] settles in cycle 2; the core runs in the cycle after its inputs.
  EXPECT_EQ(core[0]->asap_cycle, 3);
  EXPECT_GE(m.asap.at("t")[0].cycle, 3);
}

TEST(BucketFill, MergesForwardAndBackwardBuckets) {
  auto fs = bucket_fill("C", 16, 1, 3, 6);
  ASSERT_EQ(fs.size(), 5u);
  const Span want[] = {{0, 3, 1, 1}, {4, 5, 1, 2}, {6, 9, 2, 2}, {10, 11, 2, 3}, {12, 15, 3, 3}};
  for (std::size_t k = 0; k < fs.size(); ++k) {
    EXPECT_EQ(fs[k].lo, want[k].lo);
    EXPECT_EQ(fs[k].hi, want[k].hi);
    EXPECT_EQ(fs[k].asap_cycle, want[k].asap);
    EXPECT_EQ(fs[k].alap_cycle, want[k].alap);
  }
}

TEST(BucketFill, NoSlackGivesFullBuckets) {
  auto fs = bucket_fill("X", 12, 1, 2, 6);
  ASSERT_EQ(fs.size(), 2u);
  EXPECT_EQ(fs[0].hi, 5u);
  EXPECT_TRUE(fs[0].prescheduled());
  EXPECT_TRUE(fs[1].prescheduled());
}

TEST(BucketFill, TilesAnyWidth) {
  for (unsigned width = 1; width <= 40; ++width)
    for (unsigned n = 1; n <= 8; ++n) {
      auto fs = bucket_fill("X", width, 2, 2 + static_cast<int>(ceil_div(width, n)), n);
      unsigned next = 0;
      for (const auto &f : fs) {
        ASSERT_EQ(f.lo, next);
        ASSERT_LE(f.asap_cycle, f.alap_cycle);
        ASSERT_LE(f.width(), n);
        next = f.hi + 1;
      }
      ASSERT_EQ(next, width);
    }
}

TEST(Transformed, ChainCarryLinks) {
  auto dfg = load_design("chain");
  auto f = fragment(dfg, mobility(dfg, 6, 3));
  const auto &t = f.transformed;
  ASSERT_TRUE(t.find_op("C_0"));
  ASSERT_TRUE(t.find_op("C_2"));
  EXPECT_EQ(t.find_op("C_0")->carry_in, CarryIn{});
  EXPECT_EQ(t.find_op("C_1")->carry_in, CarryIn::of("C_0"));
  EXPECT_EQ(t.find_op("C_2")->carry_in, CarryIn::of("C_1"));
  EXPECT_EQ(t.find_op("C_1")->width, 6u);
  ASSERT_TRUE(t.find_op("G"));
  EXPECT_EQ(t.find_op("G")->kind, OpKind::Select);
  EXPECT_FALSE(t.find_op("C"));
  EXPECT_EQ(t.outputs, dfg.outputs);
  EXPECT_TRUE(is_valid(t));
  for (const auto &fr : f.fragments)
    EXPECT_TRUE(t.find_op(fr.id)) << fr.id;
}

TEST(Transformed, CarryReferencesFollowTheLastFragment) {
  auto dfg = parse_ok(R"(design c; input a: u8; input b: u8;
    x: add u8 = a + b; y: add u2 carry(x) = a[1:0] + b[1:0]; z: not u1 = carry(x);
    output y; output z;)");
  auto f = fragment(dfg, mobility(dfg, 4, 3));
  ASSERT_GT(fragments_of(f.fragments, "x").size(), 1u);
  auto last = fragments_of(f.fragments, "x").back()->id;
  EXPECT_EQ(f.transformed.find_op("y")->carry_in, CarryIn::of(last));
  EXPECT_EQ(f.transformed.find_op("z")->operands[0], Operand::carry(last));
  auto eq = check_equiv(dfg, f.transformed);
  EXPECT_TRUE(eq.ok()) << format_counterexample(*eq.counterexample);
}

TEST(Transformed, RandomDesignsStayEquivalent) {
  Rng rng(41);
  for (int t = 0; t < 40; ++t) {
    auto dfg = random_add_dag(rng, 8);
    unsigned latency = uniform(rng, 1, 5);
    unsigned n = std::max(1u, ceil_div(max_arrival(dfg), latency));
    auto f = fragment(dfg, mobility(dfg, n, latency));
    ASSERT_TRUE(is_valid(f.transformed)) << emit(f.transformed);
    EquivOptions opts;
    opts.seed = static_cast<std::uint64_t>(t);
    opts.random_vectors = 200;
    auto eq = check_equiv(dfg, f.transformed, opts);
    ASSERT_TRUE(eq.ok()) << emit(dfg) << format_counterexample(*eq.counterexample);
  }
}
