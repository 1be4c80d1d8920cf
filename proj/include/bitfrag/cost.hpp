//===- cost.hpp - Structural datapath cost ----------------------*- C++ -*-===//
//
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Adder lanes, inter-cycle storage and multiplexer fan-ins of a scheduled
// design. Each add gets a dedicated lane as wide as the most bits it
// computes in any one cycle; a bit is stored across a boundary when it is
// produced at or before it and read after it. Design inputs and outputs live
// in I/O registers and are not counted.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "bitfrag/scheduler.hpp"

namespace bitfrag {

/// One stored signal: a result bit, the carry-out of an add read by another
/// op, or the internal carry between two bits of one add split across cycles.
struct StoredBit {
  enum class Kind { Data, Carry, LaneCarry };

  Kind kind = Kind::Data;
  std::string op;
  unsigned bit = 0; // for LaneCarry: the lower bit whose carry-out is kept

  std::string label() const {
    switch (kind) {
    case Kind::Data: return op + "[" + std::to_string(bit) + "]";
    case Kind::Carry: return "carry(" + op + ")";
    case Kind::LaneCarry: return op + ".c" + std::to_string(bit);
    }
    return op;
  }

  auto operator<=>(const StoredBit &) const = default;
};

using BoundarySets = std::vector<std::set<StoredBit>>; // index 0 = boundary 1->2

struct Lane {
  std::string id;
  OpKind kind = OpKind::Add;
  unsigned width = 0;
  std::vector<std::string> ops; // operations bound to this lane

  bool operator==(const Lane &) const = default;
};

struct PortMux {
  std::string lane;
  unsigned port = 0;
  unsigned fan_in = 0;
  unsigned width = 0;

  bool operator==(const PortMux &) const = default;
};

struct Register {
  std::string id;
  unsigned width = 0;
  std::vector<std::string> signals; // distinct values loaded over the schedule
  bool lane_carry = false;

  unsigned fan_in() const { return lane_carry ? 1u : static_cast<unsigned>(signals.size()); }
  bool operator==(const Register &) const = default;
};

struct CostReport {
  unsigned latency = 0;
  std::vector<Lane> lanes;
  BoundarySets stored;
  std::vector<unsigned> register_bits; // per boundary
  unsigned register_max = 0;
  std::vector<Register> registers;
  std::vector<PortMux> fu_ports;      // every lane operand port
  std::vector<PortMux> carry_ports;   // lane carry-in selection
  std::vector<unsigned> bits_per_cycle;
  std::vector<unsigned> ops_per_cycle;
  unsigned control_states = 0;

  static std::vector<PortMux> muxes(const std::vector<PortMux> &ports) {
    std::vector<PortMux> out;
    for (const auto &p : ports)
      if (p.fan_in > 1)
        out.push_back(p);
    return out;
  }
  std::vector<PortMux> fu_port_muxes() const { return muxes(fu_ports); }
  std::vector<PortMux> carry_in_muxes() const { return muxes(carry_ports); }
  std::vector<const Register *> register_muxes(bool lane_carry) const {
    std::vector<const Register *> out;
    for (const auto &r : registers)
      if (r.lane_carry == lane_carry && r.fan_in() > 1)
        out.push_back(&r);
    return out;
  }
  unsigned lane_bits() const {
    unsigned total = 0;
    for (const auto &l : lanes)
      total += l.width;
    return total;
  }
};

namespace detail {

/// Stored signals read by bit (op, b): every non-input source produced in an
/// earlier cycle is a candidate; returns it with its producing cycle.
template <typename Fn>
void for_each_read(const Schedule &s, const DataFlowGraph &dfg, GlueResolver &sources,
                   Fn fn) {
  for (const auto &op : dfg.operations) {
    if (is_glue(op.kind))
      continue;
    for (unsigned b = 0; b < op.width; ++b) {
      int consumer = s.cycle_of(op.id, b);
      for (const auto &src : sources.of({op.id, b})) {
        StoredBit item;
        int producer = 0;
        if (src.kind == BitSource::Kind::Input) {
          continue;
        } else if (src.kind == BitSource::Kind::Carry) {
          item = {StoredBit::Kind::Carry, src.ref, 0};
          producer = s.cycle_of(src.ref, dfg.width_of(src.ref) - 1);
        } else if (src.ref == op.id) {
          item = {StoredBit::Kind::LaneCarry, op.id, src.bit};
          producer = s.cycle_of(op.id, src.bit);
        } else {
          if (dfg.is_output(src.ref))
            continue;
          item = {StoredBit::Kind::Data, src.ref, src.bit};
          producer = s.cycle_of(src.ref, src.bit);
        }
        fn(item, producer, consumer);
      }
    }
  }
}

} // namespace detail

/// Stored signals per boundary, from each signal's last reader.
inline BoundarySets register_bits(const Schedule &s, const DataFlowGraph &dfg) {
  detail::GlueResolver sources(dfg);
  std::map<StoredBit, std::pair<int, int>> live; // produced, last read
  detail::for_each_read(s, dfg, sources, [&](const StoredBit &item, int prod, int cons) {
    auto [it, fresh] = live.try_emplace(item, prod, cons);
    if (!fresh)
      it->second.second = std::max(it->second.second, cons);
  });
  BoundarySets sets(s.latency > 0 ? s.latency - 1 : 0);
  for (const auto &[item, span] : live)
    for (int c = span.first; c < span.second; ++c)
      sets[c - 1].insert(item);
  return sets;
}

/// Same sets by a forward scan: at each boundary, every read after it of a
/// signal produced at or before it.
inline BoundarySets register_bits_forward(const Schedule &s, const DataFlowGraph &dfg) {
  detail::GlueResolver sources(dfg);
  BoundarySets sets(s.latency > 0 ? s.latency - 1 : 0);
  for (int boundary = 1; boundary < static_cast<int>(s.latency); ++boundary)
    detail::for_each_read(s, dfg, sources, [&](const StoredBit &item, int prod, int cons) {
      if (prod <= boundary && cons > boundary)
        sets[boundary - 1].insert(item);
    });
  return sets;
}

/// One dedicated lane per add, as wide as its widest per-cycle slice; one
/// unit per multiplier core.
inline std::vector<Lane> bind_lanes(const Schedule &s, const DataFlowGraph &dfg) {
  std::vector<Lane> lanes;
  for (const auto &op : dfg.operations) {
    if (is_glue(op.kind))
      continue;
    std::map<int, unsigned> per_cycle;
    for (unsigned b = 0; b < op.width; ++b)
      ++per_cycle[s.cycle_of(op.id, b)];
    unsigned width = 0;
    for (const auto &[c, n] : per_cycle)
      width = std::max(width, n);
    lanes.push_back({op.id, op.kind, width, {op.id}});
  }
  return lanes;
}

namespace detail {

inline std::string describe(const std::vector<BitSource> &bits) {
  std::string out;
  for (const auto &b : bits) {
    switch (b.kind) {
    case BitSource::Kind::Constant: out += b.bit ? "1" : "0"; break;
    case BitSource::Kind::Carry: out += "carry(" + b.ref + ")"; break;
    default: out += b.ref + "[" + std::to_string(b.bit) + "]"; break;
    }
    out += ",";
  }
  return out;
}

inline std::string describe(const CarryIn &c) {
  switch (c.kind) {
  case CarryIn::Kind::None:
  case CarryIn::Kind::Zero: return "0";
  case CarryIn::Kind::One: return "1";
  case CarryIn::Kind::CarryOf: return "carry(" + c.ref + ")";
  }
  return "?";
}

struct LaneUse {
  const Operation *op;
  int cycle;
  unsigned lo, hi; // bits of op computed in this cycle
};

/// Port fan-ins of a lane from the bit ranges it computes each cycle.
inline void lane_ports(const DataFlowGraph &dfg, const Lane &lane,
                       const std::vector<LaneUse> &uses, CostReport &r) {
  std::size_t arity = 0;
  for (const auto &u : uses)
    arity = std::max(arity, u.op->operands.size());
  for (std::size_t p = 0; p < arity; ++p) {
    std::set<std::string> distinct;
    for (const auto &u : uses) {
      if (p >= u.op->operands.size())
        continue;
      std::vector<BitSource> bits;
      unsigned hi = u.op->kind == OpKind::MultCore
                        ? operand_width(dfg, u.op->operands[p]) - 1
                        : u.hi;
      unsigned lo = u.op->kind == OpKind::MultCore ? 0 : u.lo;
      for (unsigned b = lo; b <= hi; ++b)
        bits.push_back(operand_bit(dfg, u.op->operands[p], b).value_or(BitSource::constant(false)));
      distinct.insert(describe(bits));
    }
    r.fu_ports.push_back({lane.id, static_cast<unsigned>(p),
                          static_cast<unsigned>(distinct.size()), lane.width});
  }
  if (lane.kind != OpKind::Add)
    return;
  std::set<std::string> carries;
  for (const auto &u : uses)
    carries.insert(u.lo == 0 ? describe(u.op->carry_in) : "lane");
  r.carry_ports.push_back({lane.id, 0, static_cast<unsigned>(carries.size()), 1});
}

/// Left-edge register allocation of stored values over their live ranges.
inline std::vector<Register> left_edge(
    std::vector<std::tuple<int, int, std::string, unsigned>> values, const std::string &prefix) {
  std::sort(values.begin(), values.end());
  std::vector<Register> regs;
  std::vector<int> free_after;
  for (const auto &[first, last, name, width] : values) {
    std::size_t r = 0;
    while (r < regs.size() && free_after[r] >= first)
      ++r;
    if (r == regs.size()) {
      regs.push_back({prefix + std::to_string(r), 0, {}, false});
      free_after.push_back(0);
    }
    regs[r].width = std::max(regs[r].width, width);
    if (std::find(regs[r].signals.begin(), regs[r].signals.end(), name) == regs[r].signals.end())
      regs[r].signals.push_back(name);
    free_after[r] = last;
  }
  return regs;
}

/// First and last boundary each item is stored at.
inline std::map<StoredBit, std::pair<int, int>> live_ranges(const BoundarySets &sets) {
  std::map<StoredBit, std::pair<int, int>> ranges;
  for (std::size_t i = 0; i < sets.size(); ++i)
    for (const auto &item : sets[i]) {
      int boundary = static_cast<int>(i) + 1;
      auto [it, fresh] = ranges.try_emplace(item, boundary, boundary);
      if (!fresh)
        it->second.second = boundary;
    }
  return ranges;
}

inline void fill_totals(const Schedule &s, const DataFlowGraph &dfg, CostReport &r) {
  r.latency = s.latency;
  r.stored = register_bits(s, dfg);
  for (const auto &set : r.stored) {
    r.register_bits.push_back(static_cast<unsigned>(set.size()));
    r.register_max = std::max(r.register_max, r.register_bits.back());
  }
  r.bits_per_cycle = s.bits_per_cycle();
  r.ops_per_cycle = s.fragments_per_cycle();
  r.control_states = s.latency;
}

inline std::vector<LaneUse> uses_of(const Schedule &s, const Operation &op) {
  std::vector<LaneUse> uses;
  for (unsigned b = 0; b < op.width; ++b) {
    int c = s.cycle_of(op.id, b);
    if (!uses.empty() && uses.back().cycle == c)
      uses.back().hi = b;
    else
      uses.push_back({&op, c, b, b});
  }
  return uses;
}

} // namespace detail

/// Costs of a fragmented schedule under dedicated lane binding.
inline CostReport costs(const Schedule &s, const DataFlowGraph &dfg) {
  CostReport r;
  detail::fill_totals(s, dfg, r);
  r.lanes = bind_lanes(s, dfg);
  for (const auto &lane : r.lanes)
    detail::lane_ports(dfg, lane, detail::uses_of(s, *dfg.find_op(lane.id)), r);

  std::vector<std::tuple<int, int, std::string, unsigned>> values;
  std::map<std::string, std::vector<std::string>> lane_carries;
  for (const auto &[item, span] : detail::live_ranges(r.stored)) {
    if (item.kind == StoredBit::Kind::LaneCarry)
      lane_carries[item.op].push_back(item.label());
    else
      values.emplace_back(span.first, span.second, item.label(), 1u);
  }
  r.registers = detail::left_edge(std::move(values), "R");
  for (auto &[op, signals] : lane_carries)
    r.registers.push_back({op + ".carry", 1, signals, true});
  return r;
}

/// Whole-op schedule with one non-glue op per cycle in topological order.
inline Schedule sequential_schedule(const DataFlowGraph &dfg) {
  std::vector<Fragment> whole;
  unsigned widest = 1;
  int cycle = 0;
  for (const auto &id : topo_order(dfg)) {
    const Operation &op = *dfg.find_op(id);
    if (is_glue(op.kind))
      continue;
    ++cycle;
    whole.push_back({op.id, 0, 0, op.width - 1, cycle, cycle, op.kind == OpKind::MultCore, op.id});
    widest = std::max(widest, op.width);
  }
  return schedule(dfg, whole, static_cast<unsigned>(std::max(cycle, 1)), widest);
}

/// Costs of the conventional implementation: one op per cycle, all adds on
/// one shared adder, whole-word registers.
inline CostReport original_costs(const DataFlowGraph &dfg) {
  Schedule s = sequential_schedule(dfg);
  CostReport r;
  detail::fill_totals(s, dfg, r);

  Lane adder{"adder", OpKind::Add, 0, {}};
  std::vector<detail::LaneUse> adder_uses;
  for (const auto &a : s.assignments) {
    const Operation &op = *dfg.find_op(a.fragment.parent);
    if (op.kind == OpKind::MultCore) {
      Lane core{op.id, op.kind, op.width, {op.id}};
      r.lanes.push_back(core);
      detail::lane_ports(dfg, core, detail::uses_of(s, op), r);
      continue;
    }
    adder.width = std::max(adder.width, op.width);
    adder.ops.push_back(op.id);
    adder_uses.push_back({&op, a.cycle, 0, op.width - 1});
  }
  if (!adder.ops.empty()) {
    r.lanes.insert(r.lanes.begin(), adder);
    std::vector<PortMux> ports;
    std::swap(ports, r.fu_ports);
    detail::lane_ports(dfg, adder, adder_uses, r);
    // lane_ports sized every port to the lane; keep them first.
    r.fu_ports.insert(r.fu_ports.end(), ports.begin(), ports.end());
  }

  // Whole values: an op's stored bits share one register word.
  std::map<std::string, std::tuple<int, int, unsigned>> words;
  for (const auto &[item, span] : detail::live_ranges(r.stored)) {
    std::string name = item.kind == StoredBit::Kind::Data ? item.op : item.label();
    auto [it, fresh] = words.try_emplace(name, span.first, span.second, 0u);
    auto &[first, last, width] = it->second;
    first = std::min(first, span.first);
    last = std::max(last, span.second);
    ++width;
  }
  std::vector<std::tuple<int, int, std::string, unsigned>> values;
  for (const auto &[name, w] : words)
    values.emplace_back(std::get<0>(w), std::get<1>(w), name, std::get<2>(w));
  r.registers = detail::left_edge(std::move(values), "R");
  return r;
}

} // namespace bitfrag
