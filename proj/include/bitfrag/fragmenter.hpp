//===- fragmenter.hpp - Bit mobility and operation fragments ----*- C++ -*-===//
//
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Every result bit gets a slot (cycle, depth): the cycle it executes in and
// its position in that cycle's chain of at most n_bits 1-bit additions.
// Inputs sit at (0, 0). An add bit must come strictly after each producer
// (earlier cycle, or same cycle and smaller depth); glue bits sit at the
// slot of their latest producer; a multiplier core needs all of its inputs
// from earlier cycles and delivers its result at depth 0.
//
// Runs of bits sharing one (ASAP cycle, ALAP cycle) pair become fragments,
// which are emitted as separate additions linked through their carries.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "bitfrag/dfg.hpp"

#include <compare>

namespace bitfrag {

struct Slot {
  int cycle = 0;
  int depth = 0;

  auto operator<=>(const Slot &) const = default;
};

/// Slot of every result bit, keyed by op id, LSB first.
using PlacementTable = std::map<std::string, std::vector<Slot>>;

struct BitMobility {
  unsigned n_bits = 0;
  unsigned latency = 0;
  PlacementTable asap;
  PlacementTable alap;
};

struct Fragment {
  std::string parent;
  unsigned index = 0;
  unsigned lo = 0;
  unsigned hi = 0;
  int asap_cycle = 0;
  int alap_cycle = 0;
  bool atomic = false; // a multiplier core, scheduled whole
  std::string id;      // operation id in the fragmented design

  unsigned width() const { return hi - lo + 1; }
  bool prescheduled() const { return asap_cycle == alap_cycle; }
  std::string label() const {
    if (lo == hi)
      return parent + "[" + std::to_string(lo) + "]";
    return parent + "[" + std::to_string(hi) + ":" + std::to_string(lo) + "]";
  }

  bool operator==(const Fragment &) const = default;
};

struct Fragmentation {
  std::vector<Fragment> fragments;
  DataFlowGraph transformed;
};

namespace detail {

/// Optional per-node cycle bounds used when part of a schedule is fixed.
struct Window {
  int lo = 1;
  int hi = 1 << 30;
};

inline std::vector<Slot> place_asap(const BitNetwork &net, int n_bits,
                                    const std::vector<Window> *windows = nullptr) {
  std::vector<Slot> slot(net.size());
  for (std::size_t n = 0; n < net.size(); ++n) {
    int cycle = 0;
    for (const auto &p : net.producers(n))
      cycle = std::max(cycle, slot[p.node].cycle);
    auto depth_at = [&](int c) {
      int d = 0;
      for (const auto &p : net.producers(n))
        if (slot[p.node].cycle == c)
          d = std::max(d, slot[p.node].depth);
      return d;
    };
    switch (net.role(n)) {
    case BitRole::Glue:
      slot[n] = {cycle, depth_at(cycle)};
      continue;
    case BitRole::Opaque:
      slot[n] = {cycle + 1, 0};
      break;
    case BitRole::Add: {
      cycle = std::max(cycle, 1);
      int d = 1 + depth_at(cycle);
      slot[n] = d > n_bits ? Slot{cycle + 1, 1} : Slot{cycle, d};
      break;
    }
    }
    if (windows && slot[n].cycle < (*windows)[n].lo)
      slot[n] = {(*windows)[n].lo, net.role(n) == BitRole::Opaque ? 0 : 1};
  }
  return slot;
}

/// Latest slots such that every output settles by (latency, n_bits).
/// Returns nullopt when some bit would have to run before cycle 1 or before
/// its window opens.
inline std::optional<std::vector<Slot>> place_alap(const BitNetwork &net, int n_bits,
                                                   int latency,
                                                   const std::vector<Window> *windows = nullptr) {
  const Slot end{latency, n_bits};
  std::vector<Slot> slot(net.size());
  auto normalize = [&](Slot s) { return s.depth < 1 ? Slot{s.cycle - 1, n_bits} : s; };
  // Latest slot a producer may take given one consumer edge.
  auto bound_from = [&](std::size_t q) {
    switch (net.role(q)) {
    case BitRole::Add: return Slot{slot[q].cycle, slot[q].depth - 1};
    case BitRole::Glue: return slot[q];
    case BitRole::Opaque: return Slot{slot[q].cycle - 1, n_bits};
    }
    return slot[q];
  };

  for (std::size_t n = net.size(); n-- > 0;) {
    BitRole role = net.role(n);
    if (role == BitRole::Opaque) {
      const auto &info = net.op(net.op_of(n));
      if (net.bit_of(n) + 1 != info.width) {
        slot[n] = slot[n + 1];
        continue;
      }
      int cycle = latency;
      for (unsigned b = 0; b < info.width; ++b)
        for (const auto &q : net.consumers(info.first + b))
          cycle = std::min(cycle, net.role(q.node) == BitRole::Opaque ? slot[q.node].cycle - 1
                                                                      : slot[q.node].cycle);
      if (windows)
        cycle = std::min(cycle, (*windows)[n].hi);
      if (cycle < 1 || (windows && cycle < (*windows)[n].lo))
        return std::nullopt;
      slot[n] = {cycle, 0};
      continue;
    }

    Slot latest = end;
    for (const auto &q : net.consumers(n)) {
      Slot b = bound_from(q.node);
      if (role == BitRole::Add)
        b = normalize(b);
      latest = std::min(latest, b);
    }
    if (role == BitRole::Add) {
      if (windows && latest.cycle > (*windows)[n].hi)
        latest = {(*windows)[n].hi, n_bits};
      if (latest.cycle < 1 || (windows && latest.cycle < (*windows)[n].lo))
        return std::nullopt;
    }
    slot[n] = latest;
  }
  return slot;
}

inline PlacementTable to_table(const BitNetwork &net, const std::vector<Slot> &slots) {
  PlacementTable table;
  for (std::size_t k = 0; k < net.op_count(); ++k) {
    const auto &info = net.op(k);
    table[info.id].assign(slots.begin() + info.first, slots.begin() + info.first + info.width);
  }
  return table;
}

inline std::vector<Slot> from_table(const BitNetwork &net, const PlacementTable &table) {
  std::vector<Slot> slots(net.size());
  for (std::size_t k = 0; k < net.op_count(); ++k) {
    const auto &info = net.op(k);
    auto it = table.find(info.id);
    if (it == table.end() || it->second.size() != info.width)
      throw Error(Error::Code::Invalid, "placement table does not cover '" + info.id + "'");
    std::copy(it->second.begin(), it->second.end(), slots.begin() + info.first);
  }
  return slots;
}

} // namespace detail

/// Earliest slot of every bit, LSB to MSB in topological order.
inline PlacementTable bit_asap(const DataFlowGraph &dfg, unsigned n_bits) {
  if (n_bits < 1)
    throw Error(Error::Code::BadLatency, "n_bits must be at least 1");
  BitNetwork net(dfg);
  return detail::to_table(net, detail::place_asap(net, static_cast<int>(n_bits)));
}

/// Latest slot of every bit, MSB to LSB in reverse topological order; nullopt
/// when `latency` cycles of `n_bits` chained additions cannot hold the design.
inline std::optional<PlacementTable> bit_alap(const DataFlowGraph &dfg, unsigned n_bits,
                                              unsigned latency) {
  if (n_bits < 1 || latency < 1)
    throw Error(Error::Code::BadLatency, "n_bits and latency must be at least 1");
  BitNetwork net(dfg);
  auto slots = detail::place_alap(net, static_cast<int>(n_bits), static_cast<int>(latency));
  if (!slots)
    return std::nullopt;
  return detail::to_table(net, *slots);
}

/// Both placements; throws Error::Code::Infeasible when ALAP fails or some
/// bit's ALAP cycle precedes its ASAP cycle.
inline BitMobility mobility(const DataFlowGraph &dfg, unsigned n_bits, unsigned latency) {
  BitMobility m;
  m.n_bits = n_bits;
  m.latency = latency;
  m.asap = bit_asap(dfg, n_bits);
  auto alap = bit_alap(dfg, n_bits, latency);
  auto infeasible = [&] {
    return Error(Error::Code::Infeasible,
                 "latency " + std::to_string(latency) + " is too small for " +
                     std::to_string(n_bits) + " chained bits per cycle");
  };
  if (!alap)
    throw infeasible();
  m.alap = std::move(*alap);
  for (const auto &[id, slots] : m.asap)
    for (std::size_t b = 0; b < slots.size(); ++b)
      if (slots[b].cycle > m.alap.at(id)[b].cycle)
        throw infeasible();
  return m;
}

/// Fragments of every add (maximal runs of bits with equal ASAP and ALAP
/// cycles) and of every multiplier core (always one, the whole op).
inline std::vector<Fragment> compute_fragments(const DataFlowGraph &dfg, const BitMobility &m) {
  std::vector<Fragment> fragments;
  for (const auto &op : dfg.operations) {
    if (is_glue(op.kind))
      continue;
    const auto &asap = m.asap.at(op.id);
    const auto &alap = m.alap.at(op.id);
    if (op.kind == OpKind::MultCore) {
      fragments.push_back({op.id, 0, 0, op.width - 1, asap[0].cycle, alap[0].cycle, true, {}});
      continue;
    }
    unsigned k = 0;
    for (unsigned lo = 0; lo < op.width;) {
      unsigned hi = lo;
      while (hi + 1 < op.width && asap[hi + 1].cycle == asap[lo].cycle &&
             alap[hi + 1].cycle == alap[lo].cycle)
        ++hi;
      fragments.push_back({op.id, k++, lo, hi, asap[lo].cycle, alap[lo].cycle, false, {}});
      lo = hi + 1;
    }
  }
  return fragments;
}

/// Fragment sizes from filling n_bits-wide buckets forward from the op's
/// ASAP cycle and backward from its ALAP cycle, then merging the two bucket
/// sequences from the LSB end. Each merge step emits the overlap of the
/// current ASAP and ALAP buckets as one fragment.
inline std::vector<Fragment> bucket_fill(const std::string &parent, unsigned width, int asap,
                                         int alap, unsigned n_bits) {
  std::vector<unsigned> forward;  // bits per cycle from `asap` on
  std::vector<unsigned> backward; // bits per cycle from `alap` back
  for (unsigned w = width; w > 0; w -= std::min(w, n_bits)) {
    forward.push_back(std::min(w, n_bits));
    backward.push_back(std::min(w, n_bits));
  }
  // The LSB chunk of the backward fill sits in its earliest cycle.
  std::reverse(backward.begin(), backward.end());
  const int alap_first = alap - static_cast<int>(backward.size()) + 1;

  std::vector<Fragment> out;
  std::size_t i = 0, j = 0;
  unsigned lo = 0;
  while (lo < width) {
    unsigned take = std::min(forward[i], backward[j]);
    out.push_back({parent, static_cast<unsigned>(out.size()), lo, lo + take - 1,
                   asap + static_cast<int>(i), alap_first + static_cast<int>(j), false, {}});
    lo += take;
    forward[i] -= take;
    backward[j] -= take;
    if (forward[i] == 0)
      ++i;
    if (backward[j] == 0)
      ++j;
  }
  return out;
}

/// Bucket-fill fragments for every add, using the ASAP cycle of its LSB and
/// the ALAP cycle of its MSB as the op's own window.
inline std::vector<Fragment> bucket_fill_fragments(const DataFlowGraph &dfg, const BitMobility &m) {
  std::vector<Fragment> fragments;
  for (const auto &op : dfg.operations) {
    if (is_glue(op.kind))
      continue;
    const auto &asap = m.asap.at(op.id);
    const auto &alap = m.alap.at(op.id);
    if (op.kind == OpKind::MultCore) {
      fragments.push_back({op.id, 0, 0, op.width - 1, asap[0].cycle, alap[0].cycle, true, {}});
      continue;
    }
    for (auto &f : bucket_fill(op.id, op.width, asap.front().cycle, alap.back().cycle, m.n_bits))
      fragments.push_back(std::move(f));
  }
  return fragments;
}

/// The fragmented design: every multi-fragment add becomes one add per
/// fragment, each taking the previous fragment's carry-out as carry-in.
/// Operand bits are rewired to the fragments that produce them. Outputs that
/// were split are reassembled by a constant-true select under the original
/// name. Assigns Fragment::id.
inline DataFlowGraph build_fragmented(const DataFlowGraph &dfg, std::vector<Fragment> &fragments) {
  std::map<std::string, std::vector<Fragment *>> by_parent;
  for (auto &f : fragments)
    by_parent[f.parent].push_back(&f);
  for (auto &[parent, list] : by_parent)
    std::sort(list.begin(), list.end(), [](auto *a, auto *b) { return a->lo < b->lo; });

  auto taken = all_names(dfg);
  for (auto &[parent, list] : by_parent) {
    if (list.size() == 1) {
      list.front()->id = parent;
      continue;
    }
    for (auto *f : list) {
      f->id = fresh_name(taken, parent + "_" + std::to_string(f->index));
      taken.insert(f->id);
    }
  }

  auto split = [&](const std::string &id) -> const std::vector<Fragment *> * {
    auto it = by_parent.find(id);
    if (it == by_parent.end() || it->second.size() < 2)
      return nullptr;
    return &it->second;
  };
  auto remap = [&](BitSource src) {
    if (src.kind != BitSource::Kind::Result && src.kind != BitSource::Kind::Carry)
      return src;
    const auto *parts = split(src.ref);
    if (!parts)
      return src;
    if (src.kind == BitSource::Kind::Carry) {
      src.ref = parts->back()->id;
      return src;
    }
    for (const auto *f : *parts)
      if (src.bit >= f->lo && src.bit <= f->hi) {
        src.ref = f->id;
        src.bit -= f->lo;
        return src;
      }
    throw Error(Error::Code::Invalid, "bit " + std::to_string(src.bit) + " of '" + src.ref +
                                          "' is not covered by any fragment");
  };

  DataFlowGraph out;
  out.name = dfg.name;
  out.inputs = dfg.inputs;
  out.outputs = dfg.outputs;
  auto rewire = [&](const Operand &operand, unsigned lo, unsigned hi) {
    std::vector<BitSource> bits;
    unsigned w = operand_width(dfg, operand);
    for (unsigned i = lo; i <= hi && i < w; ++i)
      bits.push_back(remap(*operand_bit(dfg, operand, i)));
    if (bits.empty())
      bits.push_back(BitSource::constant(false));
    return pack_bits(out, bits);
  };
  auto rewire_carry = [&](const CarryIn &c) {
    if (c.kind != CarryIn::Kind::CarryOf)
      return c;
    const auto *parts = split(c.ref);
    return parts ? CarryIn::of(parts->back()->id) : c;
  };

  for (const auto &op : dfg.operations) {
    const auto *parts = split(op.id);
    if (!parts) {
      Operation copy = op;
      for (auto &operand : copy.operands)
        operand = rewire(operand, 0, operand_width(dfg, operand) - 1);
      copy.carry_in = rewire_carry(op.carry_in);
      out.operations.push_back(std::move(copy));
      continue;
    }
    const Fragment *prev = nullptr;
    for (const auto *f : *parts) {
      Operation piece;
      piece.id = f->id;
      piece.kind = OpKind::Add;
      piece.width = f->width();
      for (const auto &operand : op.operands)
        piece.operands.push_back(rewire(operand, f->lo, f->hi));
      piece.carry_in = prev ? CarryIn::of(prev->id) : rewire_carry(op.carry_in);
      out.operations.push_back(std::move(piece));
      prev = f;
    }
    if (dfg.is_output(op.id)) {
      std::vector<BitSource> bits;
      for (unsigned b = 0; b < op.width; ++b)
        bits.push_back(remap({BitSource::Kind::Result, op.id, b}));
      Operation wire;
      wire.id = op.id;
      wire.kind = OpKind::Select;
      wire.width = op.width;
      wire.operands = {Operand::constant("1"), pack_bits(out, bits), Operand::constant("0")};
      out.operations.push_back(std::move(wire));
    }
  }
  return out;
}

/// Fragments from the depth-slot mobility plus the fragmented design.
inline Fragmentation fragment(const DataFlowGraph &dfg, const BitMobility &m) {
  Fragmentation result;
  result.fragments = compute_fragments(dfg, m);
  result.transformed = build_fragmented(dfg, result.fragments);
  return result;
}

} // namespace bitfrag
