//===- timing.hpp - Ripple timing in full-adder delays ----------*- C++ -*-===//
//
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// All times are integer counts of the delay of one 1-bit full adder. An add
// bit costs one unit after its latest operand bit and its own lower carry;
// NOT and SELECT are free; multiplier cores are opaque.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "bitfrag/dfg.hpp"
#include "bitfrag/kernel.hpp"

namespace bitfrag {

/// Arrival time of every result bit, keyed by op id, LSB first.
using ArrivalTable = std::map<std::string, std::vector<unsigned>>;

struct TimingOptions {
  /// Delay added by a multiplier core on top of its latest input bit.
  unsigned opaque_delay = 0;
};

struct CriticalPath {
  std::vector<std::string> ops; // source to sink
  unsigned time = 0;
};

namespace detail {

inline std::vector<unsigned> node_arrivals(const BitNetwork &net, const TimingOptions &opts) {
  std::vector<unsigned> arrival(net.size(), 0);
  for (std::size_t n = 0; n < net.size(); ++n) {
    unsigned latest = 0;
    for (const auto &p : net.producers(n))
      latest = std::max(latest, arrival[p.node]);
    switch (net.role(n)) {
    case BitRole::Add: arrival[n] = latest + 1; break;
    case BitRole::Glue: arrival[n] = latest; break;
    case BitRole::Opaque: arrival[n] = latest + opts.opaque_delay; break;
    }
  }
  return arrival;
}

inline void require_kernel(const DataFlowGraph &dfg) {
  require_valid(dfg);
  if (!is_kernel(dfg))
    throw Error(Error::Code::Invalid,
                "design '" + dfg.name + "' must be kernel-extracted before timing");
}

/// Largest (producer bit - consumer bit) offset over all bits of `consumer`
/// that read `producer`, looking through glue. Nullopt when not connected.
inline std::optional<int> edge_offset(const DataFlowGraph &dfg, const Operation &consumer,
                                      const std::string &producer) {
  std::optional<int> best;
  auto note = [&](int offset) { best = best ? std::max(*best, offset) : offset; };
  std::function<void(const BitSource &, int)> reach = [&](const BitSource &src, int j) {
    if (src.kind == BitSource::Kind::Constant || src.kind == BitSource::Kind::Input)
      return;
    const Operation *op = dfg.find_op(src.ref);
    if (src.ref == producer) {
      // A carry-out settles together with the producer's top bit.
      int bit = src.kind == BitSource::Kind::Carry ? static_cast<int>(op->width) - 1
                                                   : static_cast<int>(src.bit);
      note(bit - j);
      return;
    }
    if (src.kind != BitSource::Kind::Result || !is_glue(op->kind))
      return;
    if (op->kind == OpKind::Select)
      if (auto c = operand_bit(dfg, op->operands[0], 0))
        reach(*c, j);
    for (std::size_t k = op->kind == OpKind::Select ? 1 : 0; k < op->operands.size(); ++k)
      if (auto b = operand_bit(dfg, op->operands[k], src.bit))
        reach(*b, j);
  };
  for (unsigned j = 0; j < consumer.width; ++j) {
    for (const auto &operand : consumer.operands)
      if (auto b = operand_bit(dfg, operand, j))
        reach(*b, static_cast<int>(j));
  }
  if (consumer.carry_in.kind == CarryIn::Kind::CarryOf)
    reach({BitSource::Kind::Carry, consumer.carry_in.ref, 0}, 0);
  return best;
}

} // namespace detail

/// Arrival of every bit: max over its producers plus the bit's own cost.
/// Inputs and constants arrive at time 0.
inline ArrivalTable bit_arrivals(const DataFlowGraph &dfg, const TimingOptions &opts = {}) {
  detail::require_kernel(dfg);
  BitNetwork net(dfg);
  auto arrival = detail::node_arrivals(net, opts);
  ArrivalTable table;
  for (std::size_t k = 0; k < net.op_count(); ++k) {
    const auto &info = net.op(k);
    auto &row = table[info.id];
    for (unsigned b = 0; b < info.width; ++b)
      row.push_back(arrival[net.node(k, b)]);
  }
  return table;
}

/// Execution time of a chain of additions, walked from the sink back to the
/// source: the sink's width, plus one per crossed op, plus the LSBs that a
/// wider op loses to its narrower successor. Glue ops in the chain are
/// skipped.
inline unsigned path_time(const DataFlowGraph &dfg, const std::vector<std::string> &path) {
  std::vector<const Operation *> chain;
  for (const auto &id : path) {
    const Operation *op = dfg.find_op(id);
    if (!op)
      throw Error(Error::Code::Invalid, "path names unknown operation '" + id + "'");
    if (is_glue(op->kind))
      continue;
    if (op->kind != OpKind::Add)
      throw Error(Error::Code::NonAdditivePath,
                  "path crosses non-additive operation '" + id + "'");
    chain.push_back(op);
  }
  if (chain.empty())
    return 0;

  std::vector<unsigned> truncated(chain.size(), 0);
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    auto offset = detail::edge_offset(dfg, *chain[i + 1], chain[i]->id);
    if (!offset)
      throw Error(Error::Code::Invalid, "path is not connected between '" + chain[i]->id +
                                            "' and '" + chain[i + 1]->id + "'");
    truncated[i] = static_cast<unsigned>(std::max(0, *offset));
  }

  unsigned time = chain.back()->width;
  for (std::size_t i = chain.size() - 1; i-- > 0;) {
    if (chain[i]->width <= chain[i + 1]->width)
      time += 1;
    else
      time += 1 + truncated[i];
  }
  return time;
}

/// Latest-arriving bit and the chain of additions that delivers it. The
/// chain is recovered by stepping back through producers that account for
/// each arrival, preferring a jump to another op over the own carry chain.
/// Backtracking stops at multiplier cores.
inline CriticalPath critical_path(const DataFlowGraph &dfg, const TimingOptions &opts = {}) {
  detail::require_kernel(dfg);
  BitNetwork net(dfg);
  auto arrival = detail::node_arrivals(net, opts);
  CriticalPath result;
  if (net.size() == 0)
    return result;
  std::size_t at = 0;
  for (std::size_t n = 1; n < net.size(); ++n)
    if (arrival[n] > arrival[at])
      at = n;
  result.time = arrival[at];

  std::vector<std::string> reversed;
  auto visit = [&](std::size_t n) {
    if (net.role(n) != BitRole::Add)
      return;
    const std::string &id = net.op(net.op_of(n)).id;
    if (reversed.empty() || reversed.back() != id)
      reversed.push_back(id);
  };
  visit(at);
  while (net.role(at) != BitRole::Opaque) {
    unsigned cost = net.role(at) == BitRole::Add ? 1 : 0;
    if (arrival[at] < cost || arrival[at] - cost == 0)
      break;
    unsigned want = arrival[at] - cost;
    std::optional<std::size_t> step;
    for (const auto &p : net.producers(at)) {
      if (arrival[p.node] != want)
        continue;
      bool own = net.op_of(p.node) == net.op_of(at);
      if (!step || (!own && net.op_of(*step) == net.op_of(at)))
        step = p.node;
    }
    if (!step)
      break;
    at = *step;
    visit(at);
  }
  result.ops.assign(reversed.rbegin(), reversed.rend());
  return result;
}

/// Chained 1-bit additions per cycle needed to fit `time` into `latency`
/// cycles.
inline unsigned estimate_cycle(unsigned time, unsigned latency) {
  if (latency < 1)
    throw Error(Error::Code::BadLatency, "latency must be at least 1");
  return (time + latency - 1) / latency;
}

inline unsigned estimate_cycle(const DataFlowGraph &dfg, unsigned latency,
                               const TimingOptions &opts = {}) {
  return estimate_cycle(critical_path(dfg, opts).time, latency);
}

} // namespace bitfrag
