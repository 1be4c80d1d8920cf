//===- simulator.hpp - Bit-accurate evaluation ------------------*- C++ -*-===//
//
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// eval_dfg is the reference semantics: arbitrary-precision arithmetic on
// whole values, wrapped to each op's width. eval_schedule replays a schedule
// bit by bit, cycle by cycle, and only lets a bit from an earlier cycle be
// read if the cost model says it was latched at the previous boundary.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "bitfrag/cost.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <random>
#include <sstream>

namespace bitfrag {

using Value = boost::multiprecision::cpp_int;
using InputVector = std::map<std::string, Value>;
using OutputValues = std::map<std::string, Value>;

namespace detail {

inline Value mask(unsigned width) { return (Value(1) << width) - 1; }

/// Two's-complement wrap of any integer into [0, 2^width).
inline Value wrap(const Value &v, unsigned width) {
  Value m = Value(1) << width;
  Value r = v % m;
  if (r < 0)
    r += m;
  return r;
}

inline Value as_signed(const Value &v, unsigned width) {
  if (width > 0 && bit_test(v, width - 1))
    return v - (Value(1) << width);
  return v;
}

inline Value parse_bits(const std::string &bits) {
  Value v = 0;
  for (char c : bits)
    v = (v << 1) | (c == '1' ? 1 : 0);
  return v;
}

} // namespace detail

/// All op results and add carry-outs of one evaluation.
struct Evaluation {
  std::map<std::string, Value> values;
  std::map<std::string, bool> carries;
};

/// Reference evaluation of every operation. Input values are wrapped to
/// their declared widths, so negative numbers may be given for signed
/// inputs. Throws Error::Code::Simulation when an input is missing.
inline Evaluation evaluate(const DataFlowGraph &dfg, const InputVector &inputs) {
  Evaluation ev;
  for (const auto &in : dfg.inputs) {
    auto it = inputs.find(in.name);
    if (it == inputs.end())
      throw Error(Error::Code::Simulation, "missing value for input '" + in.name + "'");
    ev.values[in.name] = detail::wrap(it->second, in.width);
  }

  std::function<Value(const Operand &)> operand_value = [&](const Operand &o) -> Value {
    switch (o.kind) {
    case Operand::Kind::Constant: return detail::parse_bits(o.bits);
    case Operand::Kind::Carry: return ev.carries.at(o.ref) ? 1 : 0;
    case Operand::Kind::Concat: {
      Value v = 0;
      for (const auto &part : o.parts)
        v = (v << operand_width(dfg, part)) | operand_value(part);
      return v;
    }
    default: {
      const Value &whole = ev.values.at(o.ref);
      if (!o.slice)
        return whole;
      return (whole >> o.slice->lo) & detail::mask(o.slice->width());
    }
    }
  };

  for (const auto &id : topo_order(dfg)) {
    const Operation &op = *dfg.find_op(id);
    const bool is_signed = op.signedness == Signedness::Signed;
    const unsigned w = op.width;
    // Operand k as an integer in its own signedness.
    auto raw = [&](std::size_t k) {
      Value v = operand_value(op.operands[k]);
      return is_signed ? detail::as_signed(v, operand_width(dfg, op.operands[k])) : v;
    };
    auto extended = [&](std::size_t k) { return detail::wrap(raw(k), w); };
    Value result;
    switch (op.kind) {
    case OpKind::Add: {
      Value carry_in = 0;
      switch (op.carry_in.kind) {
      case CarryIn::Kind::One: carry_in = 1; break;
      case CarryIn::Kind::CarryOf: carry_in = ev.carries.at(op.carry_in.ref) ? 1 : 0; break;
      default: break;
      }
      Value sum = extended(0) + extended(1) + carry_in;
      ev.carries[op.id] = bit_test(sum, w);
      result = sum;
      break;
    }
    case OpKind::Sub: result = extended(0) - extended(1); break;
    case OpKind::Mult:
    case OpKind::MultCore: result = raw(0) * raw(1); break;
    case OpKind::Lt: result = raw(0) < raw(1) ? 1 : 0; break;
    case OpKind::Max: result = raw(0) < raw(1) ? raw(1) : raw(0); break;
    case OpKind::Min: result = raw(0) < raw(1) ? raw(0) : raw(1); break;
    case OpKind::Not: result = detail::mask(w) - extended(0); break;
    case OpKind::Select: {
      bool cond = bit_test(operand_value(op.operands[0]), 0);
      result = extended(cond ? 1 : 2);
      break;
    }
    }
    ev.values[op.id] = detail::wrap(result, w);
  }
  return ev;
}

inline OutputValues eval_dfg(const DataFlowGraph &dfg, const InputVector &inputs) {
  auto ev = evaluate(dfg, inputs);
  OutputValues out;
  for (const auto &name : dfg.outputs)
    out[name] = ev.values.at(name);
  return out;
}

//===----------------------------------------------------------------------===//
// Cycle-by-cycle replay of a schedule
//===----------------------------------------------------------------------===//

struct CycleTrace {
  int cycle = 0;
  std::map<std::string, Value> fragments;    // fragment label -> computed bits
  std::map<std::string, bool> latched;       // contents at the boundary after this cycle
};

struct ScheduleRun {
  OutputValues outputs;
  std::vector<CycleTrace> trace;
};

/// Compiled bit-level model of one schedule; run() evaluates one vector.
class ScheduleSimulator {
public:
  ScheduleSimulator(const Schedule &s, const DataFlowGraph &dfg) : dfg_(dfg), latency_(static_cast<int>(s.latency)) {
    for (std::size_t i = 0; i < dfg.inputs.size(); ++i)
      input_index_[dfg.inputs[i].name] = i;
    for (std::size_t k = 0; k < dfg.operations.size(); ++k) {
      const auto &op = dfg.operations[k];
      op_index_[op.id] = k;
      first_.push_back(nodes_.size());
      for (unsigned b = 0; b < op.width; ++b)
        nodes_.push_back({k, b, 0, 0, {}});
    }
    for (std::size_t k = 0; k < dfg.operations.size(); ++k)
      compile(k, s);

    for (std::size_t n = 0; n < nodes_.size(); ++n) {
      if (is_glue(op_of(n).kind))
        continue;
      order_.push_back(n);
    }
    std::sort(order_.begin(), order_.end(), [&](auto a, auto b) {
      return std::tie(nodes_[a].cycle, nodes_[a].depth, a) <
             std::tie(nodes_[b].cycle, nodes_[b].depth, b);
    });

    auto sets = register_bits(s, dfg);
    stored_.assign(sets.size(), std::vector<char>(3 * nodes_.size(), 0));
    for (std::size_t i = 0; i < sets.size(); ++i)
      for (const auto &item : sets[i])
        stored_[i][key_of(item)] = 1;

    for (const auto &a : s.assignments)
      fragments_.push_back({a.fragment.label(), a.cycle, first_[op_index_.at(a.fragment.parent)] + a.fragment.lo,
                            a.fragment.width()});
  }

  ScheduleRun run(const InputVector &inputs, bool with_trace = false) const {
    State st;
    st.sum.assign(nodes_.size(), 0);
    st.carry.assign(nodes_.size(), 0);
    st.done.assign(nodes_.size(), 0);
    st.latch.assign(stored_.size(), std::vector<char>(3 * nodes_.size(), 0));
    for (const auto &in : dfg_.inputs) {
      auto it = inputs.find(in.name);
      if (it == inputs.end())
        throw Error(Error::Code::Simulation, "missing value for input '" + in.name + "'");
      Value v = detail::wrap(it->second, in.width);
      std::vector<char> bits(in.width);
      for (unsigned b = 0; b < in.width; ++b)
        bits[b] = bit_test(v, b);
      st.inputs.push_back(std::move(bits));
    }

    ScheduleRun result;
    std::size_t at = 0;
    for (int c = 1; c <= latency_; ++c) {
      for (; at < order_.size() && nodes_[order_[at]].cycle == c; ++at)
        execute(order_[at], c, st);
      if (at < order_.size() && nodes_[order_[at]].cycle < c)
        throw Error(Error::Code::Simulation, "bit scheduled outside the latency");
      if (c < latency_)
        for (std::size_t key = 0; key < stored_[c - 1].size(); ++key)
          if (stored_[c - 1][key])
            st.latch[c - 1][key] = current(key, st);
      if (with_trace)
        result.trace.push_back(trace_of(c, st));
    }
    if (at != order_.size())
      throw Error(Error::Code::Simulation, "bit scheduled outside the latency");

    for (const auto &name : dfg_.outputs) {
      if (auto it = input_index_.find(name); it != input_index_.end()) {
        Value v = 0;
        for (std::size_t b = st.inputs[it->second].size(); b-- > 0;)
          v = (v << 1) | st.inputs[it->second][b];
        result.outputs[name] = v;
        continue;
      }
      std::size_t k = op_index_.at(name);
      Value v = 0;
      for (unsigned b = dfg_.operations[k].width; b-- > 0;)
        v = (v << 1) | (read({Src::Node, first_[k] + b, 0}, 0, st) ? 1 : 0);
      result.outputs[name] = v;
    }
    return result;
  }

private:
  struct Src {
    enum Kind { Zero, One, Input, Node, Carry, Lane } kind = Zero;
    std::size_t index = 0; // input index, node, or (Carry) op index
    unsigned bit = 0;
  };
  struct Node {
    std::size_t op;
    unsigned bit;
    int cycle;
    int depth;
    std::vector<Src> srcs;
  };
  struct FragmentRef {
    std::string label;
    int cycle;
    std::size_t first;
    unsigned width;
  };
  struct State {
    std::vector<std::vector<char>> inputs;
    std::vector<char> sum, carry, done;
    std::vector<std::vector<char>> latch; // per boundary, by key
  };
  enum : std::size_t { DataKey = 0, CarryKey = 1, LaneKey = 2 };

  const Operation &op_of(std::size_t n) const { return dfg_.operations[nodes_[n].op]; }

  Src source(const std::optional<BitSource> &b) const {
    if (!b)
      return {Src::Zero};
    switch (b->kind) {
    case BitSource::Kind::Constant: return {b->bit ? Src::One : Src::Zero};
    case BitSource::Kind::Input: return {Src::Input, input_index_.at(b->ref), b->bit};
    case BitSource::Kind::Result: return {Src::Node, first_[op_index_.at(b->ref)] + b->bit, 0};
    case BitSource::Kind::Carry: return {Src::Carry, op_index_.at(b->ref), 0};
    }
    return {Src::Zero};
  }

  void compile(std::size_t k, const Schedule &s) {
    const auto &op = dfg_.operations[k];
    for (unsigned b = 0; b < op.width; ++b) {
      Node &node = nodes_[first_[k] + b];
      if (!is_glue(op.kind)) {
        auto it = s.placement.find(op.id);
        if (it == s.placement.end() || b >= it->second.size())
          throw Error(Error::Code::Simulation, "'" + op.id + "' is not scheduled");
        node.cycle = it->second[b].cycle;
        node.depth = it->second[b].depth;
      }
      switch (op.kind) {
      case OpKind::Add: {
        for (const auto &operand : op.operands)
          node.srcs.push_back(source(operand_bit(dfg_, operand, b)));
        if (b > 0)
          node.srcs.push_back({Src::Lane, first_[k] + b - 1, 0});
        else if (op.carry_in.kind == CarryIn::Kind::One)
          node.srcs.push_back({Src::One});
        else if (op.carry_in.kind == CarryIn::Kind::CarryOf)
          node.srcs.push_back({Src::Carry, op_index_.at(op.carry_in.ref), 0});
        else
          node.srcs.push_back({Src::Zero});
        break;
      }
      case OpKind::Not:
        node.srcs.push_back(source(operand_bit(dfg_, op.operands[0], b)));
        break;
      case OpKind::Select:
        node.srcs.push_back(source(operand_bit(dfg_, op.operands[0], 0)));
        node.srcs.push_back(source(operand_bit(dfg_, op.operands[1], b)));
        node.srcs.push_back(source(operand_bit(dfg_, op.operands[2], b)));
        break;
      case OpKind::MultCore:
        if (b == 0)
          for (const auto &operand : op.operands)
            for (unsigned i = 0; i < operand_width(dfg_, operand); ++i)
              node.srcs.push_back(source(operand_bit(dfg_, operand, i)));
        break;
      default:
        throw Error(Error::Code::Simulation,
                    "'" + op.id + "' is not a kernel operation; extract the kernel first");
      }
    }
  }

  std::size_t key_of(const StoredBit &item) const {
    std::size_t k = op_index_.at(item.op);
    switch (item.kind) {
    case StoredBit::Kind::Data: return 3 * (first_[k] + item.bit) + DataKey;
    case StoredBit::Kind::Carry: return 3 * (first_[k] + dfg_.operations[k].width - 1) + CarryKey;
    case StoredBit::Kind::LaneCarry: return 3 * (first_[k] + item.bit) + LaneKey;
    }
    return 0;
  }

  bool current(std::size_t key, const State &st) const {
    std::size_t n = key / 3;
    return key % 3 == DataKey ? st.sum[n] : st.carry[n];
  }

  /// Value of a non-glue node's sum (key DataKey) or carry as seen from
  /// `cycle`; 0 means unrestricted.
  bool fetch(std::size_t n, std::size_t kind, int cycle, const State &st) const {
    const Node &node = nodes_[n];
    const std::size_t key = 3 * n + kind;
    auto describe = [&] {
      const auto &op = op_of(n);
      std::string what = kind == DataKey    ? op.id + "[" + std::to_string(node.bit) + "]"
                         : kind == CarryKey ? "carry(" + op.id + ")"
                                            : op.id + ".c" + std::to_string(node.bit);
      return what + " (cycle " + std::to_string(node.cycle) + ") read in cycle " +
             std::to_string(cycle);
    };
    if (cycle == 0 || node.cycle == cycle) {
      if (!st.done[n])
        throw Error(Error::Code::Simulation, describe() + " before it is computed");
      return current(key, st);
    }
    if (node.cycle > cycle)
      throw Error(Error::Code::Simulation, describe() + " before it is computed");
    if (kind == DataKey && dfg_.is_output(op_of(n).id))
      return st.sum[n]; // held in the output register
    if (!stored_[cycle - 2][key])
      throw Error(Error::Code::Simulation, describe() + " but it was not latched");
    return st.latch[cycle - 2][key];
  }

  bool read(const Src &s, int cycle, const State &st) const {
    switch (s.kind) {
    case Src::Zero: return false;
    case Src::One: return true;
    case Src::Input: return st.inputs[s.index][s.bit];
    case Src::Lane: return fetch(s.index, LaneKey, cycle, st);
    case Src::Carry: {
      const auto &op = dfg_.operations[s.index];
      return fetch(first_[s.index] + op.width - 1, CarryKey, cycle, st);
    }
    case Src::Node: {
      const Node &node = nodes_[s.index];
      const Operation &op = op_of(s.index);
      if (op.kind == OpKind::Not)
        return !read(node.srcs[0], cycle, st);
      if (op.kind == OpKind::Select)
        return read(node.srcs[0], cycle, st) ? read(node.srcs[1], cycle, st)
                                              : read(node.srcs[2], cycle, st);
      return fetch(s.index, DataKey, cycle, st);
    }
    }
    return false;
  }

  void execute(std::size_t n, int cycle, State &st) const {
    const Node &node = nodes_[n];
    const Operation &op = op_of(n);
    if (op.kind == OpKind::MultCore) {
      if (node.bit != 0)
        return; // computed together with bit 0
      std::vector<Value> operands;
      std::size_t at = 0;
      for (const auto &operand : op.operands) {
        Value v = 0;
        unsigned w = operand_width(dfg_, operand);
        for (unsigned i = w; i-- > 0;)
          v = (v << 1) | (read(node.srcs[at + i], cycle, st) ? 1 : 0);
        at += w;
        operands.push_back(v);
      }
      Value product = operands[0] * operands[1];
      for (unsigned b = 0; b < op.width; ++b) {
        st.sum[n + b] = bit_test(product, b);
        st.done[n + b] = 1;
      }
      return;
    }
    unsigned total = 0;
    for (const auto &s : node.srcs)
      total += read(s, cycle, st) ? 1 : 0;
    st.sum[n] = total & 1;
    st.carry[n] = total >> 1;
    st.done[n] = 1;
  }

  CycleTrace trace_of(int cycle, const State &st) const {
    CycleTrace t;
    t.cycle = cycle;
    for (const auto &f : fragments_) {
      if (f.cycle != cycle)
        continue;
      Value v = 0;
      for (unsigned b = f.width; b-- > 0;)
        v = (v << 1) | st.sum[f.first + b];
      t.fragments[f.label] = v;
    }
    if (cycle < latency_) {
      for (std::size_t key = 0; key < stored_[cycle - 1].size(); ++key) {
        if (!stored_[cycle - 1][key])
          continue;
        std::size_t n = key / 3;
        const auto &op = op_of(n);
        StoredBit item{key % 3 == DataKey    ? StoredBit::Kind::Data
                       : key % 3 == CarryKey ? StoredBit::Kind::Carry
                                             : StoredBit::Kind::LaneCarry,
                       op.id, key % 3 == CarryKey ? 0u : nodes_[n].bit};
        t.latched[item.label()] = st.latch[cycle - 1][key];
      }
    }
    return t;
  }

  const DataFlowGraph &dfg_;
  int latency_;
  std::map<std::string, std::size_t> input_index_;
  std::map<std::string, std::size_t> op_index_;
  std::vector<std::size_t> first_;
  std::vector<Node> nodes_;
  std::vector<std::size_t> order_;
  std::vector<std::vector<char>> stored_; // per boundary, by key
  std::vector<FragmentRef> fragments_;
};

/// Replays `s` on the kernel design it was computed for.
inline ScheduleRun eval_schedule(const Schedule &s, const DataFlowGraph &dfg,
                                 const InputVector &inputs) {
  return ScheduleSimulator(s, dfg).run(inputs, true);
}

//===----------------------------------------------------------------------===//
// Equivalence
//===----------------------------------------------------------------------===//

enum class Strategy { Exhaustive, Random };

inline std::string_view strategy_name(Strategy s) {
  return s == Strategy::Exhaustive ? "exhaustive" : "random";
}

struct EquivOptions {
  std::uint64_t seed = 1;
  std::size_t random_vectors = 1000;
  unsigned exhaustive_limit = 16; // total input bits
};

struct Counterexample {
  InputVector inputs;
  OutputValues expected;
  OutputValues actual;
};

struct EquivResult {
  Strategy strategy = Strategy::Exhaustive;
  std::size_t vectors = 0;
  std::optional<Counterexample> counterexample;

  bool ok() const { return !counterexample; }
};

namespace detail {

inline std::map<std::string, unsigned> output_widths(const DataFlowGraph &dfg) {
  std::map<std::string, unsigned> out;
  for (const auto &name : dfg.outputs)
    out[name] = dfg.width_of(name);
  return out;
}

inline void require_same_signature(const DataFlowGraph &a, const DataFlowGraph &b) {
  std::map<std::string, unsigned> ia, ib;
  for (const auto &in : a.inputs)
    ia[in.name] = in.width;
  for (const auto &in : b.inputs)
    ib[in.name] = in.width;
  if (ia != ib)
    throw Error(Error::Code::Signature, "designs '" + a.name + "' and '" + b.name +
                                            "' declare different inputs");
  if (output_widths(a) != output_widths(b))
    throw Error(Error::Code::Signature, "designs '" + a.name + "' and '" + b.name +
                                            "' declare different outputs");
}

/// Feeds `check` every vector of the chosen strategy until it reports a
/// mismatch.
template <typename Check>
EquivResult sweep(const DataFlowGraph &dfg, const EquivOptions &opts, Check check) {
  EquivResult result;
  unsigned total = 0;
  for (const auto &in : dfg.inputs)
    total += in.width;
  auto split = [&](const Value &packed) {
    InputVector v;
    unsigned shift = 0;
    for (const auto &in : dfg.inputs) {
      v[in.name] = (packed >> shift) & mask(in.width);
      shift += in.width;
    }
    return v;
  };

  if (total <= opts.exhaustive_limit) {
    result.strategy = Strategy::Exhaustive;
    const std::uint64_t count = std::uint64_t{1} << total;
    for (std::uint64_t i = 0; i < count; ++i) {
      ++result.vectors;
      if ((result.counterexample = check(split(Value(i)))))
        return result;
    }
    return result;
  }

  result.strategy = Strategy::Random;
  std::mt19937_64 rng(opts.seed);
  for (std::size_t i = 0; i < opts.random_vectors; ++i) {
    InputVector v;
    for (const auto &in : dfg.inputs) {
      Value x = 0;
      for (unsigned got = 0; got < in.width; got += 64)
        x = (x << 64) | rng();
      v[in.name] = x & mask(in.width);
    }
    ++result.vectors;
    if ((result.counterexample = check(v)))
      return result;
  }
  return result;
}

} // namespace detail

/// Compares the outputs of two designs with equal signatures.
inline EquivResult check_equiv(const DataFlowGraph &a, const DataFlowGraph &b,
                               const EquivOptions &opts = {}) {
  detail::require_same_signature(a, b);
  return detail::sweep(a, opts, [&](const InputVector &v) -> std::optional<Counterexample> {
    auto expected = eval_dfg(a, v);
    auto actual = eval_dfg(b, v);
    if (expected == actual)
      return std::nullopt;
    return Counterexample{v, expected, actual};
  });
}

/// Compares a design against the cycle-by-cycle replay of a schedule of its
/// kernel `scheduled`.
inline EquivResult check_equiv(const DataFlowGraph &a, const Schedule &s,
                               const DataFlowGraph &scheduled, const EquivOptions &opts = {}) {
  detail::require_same_signature(a, scheduled);
  ScheduleSimulator sim(s, scheduled);
  return detail::sweep(a, opts, [&](const InputVector &v) -> std::optional<Counterexample> {
    auto expected = eval_dfg(a, v);
    auto actual = sim.run(v).outputs;
    if (expected == actual)
      return std::nullopt;
    return Counterexample{v, expected, actual};
  });
}

/// Counterexample as DSL-style assignments, mismatching outputs commented.
inline std::string format_counterexample(const Counterexample &cx) {
  std::ostringstream os;
  for (const auto &[name, v] : cx.inputs)
    os << name << " = " << v << ";\n";
  for (const auto &[name, v] : cx.expected) {
    auto it = cx.actual.find(name);
    if (it == cx.actual.end() || it->second != v)
      os << "// " << name << ": expected " << v << ", got "
         << (it == cx.actual.end() ? Value(0) : it->second) << "\n";
  }
  return os.str();
}

} // namespace bitfrag
