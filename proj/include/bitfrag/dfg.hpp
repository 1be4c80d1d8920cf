//===- dfg.hpp - Bit-level dataflow graph IR --------------------*- C++ -*-===//
//
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// The intermediate representation shared by every phase: a straight-line
// design made of width-typed operations over sliced, zero-extended operands,
// plus the bit-level dependency relation derived from it.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

namespace bitfrag {

class Error : public std::runtime_error {
public:
  enum class Code {
    Parse,
    Invalid,
    UnsupportedWidth,
    NonAdditivePath,
    BadLatency,
    Infeasible,
    Schedule,
    Simulation,
    Signature,
  };

  Error(Code code, const std::string &message)
      : std::runtime_error(message), code_(code) {}

  Code code() const noexcept { return code_; }

private:
  Code code_;
};

enum class OpKind { Add, Sub, Mult, MultCore, Lt, Max, Min, Not, Select };
enum class Signedness { Unsigned, Signed };

inline std::string_view kind_name(OpKind kind) {
  switch (kind) {
  case OpKind::Add: return "add";
  case OpKind::Sub: return "sub";
  case OpKind::Mult: return "mult";
  case OpKind::MultCore: return "multcore";
  case OpKind::Lt: return "lt";
  case OpKind::Max: return "max";
  case OpKind::Min: return "min";
  case OpKind::Not: return "not";
  case OpKind::Select: return "select";
  }
  return "?";
}

inline std::optional<OpKind> kind_from_name(std::string_view name) {
  for (auto k : {OpKind::Add, OpKind::Sub, OpKind::Mult, OpKind::MultCore,
                 OpKind::Lt, OpKind::Max, OpKind::Min, OpKind::Not,
                 OpKind::Select})
    if (kind_name(k) == name)
      return k;
  return std::nullopt;
}

/// Number of operands an operation of `kind` takes.
inline std::size_t arity(OpKind kind) {
  switch (kind) {
  case OpKind::Not: return 1;
  case OpKind::Select: return 3;
  default: return 2;
  }
}

/// NOT and SELECT are wiring-level glue: zero delay, never fragmented.
inline bool is_glue(OpKind kind) {
  return kind == OpKind::Not || kind == OpKind::Select;
}

struct Slice {
  unsigned hi = 0;
  unsigned lo = 0;

  unsigned width() const { return hi - lo + 1; }
  bool operator==(const Slice &) const = default;
};

struct Operand {
  enum class Kind { Input, Result, Carry, Constant, Concat };

  Kind kind = Kind::Input;
  std::string ref;              // input name or op id
  std::string bits;             // constant value, MSB first
  std::vector<Operand> parts;   // concatenation, MSB first
  std::optional<Slice> slice;

  static Operand input(std::string name,
                       std::optional<Slice> slice = std::nullopt) {
    return {Kind::Input, std::move(name), {}, {}, slice};
  }
  static Operand result(std::string id,
                        std::optional<Slice> slice = std::nullopt) {
    return {Kind::Result, std::move(id), {}, {}, slice};
  }
  static Operand carry(std::string id) {
    return {Kind::Carry, std::move(id), {}, {}, std::nullopt};
  }
  static Operand constant(std::string bits) {
    return {Kind::Constant, {}, std::move(bits), {}, std::nullopt};
  }
  static Operand concat(std::vector<Operand> parts) {
    return {Kind::Concat, {}, {}, std::move(parts), std::nullopt};
  }

  /// Least-significant result bits dropped by this edge.
  unsigned truncated_right() const { return slice ? slice->lo : 0; }

  bool operator==(const Operand &) const = default;
};

struct CarryIn {
  enum class Kind { None, Zero, One, CarryOf };

  Kind kind = Kind::None;
  std::string ref;

  static CarryIn none() { return {}; }
  static CarryIn zero() { return {Kind::Zero, {}}; }
  static CarryIn one() { return {Kind::One, {}}; }
  static CarryIn of(std::string id) { return {Kind::CarryOf, std::move(id)}; }

  bool operator==(const CarryIn &) const = default;
};

struct Operation {
  std::string id;
  OpKind kind = OpKind::Add;
  unsigned width = 1;
  Signedness signedness = Signedness::Unsigned;
  std::vector<Operand> operands;
  CarryIn carry_in;

  bool operator==(const Operation &) const = default;
};

struct Input {
  std::string name;
  unsigned width = 1;
  Signedness signedness = Signedness::Unsigned;

  bool operator==(const Input &) const = default;
};

struct DataFlowGraph {
  std::string name;
  std::vector<Input> inputs;
  std::vector<Operation> operations;
  std::vector<std::string> outputs;

  const Operation *find_op(std::string_view id) const {
    for (const auto &op : operations)
      if (op.id == id)
        return &op;
    return nullptr;
  }
  const Input *find_input(std::string_view name) const {
    for (const auto &in : inputs)
      if (in.name == name)
        return &in;
    return nullptr;
  }
  std::optional<std::size_t> op_index(std::string_view id) const {
    for (std::size_t i = 0; i < operations.size(); ++i)
      if (operations[i].id == id)
        return i;
    return std::nullopt;
  }
  bool defines(std::string_view name) const {
    return find_op(name) || find_input(name);
  }
  /// Width of a named input or operation result.
  unsigned width_of(std::string_view name) const {
    if (auto *op = find_op(name))
      return op->width;
    if (auto *in = find_input(name))
      return in->width;
    throw Error(Error::Code::Invalid, "unknown name '" + std::string(name) + "'");
  }
  bool is_output(std::string_view name) const {
    return std::find(outputs.begin(), outputs.end(), name) != outputs.end();
  }

  bool operator==(const DataFlowGraph &) const = default;
};

//===----------------------------------------------------------------------===//
// Bit sources
//===----------------------------------------------------------------------===//

/// One bit of a value as seen by a consumer.
struct BitSource {
  enum class Kind { Input, Result, Carry, Constant };

  Kind kind = Kind::Constant;
  std::string ref;
  unsigned bit = 0; // bit index, or the constant value

  static BitSource constant(bool value) { return {Kind::Constant, {}, value ? 1u : 0u}; }

  bool operator==(const BitSource &) const = default;
  bool operator<(const BitSource &o) const {
    return std::tie(kind, ref, bit) < std::tie(o.kind, o.ref, o.bit);
  }
};

inline unsigned operand_width(const DataFlowGraph &dfg, const Operand &operand) {
  if (operand.slice)
    return operand.slice->width();
  switch (operand.kind) {
  case Operand::Kind::Input:
  case Operand::Kind::Result:
    return dfg.width_of(operand.ref);
  case Operand::Kind::Carry:
    return 1;
  case Operand::Kind::Constant:
    return static_cast<unsigned>(operand.bits.size());
  case Operand::Kind::Concat: {
    unsigned w = 0;
    for (const auto &p : operand.parts)
      w += operand_width(dfg, p);
    return w;
  }
  }
  return 0;
}

/// Bit `i` of an operand, LSB = 0. Returns nullopt past the operand's width,
/// where consumers see zero-extension.
inline std::optional<BitSource> operand_bit(const DataFlowGraph &dfg,
                                            const Operand &operand, unsigned i) {
  if (operand.kind == Operand::Kind::Concat) {
    for (auto it = operand.parts.rbegin(); it != operand.parts.rend(); ++it) {
      unsigned w = operand_width(dfg, *it);
      if (i < w)
        return operand_bit(dfg, *it, i);
      i -= w;
    }
    return std::nullopt;
  }
  if (i >= operand_width(dfg, operand))
    return std::nullopt;
  unsigned src = i + operand.truncated_right();
  switch (operand.kind) {
  case Operand::Kind::Input:
    return BitSource{BitSource::Kind::Input, operand.ref, src};
  case Operand::Kind::Result:
    return BitSource{BitSource::Kind::Result, operand.ref, src};
  case Operand::Kind::Carry:
    return BitSource{BitSource::Kind::Carry, operand.ref, 0};
  case Operand::Kind::Constant:
    return BitSource::constant(operand.bits[operand.bits.size() - 1 - src] == '1');
  case Operand::Kind::Concat:
    break;
  }
  return std::nullopt;
}

inline std::vector<BitSource> operand_bits(const DataFlowGraph &dfg,
                                           const Operand &operand) {
  std::vector<BitSource> bits;
  unsigned w = operand_width(dfg, operand);
  bits.reserve(w);
  for (unsigned i = 0; i < w; ++i)
    bits.push_back(*operand_bit(dfg, operand, i));
  return bits;
}

/// Packs an LSB-first bit list into the shortest operand expression:
/// maximal runs of one source become sliced terms, several terms a concat.
inline Operand pack_bits(const DataFlowGraph &dfg, std::span<const BitSource> bits) {
  if (bits.empty())
    return Operand::constant("0");
  std::vector<Operand> terms; // LSB first while building
  std::size_t i = 0;
  while (i < bits.size()) {
    const BitSource &first = bits[i];
    std::size_t j = i + 1;
    if (first.kind == BitSource::Kind::Constant) {
      std::string value;
      value.push_back(first.bit ? '1' : '0');
      while (j < bits.size() && bits[j].kind == BitSource::Kind::Constant) {
        value.insert(value.begin(), bits[j].bit ? '1' : '0');
        ++j;
      }
      terms.push_back(Operand::constant(value));
    } else if (first.kind == BitSource::Kind::Carry) {
      terms.push_back(Operand::carry(first.ref));
    } else {
      while (j < bits.size() && bits[j].kind == first.kind &&
             bits[j].ref == first.ref && bits[j].bit == first.bit + (j - i))
        ++j;
      Slice s{static_cast<unsigned>(first.bit + (j - i) - 1), first.bit};
      std::optional<Slice> slice = s;
      if (s.lo == 0 && s.hi + 1 == dfg.width_of(first.ref))
        slice.reset();
      terms.push_back(first.kind == BitSource::Kind::Input
                          ? Operand::input(first.ref, slice)
                          : Operand::result(first.ref, slice));
    }
    i = j;
  }
  if (terms.size() == 1)
    return terms.front();
  std::reverse(terms.begin(), terms.end());
  return Operand::concat(std::move(terms));
}

/// Bits [lo, hi] of `operand` as an operand; bits past its width read as 0.
inline Operand operand_range(const DataFlowGraph &dfg, const Operand &operand,
                             unsigned lo, unsigned hi) {
  std::vector<BitSource> bits;
  unsigned w = operand_width(dfg, operand);
  for (unsigned i = lo; i <= hi && i < w; ++i)
    bits.push_back(*operand_bit(dfg, operand, i));
  if (bits.empty())
    bits.push_back(BitSource::constant(false));
  return pack_bits(dfg, bits);
}

/// Replicates the operand's MSB until it is `width` bits wide.
inline Operand sign_extend(const DataFlowGraph &dfg, const Operand &operand,
                           unsigned width) {
  auto bits = operand_bits(dfg, operand);
  if (bits.size() >= width)
    return operand;
  BitSource msb = bits.back();
  bits.resize(width, msb);
  return pack_bits(dfg, bits);
}

//===----------------------------------------------------------------------===//
// Validation
//===----------------------------------------------------------------------===//

struct SourceSpan {
  std::size_t line = 0;
  std::size_t column = 0;
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const SourceSpan &) const = default;
};

struct Diagnostic {
  enum class Kind {
    Syntax,
    Cycle,
    UndefinedReference,
    ForwardReference,
    SliceOutOfRange,
    BadArity,
    BadWidth,
    BadCarry,
    BadKind,
    Duplicate,
  };

  Kind kind = Kind::Syntax;
  std::string op;
  std::string message;
  std::optional<SourceSpan> span;
};

namespace detail {

inline void collect_refs(const Operand &operand, std::vector<std::string> &out) {
  if (operand.kind == Operand::Kind::Concat) {
    for (const auto &p : operand.parts)
      collect_refs(p, out);
  } else if (operand.kind == Operand::Kind::Result ||
             operand.kind == Operand::Kind::Carry) {
    out.push_back(operand.ref);
  }
}

/// Op ids referenced by `op` (operands and carry-in), possibly repeated.
inline std::vector<std::string> referenced_ops(const Operation &op) {
  std::vector<std::string> refs;
  for (const auto &operand : op.operands)
    collect_refs(operand, refs);
  if (op.carry_in.kind == CarryIn::Kind::CarryOf)
    refs.push_back(op.carry_in.ref);
  return refs;
}

} // namespace detail

inline std::vector<Diagnostic> validate(const DataFlowGraph &dfg) {
  std::vector<Diagnostic> diags;
  auto report = [&](Diagnostic::Kind kind, const std::string &op,
                    std::string msg) {
    diags.push_back({kind, op, std::move(msg), std::nullopt});
  };

  std::set<std::string> names;
  for (const auto &in : dfg.inputs) {
    if (!names.insert(in.name).second)
      report(Diagnostic::Kind::Duplicate, in.name, "duplicate name '" + in.name + "'");
    if (in.width < 1)
      report(Diagnostic::Kind::BadWidth, in.name, "input width must be at least 1");
  }
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < dfg.operations.size(); ++i) {
    const auto &op = dfg.operations[i];
    if (!names.insert(op.id).second)
      report(Diagnostic::Kind::Duplicate, op.id, "duplicate name '" + op.id + "'");
    index.emplace(op.id, i);
  }

  // Cycles first, so that a self-reference is not also reported as a
  // forward reference.
  std::set<std::string> on_cycle;
  {
    enum class Mark { None, Active, Done };
    std::vector<Mark> mark(dfg.operations.size(), Mark::None);
    std::function<void(std::size_t)> visit = [&](std::size_t i) {
      mark[i] = Mark::Active;
      for (const auto &ref : detail::referenced_ops(dfg.operations[i])) {
        auto it = index.find(ref);
        if (it == index.end())
          continue;
        if (mark[it->second] == Mark::Active) {
          if (on_cycle.insert(dfg.operations[i].id).second)
            report(Diagnostic::Kind::Cycle, dfg.operations[i].id,
                   "cycle detected through '" + ref + "'");
        } else if (mark[it->second] == Mark::None) {
          visit(it->second);
        }
      }
      mark[i] = Mark::Done;
    };
    for (std::size_t i = 0; i < dfg.operations.size(); ++i)
      if (mark[i] == Mark::None)
        visit(i);
  }

  for (std::size_t i = 0; i < dfg.operations.size(); ++i) {
    const auto &op = dfg.operations[i];
    const std::string &id = op.id;
    if (op.width < 1)
      report(Diagnostic::Kind::BadWidth, id, "width must be at least 1");
    if (op.operands.size() != arity(op.kind))
      report(Diagnostic::Kind::BadArity, id,
             std::string(kind_name(op.kind)) + " takes " +
                 std::to_string(arity(op.kind)) + " operand(s), got " +
                 std::to_string(op.operands.size()));
    if (op.kind == OpKind::MultCore && op.signedness == Signedness::Signed)
      report(Diagnostic::Kind::BadKind, id, "multcore is unsigned only");
    if (op.kind == OpKind::Lt && op.width != 1)
      report(Diagnostic::Kind::BadWidth, id, "comparison result must be 1 bit");
    if (op.carry_in.kind != CarryIn::Kind::None && op.kind != OpKind::Add)
      report(Diagnostic::Kind::BadCarry, id, "only add takes a carry-in");

    auto check_op_ref = [&](const std::string &ref, bool carry) {
      auto it = index.find(ref);
      if (it == index.end()) {
        report(Diagnostic::Kind::UndefinedReference, id,
               "undefined reference '" + ref + "'");
        return;
      }
      if (it->second >= i) {
        if (!on_cycle.count(id))
          report(Diagnostic::Kind::ForwardReference, id,
                 "'" + ref + "' is used before its definition");
        return;
      }
      if (carry && dfg.operations[it->second].kind != OpKind::Add)
        report(Diagnostic::Kind::BadCarry, id,
               "carry of '" + ref + "' which is not an add");
    };

    std::function<void(const Operand &, bool)> check_operand =
        [&](const Operand &operand, bool nested) {
          switch (operand.kind) {
          case Operand::Kind::Concat:
            if (nested)
              report(Diagnostic::Kind::Syntax, id, "nested concatenation");
            if (operand.parts.empty())
              report(Diagnostic::Kind::BadWidth, id, "empty concatenation");
            if (operand.slice)
              report(Diagnostic::Kind::Syntax, id, "slice on a concatenation");
            for (const auto &p : operand.parts)
              check_operand(p, true);
            return;
          case Operand::Kind::Input:
            if (!dfg.find_input(operand.ref)) {
              if (index.count(operand.ref))
                report(Diagnostic::Kind::UndefinedReference, id,
                       "'" + operand.ref + "' is an operation, not an input");
              else
                report(Diagnostic::Kind::UndefinedReference, id,
                       "undefined reference '" + operand.ref + "'");
              return;
            }
            break;
          case Operand::Kind::Result:
            check_op_ref(operand.ref, false);
            break;
          case Operand::Kind::Carry:
            check_op_ref(operand.ref, true);
            break;
          case Operand::Kind::Constant:
            if (operand.bits.empty() ||
                operand.bits.find_first_not_of("01") != std::string::npos) {
              report(Diagnostic::Kind::Syntax, id,
                     "constant must be a non-empty binary string");
              return;
            }
            break;
          }
          if (operand.slice) {
            unsigned full = 1;
            if (operand.kind == Operand::Kind::Input ||
                operand.kind == Operand::Kind::Result) {
              if (!dfg.defines(operand.ref))
                return;
              full = dfg.width_of(operand.ref);
            }
            else if (operand.kind == Operand::Kind::Constant)
              full = static_cast<unsigned>(operand.bits.size());
            const Slice &s = *operand.slice;
            if (s.lo > s.hi || s.hi >= full)
              report(Diagnostic::Kind::SliceOutOfRange, id,
                     "slice [" + std::to_string(s.hi) + ":" +
                         std::to_string(s.lo) + "] of '" + operand.ref +
                         "' outside width " + std::to_string(full));
          }
        };
    for (const auto &operand : op.operands)
      check_operand(operand, false);
    if (op.carry_in.kind == CarryIn::Kind::CarryOf)
      check_op_ref(op.carry_in.ref, true);

    if (op.kind == OpKind::Select && op.operands.size() == 3) {
      try {
        if (operand_width(dfg, op.operands[0]) != 1)
          report(Diagnostic::Kind::BadWidth, id, "select condition must be 1 bit");
      } catch (const Error &) {
        // unknown reference, already reported
      }
    }
  }

  for (const auto &out : dfg.outputs)
    if (!dfg.defines(out))
      report(Diagnostic::Kind::UndefinedReference, out,
             "output '" + out + "' is not defined");
  return diags;
}

inline bool is_valid(const DataFlowGraph &dfg) { return validate(dfg).empty(); }

/// Throws Error::Code::Invalid carrying the first diagnostic.
inline void require_valid(const DataFlowGraph &dfg) {
  auto diags = validate(dfg);
  if (!diags.empty())
    throw Error(Error::Code::Invalid,
                (diags.front().op.empty() ? "" : diags.front().op + ": ") +
                    diags.front().message);
}

/// Kahn's algorithm; among ready ops the earliest-defined goes first.
inline std::vector<std::string> topo_order(const DataFlowGraph &dfg) {
  const std::size_t n = dfg.operations.size();
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i)
    index.emplace(dfg.operations[i].id, i);
  std::vector<std::size_t> pending(n, 0);
  std::vector<std::vector<std::size_t>> users(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::set<std::size_t> preds;
    for (const auto &ref : detail::referenced_ops(dfg.operations[i]))
      if (auto it = index.find(ref); it != index.end())
        preds.insert(it->second);
    pending[i] = preds.size();
    for (auto p : preds)
      users[p].push_back(i);
  }
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (pending[i] == 0)
      ready.insert(i);
  std::vector<std::string> order;
  while (!ready.empty()) {
    std::size_t i = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(dfg.operations[i].id);
    for (auto u : users[i])
      if (--pending[u] == 0)
        ready.insert(u);
  }
  if (order.size() != n)
    throw Error(Error::Code::Invalid, "dependency cycle");
  return order;
}

//===----------------------------------------------------------------------===//
// Bit-level dependencies
//===----------------------------------------------------------------------===//

using BitKey = std::pair<std::string, unsigned>; // (op id, bit)
using BitDeps = std::map<BitKey, std::set<BitSource>>;

namespace detail {

inline void add_source(std::set<BitSource> &set, std::optional<BitSource> src) {
  if (src && src->kind != BitSource::Kind::Constant)
    set.insert(*src);
}

} // namespace detail

/// Producers of every result bit. Constants are omitted: they carry no
/// dependency. A carry source stands for the carry-out of the referenced add.
inline BitDeps bit_deps(const DataFlowGraph &dfg) {
  BitDeps deps;
  for (const auto &op : dfg.operations) {
    for (unsigned i = 0; i < op.width; ++i) {
      auto &set = deps[{op.id, i}];
      switch (op.kind) {
      case OpKind::MultCore:
        for (const auto &operand : op.operands)
          for (const auto &b : operand_bits(dfg, operand))
            detail::add_source(set, b);
        break;
      case OpKind::Select:
        detail::add_source(set, operand_bit(dfg, op.operands[0], 0));
        detail::add_source(set, operand_bit(dfg, op.operands[1], i));
        detail::add_source(set, operand_bit(dfg, op.operands[2], i));
        break;
      default:
        for (const auto &operand : op.operands)
          detail::add_source(set, operand_bit(dfg, operand, i));
        if (op.kind == OpKind::Not)
          break;
        if (i > 0)
          set.insert({BitSource::Kind::Result, op.id, i - 1});
        else if (op.carry_in.kind == CarryIn::Kind::CarryOf)
          set.insert({BitSource::Kind::Carry, op.carry_in.ref, 0});
        break;
      }
    }
  }
  return deps;
}

/// Role of a result bit in timing and placement.
enum class BitRole { Add, Glue, Opaque };

/// Index-based view of the bit dependency relation. Nodes are the result bits
/// of every operation, numbered in topological op order and LSB first, so
/// every producer has a smaller index than its consumers.
class BitNetwork {
public:
  struct Edge {
    std::size_t node;
    bool carry; // the carry-out of `node` rather than its sum bit

    bool operator==(const Edge &) const = default;
  };

  struct OpInfo {
    std::string id;
    OpKind kind;
    unsigned width;
    std::size_t first; // node index of bit 0
    std::size_t def_index; // position in dfg.operations
  };

  explicit BitNetwork(const DataFlowGraph &dfg) {
    auto order = topo_order(dfg);
    std::size_t next = 0;
    for (const auto &id : order) {
      auto idx = *dfg.op_index(id);
      const auto &op = dfg.operations[idx];
      index_.emplace(id, ops_.size());
      ops_.push_back({id, op.kind, op.width, next, idx});
      next += op.width;
    }
    producers_.resize(next);
    consumers_.resize(next);
    output_.assign(next, false);
    owner_.resize(next);
    for (std::size_t k = 0; k < ops_.size(); ++k)
      for (unsigned b = 0; b < ops_[k].width; ++b)
        owner_[ops_[k].first + b] = k;

    auto edge_of = [&](const BitSource &src) -> std::optional<Edge> {
      if (src.kind == BitSource::Kind::Result)
        return Edge{node(*op_index(src.ref), src.bit), false};
      if (src.kind == BitSource::Kind::Carry) {
        auto k = *op_index(src.ref);
        return Edge{node(k, ops_[k].width - 1), true};
      }
      return std::nullopt;
    };
    auto deps = bit_deps(dfg);
    for (std::size_t k = 0; k < ops_.size(); ++k) {
      for (unsigned b = 0; b < ops_[k].width; ++b) {
        std::size_t n = node(k, b);
        for (const auto &src : deps[{ops_[k].id, b}]) {
          auto e = edge_of(src);
          if (!e)
            continue;
          // An add's own lower bit is consumed through its carry-out.
          if (src.kind == BitSource::Kind::Result && src.ref == ops_[k].id)
            e->carry = true;
          producers_[n].push_back(*e);
          consumers_[e->node].push_back(Edge{n, e->carry});
        }
      }
    }
    for (const auto &out : dfg.outputs)
      if (auto k = op_index(out))
        for (unsigned b = 0; b < ops_[*k].width; ++b)
          output_[node(*k, b)] = true;
  }

  std::size_t size() const { return producers_.size(); }
  std::size_t op_count() const { return ops_.size(); }
  const OpInfo &op(std::size_t k) const { return ops_[k]; }
  std::optional<std::size_t> op_index(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end())
      return std::nullopt;
    return it->second;
  }
  std::size_t node(std::size_t op, unsigned bit) const { return ops_[op].first + bit; }
  std::size_t op_of(std::size_t node) const { return owner_[node]; }
  unsigned bit_of(std::size_t node) const {
    return static_cast<unsigned>(node - ops_[owner_[node]].first);
  }
  BitRole role(std::size_t node) const {
    OpKind k = ops_[owner_[node]].kind;
    if (k == OpKind::MultCore)
      return BitRole::Opaque;
    if (is_glue(k))
      return BitRole::Glue;
    return BitRole::Add;
  }
  std::span<const Edge> producers(std::size_t node) const { return producers_[node]; }
  std::span<const Edge> consumers(std::size_t node) const { return consumers_[node]; }
  bool is_output(std::size_t node) const { return output_[node]; }
  /// True when `edge` into `node` is the ripple carry from the same add's
  /// lower bit.
  bool is_lane_carry(std::size_t node, const Edge &edge) const {
    return edge.carry && edge.node + 1 == node && owner_[edge.node] == owner_[node];
  }

private:
  std::vector<OpInfo> ops_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<Edge>> producers_;
  std::vector<std::vector<Edge>> consumers_;
  std::vector<bool> output_;
  std::vector<std::size_t> owner_;
};

/// Fresh identifier derived from `base` that does not clash with `taken`.
inline std::string fresh_name(const std::set<std::string> &taken, const std::string &base) {
  if (!taken.count(base))
    return base;
  for (unsigned i = 1;; ++i) {
    std::string candidate = base + "_" + std::to_string(i);
    if (!taken.count(candidate))
      return candidate;
  }
}

inline std::set<std::string> all_names(const DataFlowGraph &dfg) {
  std::set<std::string> names;
  for (const auto &in : dfg.inputs)
    names.insert(in.name);
  for (const auto &op : dfg.operations)
    names.insert(op.id);
  return names;
}

} // namespace bitfrag
