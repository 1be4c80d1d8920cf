//===- kernel.hpp - Operative kernel extraction -----------------*- C++ -*-===//
//
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Rewrites signed and non-add arithmetic into unsigned additions, opaque
// unsigned multiplier cores and zero-delay glue (NOT, SELECT, constants).
// Every rewritten operation keeps its id on the op that produces its final
// value, so consumers never need to be touched.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "bitfrag/dfg.hpp"

namespace bitfrag {

struct LoweringStep {
  std::string original;
  std::string rule;
  std::vector<std::string> replacements;

  bool operator==(const LoweringStep &) const = default;
};

using LoweringTrace = std::vector<LoweringStep>;

struct LoweringResult {
  DataFlowGraph dfg;
  LoweringTrace trace;
};

namespace detail {

/// Appends replacement operations in place of one original operation.
class Lowering {
public:
  Lowering(DataFlowGraph &out, std::set<std::string> &taken, LoweringStep &step)
      : out_(out), taken_(taken), step_(step) {}

  DataFlowGraph &graph() { return out_; }

  /// Adds `op` under a fresh id derived from `base`; returns the id.
  std::string add(const std::string &base, Operation op) {
    op.id = fresh_name(taken_, base);
    taken_.insert(op.id);
    return push(std::move(op));
  }
  /// Adds the op that takes over the original id.
  std::string finish(Operation op) { return push(std::move(op)); }

  std::vector<BitSource> bits(const Operand &operand) const {
    return operand_bits(out_, operand);
  }
  Operand pack(const std::vector<BitSource> &bits) const { return pack_bits(out_, bits); }
  Operand pack_range(const std::vector<BitSource> &bits, std::size_t lo, std::size_t hi) const {
    return pack(std::vector<BitSource>(bits.begin() + lo, bits.begin() + hi + 1));
  }
  unsigned width(const Operand &operand) const { return operand_width(out_, operand); }

  /// Makes a signed operand's extension to `width` explicit.
  Operand extend(const Operand &operand, unsigned width, Signedness s) const {
    return s == Signedness::Signed ? sign_extend(out_, operand, width) : operand;
  }

private:
  std::string push(Operation op) {
    step_.replacements.push_back(op.id);
    out_.operations.push_back(std::move(op));
    return step_.replacements.back();
  }

  DataFlowGraph &out_;
  std::set<std::string> &taken_;
  LoweringStep &step_;
};

inline Operation make_op(OpKind kind, unsigned width, std::vector<Operand> operands,
                         CarryIn carry = CarryIn::none()) {
  Operation op;
  op.kind = kind;
  op.width = width;
  op.operands = std::move(operands);
  op.carry_in = std::move(carry);
  return op;
}

inline Operand ones(unsigned width) { return Operand::constant(std::string(width, '1')); }

/// Rebuilds `dfg` with `fn` emitting the replacement of operation `id`.
template <typename Fn>
LoweringResult rewrite(const DataFlowGraph &dfg, const std::string &id, const char *rule, Fn fn) {
  LoweringResult result;
  result.dfg = dfg;
  result.dfg.operations.clear();
  auto taken = all_names(dfg);
  for (const auto &op : dfg.operations) {
    if (op.id != id) {
      result.dfg.operations.push_back(op);
      continue;
    }
    LoweringStep step{op.id, rule, {}};
    Lowering lowering(result.dfg, taken, step);
    fn(lowering, op);
    result.trace.push_back(std::move(step));
  }
  return result;
}

inline const Operation &require_kind(const DataFlowGraph &dfg, const std::string &id,
                                     std::initializer_list<OpKind> kinds) {
  const Operation *op = dfg.find_op(id);
  if (!op)
    throw Error(Error::Code::Invalid, "no operation '" + id + "'");
  if (std::find(kinds.begin(), kinds.end(), op->kind) == kinds.end())
    throw Error(Error::Code::Invalid,
                "'" + id + "' is a " + std::string(kind_name(op->kind)) + " operation");
  return *op;
}

/// Emits `a < b` as the inverted carry-out of a + ~b + 1. Signed operands get
/// their sign bit inverted first, which maps two's-complement order onto
/// unsigned order. Returns the NOT op that yields the 1-bit result.
inline std::string emit_less_than(Lowering &l, const std::string &base, const Operand &a,
                                  const Operand &b, Signedness s, bool keep_id) {
  unsigned k = std::max(l.width(a), l.width(b));
  auto adjust = [&](const Operand &x, const char *suffix) {
    if (s == Signedness::Unsigned)
      return x;
    auto bits = l.bits(l.extend(x, k, s));
    std::string msb = l.add(base + suffix, make_op(OpKind::Not, 1, {l.pack({bits.back()})}));
    bits.back() = BitSource{BitSource::Kind::Result, msb, 0};
    return l.pack(bits);
  };
  Operand lhs = adjust(a, "_amsb");
  Operand rhs = adjust(b, "_bmsb");
  std::string inv = l.add(base + "_nb", make_op(OpKind::Not, k, {rhs}));
  std::string diff = l.add(base + "_diff", make_op(OpKind::Add, k, {lhs, Operand::result(inv)},
                                                   CarryIn::one()));
  Operation result = make_op(OpKind::Not, 1, {Operand::carry(diff)});
  if (keep_id) {
    result.id = base;
    return l.finish(std::move(result));
  }
  return l.add(base + "_lt", std::move(result));
}

} // namespace detail

/// a - b  ->  a + ~b + 1.
inline LoweringResult lower_sub(const DataFlowGraph &dfg, const std::string &id) {
  detail::require_kind(dfg, id, {OpKind::Sub});
  return detail::rewrite(dfg, id, "sub", [](detail::Lowering &l, const Operation &op) {
    Operand a = l.extend(op.operands[0], op.width, op.signedness);
    Operand b = l.extend(op.operands[1], op.width, op.signedness);
    std::string nb = l.add(op.id + "_nb", detail::make_op(OpKind::Not, op.width, {b}));
    Operation sum = detail::make_op(OpKind::Add, op.width, {a, Operand::result(nb)},
                                    CarryIn::one());
    sum.id = op.id;
    l.finish(std::move(sum));
  });
}

/// a < b  ->  NOT(carry(a + ~b + 1)), with sign-bit inversion when signed.
inline LoweringResult lower_compare(const DataFlowGraph &dfg, const std::string &id) {
  detail::require_kind(dfg, id, {OpKind::Lt});
  return detail::rewrite(dfg, id, "compare", [](detail::Lowering &l, const Operation &op) {
    detail::emit_less_than(l, op.id, op.operands[0], op.operands[1], op.signedness, true);
  });
}

/// max(a, b) -> (a < b) ? b : a;  min(a, b) -> (a < b) ? a : b.
inline LoweringResult lower_minmax(const DataFlowGraph &dfg, const std::string &id) {
  detail::require_kind(dfg, id, {OpKind::Max, OpKind::Min});
  return detail::rewrite(dfg, id, "minmax", [](detail::Lowering &l, const Operation &op) {
    const Operand &a = op.operands[0];
    const Operand &b = op.operands[1];
    std::string lt = detail::emit_less_than(l, op.id, a, b, op.signedness, false);
    Operand lo = l.extend(a, op.width, op.signedness);
    Operand hi = l.extend(b, op.width, op.signedness);
    if (op.kind == OpKind::Min)
      std::swap(lo, hi);
    Operation sel = detail::make_op(OpKind::Select, op.width, {Operand::result(lt), hi, lo});
    sel.id = op.id;
    l.finish(std::move(sel));
  });
}

/// Two's-complement m x n multiplication as one unsigned (m-1) x (n-1)
/// multiplier core plus two additions of m and n+1 bits.
///
/// With A', B' the operands without their sign bits, X = b[n-1] ? A' : 0,
/// Y = a[m-1] ? B' : 0 and c = a[m-1] & b[n-1]:
///
///   a*b = A'B' + (~X + 1) 2^(n-1) + (~Y + 1) 2^(m-1) + 2^(m+n-1) + c 2^(m+n-2)
///
/// modulo 2^(m+n). The first add folds ~X into the upper m-1 bits of A'B';
/// the second adds ~Y with c and the constant into the top n bits of that.
/// Operands are commuted when m < n so the first add is the wider one.
inline LoweringResult lower_signed_mult(const DataFlowGraph &dfg, const std::string &id) {
  const Operation &target = detail::require_kind(dfg, id, {OpKind::Mult});
  if (target.signedness != Signedness::Signed)
    throw Error(Error::Code::Invalid, "'" + id + "' is not a signed multiplication");
  for (const auto &operand : target.operands)
    if (operand_width(dfg, operand) < 2)
      throw Error(Error::Code::UnsupportedWidth,
                  "'" + id + "': signed multiplication needs operands of at least 2 bits");

  return detail::rewrite(dfg, id, "signed-mult", [](detail::Lowering &l, const Operation &op) {
    using detail::make_op;
    auto a = l.bits(op.operands[0]);
    auto b = l.bits(op.operands[1]);
    if (a.size() < b.size())
      std::swap(a, b);
    const auto m = static_cast<unsigned>(a.size());
    const auto n = static_cast<unsigned>(b.size());
    Operand a_mag = l.pack_range(a, 0, m - 2);
    Operand b_mag = l.pack_range(b, 0, n - 2);
    Operand a_sign = l.pack({a[m - 1]});
    Operand b_sign = l.pack({b[n - 1]});

    std::string core = l.add(op.id + "_core",
                             make_op(OpKind::MultCore, m + n - 2, {a_mag, b_mag}));
    std::string na = l.add(op.id + "_na", make_op(OpKind::Not, m - 1, {a_mag}));
    std::string nx = l.add(op.id + "_nx", make_op(OpKind::Select, m - 1,
                                                  {b_sign, Operand::result(na), detail::ones(m - 1)}));
    std::string nb = l.add(op.id + "_nb", make_op(OpKind::Not, n - 1, {b_mag}));
    std::string ny = l.add(op.id + "_ny", make_op(OpKind::Select, n - 1,
                                                  {a_sign, Operand::result(nb), detail::ones(n - 1)}));
    std::string corner = l.add(op.id + "_c", make_op(OpKind::Select, 1,
                                                     {a_sign, b_sign, Operand::constant("0")}));

    std::string s1 = l.add(op.id + "_s1",
                           make_op(OpKind::Add, m,
                                   {Operand::result(core, Slice{m + n - 3, n - 1}),
                                    Operand::result(nx)},
                                   CarryIn::one()));
    Operand row = Operand::concat({Operand::constant("1"), Operand::result(corner),
                                   Operand::result(ny)});
    Operand s1_hi = m == n ? Operand::result(s1) : Operand::result(s1, Slice{m - 1, m - n});
    std::string s2 = l.add(op.id + "_s2",
                           make_op(OpKind::Add, n + 1, {s1_hi, row}, CarryIn::one()));

    std::vector<BitSource> product;
    for (unsigned i = 0; i + 1 < n; ++i)
      product.push_back({BitSource::Kind::Result, core, i});
    for (unsigned i = 0; i < m - n; ++i)
      product.push_back({BitSource::Kind::Result, s1, i});
    for (unsigned i = 0; i <= n; ++i)
      product.push_back({BitSource::Kind::Result, s2, i});
    product.resize(op.width, product.back());

    // A select on a constant-true condition is a plain wire.
    Operation wire = make_op(OpKind::Select, op.width,
                             {Operand::constant("1"), l.pack(product), Operand::constant("0")});
    wire.id = op.id;
    l.finish(std::move(wire));
  });
}

namespace detail {

inline LoweringResult lower_one(const DataFlowGraph &dfg, const Operation &op) {
  const bool is_signed = op.signedness == Signedness::Signed;
  switch (op.kind) {
  case OpKind::Sub:
    return lower_sub(dfg, op.id);
  case OpKind::Lt:
    return lower_compare(dfg, op.id);
  case OpKind::Max:
  case OpKind::Min:
    return lower_minmax(dfg, op.id);
  case OpKind::Mult:
    if (is_signed)
      return lower_signed_mult(dfg, op.id);
    return rewrite(dfg, op.id, "unsigned-mult", [](Lowering &l, Operation core) {
      core.kind = OpKind::MultCore;
      l.finish(std::move(core));
    });
  default:
    // Signed add/not/select: spell out the sign extension of every data
    // operand; the rest is already unsigned arithmetic.
    return rewrite(dfg, op.id, "sign-extend", [](Lowering &l, Operation same) {
      std::size_t first = same.kind == OpKind::Select ? 1 : 0;
      for (std::size_t i = first; i < same.operands.size(); ++i)
        same.operands[i] = l.extend(same.operands[i], same.width, Signedness::Signed);
      same.signedness = Signedness::Unsigned;
      l.finish(std::move(same));
    });
  }
}

inline bool is_kernel_op(const Operation &op) {
  if (op.signedness == Signedness::Signed)
    return false;
  switch (op.kind) {
  case OpKind::Add:
  case OpKind::MultCore:
  case OpKind::Not:
  case OpKind::Select:
    return true;
  default:
    return false;
  }
}

} // namespace detail

/// Applies every lowering until only unsigned ADD, MULT_CORE, NOT and SELECT
/// remain.
inline LoweringResult extract_kernel(const DataFlowGraph &dfg) {
  require_valid(dfg);
  LoweringResult result{dfg, {}};
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto &op : result.dfg.operations) {
      if (detail::is_kernel_op(op))
        continue;
      auto step = detail::lower_one(result.dfg, op);
      result.dfg = std::move(step.dfg);
      for (auto &s : step.trace)
        result.trace.push_back(std::move(s));
      changed = true;
      break;
    }
  }
  return result;
}

inline bool is_kernel(const DataFlowGraph &dfg) {
  return std::all_of(dfg.operations.begin(), dfg.operations.end(), detail::is_kernel_op);
}

} // namespace bitfrag
