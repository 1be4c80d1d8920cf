//===- scheduler.hpp - Fragment list scheduling -----------------*- C++ -*-===//
//
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Time-constrained list scheduling of fragments. Fragments whose mobility is
// a single cycle are fixed first; the rest are placed one at a time in the
// cycle that keeps the per-cycle bit load lowest, re-running the windowed
// depth-slot placement after every choice.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "bitfrag/fragmenter.hpp"

namespace bitfrag {

struct Assignment {
  Fragment fragment;
  int cycle = 0;

  bool operator==(const Assignment &) const = default;
};

struct Schedule {
  unsigned latency = 0;
  unsigned n_bits = 0;
  std::vector<Assignment> assignments;
  PlacementTable placement; // realized slot of every bit of the scheduled design

  int cycle_of(const std::string &op, unsigned bit) const { return placement.at(op).at(bit).cycle; }

  /// Result bits computed per cycle, index 0 = cycle 1.
  std::vector<unsigned> bits_per_cycle() const {
    std::vector<unsigned> load(latency, 0);
    for (const auto &a : assignments)
      if (a.cycle >= 1 && a.cycle <= static_cast<int>(latency))
        load[a.cycle - 1] += a.fragment.width();
    return load;
  }

  /// Fragments executed per cycle, index 0 = cycle 1.
  std::vector<unsigned> fragments_per_cycle() const {
    std::vector<unsigned> count(latency, 0);
    for (const auto &a : assignments)
      if (a.cycle >= 1 && a.cycle <= static_cast<int>(latency))
        ++count[a.cycle - 1];
    return count;
  }

  bool operator==(const Schedule &) const = default;
};

namespace detail {

class WindowedPlacer {
public:
  WindowedPlacer(const DataFlowGraph &dfg, const std::vector<Fragment> &fragments,
                 unsigned latency, unsigned n_bits)
      : net_(dfg), fragments_(fragments), latency_(static_cast<int>(latency)),
        n_bits_(static_cast<int>(n_bits)) {
    nodes_.resize(fragments.size());
    for (std::size_t i = 0; i < fragments.size(); ++i) {
      const auto &f = fragments[i];
      auto k = net_.op_index(f.parent);
      if (!k)
        throw Error(Error::Code::Schedule, "fragment of unknown operation '" + f.parent + "'");
      if (f.hi >= net_.op(*k).width || f.lo > f.hi)
        throw Error(Error::Code::Schedule, "fragment " + f.label() + " is out of range");
      for (unsigned b = f.lo; b <= f.hi; ++b)
        nodes_[i].push_back(net_.node(*k, b));
    }
  }

  /// Placements under the given cycle choices (0 = free within mobility);
  /// nullopt when they cannot all hold at once.
  std::optional<std::vector<Slot>> place(const std::vector<int> &cycles) const {
    std::vector<Window> windows(net_.size());
    for (std::size_t i = 0; i < fragments_.size(); ++i) {
      Window w = cycles[i] ? Window{cycles[i], cycles[i]}
                           : Window{fragments_[i].asap_cycle, fragments_[i].alap_cycle};
      for (auto n : nodes_[i])
        windows[n] = w;
    }
    auto asap = place_asap(net_, n_bits_, &windows);
    auto alap = place_alap(net_, n_bits_, latency_, &windows);
    if (!alap)
      return std::nullopt;
    for (std::size_t i = 0; i < fragments_.size(); ++i) {
      int earliest = 0, latest = latency_;
      for (auto n : nodes_[i]) {
        earliest = std::max(earliest, asap[n].cycle);
        latest = std::min(latest, (*alap)[n].cycle);
      }
      if (earliest > latest)
        return std::nullopt;
    }
    return asap;
  }

  const BitNetwork &net() const { return net_; }

private:
  BitNetwork net_;
  const std::vector<Fragment> &fragments_;
  std::vector<std::vector<std::size_t>> nodes_;
  int latency_;
  int n_bits_;
};

} // namespace detail

/// Schedules `fragments` of `dfg` into `latency` cycles of `n_bits` chained
/// additions. Throws Error::Code::Schedule when no legal placement exists.
inline Schedule schedule(const DataFlowGraph &dfg, const std::vector<Fragment> &fragments,
                         unsigned latency, unsigned n_bits) {
  if (latency < 1 || n_bits < 1)
    throw Error(Error::Code::BadLatency, "latency and n_bits must be at least 1");
  detail::WindowedPlacer placer(dfg, fragments, latency, n_bits);

  std::vector<int> cycles(fragments.size(), 0);
  std::vector<unsigned> load(latency + 1, 0);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < fragments.size(); ++i) {
    const auto &f = fragments[i];
    if (f.asap_cycle < 1 || f.alap_cycle > static_cast<int>(latency) ||
        f.asap_cycle > f.alap_cycle)
      throw Error(Error::Code::Schedule, "fragment " + f.label() + " has an empty mobility window");
    if (f.prescheduled()) {
      cycles[i] = f.asap_cycle;
      load[f.asap_cycle] += f.width();
    } else {
      order.push_back(i);
    }
  }
  if (!placer.place(cycles))
    throw Error(Error::Code::Schedule, "pre-scheduled fragments do not admit a legal placement");

  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto &x = fragments[a];
    const auto &y = fragments[b];
    return std::tuple(x.alap_cycle - x.asap_cycle, x.asap_cycle, x.parent, x.lo) <
           std::tuple(y.alap_cycle - y.asap_cycle, y.asap_cycle, y.parent, y.lo);
  });

  for (auto i : order) {
    const auto &f = fragments[i];
    std::optional<int> best;
    unsigned best_peak = 0;
    for (int c = f.asap_cycle; c <= f.alap_cycle; ++c) {
      cycles[i] = c;
      if (!placer.place(cycles))
        continue;
      unsigned peak = 0;
      for (int k = 1; k <= static_cast<int>(latency); ++k)
        peak = std::max(peak, load[k] + (k == c ? f.width() : 0));
      if (!best || peak < best_peak) {
        best = c;
        best_peak = peak;
      }
    }
    if (!best)
      throw Error(Error::Code::Schedule, "no legal cycle for fragment " + f.label());
    cycles[i] = *best;
    load[*best] += f.width();
  }

  auto slots = placer.place(cycles);
  if (!slots)
    throw Error(Error::Code::Schedule, "final placement is inconsistent");

  Schedule s;
  s.latency = latency;
  s.n_bits = n_bits;
  for (std::size_t i = 0; i < fragments.size(); ++i)
    s.assignments.push_back({fragments[i], cycles[i]});
  s.placement = detail::to_table(placer.net(), *slots);
  return s;
}

//===----------------------------------------------------------------------===//
// Independent legality check
//===----------------------------------------------------------------------===//

struct Violation {
  enum class Kind { Range, Mobility, Tiling, CarryOrder, Placement, Depth, Dependency };

  Kind kind;
  std::string message;

  bool operator==(const Violation &) const = default;
};

inline std::string_view violation_name(Violation::Kind k) {
  switch (k) {
  case Violation::Kind::Range: return "range";
  case Violation::Kind::Mobility: return "mobility";
  case Violation::Kind::Tiling: return "tiling";
  case Violation::Kind::CarryOrder: return "carry-order";
  case Violation::Kind::Placement: return "placement";
  case Violation::Kind::Depth: return "depth";
  case Violation::Kind::Dependency: return "dependency";
  }
  return "?";
}

namespace detail {

/// Producers of result bits with glue looked through, so every source is an
/// input, an add or core result bit, or a carry-out.
class GlueResolver {
public:
  explicit GlueResolver(const DataFlowGraph &dfg) : dfg_(dfg), deps_(bit_deps(dfg)) {}

  const std::vector<BitSource> &of(const BitKey &key) {
    if (auto it = memo_.find(key); it != memo_.end())
      return it->second;
    std::set<BitSource> acc;
    for (const auto &src : deps_.at(key)) {
      if (is_glue_result(src)) {
        const auto &inner = of({src.ref, src.bit});
        acc.insert(inner.begin(), inner.end());
      } else {
        acc.insert(src);
      }
    }
    return memo_[key] = std::vector<BitSource>(acc.begin(), acc.end());
  }

  bool is_glue_result(const BitSource &src) const {
    if (src.kind != BitSource::Kind::Result)
      return false;
    const Operation *p = dfg_.find_op(src.ref);
    return p && is_glue(p->kind);
  }

private:
  const DataFlowGraph &dfg_;
  BitDeps deps_;
  std::map<BitKey, std::vector<BitSource>> memo_;
};

} // namespace detail

/// Re-checks a schedule against `dfg` using only the bit dependency relation.
/// An empty result means the schedule is legal.
inline std::vector<Violation> verify_schedule(const Schedule &s, const DataFlowGraph &dfg) {
  using K = Violation::Kind;
  std::vector<Violation> out;
  auto report = [&](K kind, std::string message) { out.push_back({kind, std::move(message)}); };
  const int latency = static_cast<int>(s.latency);
  const int n_bits = static_cast<int>(s.n_bits);

  std::map<std::string, std::vector<const Assignment *>> by_parent;
  for (const auto &a : s.assignments) {
    const auto &f = a.fragment;
    if (a.cycle < 1 || a.cycle > latency)
      report(K::Range, f.label() + " assigned to cycle " + std::to_string(a.cycle));
    if (a.cycle < f.asap_cycle || a.cycle > f.alap_cycle)
      report(K::Mobility, f.label() + " in cycle " + std::to_string(a.cycle) + " outside [" +
                              std::to_string(f.asap_cycle) + ", " +
                              std::to_string(f.alap_cycle) + "]");
    by_parent[f.parent].push_back(&a);
  }

  for (const auto &op : dfg.operations) {
    if (is_glue(op.kind))
      continue;
    auto it = by_parent.find(op.id);
    if (it == by_parent.end()) {
      report(K::Tiling, "operation '" + op.id + "' has no fragments");
      continue;
    }
    auto list = it->second;
    std::sort(list.begin(), list.end(),
              [](auto *a, auto *b) { return a->fragment.lo < b->fragment.lo; });
    unsigned next = 0;
    for (std::size_t k = 0; k < list.size(); ++k) {
      const auto &f = list[k]->fragment;
      if (f.lo != next || f.hi < f.lo || f.index != k)
        report(K::Tiling, "fragments of '" + op.id + "' do not tile its bits at " + f.label());
      next = f.hi + 1;
      if (k > 0 && list[k - 1]->cycle > list[k]->cycle)
        report(K::CarryOrder, f.label() + " runs before its carry source " +
                                  list[k - 1]->fragment.label());
    }
    if (next != op.width)
      report(K::Tiling, "fragments of '" + op.id + "' cover " + std::to_string(next) + " of " +
                            std::to_string(op.width) + " bits");
    if (op.kind == OpKind::MultCore && list.size() != 1)
      report(K::Tiling, "multiplier core '" + op.id + "' is split");
  }
  for (const auto &[parent, list] : by_parent) {
    const Operation *op = dfg.find_op(parent);
    if (!op || is_glue(op->kind))
      report(K::Tiling, "fragment of unknown or glue operation '" + parent + "'");
  }
  if (!out.empty())
    return out;

  // Every non-glue bit must sit in its fragment's cycle at a legal depth.
  auto slot_of = [&](const std::string &id, unsigned bit) -> std::optional<Slot> {
    auto it = s.placement.find(id);
    if (it == s.placement.end() || bit >= it->second.size())
      return std::nullopt;
    return it->second[bit];
  };
  for (const auto &[parent, list] : by_parent) {
    for (const auto *a : list) {
      for (unsigned b = a->fragment.lo; b <= a->fragment.hi; ++b) {
        auto slot = slot_of(parent, b);
        std::string bit = parent + "[" + std::to_string(b) + "]";
        if (!slot) {
          report(K::Placement, bit + " has no placement");
          continue;
        }
        if (slot->cycle != a->cycle)
          report(K::Placement, bit + " placed in cycle " + std::to_string(slot->cycle) +
                                   " but its fragment runs in cycle " + std::to_string(a->cycle));
        bool opaque = a->fragment.atomic;
        if (opaque ? slot->depth != 0 : (slot->depth < 1 || slot->depth > n_bits))
          report(K::Depth, bit + " at chain depth " + std::to_string(slot->depth) +
                               " (limit " + std::to_string(n_bits) + ")");
      }
    }
  }
  if (!out.empty())
    return out;

  detail::GlueResolver sources(dfg);
  for (const auto &op : dfg.operations) {
    if (is_glue(op.kind))
      continue;
    for (unsigned b = 0; b < op.width; ++b) {
      Slot self = *slot_of(op.id, b);
      for (const auto &src : sources.of({op.id, b})) {
        Slot from{0, 0};
        if (src.kind == BitSource::Kind::Result)
          from = *slot_of(src.ref, src.bit);
        else if (src.kind == BitSource::Kind::Carry)
          from = *slot_of(src.ref, dfg.width_of(src.ref) - 1);
        bool ok = op.kind == OpKind::MultCore ? from.cycle < self.cycle : from < self;
        if (!ok)
          report(K::Dependency, op.id + "[" + std::to_string(b) + "] at (" +
                                    std::to_string(self.cycle) + "," +
                                    std::to_string(self.depth) + ") does not follow " +
                                    (src.kind == BitSource::Kind::Carry ? "carry(" + src.ref + ")"
                                                                        : src.ref + "[" +
                                                                              std::to_string(src.bit) +
                                                                              "]") +
                                    " at (" + std::to_string(from.cycle) + "," +
                                    std::to_string(from.depth) + ")");
      }
    }
  }
  return out;
}

} // namespace bitfrag
