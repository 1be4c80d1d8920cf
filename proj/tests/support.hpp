// Shared fixtures and seeded random design generators for the test suites.
#pragma once

#include "bitfrag/bitfrag.hpp"

#include <fstream>
#include <random>
#include <sstream>

namespace bitfrag::testing {

inline DataFlowGraph parse_ok(std::string_view text) {
  auto r = parse(text);
  if (!r.ok()) {
    std::string msg = "parse failed:";
    for (const auto &d : r.diagnostics)
      msg += "\n  " + format_diagnostic(d);
    throw std::runtime_error(msg);
  }
  return *r.graph;
}

inline std::string read_text(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline DataFlowGraph load_design(const std::string &name) {
  return parse_ok(read_text(std::string(BITFRAG_DESIGNS_DIR) + "/" + name + ".dfg"));
}

inline const Fragment *find_fragment(const std::vector<Fragment> &fs, const std::string &parent,
                                     unsigned lo) {
  for (const auto &f : fs)
    if (f.parent == parent && f.lo == lo)
      return &f;
  return nullptr;
}

inline std::vector<const Fragment *> fragments_of(const std::vector<Fragment> &fs,
                                                  const std::string &parent) {
  std::vector<const Fragment *> out;
  for (const auto &f : fs)
    if (f.parent == parent)
      out.push_back(&f);
  std::sort(out.begin(), out.end(), [](auto *a, auto *b) { return a->lo < b->lo; });
  return out;
}

using Rng = std::mt19937_64;

inline unsigned uniform(Rng &rng, unsigned lo, unsigned hi) {
  return std::uniform_int_distribution<unsigned>(lo, hi)(rng);
}

struct Source {
  std::string name;
  unsigned width;
  bool is_input;
};

/// Operand reading `src`. Right truncation (lo > 0) is only generated when
/// the source is wider than the consumer.
inline Operand random_slice(Rng &rng, const Source &src, unsigned consumer_width) {
  unsigned lo = 0;
  if (src.width > consumer_width && uniform(rng, 0, 2) != 0)
    lo = uniform(rng, 0, src.width - 1);
  unsigned hi = uniform(rng, lo, src.width - 1);
  std::optional<Slice> slice;
  if (lo != 0 || hi != src.width - 1)
    slice = Slice{hi, lo};
  return src.is_input ? Operand::input(src.name, slice) : Operand::result(src.name, slice);
}

/// All-ADD DAG with up to `max_ops` ops of widths 1..32.
inline DataFlowGraph random_add_dag(Rng &rng, unsigned max_ops = 12) {
  DataFlowGraph dfg;
  dfg.name = "rand";
  std::vector<Source> pool;
  unsigned n_inputs = uniform(rng, 1, 4);
  for (unsigned i = 0; i < n_inputs; ++i) {
    std::string name = "i" + std::to_string(i);
    unsigned w = uniform(rng, 1, 32);
    dfg.inputs.push_back({name, w, Signedness::Unsigned});
    pool.push_back({name, w, true});
  }
  unsigned n_ops = uniform(rng, 1, max_ops);
  for (unsigned k = 0; k < n_ops; ++k) {
    Operation op;
    op.id = "n" + std::to_string(k);
    op.kind = OpKind::Add;
    op.width = uniform(rng, 1, 32);
    for (int j = 0; j < 2; ++j) {
      // Favor recent ops so chains get deep.
      std::size_t pick = uniform(rng, 0, 2) == 0 ? uniform(rng, 0, pool.size() - 1)
                                                 : pool.size() - 1 - uniform(rng, 0, std::min<std::size_t>(2, pool.size() - 1));
      op.operands.push_back(random_slice(rng, pool[pick], op.width));
    }
    dfg.operations.push_back(op);
    pool.push_back({op.id, op.width, false});
  }
  for (const auto &op : dfg.operations)
    if (uniform(rng, 0, 2) == 0 || &op == &dfg.operations.back())
      dfg.outputs.push_back(op.id);
  return dfg;
}

/// Mixed-kind design over narrow operands (width <= max_width), exercising
/// every lowering rule.
inline DataFlowGraph random_mixed(Rng &rng, unsigned max_width = 4, unsigned n_ops = 4,
                                  unsigned max_input_bits = 16) {
  DataFlowGraph dfg;
  dfg.name = "mixed";
  std::vector<Source> pool;
  unsigned budget = max_input_bits;
  unsigned n_inputs = uniform(rng, 2, 3);
  for (unsigned i = 0; i < n_inputs && budget >= 2; ++i) {
    unsigned w = std::min(budget, uniform(rng, 2, max_width));
    budget -= w;
    std::string name = "x" + std::to_string(i);
    dfg.inputs.push_back({name, w, Signedness::Unsigned});
    pool.push_back({name, w, true});
  }
  auto pick = [&] { return pool[uniform(rng, 0, pool.size() - 1)]; };
  auto whole = [](const Source &s) {
    return s.is_input ? Operand::input(s.name) : Operand::result(s.name);
  };
  static const OpKind kinds[] = {OpKind::Add, OpKind::Sub,  OpKind::Mult,  OpKind::Lt,
                                 OpKind::Max, OpKind::Min,  OpKind::Not,   OpKind::Select};
  for (unsigned k = 0; k < n_ops; ++k) {
    Operation op;
    op.id = "o" + std::to_string(k);
    op.kind = kinds[uniform(rng, 0, 7)];
    op.signedness = uniform(rng, 0, 1) ? Signedness::Signed : Signedness::Unsigned;
    op.width = uniform(rng, 1, max_width + 2);
    switch (op.kind) {
    case OpKind::Not:
      op.operands = {whole(pick())};
      break;
    case OpKind::Select: {
      Source c = pick();
      unsigned bit = uniform(rng, 0, c.width - 1);
      Operand cond = c.is_input ? Operand::input(c.name, Slice{bit, bit})
                                : Operand::result(c.name, Slice{bit, bit});
      op.operands = {cond, whole(pick()), whole(pick())};
      break;
    }
    case OpKind::Lt:
      op.width = 1;
      op.operands = {whole(pick()), whole(pick())};
      break;
    case OpKind::Mult: {
      Source a = pick(), b = pick();
      if (op.signedness == Signedness::Signed && (a.width < 2 || b.width < 2))
        op.signedness = Signedness::Unsigned;
      op.operands = {whole(a), whole(b)};
      break;
    }
    default:
      op.operands = {whole(pick()), whole(pick())};
      break;
    }
    if (op.kind == OpKind::Add && uniform(rng, 0, 3) == 0)
      op.carry_in = CarryIn::one();
    dfg.operations.push_back(op);
    pool.push_back({op.id, op.width, false});
  }
  for (const auto &op : dfg.operations)
    if (uniform(rng, 0, 1) == 0 || &op == &dfg.operations.back())
      dfg.outputs.push_back(op.id);
  return dfg;
}

/// All simple paths in the op-level dependency graph of an all-ADD design.
inline std::vector<std::vector<std::string>> all_paths(const DataFlowGraph &dfg) {
  std::map<std::string, std::vector<std::string>> succ;
  for (const auto &op : dfg.operations) {
    std::set<std::string> preds;
    for (const auto &operand : op.operands)
      if (operand.kind == Operand::Kind::Result)
        preds.insert(operand.ref);
    for (const auto &p : preds)
      succ[p].push_back(op.id);
  }
  std::vector<std::vector<std::string>> paths;
  std::vector<std::string> stack;
  std::function<void(const std::string &)> walk = [&](const std::string &id) {
    stack.push_back(id);
    paths.push_back(stack);
    for (const auto &next : succ[id])
      walk(next);
    stack.pop_back();
  };
  for (const auto &op : dfg.operations)
    walk(op.id);
  return paths;
}

inline unsigned max_arrival(const DataFlowGraph &dfg) {
  unsigned best = 0;
  for (const auto &[id, row] : bit_arrivals(dfg))
    for (auto a : row)
      best = std::max(best, a);
  return best;
}

/// Runs the pipeline at `latency`, widening n_bits (then latency) until the
/// design fits.
inline PipelineResult run_fitting(const DataFlowGraph &dfg, unsigned latency,
                                  bool check = false, std::uint64_t seed = 1) {
  for (;; ++latency) {
    RunConfig config;
    config.latency = latency;
    config.check_equiv = check;
    config.equiv.seed = seed;
    auto kernel = extract_kernel(dfg).dfg;
    unsigned time = critical_path(kernel).time;
    unsigned start = std::max(1u, estimate_cycle(time, latency));
    for (unsigned n = start; n <= std::max(start, time) + 1; ++n) {
      config.n_bits = n;
      try {
        return run_pipeline(dfg, config);
      } catch (const Error &e) {
        if (e.code() != Error::Code::Infeasible && e.code() != Error::Code::Schedule)
          throw;
      }
    }
  }
}

} // namespace bitfrag::testing
