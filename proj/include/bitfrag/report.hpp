//===- report.hpp - Text and JSON renderings --------------------*- C++ -*-===//
//
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#pragma once

#include "bitfrag/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <iomanip>
#include <sstream>

namespace bitfrag {

using Json = nlohmann::ordered_json;

inline Json fragments_json(const std::vector<Fragment> &fragments) {
  Json rows = Json::array();
  for (const auto &f : fragments)
    rows.push_back({{"parent", f.parent},
                    {"k", f.index},
                    {"lo", f.lo},
                    {"hi", f.hi},
                    {"asap", f.asap_cycle},
                    {"alap", f.alap_cycle}});
  return rows;
}

inline Json schedule_json(const Schedule &s) {
  Json rows = Json::array();
  for (const auto &a : s.assignments)
    rows.push_back({{"fragment", a.fragment.label()},
                    {"parent", a.fragment.parent},
                    {"k", a.fragment.index},
                    {"lo", a.fragment.lo},
                    {"hi", a.fragment.hi},
                    {"cycle", a.cycle}});
  return rows;
}

inline Json ports_json(const std::vector<PortMux> &ports) {
  Json rows = Json::array();
  for (const auto &p : ports)
    rows.push_back({{"lane", p.lane}, {"port", p.port}, {"fan_in", p.fan_in}, {"width", p.width}});
  return rows;
}

inline Json costs_json(const CostReport &c) {
  Json lanes = Json::array();
  for (const auto &l : c.lanes)
    lanes.push_back({{"id", l.id}, {"kind", std::string(kind_name(l.kind))}, {"width", l.width}});
  Json boundaries = Json::array();
  for (std::size_t i = 0; i < c.stored.size(); ++i) {
    Json bits = Json::array();
    for (const auto &item : c.stored[i])
      bits.push_back(item.label());
    boundaries.push_back({{"boundary", i + 1}, {"count", c.register_bits[i]}, {"bits", bits}});
  }
  Json registers = Json::array();
  for (const auto &r : c.registers)
    registers.push_back({{"id", r.id},
                         {"width", r.width},
                         {"fan_in", r.fan_in()},
                         {"lane_carry", r.lane_carry},
                         {"signals", r.signals}});
  Json register_muxes = Json::array();
  for (const auto *r : c.register_muxes(false))
    register_muxes.push_back({{"register", r->id}, {"fan_in", r->fan_in()}, {"width", r->width}});
  Json carry_register_muxes = Json::array();
  for (const auto *r : c.register_muxes(true))
    carry_register_muxes.push_back({{"register", r->id}, {"fan_in", r->fan_in()}, {"width", r->width}});
  return {{"lanes", lanes},
          {"registers",
           {{"per_boundary", boundaries}, {"max", c.register_max}, {"bound", registers}}},
          {"muxes",
           {{"fu_ports", ports_json(c.fu_port_muxes())},
            {"registers", register_muxes},
            {"carry_registers", carry_register_muxes},
            {"carry_in", ports_json(c.carry_in_muxes())}}},
          {"bits_per_cycle", c.bits_per_cycle},
          {"ops_per_cycle", c.ops_per_cycle},
          {"control_states", c.control_states}};
}

inline Json equiv_json(const std::optional<EquivResult> &e, const std::optional<EquivResult> &t) {
  if (!e)
    return {{"strategy", nullptr}, {"result", "skipped"}};
  bool pass = e->ok() && (!t || t->ok());
  Json j = {{"strategy", std::string(strategy_name(e->strategy))},
            {"vectors", e->vectors},
            {"result", pass ? "pass" : "fail"}};
  const auto &bad = !e->ok() ? e : t;
  if (!pass)
    j["counterexample"] = format_counterexample(*bad->counterexample);
  return j;
}

/// Rows `{op, bit, arrival}` for every result bit.
inline Json arrivals_json(const DataFlowGraph &dfg) {
  Json rows = Json::array();
  for (const auto &[id, row] : bit_arrivals(dfg))
    for (std::size_t b = 0; b < row.size(); ++b)
      rows.push_back({{"op", id}, {"bit", b}, {"arrival", row[b]}});
  return rows;
}

/// The run report: `{design, lambda, n_bits, critical_path, arrivals,
/// fragments, schedule, costs, equiv}`.
inline Json report_json(const PipelineResult &r) {
  Json costs = costs_json(r.costs);
  costs["original"] = costs_json(r.original_costs);
  return {{"design", r.original.name},
          {"lambda", r.latency},
          {"n_bits", r.n_bits},
          {"critical_path", {{"ops", r.critical.ops}, {"time", r.critical.time}}},
          {"arrivals", arrivals_json(r.kernel.dfg)},
          {"fragments", fragments_json(r.fragments)},
          {"schedule", schedule_json(r.schedule)},
          {"costs", costs},
          {"equiv", equiv_json(r.equiv, r.transformed_equiv)}};
}

inline Json trace_json(const ScheduleRun &run) {
  Json cycles = Json::array();
  for (const auto &t : run.trace) {
    Json fragments = Json::object();
    for (const auto &[label, v] : t.fragments)
      fragments[label] = v.str();
    Json latched = Json::object();
    for (const auto &[label, bit] : t.latched)
      latched[label] = bit ? 1 : 0;
    cycles.push_back({{"cycle", t.cycle}, {"fragments", fragments}, {"latched", latched}});
  }
  Json outputs = Json::object();
  for (const auto &[name, v] : run.outputs)
    outputs[name] = v.str();
  return {{"cycles", cycles}, {"outputs", outputs}};
}

/// One row per result bit: `op bit arrival`.
inline std::string arrivals_text(const DataFlowGraph &dfg) {
  auto table = bit_arrivals(dfg);
  std::ostringstream os;
  for (const auto &id : topo_order(dfg)) {
    const auto &row = table.at(id);
    for (std::size_t b = 0; b < row.size(); ++b)
      os << id << ' ' << b << ' ' << row[b] << '\n';
  }
  return os.str();
}

/// Cycle-per-row listing of the fragments executed in each cycle.
inline std::string schedule_text(const Schedule &s, const std::string &design) {
  std::ostringstream os;
  os << "design " << design << "  latency " << s.latency << "  n_bits " << s.n_bits << '\n';
  auto bits = s.bits_per_cycle();
  for (int c = 1; c <= static_cast<int>(s.latency); ++c) {
    std::vector<std::string> labels;
    for (const auto &a : s.assignments)
      if (a.cycle == c)
        labels.push_back(a.fragment.label() + (a.fragment.prescheduled() ? "" : "*"));
    os << "cycle " << c << " (" << bits[c - 1] << " bits):";
    for (const auto &l : labels)
      os << ' ' << l;
    os << '\n';
  }
  os << "(* = placed within a mobility window wider than one cycle)\n";
  return os.str();
}

namespace detail {

/// "N mux K:1 W bits" groups, widest fan-in first.
inline std::string mux_summary(const std::vector<std::pair<unsigned, unsigned>> &muxes) {
  std::map<std::pair<unsigned, unsigned>, unsigned, std::greater<>> groups;
  for (const auto &m : muxes)
    ++groups[m];
  if (groups.empty())
    return "none";
  std::string out;
  for (const auto &[key, count] : groups) {
    if (!out.empty())
      out += ", ";
    out += std::to_string(count) + " mux " + std::to_string(key.first) + ":1 " +
           std::to_string(key.second) + (key.second == 1 ? " bit" : " bits");
  }
  return out;
}

inline std::vector<std::string> cost_column(const CostReport &c) {
  std::map<unsigned, unsigned, std::greater<>> lanes;
  for (const auto &l : c.lanes)
    if (l.kind == OpKind::Add)
      ++lanes[l.width];
  std::string fu;
  for (const auto &[w, n] : lanes)
    fu += (fu.empty() ? "" : ", ") + std::to_string(n) + " x " + std::to_string(w) + "-bit adder";
  unsigned cores = 0;
  for (const auto &l : c.lanes)
    cores += l.kind == OpKind::MultCore;
  if (cores)
    fu += (fu.empty() ? "" : ", ") + std::to_string(cores) + " multiplier core(s)";

  std::map<unsigned, unsigned, std::greater<>> regs;
  for (const auto &r : c.registers)
    ++regs[r.width];
  std::string reg;
  for (const auto &[w, n] : regs)
    reg += (reg.empty() ? "" : ", ") + std::to_string(n) + " x " + std::to_string(w) + " bit";

  std::vector<std::pair<unsigned, unsigned>> ports, rmux;
  for (const auto &p : c.fu_port_muxes())
    ports.emplace_back(p.fan_in, p.width);
  for (const auto *r : c.register_muxes(false))
    rmux.emplace_back(r->fan_in(), r->width);
  return {fu.empty() ? "none" : fu, reg.empty() ? "none" : reg, mux_summary(ports),
          mux_summary(rmux), std::to_string(c.register_max), std::to_string(c.control_states)};
}

} // namespace detail

/// Original-versus-fragmented comparison in the layout of a cost table.
inline std::string cost_table(const CostReport &original, const CostReport &fragmented) {
  static const char *rows[] = {"FU",          "Registers", "FU port muxes", "Register muxes",
                               "Stored bits", "Control states"};
  auto a = detail::cost_column(original);
  auto b = detail::cost_column(fragmented);
  std::size_t w0 = 16, w1 = 12;
  for (const auto &s : a)
    w1 = std::max(w1, s.size());
  std::ostringstream os;
  os << std::left << std::setw(w0) << "" << "  " << std::setw(w1) << "original"
     << "  fragmented\n";
  for (std::size_t i = 0; i < a.size(); ++i)
    os << std::setw(w0) << rows[i] << "  " << std::setw(w1) << a[i] << "  " << b[i] << '\n';
  return os.str();
}

} // namespace bitfrag
