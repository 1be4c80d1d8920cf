//===- pipeline.hpp - End-to-end optimization flow --------------*- C++ -*-===//
//
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#pragma once

#include "bitfrag/cost.hpp"
#include "bitfrag/kernel.hpp"
#include "bitfrag/simulator.hpp"
#include "bitfrag/timing.hpp"

namespace bitfrag {

struct RunConfig {
  unsigned latency = 1;
  std::optional<unsigned> n_bits; // overrides the estimate when set
  bool bucket_fill = false;
  bool check_equiv = false;
  EquivOptions equiv;
};

struct PipelineResult {
  DataFlowGraph original;
  LoweringResult kernel;
  CriticalPath critical;
  unsigned latency = 0;
  unsigned n_bits = 0;
  BitMobility mobility;
  std::vector<Fragment> fragments;
  DataFlowGraph transformed;
  Schedule schedule;
  CostReport costs;
  CostReport original_costs;
  std::optional<EquivResult> equiv; // schedule replay against the original
  std::optional<EquivResult> transformed_equiv;

  bool equivalent() const {
    return (!equiv || equiv->ok()) && (!transformed_equiv || transformed_equiv->ok());
  }
};

/// Kernel extraction, timing, fragmentation, scheduling and costing of one
/// design. Throws Error with Infeasible or Schedule codes when the latency
/// cannot be met.
inline PipelineResult run_pipeline(const DataFlowGraph &dfg, const RunConfig &config) {
  if (config.latency < 1)
    throw Error(Error::Code::BadLatency, "latency must be at least 1");
  if (config.n_bits && *config.n_bits < 1)
    throw Error(Error::Code::BadLatency, "n_bits must be at least 1");

  PipelineResult r;
  r.original = dfg;
  r.latency = config.latency;
  r.kernel = extract_kernel(dfg);
  const DataFlowGraph &kernel = r.kernel.dfg;
  r.critical = critical_path(kernel);
  r.n_bits = config.n_bits ? *config.n_bits
                           : std::max(1u, estimate_cycle(r.critical.time, config.latency));
  r.mobility = mobility(kernel, r.n_bits, config.latency);
  r.fragments = config.bucket_fill ? bucket_fill_fragments(kernel, r.mobility)
                                   : compute_fragments(kernel, r.mobility);
  r.transformed = build_fragmented(kernel, r.fragments);
  r.schedule = schedule(kernel, r.fragments, config.latency, r.n_bits);
  auto violations = verify_schedule(r.schedule, kernel);
  if (!violations.empty())
    throw Error(Error::Code::Schedule, "schedule violates " +
                                           std::string(violation_name(violations[0].kind)) +
                                           ": " + violations[0].message);
  r.costs = costs(r.schedule, kernel);
  r.original_costs = original_costs(kernel);
  if (config.check_equiv) {
    r.equiv = check_equiv(dfg, r.schedule, kernel, config.equiv);
    r.transformed_equiv = check_equiv(dfg, r.transformed, config.equiv);
  }
  return r;
}

} // namespace bitfrag
