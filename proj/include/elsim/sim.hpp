#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "elsim/adversary.hpp"
#include "elsim/graph.hpp"
#include "elsim/node.hpp"
#include "elsim/params.hpp"
#include "elsim/report.hpp"
#include "elsim/trace.hpp"

namespace elsim {

struct SimOptions {
    bool record_trace = false;
    uint64_t event_budget = 1'000'000'000ULL;
};

struct SimResult {
    RunReport report;
    Trace trace;  // records populated only when record_trace was set
};

// One complete run: processes events until quiescence (or the event budget),
// with the adversary deciding wake-ups, per-transmission delays and send
// order. Strictly single-threaded and deterministic: identical inputs yield
// identical traces.
SimResult run_simulation(const Graph& g, const ProtocolParams& params, const Adversary& adversary,
                         uint64_t run_seed, const RoleConfig& roles = {},
                         const SimOptions& options = {});

struct FloodStats {
    uint64_t transmissions = 0;
    uint64_t max_payload_transmissions = 0;
};

// Pipelined-flooding micro-benchmark: the election protocol is disabled, k
// distinct inert payloads are injected at `source` at time 0, and the
// flood/deduplication rules stay active. Returns the time at which every
// node has heard all k payloads.
double flood_only(const Graph& g, uint32_t source, uint32_t k,
                  const std::function<double(uint32_t dir, double now)>& delay_policy,
                  FloodStats* stats = nullptr);

// Unit-delay convenience wrapper.
double flood_only_unit(const Graph& g, uint32_t source, uint32_t k, FloodStats* stats = nullptr);

struct ReplayResult {
    bool match = false;
    size_t first_mismatch = 0;  // record index (header counts as index -1 semantics: see message)
    std::string detail;
    SimResult regenerated;
};

// Re-executes the run described by a trace's header and compares the
// regenerated records one by one with the stored ones.
ReplayResult replay_trace(const Trace& stored);

}  // namespace elsim
