#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "elsim/graph.hpp"
#include "elsim/metrics.hpp"
#include "elsim/params.hpp"
#include "elsim/report.hpp"
#include "elsim/trace.hpp"

namespace elsim {

enum class TraceRetention { None, FailuresOnly, All };

const char* to_string(TraceRetention r);
TraceRetention retention_from_string(const std::string& s);

// A full experiment: one graph family swept over n values, crossed with a
// set of adversaries, `trials` runs per cell. Serializable to and from a
// canonical JSON text; per-trial seeds derive from the master seed by a
// fixed splitting rule, so results never depend on scheduling.
struct ExperimentConfig {
    GraphKind family = GraphKind::Ring;
    std::vector<uint32_t> n_values;
    double edge_probability = 0.1;  // random family
    uint32_t edge_count = 0;        // random family; 0 = use probability
    std::string edge_list_path;     // edge-list family

    std::string preset = "desk";  // "paper" | "desk" | "custom"
    std::optional<double> role_coefficient;
    std::optional<double> quorum_fraction;
    std::optional<uint64_t> quorum_override;
    std::optional<uint64_t> rank_space_override;
    NEstimatePolicy n_policy{};

    std::optional<uint32_t> forced_candidates;
    std::optional<uint32_t> forced_referees;
    bool distinct_ranks = false;
    bool debug_rank_tiebreak = false;

    std::vector<std::string> adversaries = {"uniform"};
    uint32_t trials = 1;
    uint64_t master_seed = 1;
    uint64_t event_budget = 1'000'000'000ULL;

    std::string out_dir;  // empty: no artifacts written
    TraceRetention retention = TraceRetention::None;

    void validate() const;             // throws std::invalid_argument
    ProtocolParams params_for(uint32_t n) const;
    RoleConfig roles() const;

    std::string to_json() const;  // canonical text form
    static ExperimentConfig from_json(const std::string& text);
};

// Fixed seed-splitting rule: the run seed of global trial `index`.
uint64_t trial_seed(uint64_t master_seed, uint64_t index);

struct CellSummary {
    std::string family;
    uint32_t n = 0;
    std::string adversary;
    uint32_t trials = 0;
    uint32_t one_leader = 0;
    uint32_t multi_leader = 0;
    uint32_t collision_runs = 0;
    uint32_t no_candidate = 0;
    uint32_t referee_shortfall = 0;
    uint32_t other_failures = 0;
    uint32_t non_quiescent = 0;
    double one_leader_rate = 0;
    double kappa_mean = 0, kappa_max = 0;
    double tau_mean = 0, tau_max = 0;
    double upsilon_max = 0;
    double nc_mean = 0, nc_sd = 0;
    double nr_mean = 0, nr_sd = 0;
    uint64_t max_payload_transmissions = 0;
};

struct ExperimentResult {
    std::vector<RunReport> reports;  // ordered by global trial index
    std::vector<CellSummary> cells;

    // Hard verdicts: a nonzero exit if any is false.
    bool safety_ok = true;
    bool fifo_ok = true;
    bool quorum_ok = true;
    bool envelope_ok = true;

    std::vector<std::string> verdict_lines;

    bool hard_pass() const { return safety_ok && fifo_ok && quorum_ok && envelope_ok; }
    std::string summary_csv() const;
    std::string verdict_table() const;
};

// Executes every trial of every cell. With parallel=true, trials run under
// OpenMP; results are merged by trial index, so serial and parallel
// executions produce byte-identical artifacts.
ExperimentResult run_experiment(const ExperimentConfig& config, bool parallel = true);

// reports.jsonl, summary.csv, verdicts.txt and retained traces under out_dir.
void write_artifacts(const ExperimentConfig& config, const ExperimentResult& result);

struct ReplayOutcome {
    bool ok = false;
    std::string message;
};

// Re-executes the run recorded in a trace file, requires bit-identical
// regeneration, then re-runs the per-trace checkers.
ReplayOutcome replay_file(const std::string& path);

}  // namespace elsim
