#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace elsim {

// Per-run outcome and accounting. Everything the metrics checkers need
// without retaining the trace.
struct RunReport {
    // Context echo.
    uint32_t n = 0;
    uint32_t m = 0;
    uint32_t diameter = 0;
    std::string family;
    std::string adversary;
    uint64_t seed = 0;
    uint32_t trial = 0;
    uint64_t n_estimate = 0;
    uint64_t quorum_size = 0;
    double role_probability = 0;

    // Outcome.
    std::vector<uint64_t> leaders;  // ranks that reached Elected, in order
    int64_t leader_node = -1;
    uint64_t agreed_leader = 0;  // 0 = none
    bool all_terminated = false;
    bool all_awake = false;
    uint32_t candidate_count = 0;
    uint32_t referee_count = 0;

    // Accounting.
    uint64_t total_transmissions = 0;
    uint32_t unique_messages = 0;
    uint64_t max_payload_transmissions = 0;
    uint64_t max_referee_adjudications = 0;  // per-referee approved/declined/dispute payloads
    double completion_time = 0;              // last send minus first wake
    double last_delivery_time = 0;
    double elected_time = -1;
    double wake_span = 0;  // last wake minus first wake

    // Flags.
    bool rank_collision = false;
    bool non_quiescent = false;
    bool quiescence_clean = true;  // all outboxes drained, channels idle
    bool chosen_monotone = true;
    std::string failure;  // "", "no-candidate", "referee-shortfall", "other"

    // Referee ranks whose approvals each candidate counted, in counting order.
    std::vector<std::pair<uint64_t, std::vector<uint64_t>>> counted_approvals;

    std::string to_json() const;
    static RunReport from_json(const std::string& text);
};

}  // namespace elsim
