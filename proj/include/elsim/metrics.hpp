#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "elsim/params.hpp"
#include "elsim/report.hpp"
#include "elsim/trace.hpp"

namespace elsim {

// Completion-time envelope: five sequential broadcast waves, each pipelining
// the run's unique payloads across the diameter. Checked per run and
// reported, never tuned; a violation fails loudly.
inline constexpr double kTimeEnvelopeFactor = 5.0;

inline double polylog2(uint32_t n) {
    double l = log2n(n);
    return l * l;
}

bool time_envelope_ok(const RunReport& r);

struct SafetyVerdict {
    bool pass = false;
    std::vector<uint64_t> elected;   // every rank that reached Elected
    uint64_t guaranteed_overlap = 0; // 2*quorum - N_R when positive
    uint64_t min_observed_overlap = 0;
    bool intersection_ok = true;
    bool collision = false;
    std::string detail;
};

// At most one node may ever enter Elected. In collision-free runs where
// 2*quorum > N_R additionally cross-checks quorum intersection over the
// recorded approval sets.
SafetyVerdict verify_safety(const RunReport& report);
SafetyVerdict verify_safety(const Trace& trace);

struct LivenessVerdict {
    enum class Outcome { Pass, ClassifiedFailure, Fail, Inconclusive };
    Outcome outcome = Outcome::Fail;
    std::string classification;  // no-candidate | referee-shortfall | other
    std::string detail;

    bool pass() const { return outcome == Outcome::Pass; }
};

// Exactly one leader, with every node terminated knowing it. Election
// failures (no candidate, too few referees) are classified rather than
// failed; success rates are asserted statistically at sweep level.
LivenessVerdict verify_liveness(const RunReport& report);

struct ConcentrationVerdict {
    bool pass = false;
    bool inconclusive = false;
    double mu = 0;
    double predicted = 0;
    double threshold = 0;
    double empirical = 0;
    size_t trials = 0;
    std::string detail;
};

// Lower bound on P(count within 10% of mu) from the standard concentration
// inequality with delta = 1/10: max(0, 1 - 2 exp(-mu/300)).
double concentration_lower_bound(double mu);

// Empirical fraction of runs with both role counts in [0.9 mu, 1.1 mu] must
// reach the predicted lower bound minus three binomial standard errors.
ConcentrationVerdict check_role_concentration(std::span<const RunReport> reports,
                                              const ProtocolParams& params);

struct BoundPoint {
    std::string family;
    uint32_t n = 0;
    double kappa = 0;    // max transmissions / (m * log2^2 n)
    double upsilon = 0;  // max unique payloads / log2^2 n
    double tau = 0;      // max completion / (D + log2^2 n)
};

struct MessageBoundVerdict {
    bool pass = false;
    bool inconclusive = false;
    bool per_payload_ok = true;     // every payload transmitted <= 2m times
    bool referee_budget_ok = true;  // every referee generated <= 2*N_C adjudications
    std::vector<BoundPoint> points;
    std::string detail;
};

// Normalized transmission and unique-payload ceilings must not grow by more
// than 20% from one n to the next.
MessageBoundVerdict check_message_bound(std::span<const RunReport> reports);

struct TimeBoundVerdict {
    bool pass = false;
    bool inconclusive = false;
    bool envelope_ok = true;
    std::vector<BoundPoint> points;
    std::string detail;
};

// Per run: completion within the envelope. Per family: normalized completion
// must not grow by more than 20% from one n to the next.
TimeBoundVerdict check_time_bound(std::span<const RunReport> reports);

struct TraceCheck {
    bool fifo_ok = true;
    bool delays_ok = true;
    bool causal_ok = true;
    std::string detail;

    bool pass() const { return fifo_ok && delays_ok && causal_ok; }
};

// Replays the network-model invariants over a recorded trace: per-direction
// FIFO with one message in flight, all delays in (0,1], non-decreasing event
// times.
TraceCheck validate_trace(const Trace& trace);

// Quorum accounting: an elected rank counted exactly quorum-many approvals,
// each from a distinct referee (asserted in collision-free runs only).
struct QuorumCountVerdict {
    bool pass = true;
    std::string detail;
};
QuorumCountVerdict verify_quorum_counts(const RunReport& report);

}  // namespace elsim
