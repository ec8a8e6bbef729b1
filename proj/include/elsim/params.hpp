#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace elsim {

// How the n known to nodes relates to the true n: exact, a lower bound
// within factor c1 (0 < c1 <= 1), or an upper bound within factor c2 (>= 1).
struct NEstimatePolicy {
    enum class Kind { Exact, LowerFactor, UpperFactor };
    Kind kind = Kind::Exact;
    double factor = 1.0;

    uint64_t estimate_for(uint64_t n) const;
    std::string to_string() const;
    static NEstimatePolicy parse(const std::string& s);
};

// Everything a node reads at wake-up, plus the analysis-only quorum_high.
//
// quorum_size  = ceil(quorum_fraction * role_coefficient * log2(n_estimate))
// quorum_high  = ceil((2 - quorum_fraction) * role_coefficient * log2(n_estimate))
// role_probability = min(1, role_coefficient * log2(n_estimate) / n_estimate)
//
// The "paper" preset (role_coefficient 1000, quorum_fraction 0.9) matches the
// protocol's published constants but only makes sense for astronomically
// large n: for any runnable n the role probability clamps to 1 and the quorum
// exceeds n. The "desk" preset (16, 0.8) keeps the same structure at sizes a
// workstation can sweep and is validated for n in [128, 4096].
struct ProtocolParams {
    uint64_t n_estimate = 0;
    double role_coefficient = 0.0;
    double quorum_fraction = 0.0;
    uint64_t quorum_size = 0;
    uint64_t quorum_high = 0;       // analysis only; nodes never read it
    uint64_t rank_space_max = 0;    // ranks drawn uniformly from [1, rank_space_max]
    double role_probability = 0.0;

    static ProtocolParams make(double role_coefficient, double quorum_fraction,
                               uint64_t n_estimate,
                               std::optional<uint64_t> rank_space_override = std::nullopt);
    static ProtocolParams paper_preset(uint64_t n_estimate);
    static ProtocolParams desk_preset(uint64_t n_estimate);
    static ProtocolParams preset(const std::string& name, uint64_t n_estimate);

    // Explicit quorum override for forced-role experiments.
    ProtocolParams with_quorum(uint64_t q) const;

    void validate() const;  // throws std::invalid_argument
};

// ceil(x) guarded against values like 9000.0000000000002 that arise from
// binary rounding of decimal coefficients.
uint64_t ceil_guarded(double x);

double log2n(uint64_t n);

}  // namespace elsim
