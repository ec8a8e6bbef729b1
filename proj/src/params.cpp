#include "elsim/params.hpp"

#include <cmath>
#include <stdexcept>

namespace elsim {

uint64_t ceil_guarded(double x) {
    if (x < 0) throw std::invalid_argument("ceil_guarded: negative");
    return static_cast<uint64_t>(std::ceil(x - 1e-9));
}

double log2n(uint64_t n) { return std::log2(static_cast<double>(n)); }

uint64_t NEstimatePolicy::estimate_for(uint64_t n) const {
    switch (kind) {
        case Kind::Exact: return n;
        case Kind::LowerFactor: {
            if (!(factor > 0.0 && factor <= 1.0))
                throw std::invalid_argument("n-estimate: lower factor must be in (0,1]");
            uint64_t v = ceil_guarded(factor * static_cast<double>(n));
            return v < 2 ? 2 : v;
        }
        case Kind::UpperFactor: {
            if (!(factor >= 1.0))
                throw std::invalid_argument("n-estimate: upper factor must be >= 1");
            auto v = static_cast<uint64_t>(std::floor(factor * static_cast<double>(n) + 1e-9));
            return v < n ? n : v;
        }
    }
    throw std::invalid_argument("n-estimate: bad kind");
}

std::string NEstimatePolicy::to_string() const {
    switch (kind) {
        case Kind::Exact: return "exact";
        case Kind::LowerFactor: return "lower:" + std::to_string(factor);
        case Kind::UpperFactor: return "upper:" + std::to_string(factor);
    }
    return "?";
}

NEstimatePolicy NEstimatePolicy::parse(const std::string& s) {
    if (s == "exact") return {};
    auto colon = s.find(':');
    if (colon != std::string::npos) {
        std::string head = s.substr(0, colon);
        double f = std::stod(s.substr(colon + 1));
        if (head == "lower") return {Kind::LowerFactor, f};
        if (head == "upper") return {Kind::UpperFactor, f};
    }
    throw std::invalid_argument("n-estimate policy: expected exact|lower:<c1>|upper:<c2>");
}

ProtocolParams ProtocolParams::make(double role_coefficient, double quorum_fraction,
                                    uint64_t n_estimate,
                                    std::optional<uint64_t> rank_space_override) {
    ProtocolParams p;
    p.n_estimate = n_estimate;
    p.role_coefficient = role_coefficient;
    p.quorum_fraction = quorum_fraction;
    const double l = log2n(n_estimate);
    p.quorum_size = ceil_guarded(quorum_fraction * role_coefficient * l);
    p.quorum_high = ceil_guarded((2.0 - quorum_fraction) * role_coefficient * l);
    p.role_probability = std::min(1.0, role_coefficient * l / static_cast<double>(n_estimate));
    if (rank_space_override) {
        p.rank_space_max = *rank_space_override;
    } else {
        if (n_estimate > 65535)
            throw std::invalid_argument("params: n_estimate too large for a 64-bit rank space");
        uint64_t sq = n_estimate * n_estimate;
        p.rank_space_max = sq * sq;
    }
    p.validate();
    return p;
}

ProtocolParams ProtocolParams::paper_preset(uint64_t n_estimate) {
    return make(1000.0, 0.9, n_estimate);
}

ProtocolParams ProtocolParams::desk_preset(uint64_t n_estimate) {
    return make(16.0, 0.8, n_estimate);
}

ProtocolParams ProtocolParams::preset(const std::string& name, uint64_t n_estimate) {
    if (name == "paper") return paper_preset(n_estimate);
    if (name == "desk") return desk_preset(n_estimate);
    throw std::invalid_argument("unknown preset: " + name);
}

ProtocolParams ProtocolParams::with_quorum(uint64_t q) const {
    ProtocolParams p = *this;
    p.quorum_size = q;
    p.validate();
    return p;
}

void ProtocolParams::validate() const {
    if (n_estimate < 2) throw std::invalid_argument("params: n_estimate must be >= 2");
    if (quorum_size < 1) throw std::invalid_argument("params: quorum_size must be >= 1");
    if (rank_space_max < n_estimate * n_estimate)
        throw std::invalid_argument("params: rank space smaller than n_estimate^2");
    if (!(role_probability > 0.0 && role_probability <= 1.0))
        throw std::invalid_argument("params: role probability out of (0,1]");
}

}  // namespace elsim
