#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "elsim/graph.hpp"
#include "elsim/message.hpp"
#include "elsim/params.hpp"

namespace elsim {

// Forced-role overrides: assign exactly this many candidates/referees
// (uniformly chosen) instead of flipping coins, optionally redrawing ranks
// until all n are distinct. debug_rank_tiebreak appends the node index as
// low-order bits of every rank; off by default, since the protocol is
// anonymous.
struct RoleConfig {
    std::optional<uint32_t> forced_candidates;
    std::optional<uint32_t> forced_referees;
    bool distinct_ranks = false;
    bool debug_rank_tiebreak = false;

    bool forced() const { return forced_candidates.has_value() || forced_referees.has_value(); }
};

// Notice bits attached to trace records.
enum NoticeBit : uint16_t {
    kNoticeElected = 1 << 0,
    kNoticeLearnedLeader = 1 << 1,
    kNoticeTerminated = 1 << 2,
    kNoticeCountedApproval = 1 << 3,
    kNoticeCollision = 1 << 4,
};

struct TraceRecord {
    enum class Kind : uint8_t { Wake, Deliver };
    Kind kind = Kind::Deliver;
    double t = 0;
    // Deliver fields.
    double sent = 0;
    uint32_t src = 0;
    uint32_t dst = 0;
    Message payload{};
    // Wake fields (dst doubles as the node index).
    bool external = false;
    uint64_t rank = 0;
    bool candidate = false;
    bool referee = false;
    uint16_t notices = 0;

    std::string to_line() const;
    static TraceRecord from_line(const std::string& line);
};

struct TraceHeader {
    uint32_t n = 0;
    std::vector<std::pair<uint32_t, uint32_t>> edges;
    std::string family;
    ProtocolParams params{};
    std::string adversary;
    uint64_t adversary_seed = 0;
    uint64_t run_seed = 0;
    RoleConfig roles{};

    std::string to_line() const;
    static TraceHeader from_line(const std::string& line);
};

// A replayable record of one run: line-delimited JSON, one header line then
// one line per event. Files ending in .gz are gzip-compressed.
struct Trace {
    TraceHeader header;
    std::vector<TraceRecord> records;
};

void write_trace(const Trace& trace, const std::string& path);
Trace read_trace(const std::string& path);

}  // namespace elsim
