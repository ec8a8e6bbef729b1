#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace elsim {

// The seven wire message kinds of the election protocol. Tag values are the
// wire encoding's kind byte and must not be reordered.
enum class MsgKind : uint8_t {
    Wakeup = 0,
    Request = 1,
    Approved = 2,
    Declined = 3,
    Dispute = 4,
    Loses = 5,
    Leader = 6,
};

inline const char* to_string(MsgKind k) {
    switch (k) {
        case MsgKind::Wakeup: return "wakeup";
        case MsgKind::Request: return "request";
        case MsgKind::Approved: return "approved";
        case MsgKind::Declined: return "declined";
        case MsgKind::Dispute: return "dispute";
        case MsgKind::Loses: return "loses";
        case MsgKind::Leader: return "leader";
    }
    return "?";
}

// Number of rank fields carried by each kind (0, 1 or 2).
inline int field_count(MsgKind k) {
    switch (k) {
        case MsgKind::Wakeup: return 0;
        case MsgKind::Request:
        case MsgKind::Loses:
        case MsgKind::Leader: return 1;
        case MsgKind::Approved:
        case MsgKind::Declined:
        case MsgKind::Dispute: return 2;
    }
    return 0;
}

// A protocol message. Messages are compared for identity by full payload
// (kind plus both rank fields); that identity is the deduplication key for
// flooding. Field meaning by kind:
//   Request{a=candidate rank}
//   Approved/Declined{a=candidate rank, b=referee rank}
//   Dispute{a=chosen rank, b=contender rank}
//   Loses{a=rank}, Leader{a=rank}
struct Message {
    MsgKind kind = MsgKind::Wakeup;
    uint64_t a = 0;
    uint64_t b = 0;

    static Message wakeup() { return {MsgKind::Wakeup, 0, 0}; }
    static Message request(uint64_t cand) { return {MsgKind::Request, cand, 0}; }
    static Message approved(uint64_t cand, uint64_t ref) { return {MsgKind::Approved, cand, ref}; }
    static Message declined(uint64_t cand, uint64_t ref) { return {MsgKind::Declined, cand, ref}; }
    static Message dispute(uint64_t chosen, uint64_t contender) { return {MsgKind::Dispute, chosen, contender}; }
    static Message loses(uint64_t rank) { return {MsgKind::Loses, rank, 0}; }
    static Message leader(uint64_t rank) { return {MsgKind::Leader, rank, 0}; }

    bool operator==(const Message&) const = default;
};

struct MessageHash {
    size_t operator()(const Message& m) const {
        uint64_t h = static_cast<uint64_t>(m.kind) * 0x9e3779b97f4a7c15ULL;
        h ^= m.a + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h ^= m.b + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return static_cast<size_t>(h);
    }
};

// Wire encoding: one kind byte followed by the message's rank fields as
// big-endian 64-bit words, in declaration order.
inline std::vector<uint8_t> encode(const Message& m) {
    std::vector<uint8_t> out;
    out.reserve(1 + 8 * field_count(m.kind));
    out.push_back(static_cast<uint8_t>(m.kind));
    auto put = [&out](uint64_t v) {
        for (int i = 7; i >= 0; --i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
    };
    int fc = field_count(m.kind);
    if (fc >= 1) put(m.a);
    if (fc >= 2) put(m.b);
    return out;
}

inline Message decode(const uint8_t* data, size_t len) {
    if (len < 1) throw std::invalid_argument("message: empty buffer");
    uint8_t tag = data[0];
    if (tag > static_cast<uint8_t>(MsgKind::Leader))
        throw std::invalid_argument("message: unknown kind tag");
    Message m;
    m.kind = static_cast<MsgKind>(tag);
    int fc = field_count(m.kind);
    if (len != static_cast<size_t>(1 + 8 * fc))
        throw std::invalid_argument("message: bad length for kind");
    auto get = [data](int off) {
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | data[off + i];
        return v;
    };
    if (fc >= 1) m.a = get(1);
    if (fc >= 2) m.b = get(9);
    return m;
}

inline std::string to_hex(const Message& m) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    for (uint8_t byte : encode(m)) {
        s.push_back(digits[byte >> 4]);
        s.push_back(digits[byte & 0xf]);
    }
    return s;
}

inline Message from_hex(const std::string& hex) {
    if (hex.size() % 2 != 0) throw std::invalid_argument("message: odd hex length");
    std::vector<uint8_t> bytes;
    bytes.reserve(hex.size() / 2);
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw std::invalid_argument("message: bad hex digit");
    };
    for (size_t i = 0; i < hex.size(); i += 2)
        bytes.push_back(static_cast<uint8_t>((nib(hex[i]) << 4) | nib(hex[i + 1])));
    return decode(bytes.data(), bytes.size());
}

}  // namespace elsim
