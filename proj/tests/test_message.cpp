#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "elsim/message.hpp"
#include "elsim/params.hpp"
#include "elsim/rng.hpp"

using namespace elsim;

TEST_CASE("wire encoding: golden bytes") {
    CHECK_EQ(to_hex(Message::wakeup()), "00");
    CHECK_EQ(to_hex(Message::request(42)), "01000000000000002a");
    CHECK_EQ(to_hex(Message::approved(1, 2)), "0200000000000000010000000000000002");
    CHECK_EQ(to_hex(Message::leader(0x1122334455667788ull)), "061122334455667788");
}

TEST_CASE("wire encoding: round trip over random messages") {
    Rng rng(99);
    for (int i = 0; i < 2000; ++i) {
        Message m;
        m.kind = static_cast<MsgKind>(rng.below(7));
        int fc = field_count(m.kind);
        if (fc >= 1) m.a = rng.next();
        if (fc >= 2) m.b = rng.next();
        auto bytes = encode(m);
        CHECK_EQ(bytes.size(), 1 + 8 * static_cast<size_t>(fc));
        CHECK_EQ(decode(bytes.data(), bytes.size()), m);
        CHECK_EQ(from_hex(to_hex(m)), m);
    }
}

TEST_CASE("wire encoding: malformed input is rejected") {
    CHECK_THROWS_AS(from_hex(""), std::invalid_argument);
    CHECK_THROWS_AS(from_hex("07"), std::invalid_argument);    // unknown tag
    CHECK_THROWS_AS(from_hex("01ff"), std::invalid_argument);  // short field
    CHECK_THROWS_AS(from_hex("0"), std::invalid_argument);
}

TEST_CASE("identity is the full payload") {
    CHECK_EQ(Message::approved(1, 2), Message::approved(1, 2));
    CHECK_NE(Message::approved(1, 2), Message::approved(1, 3));
    CHECK_NE(Message::approved(1, 2), Message::declined(1, 2));
    CHECK_NE(Message::dispute(1, 2), Message::dispute(2, 1));
    MessageHash h;
    CHECK_EQ(h(Message::loses(5)), h(Message::loses(5)));
}

TEST_CASE("paper preset constants") {
    auto p = ProtocolParams::paper_preset(1024);
    CHECK_EQ(p.quorum_size, 9000);   // ceil(0.9 * 1000 * 10)
    CHECK_EQ(p.quorum_high, 11000);  // ceil(1.1 * 1000 * 10)
    CHECK_EQ(p.role_probability, 1.0);  // 1000*10/1024 clamps
    CHECK_EQ(p.rank_space_max, 1024ull * 1024 * 1024 * 1024);
}

TEST_CASE("desk preset constants") {
    auto p = ProtocolParams::desk_preset(128);
    CHECK_EQ(p.quorum_size, 90);  // ceil(0.8 * 16 * 7) = ceil(89.6)
    CHECK_EQ(p.role_probability, doctest::Approx(112.0 / 128.0));
    auto q = ProtocolParams::desk_preset(1024);
    CHECK_EQ(q.quorum_size, 128);  // 12.8 * 10
    CHECK_EQ(q.role_probability, doctest::Approx(160.0 / 1024.0));
}

TEST_CASE("n-estimate policies stay within their declared factor") {
    NEstimatePolicy exact{};
    CHECK_EQ(exact.estimate_for(777), 777);

    NEstimatePolicy lower{NEstimatePolicy::Kind::LowerFactor, 0.5};
    for (uint64_t n : {16ull, 100ull, 1001ull}) {
        uint64_t e = lower.estimate_for(n);
        CHECK_GE(static_cast<double>(e), 0.5 * static_cast<double>(n));
        CHECK_LE(e, n);
    }

    NEstimatePolicy upper{NEstimatePolicy::Kind::UpperFactor, 2.5};
    for (uint64_t n : {16ull, 100ull, 1001ull}) {
        uint64_t e = upper.estimate_for(n);
        CHECK_GE(e, n);
        CHECK_LE(static_cast<double>(e), 2.5 * static_cast<double>(n));
    }

    CHECK_THROWS_AS(NEstimatePolicy::parse("sideways:2"), std::invalid_argument);
    CHECK_EQ(NEstimatePolicy::parse("lower:0.5").factor, 0.5);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(ProtocolParams::make(16.0, 0.8, 1), std::invalid_argument);
    CHECK_THROWS_AS(ProtocolParams::make(16.0, 0.8, 100000), std::invalid_argument);
    // explicit rank space must still dominate n^2
    CHECK_THROWS_AS(ProtocolParams::make(16.0, 0.8, 1024, 1000), std::invalid_argument);
    auto p = ProtocolParams::make(16.0, 0.8, 1024, 2000000);
    CHECK_EQ(p.rank_space_max, 2000000);
}

TEST_CASE("ceil_guarded absorbs binary rounding noise") {
    CHECK_EQ(ceil_guarded(0.9 * 1000.0 * 10.0), 9000);
    CHECK_EQ(ceil_guarded(89.6), 90);
    CHECK_EQ(ceil_guarded(90.0), 90);
}

TEST_CASE("seed derivation separates lanes and reproduces") {
    CHECK_EQ(derive_seed(1, 2), derive_seed(1, 2));
    CHECK_NE(derive_seed(1, 2), derive_seed(1, 3));
    CHECK_NE(derive_seed(1, 2), derive_seed(2, 2));
    Rng a(7), b(7);
    for (int i = 0; i < 100; ++i) CHECK_EQ(a.next(), b.next());
    Rng c(7);
    for (int i = 0; i < 1000; ++i) {
        double u = c.unit_open_low();
        CHECK_GT(u, 0.0);
        CHECK_LE(u, 1.0);
    }
}
