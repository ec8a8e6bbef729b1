#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>
#include <vector>

#include "elsim/adversary.hpp"
#include "elsim/metrics.hpp"
#include "elsim/sim.hpp"

using namespace elsim;

namespace {

ProtocolParams two_node_params() { return ProtocolParams::make(16.0, 0.8, 2).with_quorum(1); }

// Finds a seed whose forced-role assignment puts the candidate at node 0 and
// the referee at node 1 (role placement is uniform, so a small scan works).
uint64_t two_node_seed() {
    Graph g = generate(GraphFamily::complete(2), 0);
    auto adv = make_adversary("unit-delay");
    RoleConfig roles;
    roles.forced_candidates = 1;
    roles.forced_referees = 1;
    roles.distinct_ranks = true;
    for (uint64_t seed = 0; seed < 64; ++seed) {
        SimOptions opt;
        opt.record_trace = true;
        auto res = run_simulation(g, two_node_params(), *adv, seed, roles, opt);
        bool cand0 = false, ref1 = false, ref0 = false;
        for (const auto& r : res.trace.records) {
            if (r.kind != TraceRecord::Kind::Wake) continue;
            if (r.dst == 0) cand0 = r.candidate, ref0 = r.referee;
            if (r.dst == 1) ref1 = r.referee && !r.candidate;
        }
        if (cand0 && !ref0 && ref1) return seed;
    }
    REQUIRE(false);
    return 0;
}

// Independent flood oracle: an event-list simulation with linear-scan event
// selection and eager queue erasure, sharing no code with the engine.
struct OracleFlood {
    const Graph& g;
    std::vector<std::set<uint32_t>> heard;
    std::vector<std::vector<uint32_t>> queue;   // per direction
    std::vector<int64_t> inflight;              // per direction, -1 = idle
    std::vector<double> arrive;                 // per direction
    std::vector<uint64_t> order;                // per direction, load sequence
    uint64_t next_order = 0;
    uint64_t transmissions = 0;

    explicit OracleFlood(const Graph& graph)
        : g(graph),
          heard(graph.node_count()),
          queue(2 * graph.edge_count()),
          inflight(2 * graph.edge_count(), -1),
          arrive(2 * graph.edge_count(), 0),
          order(2 * graph.edge_count(), 0) {}

    void load(uint32_t dir, double now) {
        if (inflight[dir] >= 0 || queue[dir].empty()) return;
        inflight[dir] = queue[dir].front();
        queue[dir].erase(queue[dir].begin());
        arrive[dir] = now + 1.0;
        order[dir] = next_order++;
        ++transmissions;
    }

    void enqueue_except(uint32_t v, uint32_t payload, int64_t skip_edge) {
        for (auto it = g.incident_begin(v); it != g.incident_end(v); ++it)
            if (static_cast<int64_t>(it->edge) != skip_edge)
                queue[g.direction(it->edge, v)].push_back(payload);
    }

    double run(uint32_t source, uint32_t k) {
        for (uint32_t p = 0; p < k; ++p) {
            heard[source].insert(p);
            enqueue_except(source, p, -1);
        }
        for (auto it = g.incident_begin(source); it != g.incident_end(source); ++it)
            load(g.direction(it->edge, source), 0.0);

        uint32_t done = 1;
        double completion = 0;
        while (true) {
            int64_t best = -1;
            for (size_t dir = 0; dir < inflight.size(); ++dir) {
                if (inflight[dir] < 0) continue;
                if (best < 0 || arrive[dir] < arrive[best] ||
                    (arrive[dir] == arrive[best] && order[dir] < order[best]))
                    best = static_cast<int64_t>(dir);
            }
            if (best < 0) break;
            uint32_t dir = static_cast<uint32_t>(best);
            double now = arrive[dir];
            auto payload = static_cast<uint32_t>(inflight[dir]);
            inflight[dir] = -1;
            uint32_t dst = g.dir_dst(dir), edge = dir / 2;
            if (heard[dst].count(payload)) {
                auto& q = queue[g.direction(edge, dst)];
                for (size_t i = 0; i < q.size(); ++i)
                    if (q[i] == payload) {
                        q.erase(q.begin() + static_cast<int64_t>(i));
                        break;
                    }
            } else {
                heard[dst].insert(payload);
                enqueue_except(dst, payload, edge);
                if (heard[dst].size() == k && ++done == g.node_count()) completion = now;
            }
            load(dir, now);
            for (auto it = g.incident_begin(dst); it != g.incident_end(dst); ++it)
                load(g.direction(it->edge, dst), now);
        }
        return completion;
    }
};

}  // namespace

TEST_CASE("two-node forced run matches the hand trace exactly") {
    Graph g = generate(GraphFamily::complete(2), 0);
    auto adv = make_adversary("unit-delay");
    RoleConfig roles;
    roles.forced_candidates = 1;
    roles.forced_referees = 1;
    roles.distinct_ranks = true;
    uint64_t seed = two_node_seed();
    SimOptions opt;
    opt.record_trace = true;
    auto res = run_simulation(g, two_node_params(), *adv, seed, roles, opt);
    const RunReport& r = res.report;

    CHECK_EQ(r.total_transmissions, 4);
    CHECK_EQ(r.leader_node, 0);
    CHECK_EQ(r.leaders.size(), 1);
    CHECK_EQ(r.completion_time, 3.0);
    CHECK_EQ(r.elected_time, 3.0);
    CHECK_EQ(r.last_delivery_time, 4.0);
    CHECK(r.all_terminated);
    CHECK_EQ(r.agreed_leader, r.leaders[0]);
    CHECK_EQ(r.unique_messages, 4);
    CHECK_EQ(r.max_payload_transmissions, 1);

    // Hand-derived schedule: wake(0)@0; wakeup 0->1 over [0,1] waking node 1;
    // request 0->1 over [1,2]; approval 1->0 over [2,3] electing node 0;
    // leader 0->1 over [3,4] terminating node 1.
    const auto& recs = res.trace.records;
    REQUIRE_EQ(recs.size(), 6);
    CHECK_EQ(recs[0].kind, TraceRecord::Kind::Wake);
    CHECK_EQ(recs[0].t, 0.0);
    CHECK_EQ(recs[0].dst, 0);
    CHECK(recs[0].external);
    CHECK(recs[0].candidate);

    CHECK_EQ(recs[1].kind, TraceRecord::Kind::Wake);
    CHECK_EQ(recs[1].t, 1.0);
    CHECK_EQ(recs[1].dst, 1);
    CHECK_FALSE(recs[1].external);
    CHECK(recs[1].referee);

    CHECK_EQ(recs[2].payload.kind, MsgKind::Wakeup);
    CHECK_EQ(recs[2].sent, 0.0);
    CHECK_EQ(recs[2].t, 1.0);
    CHECK_EQ(recs[2].src, 0);

    CHECK_EQ(recs[3].payload.kind, MsgKind::Request);
    CHECK_EQ(recs[3].sent, 1.0);
    CHECK_EQ(recs[3].t, 2.0);

    CHECK_EQ(recs[4].payload.kind, MsgKind::Approved);
    CHECK_EQ(recs[4].sent, 2.0);
    CHECK_EQ(recs[4].t, 3.0);
    CHECK_NE(recs[4].notices & kNoticeElected, 0);
    CHECK_NE(recs[4].notices & kNoticeCountedApproval, 0);

    CHECK_EQ(recs[5].payload.kind, MsgKind::Leader);
    CHECK_EQ(recs[5].sent, 3.0);
    CHECK_EQ(recs[5].t, 4.0);
    CHECK_NE(recs[5].notices & kNoticeLearnedLeader, 0);
    CHECK_NE(recs[5].notices & kNoticeTerminated, 0);
}

TEST_CASE("no candidates: quiescence with a classified election failure") {
    Graph g = generate(GraphFamily::ring(8), 0);
    auto adv = make_adversary("unit-delay");
    RoleConfig roles;
    roles.forced_candidates = 0;
    roles.forced_referees = 3;
    auto res = run_simulation(g, ProtocolParams::desk_preset(8).with_quorum(2), *adv, 5, roles);
    const RunReport& r = res.report;
    CHECK(r.leaders.empty());
    CHECK_EQ(r.failure, "no-candidate");
    CHECK(r.all_awake);
    CHECK_FALSE(r.non_quiescent);
    CHECK(r.quiescence_clean);
    CHECK_EQ(r.unique_messages, 1);  // only the wakeup probe exists
    auto verdict = verify_liveness(r);
    CHECK_EQ(verdict.outcome, LivenessVerdict::Outcome::ClassifiedFailure);
    CHECK_EQ(verdict.classification, "no-candidate");
}

TEST_CASE("identical inputs give bit-identical traces") {
    Graph g = generate(GraphFamily::random(16, 0.2), 21);
    auto adv = make_adversary("uniform");
    auto params = ProtocolParams::desk_preset(16).with_quorum(3);
    SimOptions opt;
    opt.record_trace = true;
    auto a = run_simulation(g, params, *adv, 99, {}, opt);
    auto b = run_simulation(g, params, *adv, 99, {}, opt);
    auto lines = [](const SimResult& r) {
        std::string all;
        for (const auto& rec : r.trace.records) all += rec.to_line() + "\n";
        return all;
    };
    CHECK_EQ(lines(a), lines(b));
    auto c = run_simulation(g, params, *adv, 100, {}, opt);
    CHECK_NE(lines(a), lines(c));
}

TEST_CASE("flood timing agrees with the independent oracle") {
    std::vector<Graph> graphs;
    graphs.push_back(generate(GraphFamily::ring(8), 0));
    graphs.push_back(generate(GraphFamily::complete(4), 0));
    graphs.push_back(generate(GraphFamily::torus(9), 0));
    graphs.push_back(generate(GraphFamily::random(12, 0.25), 4));
    for (const auto& g : graphs) {
        for (uint32_t k : {1u, 3u, 5u}) {
            FloodStats stats;
            double engine_t = flood_only_unit(g, 0, k, &stats);
            OracleFlood oracle(g);
            double oracle_t = oracle.run(0, k);
            CHECK_EQ(engine_t, oracle_t);
            CHECK_EQ(stats.transmissions, oracle.transmissions);
        }
    }
}

TEST_CASE("flood: single payload on a ring takes exactly the diameter") {
    Graph g = generate(GraphFamily::ring(8), 0);
    FloodStats stats;
    CHECK_EQ(flood_only_unit(g, 0, 1, &stats), 4.0);
    CHECK_LE(stats.max_payload_transmissions, 2ull * g.edge_count());  // 2m bound, m=8
}

TEST_CASE("flood: pipelining respects the D+k-1 envelope") {
    struct CellSpec {
        GraphFamily family;
        uint32_t d;
    };
    std::vector<CellSpec> cells = {{GraphFamily::ring(8), 4},
                                   {GraphFamily::torus(64), 8},
                                   {GraphFamily::complete(16), 1}};
    for (uint32_t k : {1u, 5u, 20u}) {
        bool tight_somewhere = false;
        for (const auto& cell : cells) {
            Graph g = generate(cell.family, 0);
            REQUIRE_EQ(diameter(g), cell.d);
            double t = flood_only_unit(g, 0, k);
            double bound = cell.d + k - 1.0;
            CHECK_LE(t, bound);
            if (t == bound) tight_somewhere = true;
        }
        CHECK(tight_somewhere);
    }
}

TEST_CASE("flood: complete n=4 with k=3 finishes at the pipelining bound") {
    Graph g = generate(GraphFamily::complete(4), 0);
    CHECK_EQ(flood_only_unit(g, 0, 3), 3.0);  // frozen from the oracle above
}

TEST_CASE("traces satisfy the network-model invariants") {
    for (uint64_t seed = 1; seed <= 8; ++seed) {
        Graph g = generate(GraphFamily::random(20, 0.15), seed);
        auto adv = make_adversary("uniform");
        SimOptions opt;
        opt.record_trace = true;
        RoleConfig roles;
        roles.forced_candidates = 3;
        roles.forced_referees = 5;
        roles.distinct_ranks = true;
        auto res = run_simulation(g, ProtocolParams::desk_preset(20).with_quorum(3), *adv, seed,
                                  roles, opt);
        auto check = validate_trace(res.trace);
        CHECK_MESSAGE(check.pass(), check.detail);
        CHECK(res.report.quiescence_clean);
        CHECK(res.report.all_awake);
        CHECK_LE(res.report.max_payload_transmissions, 2ull * g.edge_count());
    }
}

TEST_CASE("single-initiator unit-delay runs wake everyone within D") {
    std::vector<GraphFamily> families = {GraphFamily::ring(12), GraphFamily::torus(16),
                                         GraphFamily::random(24, 0.2)};
    for (const auto& fam : families) {
        Graph g = generate(fam, 7);
        uint32_t d = diameter(g);
        auto adv = make_adversary("unit-delay");
        RoleConfig roles;
        roles.forced_candidates = 1;
        roles.forced_referees = 2;
        roles.distinct_ranks = true;
        auto res =
            run_simulation(g, ProtocolParams::desk_preset(16).with_quorum(1), *adv, 3, roles);
        CHECK(res.report.all_awake);
        CHECK_LE(res.report.wake_span, static_cast<double>(d));
    }
}

TEST_CASE("dispute-stress drives referees through the dispute states") {
    // With the quorum equal to the referee count, the stalled strong request
    // forces every run through dispute, loss broadcast and re-approval.
    Graph g = generate(GraphFamily::ring(16), 0);
    auto adv = make_adversary("dispute-stress");
    RoleConfig roles;
    roles.forced_candidates = 2;
    roles.forced_referees = 10;
    roles.distinct_ranks = true;
    auto params = ProtocolParams::desk_preset(16).with_quorum(10);
    SimOptions opt;
    opt.record_trace = true;
    int runs_with_dispute = 0, runs_with_loss = 0;
    for (uint64_t seed = 0; seed < 32; ++seed) {
        auto res = run_simulation(g, params, *adv, seed, roles, opt);
        bool saw_dispute = false, saw_loss = false;
        for (const auto& rec : res.trace.records) {
            if (rec.kind != TraceRecord::Kind::Deliver) continue;
            saw_dispute |= rec.payload.kind == MsgKind::Dispute;
            saw_loss |= rec.payload.kind == MsgKind::Loses;
        }
        runs_with_dispute += saw_dispute;
        runs_with_loss += saw_loss;
        CHECK_LE(res.report.leaders.size(), 1);
    }
    CHECK_EQ(runs_with_dispute, 32);
    CHECK_EQ(runs_with_loss, 32);
}

TEST_CASE("arbitrary-order scheduling still elects exactly one leader") {
    Graph g = generate(GraphFamily::ring(8), 0);
    auto adv = make_adversary("arbitrary-order");
    RoleConfig roles;
    roles.forced_candidates = 2;
    roles.forced_referees = 3;
    roles.distinct_ranks = true;
    auto params = ProtocolParams::desk_preset(8).with_quorum(2);
    for (uint64_t seed = 0; seed < 50; ++seed) {
        auto res = run_simulation(g, params, *adv, seed, roles);
        CHECK_EQ(res.report.leaders.size(), 1);
        CHECK(res.report.all_terminated);
        CHECK_EQ(res.report.agreed_leader, res.report.leaders[0]);
        CHECK(res.report.quiescence_clean);
    }
}

TEST_CASE("event budget aborts are reported as non-quiescent") {
    Graph g = generate(GraphFamily::ring(8), 0);
    auto adv = make_adversary("unit-delay");
    RoleConfig roles;
    roles.forced_candidates = 1;
    roles.forced_referees = 1;
    SimOptions opt;
    opt.event_budget = 5;
    auto res = run_simulation(g, ProtocolParams::desk_preset(8).with_quorum(1), *adv, 1, roles, opt);
    CHECK(res.report.non_quiescent);
    auto verdict = verify_liveness(res.report);
    CHECK_EQ(verdict.outcome, LivenessVerdict::Outcome::Inconclusive);
}

TEST_CASE("forced counts are clamped to the node count") {
    Graph g = generate(GraphFamily::ring(4), 0);
    auto adv = make_adversary("unit-delay");
    RoleConfig roles;
    roles.forced_candidates = 2;
    roles.forced_referees = 21;  // clamped to 4
    roles.distinct_ranks = true;
    auto res = run_simulation(g, ProtocolParams::desk_preset(4).with_quorum(3), *adv, 11, roles);
    CHECK_EQ(res.report.referee_count, 4);
    CHECK_EQ(res.report.candidate_count, 2);
    CHECK_EQ(res.report.leaders.size(), 1);
}

TEST_CASE("debug rank tiebreak yields collision-free ranks in a tiny space") {
    Graph g = generate(GraphFamily::ring(16), 0);
    auto adv = make_adversary("uniform");
    // Rank space floor(n_estimate^2) = 256, so raw draws land in [1,16] and
    // collide constantly; the index tiebreak must keep full ranks distinct.
    auto params = ProtocolParams::make(16.0, 0.8, 16, 256).with_quorum(3);
    RoleConfig roles;
    roles.forced_candidates = 3;
    roles.forced_referees = 4;  // 2*3 > 4 keeps quorums intersecting
    roles.debug_rank_tiebreak = true;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        auto res = run_simulation(g, params, *adv, seed, roles);
        CHECK_FALSE(res.report.rank_collision);
        CHECK_EQ(res.report.leaders.size(), 1);
    }
    // Without the tiebreak the same space collides almost surely.
    roles.debug_rank_tiebreak = false;
    int collisions = 0;
    for (uint64_t seed = 0; seed < 20; ++seed)
        collisions += run_simulation(g, params, *adv, seed, roles).report.rank_collision;
    CHECK_GT(collisions, 2);  // birthday collisions: 16 draws from 256
}

TEST_CASE("counted approvals appear before the election in the trace") {
    Graph g = generate(GraphFamily::random(16, 0.25), 9);
    auto adv = make_adversary("uniform");
    RoleConfig roles;
    roles.forced_candidates = 3;
    roles.forced_referees = 7;
    roles.distinct_ranks = true;
    SimOptions opt;
    opt.record_trace = true;
    auto res = run_simulation(g, ProtocolParams::desk_preset(16).with_quorum(4), *adv, 13, roles, opt);
    REQUIRE_EQ(res.report.leaders.size(), 1);
    uint64_t winner = res.report.leaders[0];
    double elected_at = -1;
    size_t counted_before = 0;
    for (const auto& rec : res.trace.records) {
        if (rec.kind != TraceRecord::Kind::Deliver) continue;
        if ((rec.notices & kNoticeCountedApproval) && rec.payload.a == winner && elected_at < 0)
            ++counted_before;
        if ((rec.notices & kNoticeElected) && rec.payload.a == winner) elected_at = rec.t;
    }
    CHECK_EQ(counted_before, 4);  // exactly the quorum, all before Elected
    CHECK_GE(elected_at, 0.0);
    auto qc = verify_quorum_counts(res.report);
    CHECK_MESSAGE(qc.pass, qc.detail);
}
