#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "elsim/message.hpp"
#include "elsim/params.hpp"

namespace elsim {

// Run-scoped payload interner. Every distinct payload that ever exists in a
// run gets a dense id; per-node heard-sets and outboxes work on ids, and the
// table size is the run's unique-message count.
class PayloadTable {
  public:
    uint32_t intern(const Message& m) {
        auto [it, inserted] = ids_.try_emplace(m, static_cast<uint32_t>(msgs_.size()));
        if (inserted) msgs_.push_back(m);
        return it->second;
    }
    // Non-inserting: id of m if some node has generated it, else nullopt.
    std::optional<uint32_t> lookup(const Message& m) const {
        auto it = ids_.find(m);
        if (it == ids_.end()) return std::nullopt;
        return it->second;
    }
    const Message& at(uint32_t id) const { return msgs_[id]; }
    uint32_t size() const { return static_cast<uint32_t>(msgs_.size()); }

  private:
    std::unordered_map<Message, uint32_t, MessageHash> ids_;
    std::vector<Message> msgs_;
};

// Set of heard payload ids (the deduplication key set), as a growable bitset.
class HeardSet {
  public:
    bool test(uint32_t id) const {
        uint32_t w = id >> 6;
        return w < bits_.size() && (bits_[w] >> (id & 63)) & 1;
    }
    void set(uint32_t id) {
        uint32_t w = id >> 6;
        if (w >= bits_.size()) bits_.resize(w + 1, 0);
        bits_[w] |= 1ull << (id & 63);
    }
    // Returns the previous membership and inserts.
    bool test_and_set(uint32_t id) {
        uint32_t w = id >> 6;
        if (w >= bits_.size()) bits_.resize(w + 1, 0);
        uint64_t mask = 1ull << (id & 63);
        bool was = bits_[w] & mask;
        bits_[w] |= mask;
        return was;
    }

  private:
    std::vector<uint64_t> bits_;
};

// Flat FIFO buffer: pops advance a head index, storage resets once drained.
class RingQueue {
  public:
    bool empty() const { return head_ == buf_.size(); }
    void push(uint32_t v) { buf_.push_back(v); }
    uint32_t front() const { return buf_[head_]; }
    void pop() {
        if (++head_ == buf_.size()) {
            buf_.clear();
            head_ = 0;
        }
    }
    const uint32_t* begin() const { return buf_.data() + head_; }
    const uint32_t* end() const { return buf_.data() + buf_.size(); }

  private:
    std::vector<uint32_t> buf_;
    size_t head_ = 0;
};

// Per-incident-edge outgoing queues. A payload is enqueued at most once per
// edge over a node's lifetime, so a cancelled entry can be marked dead and
// lazily skipped instead of searched for.
class Outbox {
  public:
    void init(uint32_t degree) {
        queues_.assign(degree, {});
        dead_.assign(degree, {});
        woke_.clear();
    }
    uint32_t degree() const { return static_cast<uint32_t>(queues_.size()); }

    // skip < 0 enqueues on every edge (self-generated payloads). Edges whose
    // queue was drained before the push are collected so the engine only
    // revisits channels that may actually have work.
    void push_all_except(uint32_t id, int32_t skip) {
        for (uint32_t e = 0; e < queues_.size(); ++e)
            if (static_cast<int32_t>(e) != skip) {
                if (queues_[e].empty()) woke_.push_back(e);
                queues_[e].push(id);
            }
    }

    // Edges that went empty -> non-empty since the last call. Valid under
    // FIFO draining, where an idle channel implies a fully drained queue.
    const std::vector<uint32_t>& woke_edges() const { return woke_; }
    void clear_woke_edges() { woke_.clear(); }

    // Duplicate suppression: drop id from edge e's queue if still pending.
    void cancel(uint32_t e, uint32_t id) { dead_[e].insert(id); }

    // FIFO head of edge e's queue, skipping dead entries.
    std::optional<uint32_t> pop_front(uint32_t e) {
        auto& q = queues_[e];
        auto& dead = dead_[e];
        while (!q.empty()) {
            uint32_t id = q.front();
            q.pop();
            if (dead.empty() || dead.erase(id) == 0) return id;
        }
        return std::nullopt;
    }

    // Pending ids on edge e in queue order (dead entries excluded).
    void pending(uint32_t e, std::vector<uint32_t>& out) const {
        out.clear();
        const auto& dead = dead_[e];
        for (uint32_t id : queues_[e])
            if (dead.find(id) == dead.end()) out.push_back(id);
    }

    // Remove a specific pending id (arbitrary-order send policies).
    bool take(uint32_t e, uint32_t id) {
        const auto& dead = dead_[e];
        for (uint32_t q : queues_[e])
            if (q == id && dead.find(id) == dead.end()) {
                dead_[e].insert(id);
                return true;
            }
        return false;
    }

    bool effectively_empty(uint32_t e) const {
        const auto& dead = dead_[e];
        for (uint32_t id : queues_[e])
            if (dead.find(id) == dead.end()) return false;
        return true;
    }

  private:
    std::vector<RingQueue> queues_;
    std::vector<std::unordered_set<uint32_t>> dead_;
    std::vector<uint32_t> woke_;
};

enum class CandState : uint8_t { Candidate, NonElected, Elected };
enum class RefState : uint8_t { NonSelected, Ready, ChosenSelected, InDispute };

const char* to_string(CandState s);
const char* to_string(RefState s);

// The randomness consumed by a node at wake-up: its rank draw and the two
// role coins. Supplied by the harness so transitions stay replayable.
struct InitDraw {
    uint64_t rank = 0;
    bool candidate = false;
    bool referee = false;
};

// State-change notices emitted by a single transition, for the trace and the
// run report.
struct StepEffects {
    bool woke = false;
    bool became_candidate = false;
    bool became_referee = false;
    bool elected = false;
    bool learned_leader = false;
    bool terminated = false;
    bool counted_approval = false;
    uint64_t counted_referee = 0;
    bool rank_collision = false;   // a referee saw a request matching its chosen/contender
    bool chosen_regressed = false; // chosen failed to strictly increase (collision runs)
};

// One protocol participant. Transitions are deterministic functions of
// (state, event, supplied draw); all randomness arrives through InitDraw.
class Node {
  public:
    void setup(uint32_t degree) { outbox_.init(degree); }

    bool awake() const { return awake_; }
    bool done() const { return terminated_; }
    uint64_t rank() const { return rank_; }
    CandState cand_state() const { return cand_; }
    RefState ref_state() const { return ref_; }
    uint64_t chosen() const { return chosen_; }
    uint64_t contender() const { return contender_; }
    uint64_t approvals() const { return approvals_; }
    uint64_t leader_rank() const { return leader_; }
    bool was_candidate() const { return was_candidate_; }
    bool was_referee() const { return was_referee_; }
    const std::vector<uint64_t>& counted_referees() const { return counted_refs_; }
    uint64_t generated_payloads() const { return generated_; }
    uint64_t generated_adjudication_payloads() const { return generated_adjudication_; }
    bool heard(uint32_t id) const { return heard_.test(id); }

    Outbox& outbox() { return outbox_; }
    const Outbox& outbox() const { return outbox_; }

    // Wake-up. Broadcasts a wakeup probe, takes the two roles per the draw,
    // and (as a candidate) broadcasts its ranked request. Invoking this twice
    // on one node is a harness bug.
    void initialize(const InitDraw& draw, const ProtocolParams& params, PayloadTable& table,
                    StepEffects& fx);

    // Receipt of one payload over a local edge. The node must be awake; the
    // engine wakes sleeping receivers via initialize() first.
    void on_receive(uint32_t local_edge, uint32_t payload_id, const ProtocolParams& params,
                    PayloadTable& table, StepEffects& fx);

  private:
    void generate(const Message& m, PayloadTable& table);
    void candidate_on_reply(const Message& m, const ProtocolParams& params, PayloadTable& table,
                            StepEffects& fx);
    void candidate_dispute_response(PayloadTable& table, StepEffects& fx);
    void referee_dispatch(const Message& m, PayloadTable& table, StepEffects& fx);
    void referee_request_response(uint64_t cand, PayloadTable& table, StepEffects& fx);
    void referee_dispute_reply_response(PayloadTable& table, StepEffects& fx);

    bool awake_ = false;
    bool terminated_ = false;
    bool was_candidate_ = false;
    bool was_referee_ = false;
    uint64_t rank_ = 0;
    CandState cand_ = CandState::NonElected;
    RefState ref_ = RefState::NonSelected;
    uint64_t chosen_ = 0;     // 0 = none; ranks are always >= 1
    uint64_t contender_ = 0;  // 0 = none
    uint64_t approvals_ = 0;
    uint64_t leader_ = 0;  // 0 = unknown
    uint64_t generated_ = 0;
    uint64_t generated_adjudication_ = 0;  // approved/declined/dispute payloads
    HeardSet heard_;
    Outbox outbox_;
    std::vector<uint64_t> counted_refs_;
};

// Picks which pending message a freed channel sends next. Index into the
// pending list in queue order; FIFO policies simply do not install one.
struct SendPicker {
    virtual ~SendPicker() = default;
    virtual size_t pick(std::span<const uint32_t> pending_ids) = 0;
};

// Removes and returns the next payload to transmit on `edge`, or nullopt if
// nothing is pending. With a null picker this is the FIFO front.
std::optional<uint32_t> next_to_send(Node& node, uint32_t edge, SendPicker* picker = nullptr);

}  // namespace elsim
