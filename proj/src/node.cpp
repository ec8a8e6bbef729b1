#include "elsim/node.hpp"

namespace elsim {

const char* to_string(CandState s) {
    switch (s) {
        case CandState::Candidate: return "candidate";
        case CandState::NonElected: return "non-elected";
        case CandState::Elected: return "elected";
    }
    return "?";
}

const char* to_string(RefState s) {
    switch (s) {
        case RefState::NonSelected: return "non-selected";
        case RefState::Ready: return "ready";
        case RefState::ChosenSelected: return "chosen-selected";
        case RefState::InDispute: return "in-dispute";
    }
    return "?";
}

// A payload the node itself creates enters its heard-set right away, so a
// copy of it arriving from a neighbor before the node has transmitted its own
// cannot be enqueued a second time.
void Node::generate(const Message& m, PayloadTable& table) {
    uint32_t id = table.intern(m);
    if (heard_.test(id)) return;
    heard_.set(id);
    outbox_.push_all_except(id, -1);
    ++generated_;
    if (m.kind == MsgKind::Approved || m.kind == MsgKind::Declined || m.kind == MsgKind::Dispute)
        ++generated_adjudication_;
}

void Node::initialize(const InitDraw& draw, const ProtocolParams& params, PayloadTable& table,
                      StepEffects& fx) {
    if (awake_) throw std::logic_error("node: initialize invoked twice");
    if (draw.rank < 1 || draw.rank > params.rank_space_max)
        throw std::logic_error("node: rank outside rank space");
    awake_ = true;
    rank_ = draw.rank;
    fx.woke = true;

    generate(Message::wakeup(), table);

    if (draw.candidate) {
        cand_ = CandState::Candidate;
        was_candidate_ = true;
        approvals_ = 0;
        generate(Message::request(rank_), table);
        fx.became_candidate = true;
    } else {
        cand_ = CandState::NonElected;
    }

    if (draw.referee) {
        ref_ = RefState::Ready;
        was_referee_ = true;
        chosen_ = 0;
        contender_ = 0;
        fx.became_referee = true;
    } else {
        ref_ = RefState::NonSelected;
    }
}

void Node::on_receive(uint32_t local_edge, uint32_t payload_id, const ProtocolParams& params,
                      PayloadTable& table, StepEffects& fx) {
    if (!awake_) throw std::logic_error("node: receive while asleep");

    // A terminated node keeps draining what it already queued but takes in
    // nothing new beyond duplicate suppression.
    if (terminated_) {
        if (heard_.test(payload_id))
            outbox_.cancel(local_edge, payload_id);
        else
            heard_.set(payload_id);
        return;
    }

    if (heard_.test_and_set(payload_id)) {
        outbox_.cancel(local_edge, payload_id);
        return;
    }

    outbox_.push_all_except(payload_id, static_cast<int32_t>(local_edge));

    const Message& m = table.at(payload_id);
    switch (m.kind) {
        case MsgKind::Wakeup:
            break;  // already awake; the relay above is all that remains
        case MsgKind::Leader:
            if (!(cand_ == CandState::Elected && m.a == rank_)) {
                leader_ = m.a;
                cand_ = CandState::NonElected;
                terminated_ = true;
                fx.learned_leader = true;
                fx.terminated = true;
            }
            break;
        case MsgKind::Approved:
        case MsgKind::Declined:
            if (m.a == rank_) {
                candidate_on_reply(m, params, table, fx);
                break;
            }
            if (ref_ != RefState::NonSelected) referee_dispatch(m, table, fx);
            break;
        case MsgKind::Dispute:
            if (m.a == rank_) {
                candidate_dispute_response(table, fx);
                break;
            }
            if (ref_ != RefState::NonSelected) referee_dispatch(m, table, fx);
            break;
        default:
            if (ref_ != RefState::NonSelected) referee_dispatch(m, table, fx);
            break;
    }
}

void Node::candidate_on_reply(const Message& m, const ProtocolParams& params, PayloadTable& table,
                              StepEffects& fx) {
    if (cand_ != CandState::Candidate) return;
    if (m.kind == MsgKind::Declined) {
        cand_ = CandState::NonElected;
        generate(Message::loses(rank_), table);
        return;
    }
    // Approved: one step closer to a quorum.
    ++approvals_;
    fx.counted_approval = true;
    fx.counted_referee = m.b;
    counted_refs_.push_back(m.b);
    if (approvals_ == params.quorum_size) {
        cand_ = CandState::Elected;
        leader_ = rank_;
        generate(Message::leader(rank_), table);
        terminated_ = true;
        fx.elected = true;
        fx.terminated = true;
    }
}

// A dispute naming this node's rank as the weaker side: concede unless
// already elected (an elected node has broadcast its announcement and owes
// nothing further); a non-elected ex-candidate has already broadcast a loss.
void Node::candidate_dispute_response(PayloadTable& table, StepEffects& fx) {
    (void)fx;
    if (cand_ != CandState::Candidate) return;
    cand_ = CandState::NonElected;
    generate(Message::loses(rank_), table);
}

void Node::referee_dispatch(const Message& m, PayloadTable& table, StepEffects& fx) {
    if (m.kind == MsgKind::Request) {
        referee_request_response(m.a, table, fx);
    } else if (m.kind == MsgKind::Loses && ref_ == RefState::InDispute && m.a == chosen_) {
        referee_dispute_reply_response(table, fx);
    }
    // Everything else was already relayed; a referee has no further use for it.
}

void Node::referee_request_response(uint64_t cand, PayloadTable& table, StepEffects& fx) {
    if (cand == chosen_ || cand == contender_) fx.rank_collision = true;

    switch (ref_) {
        case RefState::NonSelected:
            return;
        case RefState::Ready:
            // First request to arrive: back it.
            chosen_ = cand;
            generate(Message::approved(cand, rank_), table);
            ref_ = RefState::ChosenSelected;
            return;
        case RefState::ChosenSelected: {
            const uint64_t v = chosen_;
            if (cand < v) {
                generate(Message::declined(cand, rank_), table);
                return;
            }
            // The newcomer outranks the chosen. The chosen may only be
            // replaced once its loss is on record; otherwise a dispute asks
            // it to concede unless it already announced leadership.
            auto lost = table.lookup(Message::loses(v));
            if (lost && heard_.test(*lost)) {
                if (cand <= chosen_) fx.chosen_regressed = true;
                chosen_ = cand;
                generate(Message::approved(cand, rank_), table);
                return;
            }
            auto open = table.lookup(Message::dispute(v, cand));
            if (open && heard_.test(*open)) {
                // Someone else already raised this exact dispute; await news.
                contender_ = cand;
                ref_ = RefState::InDispute;
                return;
            }
            contender_ = cand;
            generate(Message::dispute(v, cand), table);
            ref_ = RefState::InDispute;
            return;
        }
        case RefState::InDispute: {
            const uint64_t w = contender_;
            if (cand < w) {
                generate(Message::declined(cand, rank_), table);
                return;
            }
            // Stronger than the current contender: evict it and restart the
            // dispute against the newcomer.
            generate(Message::declined(w, rank_), table);
            contender_ = cand;
            generate(Message::dispute(chosen_, cand), table);
            return;
        }
    }
}

// The chosen lost its dispute; promote the contender and approve it.
void Node::referee_dispute_reply_response(PayloadTable& table, StepEffects& fx) {
    if (contender_ <= chosen_) fx.chosen_regressed = true;
    chosen_ = contender_;
    contender_ = 0;
    ref_ = RefState::ChosenSelected;
    generate(Message::approved(chosen_, rank_), table);
}

std::optional<uint32_t> next_to_send(Node& node, uint32_t edge, SendPicker* picker) {
    if (!picker) return node.outbox().pop_front(edge);
    std::vector<uint32_t> pending;
    node.outbox().pending(edge, pending);
    if (pending.empty()) return std::nullopt;
    size_t k = picker->pick(pending);
    if (k >= pending.size()) k = pending.size() - 1;
    node.outbox().take(edge, pending[k]);
    return pending[k];
}

}  // namespace elsim
