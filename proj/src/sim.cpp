#include "elsim/sim.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace elsim {

namespace {

constexpr uint64_t kRankSalt = 0x72616e6bULL;
constexpr uint64_t kCoinSalt = 0x636f696eULL;
constexpr uint64_t kForcedSalt = 0x666f7263ULL;
constexpr uint64_t kAdvSalt = 0x61647673ULL;

// Packed event: hi = the bit pattern of the (non-negative) event time, which
// orders like the double itself; lo = (sequence << 32) | payload-of-the-event.
// The sequence makes keys unique, so lexicographic (hi, lo) is the total
// order (time, sequence).
struct Event {
    uint64_t hi;
    uint64_t lo;

    static Event make(double t, uint32_t seq, uint32_t what) {
        return {std::bit_cast<uint64_t>(t), (static_cast<uint64_t>(seq) << 32) | what};
    }
    double time() const { return std::bit_cast<double>(hi); }
    uint32_t what() const { return static_cast<uint32_t>(lo); }
};
constexpr uint32_t kWakeBit = 0x80000000u;

inline bool event_before(const Event& a, const Event& b) {
    return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo);
}

// 4-ary min-heap on (time, sequence); flatter than a binary heap, which
// matters since pop/push dominate the event loop.
class EventHeap {
  public:
    bool empty() const { return v_.empty(); }

    void push(Event e) {
        v_.push_back(e);
        size_t i = v_.size() - 1;
        while (i > 0) {
            size_t parent = (i - 1) >> 2;
            if (!event_before(v_[i], v_[parent])) break;
            std::swap(v_[i], v_[parent]);
            i = parent;
        }
    }

    Event pop() {
        Event top = v_[0];
        Event last = v_.back();
        v_.pop_back();
        if (!v_.empty()) {
            size_t i = 0;
            const size_t n = v_.size();
            for (;;) {
                size_t first = (i << 2) + 1;
                if (first >= n) break;
                size_t best = first;
                size_t stop = std::min(first + 4, n);
                for (size_t c = first + 1; c < stop; ++c)
                    if (event_before(v_[c], v_[best])) best = c;
                if (!event_before(v_[best], last)) break;
                v_[i] = v_[best];
                i = best;
            }
            v_[i] = last;
        }
        return top;
    }

  private:
    std::vector<Event> v_;
};

struct Channel {
    bool busy = false;
    uint32_t payload = 0;
    double sent = 0;
};

struct DirInfo {
    uint32_t src = 0, dst = 0;
    uint32_t src_le = 0, dst_le = 0;  // local edge indices at each endpoint
};

// Uniformly pick `count` distinct nodes (clamped to n) via partial shuffle.
std::vector<uint32_t> pick_distinct(uint32_t n, uint32_t count, Rng& rng) {
    count = std::min(count, n);
    std::vector<uint32_t> idx(n);
    for (uint32_t i = 0; i < n; ++i) idx[i] = i;
    for (uint32_t i = 0; i < count; ++i) {
        uint32_t j = i + static_cast<uint32_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    return idx;
}

class Engine {
  public:
    Engine(const Graph& g, const ProtocolParams& params, const Adversary& adversary,
           uint64_t run_seed, const RoleConfig& roles, const SimOptions& options)
        : g_(g),
          params_(params),
          adversary_(adversary),
          run_seed_(run_seed),
          roles_(roles),
          options_(options),
          adv_rng_(derive_seed(run_seed, kAdvSalt)) {
        const uint32_t n = g_.node_count();
        nodes_.resize(n);
        for (uint32_t v = 0; v < n; ++v) nodes_[v].setup(g_.degree(v));
        channels_.assign(2 * g_.edge_count(), {});
        build_dir_info();
        draw_roles_and_ranks();
        recording_ = options_.record_trace || adversary_.wants_history();
        reorders_ = adversary_.reorders();
        delay_kind_ = adversary_.delay_kind();
    }

    SimResult run() {
        auto schedule = adversary_.wakeups(g_, adv_rng_);
        if (schedule.empty()) throw std::logic_error("adversary woke no node");
        for (const auto& [node, t] : schedule) {
            if (node >= g_.node_count() || t < 0) throw std::logic_error("bad wakeup schedule");
            push_event(t, node | kWakeBit);
        }

        uint64_t processed = 0;
        while (!heap_.empty()) {
            if (processed >= options_.event_budget) {
                non_quiescent_ = true;
                break;
            }
            Event ev = heap_.pop();
            ++processed;
            uint32_t what = ev.what();
            double t = ev.time();
            if (what & kWakeBit) {
                uint32_t v = what & ~kWakeBit;
                if (!nodes_[v].awake()) {
                    do_initialize(v, t, true);
                    retry_pending(v, t);
                }
            } else {
                process_deliver(what, t);
            }
        }
        return assemble();
    }

  private:
    void build_dir_info() {
        dirs_.resize(2 * g_.edge_count());
        node_dir_offset_.assign(g_.node_count() + 1, 0);
        for (uint32_t v = 0; v < g_.node_count(); ++v)
            node_dir_offset_[v + 1] = node_dir_offset_[v] + g_.degree(v);
        node_dirs_.resize(node_dir_offset_[g_.node_count()]);
        for (uint32_t v = 0; v < g_.node_count(); ++v) {
            const auto* begin = g_.incident_begin(v);
            for (uint32_t le = 0; le < g_.degree(v); ++le) {
                uint32_t dir = g_.direction(begin[le].edge, v);
                dirs_[dir].src = v;
                dirs_[dir].dst = begin[le].peer;
                dirs_[dir].src_le = le;
                node_dirs_[node_dir_offset_[v] + le] = dir;
            }
        }
        for (uint32_t dir = 0; dir < dirs_.size(); ++dir)
            dirs_[dir].dst_le = dirs_[dir ^ 1].src_le;
    }

    uint32_t dir_of(uint32_t u, uint32_t le) const { return node_dirs_[node_dir_offset_[u] + le]; }

    void draw_roles_and_ranks() {
        const uint32_t n = g_.node_count();
        draws_.resize(n);

        if (roles_.forced_candidates || roles_.forced_referees) {
            Rng sel(derive_seed(run_seed_, kForcedSalt));
            if (roles_.forced_candidates)
                for (uint32_t v : pick_distinct(n, *roles_.forced_candidates, sel))
                    draws_[v].candidate = true;
            else
                coin_roles(/*candidates=*/true);
            if (roles_.forced_referees)
                for (uint32_t v : pick_distinct(n, *roles_.forced_referees, sel))
                    draws_[v].referee = true;
            else
                coin_roles(/*candidates=*/false);
        } else {
            coin_roles(true);
            coin_roles(false);
        }

        for (uint32_t round = 0;; ++round) {
            for (uint32_t v = 0; v < n; ++v) {
                Rng r(derive_seed(run_seed_ ^ kRankSalt,
                                  static_cast<uint64_t>(v) * 0x100000001b3ULL + round));
                if (roles_.debug_rank_tiebreak) {
                    uint64_t space = params_.rank_space_max / n;
                    if (space == 0)
                        throw std::logic_error("rank space too small for the index tiebreak");
                    draws_[v].rank = (r.between(1, space) - 1) * n + v + 1;
                } else {
                    draws_[v].rank = r.between(1, params_.rank_space_max);
                }
            }
            std::vector<uint64_t> sorted;
            sorted.reserve(n);
            for (const auto& d : draws_) sorted.push_back(d.rank);
            std::sort(sorted.begin(), sorted.end());
            bool dup = std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
            if (!dup) break;
            if (!roles_.distinct_ranks) {
                rank_collision_ = true;
                break;
            }
        }
    }

    void coin_roles(bool candidates) {
        for (uint32_t v = 0; v < g_.node_count(); ++v) {
            Rng r(derive_seed(run_seed_ ^ kCoinSalt, v));
            bool cand = r.chance(params_.role_probability);
            bool ref = r.chance(params_.role_probability);
            if (candidates)
                draws_[v].candidate = cand;
            else
                draws_[v].referee = ref;
        }
    }

    void push_event(double t, uint32_t what) { heap_.push(Event::make(t, seq_++, what)); }

    SimView view(double t) const {
        SimView v;
        v.graph = &g_;
        v.now = t;
        v.max_candidate_rank = max_candidate_rank_;
        v.woken = woken_;
        v.history = recording_ ? &records_ : nullptr;
        return v;
    }

    void do_initialize(uint32_t v, double t, bool external) {
        StepEffects fx;
        nodes_[v].initialize(draws_[v], params_, table_, fx);
        if (woken_ == 0) first_wake_ = t;
        last_wake_ = t;
        ++woken_;
        if (draws_[v].candidate) {
            ++candidate_count_;
            max_candidate_rank_ = std::max(max_candidate_rank_, draws_[v].rank);
        }
        if (draws_[v].referee) ++referee_count_;
        if (recording_) {
            TraceRecord r;
            r.kind = TraceRecord::Kind::Wake;
            r.t = t;
            r.dst = v;
            r.external = external;
            r.rank = draws_[v].rank;
            r.candidate = draws_[v].candidate;
            r.referee = draws_[v].referee;
            records_.push_back(r);
        }
    }

    void apply_effects(uint32_t node, const StepEffects& fx, double t, uint16_t& notice_bits) {
        if (fx.elected) {
            leaders_.push_back(nodes_[node].rank());
            if (leader_node_ < 0) {
                leader_node_ = static_cast<int64_t>(node);
                elected_time_ = t;
            }
            notice_bits |= kNoticeElected;
        }
        if (fx.learned_leader) notice_bits |= kNoticeLearnedLeader;
        if (fx.terminated) notice_bits |= kNoticeTerminated;
        if (fx.counted_approval) notice_bits |= kNoticeCountedApproval;
        if (fx.rank_collision) {
            rank_collision_ = true;
            notice_bits |= kNoticeCollision;
        }
        if (fx.chosen_regressed) chosen_monotone_ = false;
    }

    void process_deliver(uint32_t dir, double t) {
        Channel& ch = channels_[dir];
        const DirInfo& info = dirs_[dir];
        uint32_t payload = ch.payload;
        double sent = ch.sent;
        ch.busy = false;
        last_delivery_ = t;

        uint32_t dst = info.dst;
        if (!nodes_[dst].awake()) do_initialize(dst, t, false);
        StepEffects fx;
        nodes_[dst].on_receive(info.dst_le, payload, params_, table_, fx);
        uint16_t notice_bits = 0;
        apply_effects(dst, fx, t, notice_bits);
        if (recording_) {
            TraceRecord r;
            r.kind = TraceRecord::Kind::Deliver;
            r.t = t;
            r.sent = sent;
            r.src = info.src;
            r.dst = dst;
            r.payload = table_.at(payload);
            r.notices = notice_bits;
            records_.push_back(r);
        }

        try_send(info.src, info.src_le, t);
        retry_pending(dst, t);
    }

    // Start transmissions on channels of u whose queues gained content. With
    // a reordering adversary, take() can leave queues only-tombstoned, which
    // breaks the drained-queue bookkeeping, so every edge is scanned instead.
    void retry_pending(uint32_t u, double t) {
        if (reorders_) {
            for (uint32_t le = 0; le < g_.degree(u); ++le) try_send(u, le, t);
            return;
        }
        Outbox& ob = nodes_[u].outbox();
        for (uint32_t le : ob.woke_edges()) try_send(u, le, t);
        ob.clear_woke_edges();
    }

    void try_send(uint32_t u, uint32_t le, double t) {
        uint32_t dir = dir_of(u, le);
        Channel& ch = channels_[dir];
        if (ch.busy) return;

        std::optional<uint32_t> id;
        if (!reorders_) {
            id = nodes_[u].outbox().pop_front(le);
        } else {
            pending_scratch_.clear();
            nodes_[u].outbox().pending(le, pending_scratch_);
            if (!pending_scratch_.empty()) {
                msg_scratch_.clear();
                for (uint32_t p : pending_scratch_) msg_scratch_.push_back(table_.at(p));
                size_t k = adversary_.pick(view(t), msg_scratch_, adv_rng_);
                if (k >= pending_scratch_.size()) k = pending_scratch_.size() - 1;
                nodes_[u].outbox().take(le, pending_scratch_[k]);
                id = pending_scratch_[k];
            }
        }
        if (!id) return;

        double d;
        switch (delay_kind_) {
            case Adversary::DelayKind::Unit: d = 1.0; break;
            case Adversary::DelayKind::UniformRng: d = adv_rng_.unit_open_low(); break;
            default:
                d = adversary_.delay(view(t), table_.at(*id), adv_rng_);
                if (!(d > 0.0 && d <= 1.0))
                    throw std::logic_error("adversary delay outside (0,1]");
        }
        ch.busy = true;
        ch.payload = *id;
        ch.sent = t;
        ++transmissions_;
        if (*id >= payload_tx_.size()) payload_tx_.resize(table_.size(), 0);
        ++payload_tx_[*id];
        last_send_ = std::max(last_send_, t);
        push_event(t + d, dir);
    }

    SimResult assemble() {
        SimResult out;
        RunReport& r = out.report;
        r.n = g_.node_count();
        r.m = g_.edge_count();
        r.adversary = adversary_.name();
        r.seed = run_seed_;
        r.n_estimate = params_.n_estimate;
        r.quorum_size = params_.quorum_size;
        r.role_probability = params_.role_probability;
        r.leaders = leaders_;
        r.leader_node = leader_node_;
        r.candidate_count = candidate_count_;
        r.referee_count = referee_count_;
        r.total_transmissions = transmissions_;
        r.unique_messages = table_.size();
        r.max_payload_transmissions = 0;
        for (uint64_t c : payload_tx_) r.max_payload_transmissions = std::max(r.max_payload_transmissions, c);
        r.completion_time = woken_ ? last_send_ - first_wake_ : 0.0;
        r.last_delivery_time = woken_ ? last_delivery_ - first_wake_ : 0.0;
        r.elected_time = elected_time_ >= 0 ? elected_time_ - first_wake_ : -1.0;
        r.wake_span = woken_ ? last_wake_ - first_wake_ : 0.0;
        r.rank_collision = rank_collision_;
        r.non_quiescent = non_quiescent_;
        r.chosen_monotone = chosen_monotone_;

        bool all_awake = true, all_terminated = true;
        for (const auto& node : nodes_) {
            all_awake &= node.awake();
            all_terminated &= node.done();
        }
        r.all_awake = all_awake;
        r.all_terminated = all_terminated;

        uint64_t agreed = nodes_.empty() ? 0 : nodes_[0].leader_rank();
        for (const auto& node : nodes_)
            if (node.leader_rank() != agreed) agreed = 0;
        r.agreed_leader = all_terminated ? agreed : 0;

        bool clean = !non_quiescent_;
        if (clean)
            for (uint32_t v = 0; v < g_.node_count() && clean; ++v)
                for (uint32_t le = 0; le < g_.degree(v) && clean; ++le)
                    clean = nodes_[v].outbox().effectively_empty(le);
        r.quiescence_clean = clean;

        uint64_t max_adj = 0;
        for (const auto& node : nodes_)
            if (node.was_referee())
                max_adj = std::max(max_adj, node.generated_adjudication_payloads());
        r.max_referee_adjudications = max_adj;

        for (const auto& node : nodes_)
            if (node.was_candidate() && !node.counted_referees().empty())
                r.counted_approvals.emplace_back(node.rank(), node.counted_referees());

        if (r.leaders.empty()) {
            if (candidate_count_ == 0)
                r.failure = "no-candidate";
            else if (referee_count_ < params_.quorum_size)
                r.failure = "referee-shortfall";
            else
                r.failure = "other";
        }

        if (options_.record_trace) {
            out.trace.header.n = g_.node_count();
            out.trace.header.edges = g_.edges();
            out.trace.header.params = params_;
            out.trace.header.adversary = adversary_.name();
            out.trace.header.adversary_seed = derive_seed(run_seed_, kAdvSalt);
            out.trace.header.run_seed = run_seed_;
            out.trace.header.roles = roles_;
            out.trace.records = std::move(records_);
        }
        return out;
    }

    const Graph& g_;
    const ProtocolParams& params_;
    const Adversary& adversary_;
    uint64_t run_seed_;
    RoleConfig roles_;
    SimOptions options_;
    Rng adv_rng_;

    std::vector<Node> nodes_;
    std::vector<InitDraw> draws_;
    std::vector<Channel> channels_;
    std::vector<DirInfo> dirs_;
    PayloadTable table_;
    EventHeap heap_;
    uint32_t seq_ = 0;
    bool recording_ = false;
    bool reorders_ = false;
    Adversary::DelayKind delay_kind_ = Adversary::DelayKind::Custom;
    std::vector<uint32_t> node_dirs_;
    std::vector<uint32_t> node_dir_offset_;
    std::vector<TraceRecord> records_;

    uint32_t woken_ = 0;
    uint32_t candidate_count_ = 0;
    uint32_t referee_count_ = 0;
    uint64_t max_candidate_rank_ = 0;
    double first_wake_ = 0;
    double last_wake_ = 0;
    double last_send_ = 0;
    double last_delivery_ = 0;
    double elected_time_ = -1;
    uint64_t transmissions_ = 0;
    std::vector<uint64_t> payload_tx_;
    std::vector<uint64_t> leaders_;
    int64_t leader_node_ = -1;
    bool rank_collision_ = false;
    bool non_quiescent_ = false;
    bool chosen_monotone_ = true;
    std::vector<uint32_t> pending_scratch_;
    std::vector<Message> msg_scratch_;
};

}  // namespace

SimResult run_simulation(const Graph& g, const ProtocolParams& params, const Adversary& adversary,
                         uint64_t run_seed, const RoleConfig& roles, const SimOptions& options) {
    Engine engine(g, params, adversary, run_seed, roles, options);
    return engine.run();
}

double flood_only(const Graph& g, uint32_t source, uint32_t k,
                  const std::function<double(uint32_t dir, double now)>& delay_policy,
                  FloodStats* stats) {
    if (k < 1) throw std::invalid_argument("flood: k must be >= 1");
    if (source >= g.node_count()) throw std::invalid_argument("flood: bad source");
    const uint32_t n = g.node_count();

    std::vector<HeardSet> heard(n);
    std::vector<Outbox> outbox(n);
    std::vector<uint32_t> have(n, 0);
    for (uint32_t v = 0; v < n; ++v) outbox[v].init(g.degree(v));
    std::vector<Channel> channels(2 * g.edge_count());
    std::vector<DirInfo> dirs(2 * g.edge_count());
    for (uint32_t v = 0; v < n; ++v) {
        const auto* begin = g.incident_begin(v);
        for (uint32_t le = 0; le < g.degree(v); ++le) {
            uint32_t dir = g.direction(begin[le].edge, v);
            dirs[dir] = {v, begin[le].peer, le, 0};
        }
    }
    for (uint32_t dir = 0; dir < dirs.size(); ++dir) dirs[dir].dst_le = dirs[dir ^ 1].src_le;

    EventHeap heap;
    uint32_t seq = 0;
    std::vector<uint64_t> payload_tx(k, 0);
    uint64_t transmissions = 0;
    uint32_t completed = 1;  // the source
    double completion = 0;

    for (uint32_t id = 0; id < k; ++id) {
        heard[source].set(id);
        outbox[source].push_all_except(id, -1);
    }
    have[source] = k;

    auto try_send = [&](uint32_t u, uint32_t le, double t) {
        uint32_t dir = g.direction(g.incident_begin(u)[le].edge, u);
        Channel& ch = channels[dir];
        if (ch.busy) return;
        auto id = outbox[u].pop_front(le);
        if (!id) return;
        double d = delay_policy(dir, t);
        if (!(d > 0.0 && d <= 1.0)) throw std::logic_error("flood delay outside (0,1]");
        ch.busy = true;
        ch.payload = *id;
        ch.sent = t;
        ++transmissions;
        ++payload_tx[*id];
        heap.push(Event::make(t + d, seq++, dir));
    };

    for (uint32_t le = 0; le < g.degree(source); ++le) try_send(source, le, 0.0);

    while (!heap.empty()) {
        Event ev = heap.pop();
        uint32_t dir = ev.what();
        double now = ev.time();
        Channel& ch = channels[dir];
        uint32_t id = ch.payload;
        ch.busy = false;
        const DirInfo& info = dirs[dir];
        uint32_t dst = info.dst;
        if (heard[dst].test(id)) {
            outbox[dst].cancel(info.dst_le, id);
        } else {
            heard[dst].set(id);
            outbox[dst].push_all_except(id, static_cast<int32_t>(info.dst_le));
            if (++have[dst] == k)
                if (++completed == n) completion = now;
        }
        try_send(info.src, info.src_le, now);
        for (uint32_t le = 0; le < g.degree(dst); ++le) try_send(dst, le, now);
    }

    if (stats) {
        stats->transmissions = transmissions;
        stats->max_payload_transmissions = 0;
        for (uint64_t c : payload_tx)
            stats->max_payload_transmissions = std::max(stats->max_payload_transmissions, c);
    }
    return completion;
}

double flood_only_unit(const Graph& g, uint32_t source, uint32_t k, FloodStats* stats) {
    return flood_only(
        g, source, k, [](uint32_t, double) { return 1.0; }, stats);
}

ReplayResult replay_trace(const Trace& stored) {
    ReplayResult out;
    Graph g = Graph::from_edges(stored.header.n, stored.header.edges);
    auto adversary = make_adversary(stored.header.adversary);
    SimOptions options;
    options.record_trace = true;
    out.regenerated =
        run_simulation(g, stored.header.params, *adversary, stored.header.run_seed,
                       stored.header.roles, options);

    const auto& a = stored.records;
    const auto& b = out.regenerated.trace.records;
    size_t common = std::min(a.size(), b.size());
    for (size_t i = 0; i < common; ++i) {
        if (a[i].to_line() != b[i].to_line()) {
            out.match = false;
            out.first_mismatch = i;
            out.detail = "record " + std::to_string(i) + " differs: stored=" + a[i].to_line() +
                         " regenerated=" + b[i].to_line();
            return out;
        }
    }
    if (a.size() != b.size()) {
        out.match = false;
        out.first_mismatch = common;
        out.detail = "record count differs: stored=" + std::to_string(a.size()) +
                     " regenerated=" + std::to_string(b.size());
        return out;
    }
    out.match = true;
    out.first_mismatch = a.size();
    return out;
}

}  // namespace elsim
