#include "elsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace elsim {

bool time_envelope_ok(const RunReport& r) {
    return r.completion_time <=
           kTimeEnvelopeFactor * (static_cast<double>(r.diameter) + r.unique_messages) + 1e-9;
}

namespace {

SafetyVerdict safety_from_parts(std::vector<uint64_t> elected, uint64_t quorum, uint64_t n_r,
                                bool collision,
                                const std::vector<std::pair<uint64_t, std::vector<uint64_t>>>& counted) {
    SafetyVerdict v;
    v.elected = std::move(elected);
    v.collision = collision;
    v.pass = v.elected.size() <= 1;

    // Full approval quorums recorded for candidates; any two must share a
    // referee when 2*quorum exceeds the referee population.
    std::vector<std::set<uint64_t>> quorums;
    for (const auto& [cand, refs] : counted)
        if (refs.size() >= quorum) quorums.emplace_back(refs.begin(), refs.end());

    if (!collision && 2 * quorum > n_r) {
        v.guaranteed_overlap = 2 * quorum - n_r;
        v.min_observed_overlap = UINT64_MAX;
        for (size_t i = 0; i < quorums.size(); ++i)
            for (size_t j = i + 1; j < quorums.size(); ++j) {
                std::vector<uint64_t> inter;
                std::set_intersection(quorums[i].begin(), quorums[i].end(), quorums[j].begin(),
                                      quorums[j].end(), std::back_inserter(inter));
                v.min_observed_overlap = std::min(v.min_observed_overlap, static_cast<uint64_t>(inter.size()));
                if (inter.empty()) v.intersection_ok = false;
            }
        if (v.min_observed_overlap == UINT64_MAX) v.min_observed_overlap = v.guaranteed_overlap;
        v.pass = v.pass && v.intersection_ok;
    }

    std::ostringstream os;
    os << "elected=" << v.elected.size();
    if (v.elected.size() > 1) {
        os << " ranks=[";
        for (size_t i = 0; i < v.elected.size(); ++i) os << (i ? "," : "") << v.elected[i];
        os << "]";
    }
    if (v.guaranteed_overlap) os << " guaranteed_overlap=" << v.guaranteed_overlap;
    v.detail = os.str();
    return v;
}

}  // namespace

SafetyVerdict verify_safety(const RunReport& report) {
    return safety_from_parts(report.leaders, report.quorum_size, report.referee_count,
                             report.rank_collision, report.counted_approvals);
}

SafetyVerdict verify_safety(const Trace& trace) {
    std::vector<uint64_t> elected;
    std::unordered_map<uint64_t, std::vector<uint64_t>> counted;
    std::unordered_set<uint64_t> ranks;
    bool collision = false;
    uint64_t n_r = 0;
    for (const auto& rec : trace.records) {
        if (rec.kind == TraceRecord::Kind::Wake) {
            if (!ranks.insert(rec.rank).second) collision = true;
            if (rec.referee) ++n_r;
            continue;
        }
        if (rec.notices & kNoticeCollision) collision = true;
        if (rec.notices & kNoticeCountedApproval) {
            if (rec.payload.kind != MsgKind::Approved)
                throw std::invalid_argument("trace: counted-approval on non-approval record");
            counted[rec.payload.a].push_back(rec.payload.b);
        }
        if (rec.notices & kNoticeElected) {
            if (rec.payload.kind != MsgKind::Approved)
                throw std::invalid_argument("trace: elected on non-approval record");
            elected.push_back(rec.payload.a);
        }
    }
    std::vector<std::pair<uint64_t, std::vector<uint64_t>>> counted_v(counted.begin(), counted.end());
    return safety_from_parts(std::move(elected), trace.header.params.quorum_size, n_r, collision,
                             counted_v);
}

LivenessVerdict verify_liveness(const RunReport& report) {
    LivenessVerdict v;
    if (report.non_quiescent) {
        v.outcome = LivenessVerdict::Outcome::Inconclusive;
        v.detail = "run did not quiesce";
        return v;
    }
    if (report.leaders.size() == 1 && report.all_terminated && report.agreed_leader != 0) {
        v.outcome = LivenessVerdict::Outcome::Pass;
        v.detail = "leader " + std::to_string(report.agreed_leader) + " known to all";
        return v;
    }
    if (report.leaders.empty()) {
        v.outcome = LivenessVerdict::Outcome::ClassifiedFailure;
        v.classification = report.failure.empty() ? "other" : report.failure;
        v.detail = "election failure: " + v.classification;
        return v;
    }
    v.outcome = LivenessVerdict::Outcome::Fail;
    std::ostringstream os;
    os << "leaders=" << report.leaders.size() << " all_terminated=" << report.all_terminated
       << " agreed=" << report.agreed_leader;
    v.detail = os.str();
    return v;
}

double concentration_lower_bound(double mu) {
    return std::max(0.0, 1.0 - 2.0 * std::exp(-mu / 300.0));
}

ConcentrationVerdict check_role_concentration(std::span<const RunReport> reports,
                                              const ProtocolParams& params) {
    ConcentrationVerdict v;
    v.trials = reports.size();
    v.mu = params.role_coefficient * log2n(params.n_estimate);
    if (params.role_probability >= 1.0) {
        v.inconclusive = true;
        v.detail = "role probability is 1; counts are deterministic";
        return v;
    }
    if (reports.size() < 100) {
        v.inconclusive = true;
        v.detail = "need at least 100 reports";
        return v;
    }
    const double lo = 0.9 * v.mu, hi = 1.1 * v.mu;
    size_t in = 0;
    for (const auto& r : reports)
        if (r.candidate_count >= lo && r.candidate_count <= hi && r.referee_count >= lo &&
            r.referee_count <= hi)
            ++in;
    v.empirical = static_cast<double>(in) / static_cast<double>(reports.size());
    v.predicted = concentration_lower_bound(v.mu);
    double se = std::sqrt(v.predicted * (1.0 - v.predicted) / static_cast<double>(reports.size()));
    v.threshold = std::max(0.0, v.predicted - 3.0 * se);
    v.pass = v.empirical >= v.threshold;
    std::ostringstream os;
    os << "mu=" << v.mu << " empirical=" << v.empirical << " predicted>=" << v.predicted
       << " threshold=" << v.threshold;
    v.detail = os.str();
    return v;
}

namespace {

// Grows-by-at-most-20% check along ascending n.
bool bounded_growth(const std::vector<std::pair<uint32_t, double>>& seq) {
    for (size_t i = 1; i < seq.size(); ++i)
        if (seq[i].second > 1.2 * seq[i - 1].second + 1e-12) return false;
    return true;
}

}  // namespace

MessageBoundVerdict check_message_bound(std::span<const RunReport> reports) {
    MessageBoundVerdict v;
    std::map<uint32_t, std::pair<double, double>> by_n;  // n -> (kappa, upsilon)
    for (const auto& r : reports) {
        if (r.max_payload_transmissions > 2ull * r.m) {
            v.per_payload_ok = false;
            v.detail += "payload transmitted more than 2m times (n=" + std::to_string(r.n) + "); ";
        }
        if (r.max_referee_adjudications > 2ull * r.candidate_count) {
            v.referee_budget_ok = false;
            v.detail += "referee generated more than 2*N_C adjudications (n=" +
                        std::to_string(r.n) + "); ";
        }
        double denom = static_cast<double>(r.m) * polylog2(r.n);
        auto& cell = by_n[r.n];
        cell.first = std::max(cell.first, static_cast<double>(r.total_transmissions) / denom);
        cell.second = std::max(cell.second, static_cast<double>(r.unique_messages) / polylog2(r.n));
    }
    if (by_n.size() < 3) {
        v.inconclusive = true;
        v.detail += "need at least 3 distinct n";
        return v;
    }
    std::vector<std::pair<uint32_t, double>> kappa, upsilon;
    for (const auto& [n, cell] : by_n) {
        kappa.emplace_back(n, cell.first);
        upsilon.emplace_back(n, cell.second);
        v.points.push_back(BoundPoint{"", n, cell.first, cell.second, 0});
    }
    bool growth_ok = bounded_growth(kappa) && bounded_growth(upsilon);
    if (!growth_ok) v.detail += "normalized message ceiling grew by more than 20%; ";
    v.pass = v.per_payload_ok && v.referee_budget_ok && growth_ok;
    if (v.pass) v.detail = "kappa/upsilon non-increasing within 20%";
    return v;
}

TimeBoundVerdict check_time_bound(std::span<const RunReport> reports) {
    TimeBoundVerdict v;
    std::map<std::string, std::map<uint32_t, double>> tau;  // family -> n -> max tau
    for (const auto& r : reports) {
        if (r.n >= 2 && r.diameter == 0)
            throw std::invalid_argument("time bound: report missing diameter");
        if (!time_envelope_ok(r)) {
            v.envelope_ok = false;
            v.detail += "completion " + std::to_string(r.completion_time) + " exceeds " +
                        std::to_string(kTimeEnvelopeFactor) + "*(D+U) with D=" +
                        std::to_string(r.diameter) + " U=" + std::to_string(r.unique_messages) +
                        "; ";
        }
        double ratio = r.completion_time / (static_cast<double>(r.diameter) + polylog2(r.n));
        auto& cell = tau[r.family][r.n];
        cell = std::max(cell, ratio);
    }
    bool growth_ok = true;
    bool enough = false;
    for (const auto& [family, by_n] : tau) {
        if (by_n.size() >= 2) enough = true;
        std::vector<std::pair<uint32_t, double>> seq(by_n.begin(), by_n.end());
        for (const auto& [n, t] : seq) v.points.push_back(BoundPoint{family, n, 0, 0, t});
        if (!bounded_growth(seq)) {
            growth_ok = false;
            v.detail += "normalized completion grew by more than 20% on " + family + "; ";
        }
    }
    if (!enough) {
        v.inconclusive = true;
        v.detail += "need at least 2 distinct n per family";
        return v;
    }
    v.pass = v.envelope_ok && growth_ok;
    if (v.pass) v.detail = "envelope held; tau non-increasing within 20%";
    return v;
}

TraceCheck validate_trace(const Trace& trace) {
    TraceCheck c;
    std::map<std::pair<uint32_t, uint32_t>, std::pair<double, double>> last;  // dir -> (sent, t)
    double prev_t = -1;
    for (const auto& rec : trace.records) {
        if (rec.t < prev_t - 1e-12) {
            c.causal_ok = false;
            c.detail += "event times regressed; ";
            break;
        }
        prev_t = rec.t;
        if (rec.kind != TraceRecord::Kind::Deliver) continue;
        double d = rec.t - rec.sent;
        if (!(d > 0.0 && d <= 1.0 + 1e-12)) {
            c.delays_ok = false;
            c.detail += "delay " + std::to_string(d) + " outside (0,1]; ";
        }
        auto key = std::make_pair(rec.src, rec.dst);
        auto it = last.find(key);
        if (it != last.end()) {
            // One message in flight per direction: the next send cannot
            // precede the previous delivery, and deliveries stay in order.
            if (rec.sent < it->second.second - 1e-12 || rec.t < it->second.second - 1e-12) {
                c.fifo_ok = false;
                c.detail += "direction " + std::to_string(rec.src) + "->" +
                            std::to_string(rec.dst) + " violated FIFO occupancy; ";
            }
        }
        last[key] = {rec.sent, rec.t};
    }
    if (c.pass()) c.detail = "fifo/delay/causality ok";
    return c;
}

QuorumCountVerdict verify_quorum_counts(const RunReport& report) {
    QuorumCountVerdict v;
    if (report.rank_collision) {
        v.detail = "collision run: distinctness not asserted";
        return v;
    }
    for (uint64_t rank : report.leaders) {
        const std::vector<uint64_t>* refs = nullptr;
        for (const auto& [cand, list] : report.counted_approvals)
            if (cand == rank) refs = &list;
        if (!refs) {
            v.pass = false;
            v.detail += "elected rank " + std::to_string(rank) + " has no counted approvals; ";
            continue;
        }
        if (refs->size() != report.quorum_size) {
            v.pass = false;
            v.detail += "elected rank " + std::to_string(rank) + " counted " +
                        std::to_string(refs->size()) + " approvals, quorum is " +
                        std::to_string(report.quorum_size) + "; ";
        }
        std::set<uint64_t> uniq(refs->begin(), refs->end());
        if (uniq.size() != refs->size()) {
            v.pass = false;
            v.detail += "elected rank " + std::to_string(rank) + " counted a referee twice; ";
        }
    }
    if (v.pass && v.detail.empty()) v.detail = "quorum counts exact and distinct";
    return v;
}

}  // namespace elsim
