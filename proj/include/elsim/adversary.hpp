#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "elsim/graph.hpp"
#include "elsim/message.hpp"
#include "elsim/rng.hpp"
#include "elsim/trace.hpp"

namespace elsim {

// What an adaptive adversary may observe: everything that has happened so
// far, including the outcomes of all coin flips at already-woken nodes.
// `history` carries the full prefix trace when the engine is recording one.
struct SimView {
    const Graph* graph = nullptr;
    double now = 0;
    uint64_t max_candidate_rank = 0;  // strongest candidate woken so far
    uint32_t woken = 0;
    const std::vector<TraceRecord>* history = nullptr;
};

// The scheduler: wake-up times, per-transmission delays in (0,1], and
// optionally the choice of which pending message a freed channel sends.
// Policies must be deterministic functions of (observations, rng), where rng
// is seeded per trial.
class Adversary {
  public:
    // Fast paths the engine may inline instead of calling delay().
    enum class DelayKind { Custom, Unit, UniformRng };

    virtual ~Adversary() = default;
    virtual std::string name() const = 0;

    // At least one node must be woken. Times are >= 0.
    virtual std::vector<std::pair<uint32_t, double>> wakeups(const Graph& g, Rng& rng) const = 0;

    virtual DelayKind delay_kind() const { return DelayKind::Custom; }
    virtual double delay(const SimView& view, const Message& m, Rng& rng) const = 0;

    // When true, pick() selects among the pending payloads of a freed
    // channel; otherwise channels send in FIFO order.
    virtual bool reorders() const { return false; }
    virtual size_t pick(const SimView& view, std::span<const Message> pending, Rng& rng) const {
        (void)view, (void)pending, (void)rng;
        return 0;
    }

    virtual bool wants_history() const { return false; }
};

std::unique_ptr<Adversary> make_adversary(const std::string& name);
const std::vector<std::string>& builtin_adversaries();

}  // namespace elsim
