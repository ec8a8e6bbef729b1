#include "elsim/adversary.hpp"

#include <stdexcept>

namespace elsim {

namespace {

std::vector<std::pair<uint32_t, double>> wake_single(const Graph& g, uint32_t node) {
    (void)g;
    return {{node, 0.0}};
}

std::vector<std::pair<uint32_t, double>> wake_all(const Graph& g) {
    std::vector<std::pair<uint32_t, double>> w;
    w.reserve(g.node_count());
    for (uint32_t v = 0; v < g.node_count(); ++v) w.emplace_back(v, 0.0);
    return w;
}

// Random nonempty subset, wake times spread over [0, 1).
std::vector<std::pair<uint32_t, double>> wake_subset(const Graph& g, Rng& rng, double p) {
    std::vector<std::pair<uint32_t, double>> w;
    for (uint32_t v = 0; v < g.node_count(); ++v)
        if (rng.chance(p)) w.emplace_back(v, rng.unit());
    if (w.empty()) w.emplace_back(static_cast<uint32_t>(rng.below(g.node_count())), 0.0);
    return w;
}

// All delays exactly one time unit; a single initiator. The reference
// schedule for wake-propagation and pipelining measurements.
class UnitDelay final : public Adversary {
  public:
    std::string name() const override { return "unit-delay"; }
    std::vector<std::pair<uint32_t, double>> wakeups(const Graph& g, Rng&) const override {
        return wake_single(g, 0);
    }
    DelayKind delay_kind() const override { return DelayKind::Unit; }
    double delay(const SimView&, const Message&, Rng&) const override { return 1.0; }
};

// Delays uniform in (0,1]; a random subset of initiators.
class UniformDelay final : public Adversary {
  public:
    std::string name() const override { return "uniform"; }
    std::vector<std::pair<uint32_t, double>> wakeups(const Graph& g, Rng& rng) const override {
        return wake_subset(g, rng, 0.125);
    }
    DelayKind delay_kind() const override { return DelayKind::UniformRng; }
    double delay(const SimView&, const Message&, Rng& rng) const override {
        return rng.unit_open_low();
    }
};

class StaggeredSingle final : public Adversary {
  public:
    std::string name() const override { return "staggered-single"; }
    std::vector<std::pair<uint32_t, double>> wakeups(const Graph& g, Rng& rng) const override {
        return wake_single(g, static_cast<uint32_t>(rng.below(g.node_count())));
    }
    DelayKind delay_kind() const override { return DelayKind::UniformRng; }
    double delay(const SimView&, const Message&, Rng& rng) const override {
        return rng.unit_open_low();
    }
};

class StaggeredAll final : public Adversary {
  public:
    std::string name() const override { return "staggered-all"; }
    std::vector<std::pair<uint32_t, double>> wakeups(const Graph& g, Rng&) const override {
        return wake_all(g);
    }
    DelayKind delay_kind() const override { return DelayKind::UniformRng; }
    double delay(const SimView&, const Message&, Rng& rng) const override {
        return rng.unit_open_low();
    }
};

class StaggeredRandom final : public Adversary {
  public:
    std::string name() const override { return "staggered-random"; }
    std::vector<std::pair<uint32_t, double>> wakeups(const Graph& g, Rng& rng) const override {
        return wake_subset(g, rng, 0.5);
    }
    DelayKind delay_kind() const override { return DelayKind::UniformRng; }
    double delay(const SimView&, const Message&, Rng& rng) const override {
        return rng.unit_open_low();
    }
};

// Adaptive: stalls the strongest candidate's request and every loss
// announcement at the maximum legal delay, so referees commit to weaker
// candidates first and are then dragged through their dispute states.
class DisputeStress final : public Adversary {
  public:
    std::string name() const override { return "dispute-stress"; }
    std::vector<std::pair<uint32_t, double>> wakeups(const Graph& g, Rng&) const override {
        return wake_all(g);
    }
    double delay(const SimView& view, const Message& m, Rng&) const override {
        if (m.kind == MsgKind::Request && m.a == view.max_candidate_rank) return 1.0;
        if (m.kind == MsgKind::Loses) return 1.0;
        return 0.125;
    }
};

// Freed channels send an adversarially chosen pending message instead of the
// FIFO head.
class ArbitraryOrder final : public Adversary {
  public:
    std::string name() const override { return "arbitrary-order"; }
    std::vector<std::pair<uint32_t, double>> wakeups(const Graph& g, Rng&) const override {
        return wake_single(g, 0);
    }
    DelayKind delay_kind() const override { return DelayKind::UniformRng; }
    double delay(const SimView&, const Message&, Rng& rng) const override {
        return rng.unit_open_low();
    }
    bool reorders() const override { return true; }
    size_t pick(const SimView&, std::span<const Message> pending, Rng& rng) const override {
        return static_cast<size_t>(rng.below(pending.size()));
    }
};

}  // namespace

std::unique_ptr<Adversary> make_adversary(const std::string& name) {
    if (name == "unit-delay") return std::make_unique<UnitDelay>();
    if (name == "uniform") return std::make_unique<UniformDelay>();
    if (name == "staggered-single") return std::make_unique<StaggeredSingle>();
    if (name == "staggered-all") return std::make_unique<StaggeredAll>();
    if (name == "staggered-random") return std::make_unique<StaggeredRandom>();
    if (name == "dispute-stress") return std::make_unique<DisputeStress>();
    if (name == "arbitrary-order") return std::make_unique<ArbitraryOrder>();
    throw std::invalid_argument("unknown adversary: " + name);
}

const std::vector<std::string>& builtin_adversaries() {
    static const std::vector<std::string> names = {
        "unit-delay",     "uniform",        "staggered-single", "staggered-all",
        "staggered-random", "dispute-stress", "arbitrary-order",
    };
    return names;
}

}  // namespace elsim
