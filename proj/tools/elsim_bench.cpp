// Benchmarks the OpenMP kernels against their serial references: all-sources
// BFS diameter and trial-level sweep execution, plus raw engine throughput.

#include <chrono>
#include <cstdio>
#include <string>

#include "elsim/adversary.hpp"
#include "elsim/sim.hpp"
#include "elsim/sweep.hpp"

using namespace elsim;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void bench_diameter() {
    Graph g = generate(GraphFamily::torus(96 * 96), 0);
    auto t0 = Clock::now();
    uint32_t serial = diameter_serial(g);
    double ts = seconds_since(t0);
    t0 = Clock::now();
    uint32_t parallel = diameter(g);
    double tp = seconds_since(t0);
    std::printf("diameter torus %ux%u (n=%u m=%u): serial %.3fs, openmp %.3fs (%.2fx), D=%u %s\n",
                96, 96, g.node_count(), g.edge_count(), ts, tp, ts / tp, parallel,
                serial == parallel ? "match" : "MISMATCH");
}

void bench_sweep() {
    ExperimentConfig c;
    c.family = GraphKind::Ring;
    c.n_values = {64};
    c.adversaries = {"uniform"};
    c.trials = 300;
    c.master_seed = 9;
    c.forced_candidates = 4;
    c.forced_referees = 9;
    c.distinct_ranks = true;
    c.quorum_override = 5;

    auto t0 = Clock::now();
    auto serial = run_experiment(c, /*parallel=*/false);
    double ts = seconds_since(t0);
    t0 = Clock::now();
    auto parallel = run_experiment(c, /*parallel=*/true);
    double tp = seconds_since(t0);
    bool same = serial.summary_csv() == parallel.summary_csv();
    std::printf("sweep ring n=64 x%u trials: serial %.3fs (%.0f trials/s), openmp %.3fs (%.0f trials/s, %.2fx) %s\n",
                c.trials, ts, c.trials / ts, tp, c.trials / tp, ts / tp,
                same ? "identical output" : "OUTPUT MISMATCH");
}

void bench_engine(uint32_t n) {
    Graph g = generate(GraphFamily::ring(n), 0);
    auto adv = make_adversary("uniform");
    auto params = ProtocolParams::desk_preset(n);
    auto t0 = Clock::now();
    auto res = run_simulation(g, params, *adv, 42);
    double dt = seconds_since(t0);
    std::printf("engine ring n=%u desk preset: %llu deliveries in %.3fs (%.1fM events/s), U=%u\n",
                n, static_cast<unsigned long long>(res.report.total_transmissions), dt,
                res.report.total_transmissions / dt / 1e6, res.report.unique_messages);
}

}  // namespace

int main(int argc, char** argv) {
    bool full = argc > 1 && std::string(argv[1]) == "--full";
    bench_diameter();
    bench_sweep();
    bench_engine(128);
    bench_engine(256);
    if (full) {
        bench_engine(512);
        bench_engine(1024);
    }
    return 0;
}
