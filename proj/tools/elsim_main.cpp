// Command-line front end: single runs and sweeps, trace replay, the
// flooding micro-benchmark, and graph generation/inspection.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "elsim/adversary.hpp"
#include "elsim/rng.hpp"
#include "elsim/sim.hpp"
#include "elsim/sweep.hpp"

using namespace elsim;

namespace {

constexpr int kExitHardFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitReplayMismatch = 4;

struct RunFlags {
    std::string config_path;
    std::string graph = "ring";
    std::vector<uint32_t> n_values;
    double p = 0.1;
    uint32_t m = 0;
    std::string edge_list;
    std::string preset = "desk";
    double c = 0;
    double quorum_fraction = 0;
    uint64_t quorum = 0;
    uint64_t rank_space = 0;
    std::string n_policy = "exact";
    int64_t forced_candidates = -1;
    int64_t forced_referees = -1;
    bool distinct_ranks = false;
    bool debug_rank_tiebreak = false;
    std::vector<std::string> adversaries;
    uint32_t trials = 1;
    uint64_t seed = 1;
    uint64_t event_budget = 1'000'000'000ULL;
    std::string out;
    std::string keep_traces = "none";
    bool serial = false;
    bool quiet = false;
};

ExperimentConfig build_config(const RunFlags& f) {
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) throw std::runtime_error("cannot open config: " + f.config_path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ExperimentConfig::from_json(ss.str());
    }
    ExperimentConfig c;
    c.family = graph_kind_from_string(f.graph);
    c.n_values = f.n_values;
    c.edge_probability = f.p;
    c.edge_count = f.m;
    c.edge_list_path = f.edge_list;
    c.preset = f.preset;
    if (f.c > 0) {
        c.role_coefficient = f.c;
        c.preset = "custom";
    }
    if (f.quorum_fraction > 0) {
        c.quorum_fraction = f.quorum_fraction;
        c.preset = "custom";
    }
    if (c.preset == "custom") {
        if (!c.role_coefficient) c.role_coefficient = f.preset == "paper" ? 1000.0 : 16.0;
        if (!c.quorum_fraction) c.quorum_fraction = f.preset == "paper" ? 0.9 : 0.8;
    }
    if (f.quorum > 0) c.quorum_override = f.quorum;
    if (f.rank_space > 0) c.rank_space_override = f.rank_space;
    c.n_policy = NEstimatePolicy::parse(f.n_policy);
    if (f.forced_candidates >= 0) c.forced_candidates = static_cast<uint32_t>(f.forced_candidates);
    if (f.forced_referees >= 0) c.forced_referees = static_cast<uint32_t>(f.forced_referees);
    c.distinct_ranks = f.distinct_ranks;
    c.debug_rank_tiebreak = f.debug_rank_tiebreak;
    if (!f.adversaries.empty()) c.adversaries = f.adversaries;
    c.trials = f.trials;
    c.master_seed = f.seed;
    c.event_budget = f.event_budget;
    c.out_dir = f.out;
    c.retention = retention_from_string(f.keep_traces);
    return c;
}

int cmd_run(const RunFlags& flags) {
    ExperimentConfig config = build_config(flags);
    config.validate();
    ExperimentResult result = run_experiment(config, !flags.serial);
    write_artifacts(config, result);
    if (!flags.quiet) {
        std::cout << result.verdict_table();
        if (!config.out_dir.empty())
            std::cout << "artifacts written to " << config.out_dir << "\n";
        else
            std::cout << result.summary_csv();
    }
    return result.hard_pass() ? 0 : kExitHardFail;
}

int cmd_replay(const std::vector<std::string>& paths, bool quiet) {
    bool all_ok = true;
    for (const auto& path : paths) {
        auto outcome = replay_file(path);
        if (!quiet) std::cout << path << ": " << outcome.message << "\n";
        all_ok &= outcome.ok;
    }
    return all_ok ? 0 : kExitReplayMismatch;
}

struct FloodFlags {
    std::string graph = "ring";
    uint32_t n = 8;
    double p = 0.1;
    uint32_t m = 0;
    std::string edge_list;
    uint64_t seed = 1;
    uint32_t source = 0;
    uint32_t k = 1;
    std::string delay = "unit";
};

int cmd_flood(const FloodFlags& f) {
    GraphFamily fam{graph_kind_from_string(f.graph), f.n, f.p, f.m, f.edge_list};
    Graph g = generate(fam, f.seed);
    uint32_t d = diameter(g);
    FloodStats stats;
    double completion;
    if (f.delay == "unit") {
        completion = flood_only_unit(g, f.source, f.k, &stats);
    } else if (f.delay == "uniform") {
        Rng rng(derive_seed(f.seed, 0x666c6f6fULL));
        completion = flood_only(
            g, f.source, f.k, [&rng](uint32_t, double) { return rng.unit_open_low(); }, &stats);
    } else {
        throw std::invalid_argument("flood: delay must be unit or uniform");
    }
    std::printf("n=%u m=%u D=%u k=%u completion=%.6f bound=%u transmissions=%llu max_per_payload=%llu\n",
                g.node_count(), g.edge_count(), d, f.k, completion, d + f.k - 1,
                static_cast<unsigned long long>(stats.transmissions),
                static_cast<unsigned long long>(stats.max_payload_transmissions));
    return 0;
}

struct GraphFlags {
    std::string graph = "ring";
    uint32_t n = 8;
    double p = 0.1;
    uint32_t m = 0;
    std::string edge_list;
    uint64_t seed = 1;
    std::string out;
};

int cmd_graph(const GraphFlags& f) {
    GraphFamily fam{graph_kind_from_string(f.graph), f.n, f.p, f.m, f.edge_list};
    bool augmented = false;
    Graph g = generate(fam, f.seed, &augmented);
    std::printf("n=%u m=%u D=%u%s\n", g.node_count(), g.edge_count(), diameter(g),
                augmented ? " (augmented to connect)" : "");
    if (!f.out.empty()) {
        std::ofstream out(f.out);
        if (!out) throw std::runtime_error("cannot open " + f.out);
        write_edge_list(out, g);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"asynchronous leader-election simulator"};
    app.require_subcommand(1);

    RunFlags rf;
    auto* run = app.add_subcommand("run", "execute an experiment (single runs or sweeps)");
    run->add_option("--config", rf.config_path, "experiment config JSON; overrides other flags");
    run->add_option("--graph", rf.graph, "ring|torus|complete|random|edge-list");
    run->add_option("--n", rf.n_values, "node counts to sweep");
    run->add_option("--p", rf.p, "edge probability for the random family");
    run->add_option("--m", rf.m, "exact edge count for the random family");
    run->add_option("--edge-list", rf.edge_list, "edge-list file for the edge-list family");
    run->add_option("--preset", rf.preset, "paper|desk");
    run->add_option("--c", rf.c, "role coefficient (switches to custom preset)");
    run->add_option("--quorum-fraction", rf.quorum_fraction, "quorum fraction (custom preset)");
    run->add_option("--quorum", rf.quorum, "explicit quorum size override");
    run->add_option("--rank-space", rf.rank_space, "explicit rank space override");
    run->add_option("--n-estimate-policy", rf.n_policy, "exact|lower:<c1>|upper:<c2>");
    run->add_option("--forced-candidates", rf.forced_candidates, "force this many candidates");
    run->add_option("--forced-referees", rf.forced_referees, "force this many referees");
    run->add_flag("--distinct-ranks", rf.distinct_ranks, "redraw ranks until distinct");
    run->add_flag("--debug-rank-tiebreak", rf.debug_rank_tiebreak,
                  "append the node index as low-order rank bits (debugging aid)");
    run->add_option("--adversary", rf.adversaries, "adversaries to run (repeatable)");
    run->add_option("--trials", rf.trials, "trials per cell");
    run->add_option("--seed", rf.seed, "master seed");
    run->add_option("--event-budget", rf.event_budget, "abort threshold per run");
    run->add_option("--out", rf.out, "artifact output directory");
    run->add_option("--keep-traces", rf.keep_traces, "none|failures-only|all");
    run->add_flag("--serial", rf.serial, "disable trial-level parallelism");
    run->add_flag("--quiet", rf.quiet, "suppress stdout reporting");

    std::vector<std::string> replay_paths;
    bool replay_quiet = false;
    auto* replay = app.add_subcommand("replay", "re-execute and verify recorded traces");
    replay->add_option("paths", replay_paths, "trace files (.jsonl or .jsonl.gz)")->required();
    replay->add_flag("--quiet", replay_quiet, "suppress stdout reporting");

    FloodFlags ff;
    auto* flood = app.add_subcommand("flood", "pipelined flooding micro-benchmark");
    flood->add_option("--graph", ff.graph, "ring|torus|complete|random|edge-list");
    flood->add_option("--n", ff.n, "node count");
    flood->add_option("--p", ff.p, "edge probability for the random family");
    flood->add_option("--m", ff.m, "exact edge count for the random family");
    flood->add_option("--edge-list", ff.edge_list, "edge-list file");
    flood->add_option("--seed", ff.seed, "graph/delay seed");
    flood->add_option("--source", ff.source, "injecting node");
    flood->add_option("--k", ff.k, "number of distinct payloads");
    flood->add_option("--delay", ff.delay, "unit|uniform");

    GraphFlags gf;
    auto* graph = app.add_subcommand("graph", "generate or inspect a topology");
    graph->add_option("--graph", gf.graph, "ring|torus|complete|random|edge-list");
    graph->add_option("--n", gf.n, "node count");
    graph->add_option("--p", gf.p, "edge probability for the random family");
    graph->add_option("--m", gf.m, "exact edge count for the random family");
    graph->add_option("--edge-list", gf.edge_list, "edge-list file to validate");
    graph->add_option("--seed", gf.seed, "generation seed");
    graph->add_option("--out", gf.out, "write the edge list here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(rf);
        if (replay->parsed()) return cmd_replay(replay_paths, replay_quiet);
        if (flood->parsed()) return cmd_flood(ff);
        if (graph->parsed()) return cmd_graph(gf);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}
