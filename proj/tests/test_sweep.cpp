#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "elsim/sim.hpp"
#include "elsim/sweep.hpp"

using namespace elsim;
namespace fs = std::filesystem;

namespace {

ExperimentConfig forced_ring_config() {
    ExperimentConfig c;
    c.family = GraphKind::Ring;
    c.n_values = {8, 16};
    c.adversaries = {"unit-delay", "uniform"};
    c.trials = 12;
    c.master_seed = 77;
    c.forced_candidates = 2;
    c.forced_referees = 3;
    c.distinct_ranks = true;
    c.quorum_override = 2;
    return c;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config json round trip is canonical") {
    ExperimentConfig c = forced_ring_config();
    c.out_dir = "somewhere";
    c.retention = TraceRetention::FailuresOnly;
    c.n_policy = NEstimatePolicy{NEstimatePolicy::Kind::LowerFactor, 0.5};
    std::string one = c.to_json();
    ExperimentConfig back = ExperimentConfig::from_json(one);
    CHECK_EQ(back.to_json(), one);
    CHECK_EQ(back.trials, c.trials);
    CHECK_EQ(back.quorum_override, c.quorum_override);
    CHECK_EQ(back.retention, TraceRetention::FailuresOnly);
}

TEST_CASE("config validation rejects degenerate settings") {
    ExperimentConfig c = forced_ring_config();
    c.n_values = {1};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = forced_ring_config();
    c.adversaries = {"nonsense"};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = forced_ring_config();
    c.family = GraphKind::RandomConnected;
    c.edge_probability = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = forced_ring_config();
    c.trials = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("per-trial seeds are a fixed function of master seed and index") {
    CHECK_EQ(trial_seed(1, 0), trial_seed(1, 0));
    CHECK_NE(trial_seed(1, 0), trial_seed(1, 1));
    CHECK_NE(trial_seed(1, 0), trial_seed(2, 0));
}

TEST_CASE("serial and parallel execution produce identical artifacts") {
    ExperimentConfig c = forced_ring_config();
    auto serial = run_experiment(c, /*parallel=*/false);
    auto parallel = run_experiment(c, /*parallel=*/true);
    REQUIRE_EQ(serial.reports.size(), parallel.reports.size());
    for (size_t i = 0; i < serial.reports.size(); ++i)
        CHECK_EQ(serial.reports[i].to_json(), parallel.reports[i].to_json());
    CHECK_EQ(serial.summary_csv(), parallel.summary_csv());
    CHECK_EQ(serial.verdict_table(), parallel.verdict_table());
    CHECK(serial.hard_pass());
}

TEST_CASE("rerunning the same config is byte-identical") {
    ExperimentConfig c = forced_ring_config();
    auto a = run_experiment(c);
    auto b = run_experiment(c);
    CHECK_EQ(a.summary_csv(), b.summary_csv());

    c.master_seed = 78;
    auto d = run_experiment(c);
    CHECK_NE(a.summary_csv(), d.summary_csv());
}

TEST_CASE("forced ring sweep elects one leader everywhere") {
    ExperimentConfig c = forced_ring_config();
    auto res = run_experiment(c);
    for (const auto& cell : res.cells) {
        CHECK_EQ(cell.one_leader, cell.trials);
        CHECK_EQ(cell.multi_leader, 0);
        CHECK_EQ(cell.non_quiescent, 0);
    }
    CHECK(res.hard_pass());
}

TEST_CASE("artifacts and retained traces replay exactly") {
    TempDir dir("elsim_sweep_artifacts");
    ExperimentConfig c = forced_ring_config();
    c.n_values = {8};
    c.adversaries = {"uniform"};
    c.trials = 3;
    c.out_dir = (dir.path / "out").string();
    c.retention = TraceRetention::All;
    auto res = run_experiment(c);
    write_artifacts(c, res);

    CHECK(fs::exists(dir.path / "out/config.json"));
    CHECK(fs::exists(dir.path / "out/summary.csv"));
    CHECK(fs::exists(dir.path / "out/verdicts.txt"));
    std::string reports = slurp((dir.path / "out/reports.jsonl").string());
    CHECK_EQ(std::count(reports.begin(), reports.end(), '\n'), 3);

    for (uint32_t t = 0; t < 3; ++t) {
        auto trace_path = dir.path / "out/traces" / ("trial_" + std::to_string(t) + ".jsonl");
        REQUIRE(fs::exists(trace_path));
        auto outcome = replay_file(trace_path.string());
        CHECK_MESSAGE(outcome.ok, outcome.message);
    }
}

TEST_CASE("a deleted record is pinpointed by replay") {
    TempDir dir("elsim_replay_corrupt");
    Graph g = generate(GraphFamily::ring(8), 0);
    auto adv = make_adversary("uniform");
    RoleConfig roles;
    roles.forced_candidates = 1;
    roles.forced_referees = 2;
    roles.distinct_ranks = true;
    SimOptions opt;
    opt.record_trace = true;
    auto res = run_simulation(g, ProtocolParams::desk_preset(8).with_quorum(2), *adv, 5, roles, opt);
    res.trace.header.family = "ring";
    auto path = (dir.path / "trace.jsonl").string();

    write_trace(res.trace, path);
    CHECK(replay_file(path).ok);

    auto corrupted = res.trace;
    const size_t victim = 7;
    REQUIRE_GT(corrupted.records.size(), victim + 1);
    corrupted.records.erase(corrupted.records.begin() + victim);
    write_trace(corrupted, path);
    auto outcome = replay_file(path);
    CHECK_FALSE(outcome.ok);
    CHECK_NE(outcome.message.find("record " + std::to_string(victim)), std::string::npos);

    ReplayResult rr = replay_trace(corrupted);
    CHECK_FALSE(rr.match);
    CHECK_EQ(rr.first_mismatch, victim);
}

TEST_CASE("gzip traces round trip") {
    TempDir dir("elsim_gz");
    Graph g = generate(GraphFamily::ring(8), 0);
    auto adv = make_adversary("unit-delay");
    RoleConfig roles;
    roles.forced_candidates = 1;
    roles.forced_referees = 1;
    SimOptions opt;
    opt.record_trace = true;
    auto res = run_simulation(g, ProtocolParams::desk_preset(8).with_quorum(1), *adv, 2, roles, opt);
    auto path = (dir.path / "trace.jsonl.gz").string();
    write_trace(res.trace, path);
    Trace back = read_trace(path);
    REQUIRE_EQ(back.records.size(), res.trace.records.size());
    for (size_t i = 0; i < back.records.size(); ++i)
        CHECK_EQ(back.records[i].to_line(), res.trace.records[i].to_line());
    CHECK(replay_file(path).ok);
}

TEST_CASE("failures-only retention skips healthy trials") {
    TempDir dir("elsim_retention");
    ExperimentConfig c = forced_ring_config();
    c.n_values = {8};
    c.adversaries = {"uniform"};
    c.trials = 4;
    c.out_dir = (dir.path / "out").string();
    c.retention = TraceRetention::FailuresOnly;
    auto res = run_experiment(c);
    write_artifacts(c, res);
    CHECK(res.hard_pass());
    CHECK_FALSE(fs::exists(dir.path / "out/traces/trial_0.jsonl"));
}

TEST_CASE("runs under an approximate knowledge of n still elect") {
    ExperimentConfig c = forced_ring_config();
    c.n_values = {16};
    c.adversaries = {"uniform"};
    c.n_policy = NEstimatePolicy{NEstimatePolicy::Kind::LowerFactor, 0.5};
    auto params = c.params_for(16);
    CHECK_EQ(params.n_estimate, 8);
    CHECK_EQ(params.rank_space_max, 4096);  // 8^4
    auto res = run_experiment(c);
    for (const auto& r : res.reports) {
        CHECK_EQ(r.n_estimate, 8);
        CHECK_EQ(r.leaders.size(), 1);
    }

    c.n_policy = NEstimatePolicy{NEstimatePolicy::Kind::UpperFactor, 2.0};
    CHECK_EQ(c.params_for(16).n_estimate, 32);
    auto res2 = run_experiment(c);
    for (const auto& r : res2.reports) CHECK_EQ(r.leaders.size(), 1);
}

TEST_CASE("random-family sweeps regenerate per-trial graphs deterministically") {
    ExperimentConfig c;
    c.family = GraphKind::RandomConnected;
    c.n_values = {24};
    c.edge_probability = 0.15;
    c.adversaries = {"uniform"};
    c.trials = 6;
    c.master_seed = 5;
    c.forced_candidates = 2;
    c.forced_referees = 3;
    c.distinct_ranks = true;
    c.quorum_override = 2;
    auto a = run_experiment(c);
    auto b = run_experiment(c);
    CHECK_EQ(a.summary_csv(), b.summary_csv());
    bool sizes_vary = false;
    for (const auto& r : a.reports) sizes_vary |= r.m != a.reports[0].m;
    CHECK(sizes_vary);  // different trials sample different graphs
}
