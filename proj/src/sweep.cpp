#include "elsim/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "elsim/adversary.hpp"
#include "elsim/rng.hpp"
#include "elsim/sim.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace elsim {

using json = nlohmann::ordered_json;

const char* to_string(TraceRetention r) {
    switch (r) {
        case TraceRetention::None: return "none";
        case TraceRetention::FailuresOnly: return "failures-only";
        case TraceRetention::All: return "all";
    }
    return "?";
}

TraceRetention retention_from_string(const std::string& s) {
    if (s == "none") return TraceRetention::None;
    if (s == "failures-only" || s == "failures") return TraceRetention::FailuresOnly;
    if (s == "all") return TraceRetention::All;
    throw std::invalid_argument("retention: expected none|failures-only|all");
}

uint64_t trial_seed(uint64_t master_seed, uint64_t index) {
    return derive_seed(master_seed, 0x7472690aULL + index);
}

void ExperimentConfig::validate() const {
    if (family != GraphKind::EdgeList && n_values.empty())
        throw std::invalid_argument("config: no n values");
    for (uint32_t n : n_values)
        if (n < 2) throw std::invalid_argument("config: n must be >= 2");
    if (family == GraphKind::RandomConnected && edge_count == 0 &&
        !(edge_probability > 0.0 && edge_probability <= 1.0))
        throw std::invalid_argument("config: edge probability must be in (0,1]");
    if (family == GraphKind::EdgeList && edge_list_path.empty())
        throw std::invalid_argument("config: edge-list family needs a path");
    if (preset != "paper" && preset != "desk" && preset != "custom")
        throw std::invalid_argument("config: unknown preset " + preset);
    if (preset == "custom" && (!role_coefficient || !quorum_fraction))
        throw std::invalid_argument("config: custom preset needs role coefficient and quorum fraction");
    if (adversaries.empty()) throw std::invalid_argument("config: no adversaries");
    for (const auto& a : adversaries) make_adversary(a);  // throws on unknown names
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    for (uint32_t n : n_values) params_for(n);  // surfaces parameter errors early
}

ProtocolParams ExperimentConfig::params_for(uint32_t n) const {
    uint64_t n_est = n_policy.estimate_for(n);
    double c = role_coefficient.value_or(preset == "paper" ? 1000.0 : 16.0);
    double q = quorum_fraction.value_or(preset == "paper" ? 0.9 : 0.8);
    ProtocolParams p = ProtocolParams::make(c, q, n_est, rank_space_override);
    if (quorum_override) p = p.with_quorum(*quorum_override);
    return p;
}

RoleConfig ExperimentConfig::roles() const {
    RoleConfig r;
    r.forced_candidates = forced_candidates;
    r.forced_referees = forced_referees;
    r.distinct_ranks = distinct_ranks;
    r.debug_rank_tiebreak = debug_rank_tiebreak;
    return r;
}

std::string ExperimentConfig::to_json() const {
    json j;
    j["graph"] = {{"family", elsim::to_string(family)},
                  {"n", n_values},
                  {"p", edge_probability},
                  {"m", edge_count},
                  {"edge_list", edge_list_path}};
    json params;
    params["preset"] = preset;
    if (role_coefficient) params["c"] = *role_coefficient;
    if (quorum_fraction) params["quorum_fraction"] = *quorum_fraction;
    if (quorum_override) params["quorum"] = *quorum_override;
    if (rank_space_override) params["rank_space_max"] = *rank_space_override;
    params["n_estimate_policy"] = n_policy.to_string();
    if (forced_candidates) params["forced_candidates"] = *forced_candidates;
    if (forced_referees) params["forced_referees"] = *forced_referees;
    params["distinct_ranks"] = distinct_ranks;
    params["debug_rank_tiebreak"] = debug_rank_tiebreak;
    j["params"] = std::move(params);
    j["adversaries"] = adversaries;
    j["trials"] = trials;
    j["seed"] = master_seed;
    j["event_budget"] = event_budget;
    j["out"] = out_dir;
    j["keep_traces"] = elsim::to_string(retention);
    return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    json j = json::parse(text);
    ExperimentConfig c;
    const auto& g = j.at("graph");
    c.family = graph_kind_from_string(g.at("family").get<std::string>());
    c.n_values = g.value("n", std::vector<uint32_t>{});
    c.edge_probability = g.value("p", 0.1);
    c.edge_count = g.value("m", 0u);
    c.edge_list_path = g.value("edge_list", "");
    const auto& p = j.at("params");
    c.preset = p.value("preset", "desk");
    if (p.contains("c")) c.role_coefficient = p["c"].get<double>();
    if (p.contains("quorum_fraction")) c.quorum_fraction = p["quorum_fraction"].get<double>();
    if (p.contains("quorum")) c.quorum_override = p["quorum"].get<uint64_t>();
    if (p.contains("rank_space_max")) c.rank_space_override = p["rank_space_max"].get<uint64_t>();
    c.n_policy = NEstimatePolicy::parse(p.value("n_estimate_policy", "exact"));
    if (p.contains("forced_candidates")) c.forced_candidates = p["forced_candidates"].get<uint32_t>();
    if (p.contains("forced_referees")) c.forced_referees = p["forced_referees"].get<uint32_t>();
    c.distinct_ranks = p.value("distinct_ranks", false);
    c.debug_rank_tiebreak = p.value("debug_rank_tiebreak", false);
    c.adversaries = j.value("adversaries", std::vector<std::string>{"uniform"});
    c.trials = j.value("trials", 1u);
    c.master_seed = j.value("seed", 1ull);
    c.event_budget = j.value("event_budget", 1'000'000'000ull);
    c.out_dir = j.value("out", "");
    c.retention = retention_from_string(j.value("keep_traces", "none"));
    c.validate();
    return c;
}

namespace {

struct Cell {
    uint32_t n = 0;
    std::string adversary;
};

struct TrialPlan {
    std::vector<Cell> cells;
    uint32_t trials_per_cell = 0;
    size_t total() const { return cells.size() * trials_per_cell; }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

std::string ExperimentResult::summary_csv() const {
    std::string out =
        "family,n,adversary,trials,one_leader,one_leader_rate,multi_leader,collision_runs,"
        "no_candidate,referee_shortfall,other_failures,non_quiescent,kappa_mean,kappa_max,"
        "upsilon_max,tau_mean,tau_max,nc_mean,nc_sd,nr_mean,nr_sd,max_payload_transmissions\n";
    for (const auto& c : cells) {
        std::ostringstream row;
        row << c.family << ',' << c.n << ',' << c.adversary << ',' << c.trials << ','
            << c.one_leader << ',' << fmt(c.one_leader_rate) << ',' << c.multi_leader << ','
            << c.collision_runs << ',' << c.no_candidate << ',' << c.referee_shortfall << ','
            << c.other_failures << ',' << c.non_quiescent << ',' << fmt(c.kappa_mean) << ','
            << fmt(c.kappa_max) << ',' << fmt(c.upsilon_max) << ',' << fmt(c.tau_mean) << ','
            << fmt(c.tau_max) << ',' << fmt(c.nc_mean) << ',' << fmt(c.nc_sd) << ','
            << fmt(c.nr_mean) << ',' << fmt(c.nr_sd) << ',' << c.max_payload_transmissions
            << '\n';
        out += row.str();
    }
    return out;
}

std::string ExperimentResult::verdict_table() const {
    std::string out;
    for (const auto& line : verdict_lines) {
        out += line;
        out.push_back('\n');
    }
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, bool parallel) {
    config.validate();

    TrialPlan plan;
    plan.trials_per_cell = config.trials;
    std::vector<uint32_t> ns = config.n_values;
    Graph edge_list_graph;
    uint32_t edge_list_diameter = 0;
    if (config.family == GraphKind::EdgeList) {
        edge_list_graph = read_edge_list_file(config.edge_list_path);
        edge_list_diameter = diameter(edge_list_graph);
        ns = {edge_list_graph.node_count()};
    }
    for (uint32_t n : ns)
        for (const auto& adv : config.adversaries) plan.cells.push_back({n, adv});

    // Deterministic families are shared read-only across trials; random
    // graphs are regenerated per trial from the trial seed.
    std::map<uint32_t, std::pair<Graph, uint32_t>> shared;
    if (config.family == GraphKind::Ring || config.family == GraphKind::Torus2d ||
        config.family == GraphKind::Complete) {
        for (uint32_t n : ns) {
            GraphFamily fam{config.family, n, 0.0, 0, {}};
            Graph g = generate(fam, 0);
            uint32_t d = diameter(g);
            shared.emplace(n, std::make_pair(std::move(g), d));
        }
    }

    ExperimentResult result;
    result.reports.resize(plan.total());
    const RoleConfig roles = config.roles();
    const std::string family_label = elsim::to_string(config.family);

    auto run_one = [&](size_t gi) {
        size_t cell_idx = gi / plan.trials_per_cell;
        const Cell& cell = plan.cells[cell_idx];
        uint64_t seed = trial_seed(config.master_seed, gi);

        const Graph* g = nullptr;
        uint32_t d = 0;
        Graph local;
        if (config.family == GraphKind::EdgeList) {
            g = &edge_list_graph;
            d = edge_list_diameter;
        } else if (auto it = shared.find(cell.n); it != shared.end()) {
            g = &it->second.first;
            d = it->second.second;
        } else {
            GraphFamily fam{config.family, cell.n, config.edge_probability, config.edge_count, {}};
            local = generate(fam, derive_seed(seed, 0x67726170ULL));
            d = diameter_serial(local);
            g = &local;
        }

        ProtocolParams params = config.params_for(cell.n);
        auto adversary = make_adversary(cell.adversary);
        SimOptions options;
        options.event_budget = config.event_budget;
        options.record_trace = false;
        SimResult sim = run_simulation(*g, params, *adversary, seed, roles, options);
        RunReport& r = result.reports[gi];
        r = std::move(sim.report);
        r.family = family_label;
        r.diameter = d;
        r.trial = static_cast<uint32_t>(gi);
    };

    if (parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (long gi = 0; gi < static_cast<long>(plan.total()); ++gi)
            run_one(static_cast<size_t>(gi));
    } else {
        for (size_t gi = 0; gi < plan.total(); ++gi) run_one(gi);
    }

    // Aggregate by cell, in plan order, independent of execution order.
    for (size_t ci = 0; ci < plan.cells.size(); ++ci) {
        const Cell& cell = plan.cells[ci];
        CellSummary s;
        s.family = family_label;
        s.n = cell.n;
        s.adversary = cell.adversary;
        s.trials = plan.trials_per_cell;
        double kappa_sum = 0, tau_sum = 0;
        double nc_sum = 0, nc_sq = 0, nr_sum = 0, nr_sq = 0;
        for (uint32_t t = 0; t < plan.trials_per_cell; ++t) {
            const RunReport& r = result.reports[ci * plan.trials_per_cell + t];
            if (r.leaders.size() == 1) ++s.one_leader;
            if (r.leaders.size() > 1) ++s.multi_leader;
            if (r.rank_collision) ++s.collision_runs;
            if (r.failure == "no-candidate") ++s.no_candidate;
            if (r.failure == "referee-shortfall") ++s.referee_shortfall;
            if (r.failure == "other") ++s.other_failures;
            if (r.non_quiescent) ++s.non_quiescent;
            double kappa = static_cast<double>(r.total_transmissions) /
                           (static_cast<double>(r.m) * polylog2(r.n));
            double tau = r.completion_time / (static_cast<double>(r.diameter) + polylog2(r.n));
            double ups = static_cast<double>(r.unique_messages) / polylog2(r.n);
            kappa_sum += kappa;
            tau_sum += tau;
            s.kappa_max = std::max(s.kappa_max, kappa);
            s.tau_max = std::max(s.tau_max, tau);
            s.upsilon_max = std::max(s.upsilon_max, ups);
            nc_sum += r.candidate_count;
            nc_sq += static_cast<double>(r.candidate_count) * r.candidate_count;
            nr_sum += r.referee_count;
            nr_sq += static_cast<double>(r.referee_count) * r.referee_count;
            s.max_payload_transmissions =
                std::max(s.max_payload_transmissions, r.max_payload_transmissions);
        }
        double t = plan.trials_per_cell;
        s.one_leader_rate = s.one_leader / t;
        s.kappa_mean = kappa_sum / t;
        s.tau_mean = tau_sum / t;
        s.nc_mean = nc_sum / t;
        s.nr_mean = nr_sum / t;
        s.nc_sd = std::sqrt(std::max(0.0, nc_sq / t - s.nc_mean * s.nc_mean));
        s.nr_sd = std::sqrt(std::max(0.0, nr_sq / t - s.nr_mean * s.nr_mean));
        result.cells.push_back(std::move(s));
    }

    // Hard verdicts across every run. Referee chosen-monotonicity is only
    // asserted for collision-free runs.
    size_t safety_fail = 0, quorum_fail = 0, envelope_fail = 0, engine_fail = 0;
    for (const auto& r : result.reports) {
        if (!verify_safety(r).pass) ++safety_fail;
        if (!verify_quorum_counts(r).pass) ++quorum_fail;
        if (!time_envelope_ok(r)) ++envelope_fail;
        if (r.non_quiescent || !r.quiescence_clean || !r.all_awake ||
            (!r.chosen_monotone && !r.rank_collision))
            ++engine_fail;
    }
    result.safety_ok = safety_fail == 0;
    result.quorum_ok = quorum_fail == 0;
    result.envelope_ok = envelope_fail == 0;
    result.fifo_ok = engine_fail == 0;

    auto verdict = [&](const std::string& name, bool ok, const std::string& detail) {
        result.verdict_lines.push_back((ok ? "PASS  " : "FAIL  ") + name +
                                       (detail.empty() ? "" : "  (" + detail + ")"));
    };
    verdict("safety: at most one leader per run", result.safety_ok,
            safety_fail ? std::to_string(safety_fail) + " runs failed" : "");
    verdict("quorum-count: exact and distinct approvals behind every election", result.quorum_ok,
            quorum_fail ? std::to_string(quorum_fail) + " runs failed" : "");
    verdict("envelope: completion within " + std::to_string(kTimeEnvelopeFactor) + "*(D+U)",
            result.envelope_ok, envelope_fail ? std::to_string(envelope_fail) + " runs failed" : "");
    verdict("network model: quiescence, wake propagation, channel bookkeeping", result.fifo_ok,
            engine_fail ? std::to_string(engine_fail) + " runs flagged" : "");

    // Statistical context lines (informational, not exit-affecting).
    for (const auto& c : result.cells) {
        std::ostringstream os;
        os << "INFO  " << c.family << " n=" << c.n << " " << c.adversary << ": one-leader "
           << c.one_leader << "/" << c.trials << " (" << fmt(c.one_leader_rate) << ")"
           << " multi=" << c.multi_leader << " collisions=" << c.collision_runs;
        result.verdict_lines.push_back(os.str());
    }
    if (!result.reports.empty()) {
        auto conc =
            check_role_concentration(result.reports, config.params_for(result.reports[0].n));
        if (!conc.inconclusive)
            result.verdict_lines.push_back(std::string(conc.pass ? "PASS  " : "FAIL  ") +
                                           "role concentration  (" + conc.detail + ")");
        auto msg = check_message_bound(result.reports);
        if (!msg.inconclusive)
            result.verdict_lines.push_back(std::string(msg.pass ? "PASS  " : "FAIL  ") +
                                           "message bound  (" + msg.detail + ")");
        auto tb = check_time_bound(result.reports);
        if (!tb.inconclusive)
            result.verdict_lines.push_back(std::string(tb.pass ? "PASS  " : "FAIL  ") +
                                           "time bound  (" + tb.detail + ")");
    }
    return result;
}

namespace {

bool trial_failed(const RunReport& r) {
    if (r.non_quiescent || !r.quiescence_clean || !r.all_awake) return true;
    if (!r.chosen_monotone && !r.rank_collision) return true;
    if (!verify_safety(r).pass) return true;
    if (!verify_quorum_counts(r).pass) return true;
    if (!time_envelope_ok(r)) return true;
    return verify_liveness(r).outcome == LivenessVerdict::Outcome::Fail;
}

}  // namespace

void write_artifacts(const ExperimentConfig& config, const ExperimentResult& result) {
    if (config.out_dir.empty()) return;
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    {
        std::ofstream f(config.out_dir + "/config.json");
        f << config.to_json() << '\n';
    }
    {
        std::ofstream f(config.out_dir + "/reports.jsonl");
        for (const auto& r : result.reports) f << r.to_json() << '\n';
    }
    {
        std::ofstream f(config.out_dir + "/summary.csv");
        f << result.summary_csv();
    }
    {
        std::ofstream f(config.out_dir + "/verdicts.txt");
        f << result.verdict_table();
    }
    if (config.retention == TraceRetention::None) return;

    // Traces are regenerated deterministically for the trials that keep one;
    // the sweep itself never pays for recording.
    fs::create_directories(config.out_dir + "/traces");
    const RoleConfig roles = config.roles();
    for (const auto& r : result.reports) {
        if (config.retention == TraceRetention::FailuresOnly && !trial_failed(r)) continue;
        Graph g;
        if (config.family == GraphKind::EdgeList) {
            g = read_edge_list_file(config.edge_list_path);
        } else if (config.family == GraphKind::RandomConnected) {
            GraphFamily fam{config.family, r.n, config.edge_probability, config.edge_count, {}};
            g = generate(fam, derive_seed(r.seed, 0x67726170ULL));
        } else {
            GraphFamily fam{config.family, r.n, 0.0, 0, {}};
            g = generate(fam, 0);
        }
        ProtocolParams params = config.params_for(r.n);
        auto adversary = make_adversary(r.adversary);
        SimOptions options;
        options.event_budget = config.event_budget;
        options.record_trace = true;
        SimResult sim = run_simulation(g, params, *adversary, r.seed, roles, options);
        sim.trace.header.family = r.family;
        write_trace(sim.trace,
                    config.out_dir + "/traces/trial_" + std::to_string(r.trial) + ".jsonl");
    }
}

ReplayOutcome replay_file(const std::string& path) {
    ReplayOutcome out;
    Trace stored = read_trace(path);
    ReplayResult rr = replay_trace(stored);
    if (!rr.match) {
        out.ok = false;
        out.message = "replay mismatch at record " + std::to_string(rr.first_mismatch) + ": " +
                      rr.detail;
        return out;
    }
    auto tc = validate_trace(stored);
    auto safety = verify_safety(stored);
    out.ok = tc.pass() && safety.pass;
    std::ostringstream os;
    os << "replay: " << stored.records.size() << " records regenerated exactly; "
       << "trace checks " << (tc.pass() ? "ok" : "FAILED: " + tc.detail) << "; safety "
       << (safety.pass ? "ok" : "FAILED: " + safety.detail);
    out.message = os.str();
    return out;
}

}  // namespace elsim
