#include "elsim/report.hpp"

#include <json.hpp>

namespace elsim {

using json = nlohmann::ordered_json;

std::string RunReport::to_json() const {
    json j;
    j["n"] = n;
    j["m"] = m;
    j["diameter"] = diameter;
    j["family"] = family;
    j["adversary"] = adversary;
    j["seed"] = seed;
    j["trial"] = trial;
    j["n_estimate"] = n_estimate;
    j["quorum_size"] = quorum_size;
    j["role_probability"] = role_probability;
    j["leaders"] = leaders;
    j["leader_node"] = leader_node;
    j["agreed_leader"] = agreed_leader;
    j["all_terminated"] = all_terminated;
    j["all_awake"] = all_awake;
    j["candidates"] = candidate_count;
    j["referees"] = referee_count;
    j["transmissions"] = total_transmissions;
    j["unique_messages"] = unique_messages;
    j["max_payload_transmissions"] = max_payload_transmissions;
    j["max_referee_adjudications"] = max_referee_adjudications;
    j["completion_time"] = completion_time;
    j["last_delivery_time"] = last_delivery_time;
    j["elected_time"] = elected_time;
    j["wake_span"] = wake_span;
    j["rank_collision"] = rank_collision;
    j["non_quiescent"] = non_quiescent;
    j["quiescence_clean"] = quiescence_clean;
    j["chosen_monotone"] = chosen_monotone;
    j["failure"] = failure;
    json counted = json::array();
    for (const auto& [cand, refs] : counted_approvals)
        counted.push_back(json{{"candidate", cand}, {"referees", refs}});
    j["counted_approvals"] = std::move(counted);
    return j.dump();
}

RunReport RunReport::from_json(const std::string& text) {
    json j = json::parse(text);
    RunReport r;
    r.n = j.at("n").get<uint32_t>();
    r.m = j.at("m").get<uint32_t>();
    r.diameter = j.at("diameter").get<uint32_t>();
    r.family = j.at("family").get<std::string>();
    r.adversary = j.at("adversary").get<std::string>();
    r.seed = j.at("seed").get<uint64_t>();
    r.trial = j.at("trial").get<uint32_t>();
    r.n_estimate = j.at("n_estimate").get<uint64_t>();
    r.quorum_size = j.at("quorum_size").get<uint64_t>();
    r.role_probability = j.at("role_probability").get<double>();
    r.leaders = j.at("leaders").get<std::vector<uint64_t>>();
    r.leader_node = j.at("leader_node").get<int64_t>();
    r.agreed_leader = j.at("agreed_leader").get<uint64_t>();
    r.all_terminated = j.at("all_terminated").get<bool>();
    r.all_awake = j.at("all_awake").get<bool>();
    r.candidate_count = j.at("candidates").get<uint32_t>();
    r.referee_count = j.at("referees").get<uint32_t>();
    r.total_transmissions = j.at("transmissions").get<uint64_t>();
    r.unique_messages = j.at("unique_messages").get<uint32_t>();
    r.max_payload_transmissions = j.at("max_payload_transmissions").get<uint64_t>();
    r.max_referee_adjudications = j.at("max_referee_adjudications").get<uint64_t>();
    r.completion_time = j.at("completion_time").get<double>();
    r.last_delivery_time = j.at("last_delivery_time").get<double>();
    r.elected_time = j.at("elected_time").get<double>();
    r.wake_span = j.at("wake_span").get<double>();
    r.rank_collision = j.at("rank_collision").get<bool>();
    r.non_quiescent = j.at("non_quiescent").get<bool>();
    r.quiescence_clean = j.at("quiescence_clean").get<bool>();
    r.chosen_monotone = j.at("chosen_monotone").get<bool>();
    r.failure = j.at("failure").get<std::string>();
    for (const auto& c : j.at("counted_approvals"))
        r.counted_approvals.emplace_back(c.at("candidate").get<uint64_t>(),
                                         c.at("referees").get<std::vector<uint64_t>>());
    return r;
}

}  // namespace elsim
