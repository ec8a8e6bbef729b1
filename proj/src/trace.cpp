#include "elsim/trace.hpp"

#include <zlib.h>

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace elsim {

using json = nlohmann::ordered_json;

namespace {

json params_to_json(const ProtocolParams& p) {
    return json{{"n_estimate", p.n_estimate},
                {"role_coefficient", p.role_coefficient},
                {"quorum_fraction", p.quorum_fraction},
                {"quorum_size", p.quorum_size},
                {"quorum_high", p.quorum_high},
                {"rank_space_max", p.rank_space_max},
                {"role_probability", p.role_probability}};
}

ProtocolParams params_from_json(const json& j) {
    ProtocolParams p;
    p.n_estimate = j.at("n_estimate").get<uint64_t>();
    p.role_coefficient = j.at("role_coefficient").get<double>();
    p.quorum_fraction = j.at("quorum_fraction").get<double>();
    p.quorum_size = j.at("quorum_size").get<uint64_t>();
    p.quorum_high = j.at("quorum_high").get<uint64_t>();
    p.rank_space_max = j.at("rank_space_max").get<uint64_t>();
    p.role_probability = j.at("role_probability").get<double>();
    p.validate();
    return p;
}

std::vector<std::string> notice_names(uint16_t bits) {
    std::vector<std::string> out;
    if (bits & kNoticeElected) out.emplace_back("elected");
    if (bits & kNoticeLearnedLeader) out.emplace_back("learned-leader");
    if (bits & kNoticeTerminated) out.emplace_back("terminated");
    if (bits & kNoticeCountedApproval) out.emplace_back("counted-approval");
    if (bits & kNoticeCollision) out.emplace_back("collision");
    return out;
}

uint16_t notices_from_names(const json& arr) {
    uint16_t bits = 0;
    for (const auto& s : arr) {
        std::string v = s.get<std::string>();
        if (v == "elected") bits |= kNoticeElected;
        else if (v == "learned-leader") bits |= kNoticeLearnedLeader;
        else if (v == "terminated") bits |= kNoticeTerminated;
        else if (v == "counted-approval") bits |= kNoticeCountedApproval;
        else if (v == "collision") bits |= kNoticeCollision;
        else throw std::invalid_argument("trace: unknown notice " + v);
    }
    return bits;
}

}  // namespace

std::string TraceRecord::to_line() const {
    json j;
    if (kind == Kind::Wake) {
        j["k"] = "wake";
        j["t"] = t;
        j["node"] = dst;
        j["ext"] = external;
        j["rank"] = rank;
        j["cand"] = candidate;
        j["ref"] = referee;
    } else {
        j["k"] = "deliver";
        j["t"] = t;
        j["s"] = sent;
        j["src"] = src;
        j["dst"] = dst;
        j["p"] = to_hex(payload);
    }
    if (notices) j["n"] = notice_names(notices);
    return j.dump();
}

TraceRecord TraceRecord::from_line(const std::string& line) {
    json j = json::parse(line);
    TraceRecord r;
    std::string k = j.at("k").get<std::string>();
    if (k == "wake") {
        r.kind = Kind::Wake;
        r.t = j.at("t").get<double>();
        r.dst = j.at("node").get<uint32_t>();
        r.external = j.at("ext").get<bool>();
        r.rank = j.at("rank").get<uint64_t>();
        r.candidate = j.at("cand").get<bool>();
        r.referee = j.at("ref").get<bool>();
    } else if (k == "deliver") {
        r.kind = Kind::Deliver;
        r.t = j.at("t").get<double>();
        r.sent = j.at("s").get<double>();
        r.src = j.at("src").get<uint32_t>();
        r.dst = j.at("dst").get<uint32_t>();
        r.payload = from_hex(j.at("p").get<std::string>());
    } else {
        throw std::invalid_argument("trace: unknown record kind " + k);
    }
    if (j.contains("n")) r.notices = notices_from_names(j["n"]);
    return r;
}

std::string TraceHeader::to_line() const {
    json j;
    j["k"] = "header";
    j["version"] = 1;
    j["n"] = n;
    json es = json::array();
    for (const auto& [u, v] : edges) es.push_back(json::array({u, v}));
    j["edges"] = std::move(es);
    j["family"] = family;
    j["params"] = params_to_json(params);
    j["adversary"] = adversary;
    j["adversary_seed"] = adversary_seed;
    j["run_seed"] = run_seed;
    json roles_j;
    roles_j["distinct_ranks"] = roles.distinct_ranks;
    roles_j["debug_rank_tiebreak"] = roles.debug_rank_tiebreak;
    if (roles.forced_candidates) roles_j["candidates"] = *roles.forced_candidates;
    if (roles.forced_referees) roles_j["referees"] = *roles.forced_referees;
    j["roles"] = std::move(roles_j);
    return j.dump();
}

TraceHeader TraceHeader::from_line(const std::string& line) {
    json j = json::parse(line);
    if (j.value("k", "") != std::string("header"))
        throw std::invalid_argument("trace: missing header line");
    TraceHeader h;
    h.n = j.at("n").get<uint32_t>();
    for (const auto& e : j.at("edges"))
        h.edges.emplace_back(e.at(0).get<uint32_t>(), e.at(1).get<uint32_t>());
    h.family = j.value("family", "");
    h.params = params_from_json(j.at("params"));
    h.adversary = j.at("adversary").get<std::string>();
    h.adversary_seed = j.at("adversary_seed").get<uint64_t>();
    h.run_seed = j.at("run_seed").get<uint64_t>();
    const auto& rj = j.at("roles");
    h.roles.distinct_ranks = rj.value("distinct_ranks", false);
    h.roles.debug_rank_tiebreak = rj.value("debug_rank_tiebreak", false);
    if (rj.contains("candidates")) h.roles.forced_candidates = rj["candidates"].get<uint32_t>();
    if (rj.contains("referees")) h.roles.forced_referees = rj["referees"].get<uint32_t>();
    return h;
}

namespace {

bool has_gz_suffix(const std::string& path) {
    return path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

void write_all(const std::string& path, const std::string& body) {
    if (has_gz_suffix(path)) {
        gzFile f = gzopen(path.c_str(), "wb");
        if (!f) throw std::runtime_error("cannot open for write: " + path);
        int written = gzwrite(f, body.data(), static_cast<unsigned>(body.size()));
        gzclose(f);
        if (written != static_cast<int>(body.size()))
            throw std::runtime_error("short gzip write: " + path);
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    f << body;
}

std::string read_all(const std::string& path) {
    if (has_gz_suffix(path)) {
        gzFile f = gzopen(path.c_str(), "rb");
        if (!f) throw std::runtime_error("cannot open: " + path);
        std::string out;
        char buf[1 << 16];
        int got;
        while ((got = gzread(f, buf, sizeof buf)) > 0) out.append(buf, static_cast<size_t>(got));
        gzclose(f);
        if (got < 0) throw std::runtime_error("gzip read error: " + path);
        return out;
    }
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

void write_trace(const Trace& trace, const std::string& path) {
    std::string body = trace.header.to_line();
    body.push_back('\n');
    for (const auto& r : trace.records) {
        body += r.to_line();
        body.push_back('\n');
    }
    write_all(path, body);
}

Trace read_trace(const std::string& path) {
    std::istringstream in(read_all(path));
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("trace: empty file");
    Trace t;
    t.header = TraceHeader::from_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        t.records.push_back(TraceRecord::from_line(line));
    }
    return t;
}

}  // namespace elsim
