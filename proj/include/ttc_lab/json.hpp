// JSON interchange (nlohmann/json) for domains, profiles, allocations, reports
// and table mechanisms, plus the on-disk classification cache.
#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "ttc_lab/axioms.hpp"
#include "ttc_lab/core.hpp"
#include "ttc_lab/mechanisms.hpp"
#include "ttc_lab/richness.hpp"
#include "ttc_lab/serialize.hpp"
#include "ttc_lab/ttc.hpp"
#include "ttc_lab/verifier.hpp"

namespace ttc_lab {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Core types
// ---------------------------------------------------------------------------

inline Json domain_to_json(const Domain& d) {
    Json prefs = Json::array();
    for (const Preference& p : d) {
        prefs.push_back(emit_pref(p));
    }
    return Json{{"n", d.n()}, {"preferences", std::move(prefs)}};
}

inline Domain domain_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("preferences") || !j["preferences"].is_array()) {
        throw ParseError("domain JSON needs a \"preferences\" array", 0);
    }
    std::optional<int> n;
    if (j.contains("n")) {
        if (!j["n"].is_number_integer()) {
            throw ParseError("domain JSON \"n\" must be an integer", 0);
        }
        n = j["n"].get<int>();
    }
    std::vector<Preference> prefs;
    std::size_t i = 0;
    for (const Json& p : j["preferences"]) {
        if (!p.is_string()) {
            throw ParseError("preference entries must be strings", i);
        }
        prefs.push_back(parse_pref(p.get<std::string>(), n));
        ++i;
    }
    return Domain(std::move(prefs));
}

inline Json profile_prefs_json(const Profile& p) {
    Json prefs = Json::array();
    for (const Preference& pref : p.prefs()) {
        prefs.push_back(emit_pref(pref));
    }
    return prefs;
}

inline Json profile_to_json(const Profile& p) { return Json{{"prefs", profile_prefs_json(p)}}; }

/// Accepts {"prefs": [...]} or a bare array of preference strings.
inline Profile profile_from_json(const Json& j) {
    const Json& arr = j.is_object() && j.contains("prefs") ? j["prefs"] : j;
    if (!arr.is_array()) {
        throw ParseError("profile JSON must be an array of preference strings", 0);
    }
    std::vector<Preference> prefs;
    for (const Json& p : arr) {
        if (!p.is_string()) {
            throw ParseError("profile entries must be strings", prefs.size());
        }
        prefs.push_back(parse_pref(p.get<std::string>()));
    }
    return Profile(std::move(prefs));
}

inline Profile parse_profile(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("profile is not valid JSON: ") + e.what(), e.byte);
    }
    return profile_from_json(j);
}

inline Json subset_to_json(SubsetO s) {
    Json out = Json::array();
    for (ObjectId o : s.members()) {
        out.push_back(o.index);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline Json top_two_to_json(const TopTwoReport& r) {
    Json failures = Json::array();
    for (const TopTwoFailure& f : r.failures) {
        failures.push_back(Json{{"subset", subset_to_json(f.subset)}, {"a", f.a.index}, {"b", f.b.index}});
    }
    return Json{{"k", 2}, {"satisfied", r.satisfied}, {"failures", std::move(failures)}};
}

inline Json top_k_to_json(const TopKReport& r) {
    Json failures = Json::array();
    for (const TopKFailure& f : r.failures) {
        Json tuple = Json::array();
        for (ObjectId o : f.tuple) {
            tuple.push_back(o.index);
        }
        failures.push_back(Json{{"subset", subset_to_json(f.subset)}, {"tuple", std::move(tuple)}});
    }
    return Json{{"k", r.k}, {"satisfied", r.satisfied}, {"failures", std::move(failures)}};
}

inline Json trace_to_json(const TtcTrace& t) {
    Json rounds = Json::array();
    for (const TtcRound& r : t.rounds) {
        Json remaining = Json::array();
        for (AgentId a : r.remaining_agents) {
            remaining.push_back(a.index);
        }
        Json cycles = Json::array();
        for (const auto& c : r.cycles) {
            Json cycle = Json::array();
            for (AgentId a : c) {
                cycle.push_back(a.index);
            }
            cycles.push_back(std::move(cycle));
        }
        rounds.push_back(Json{{"remaining_agents", std::move(remaining)}, {"cycles", std::move(cycles)}});
    }
    return Json{{"allocation", emit_allocation(t.result)}, {"rounds", std::move(rounds)}};
}

inline Json violation_to_json(const AxiomViolation& v) {
    Json out{{"kind", to_string(v.kind)}};
    Json profiles = Json::array();
    for (const Profile& p : v.profiles) {
        profiles.push_back(profile_prefs_json(p));
    }
    Json agents = Json::array();
    for (AgentId a : v.agents) {
        agents.push_back(a.index);
    }
    Json allocations = Json::array();
    for (const Allocation& x : v.allocations) {
        allocations.push_back(emit_allocation(x));
    }
    out["profiles"] = std::move(profiles);
    out["agents"] = std::move(agents);
    out["allocations"] = std::move(allocations);
    if (!v.misreports.empty()) {
        Json mis = Json::array();
        for (const Preference& p : v.misreports) {
            mis.push_back(emit_pref(p));
        }
        out["misreports"] = std::move(mis);
    }
    return out;
}

inline Json axiom_report_to_json(const AxiomReport& r) {
    Json results = Json::array();
    for (const AxiomResult& a : r.results) {
        Json row{{"axiom", to_string(a.axiom)}, {"passed", a.passed}};
        if (a.violation) {
            row["violation"] = violation_to_json(*a.violation);
        }
        results.push_back(std::move(row));
    }
    return Json{{"clean", r.clean()}, {"results", std::move(results)}};
}

// ---------------------------------------------------------------------------
// Table mechanisms
// ---------------------------------------------------------------------------

/// [{"profile": [...], "allocation": "..."}, ...] in profile order.
inline Json table_to_json(const Mechanism& m) {
    const auto* table = std::get_if<TableRule>(&m.rule());
    if (table == nullptr) {
        throw FormatError("only table mechanisms serialize to JSON; tabulate first");
    }
    Json out = Json::array();
    for (const auto& [p, x] : table->entries) {
        out.push_back(Json{{"profile", profile_prefs_json(p)}, {"allocation", emit_allocation(x)}});
    }
    return out;
}

inline Mechanism table_from_json(const Json& j) {
    if (!j.is_array()) {
        throw ParseError("table mechanism JSON must be an array", 0);
    }
    std::map<Profile, Allocation> entries;
    std::size_t i = 0;
    for (const Json& row : j) {
        if (!row.is_object() || !row.contains("profile") || !row.contains("allocation") ||
            !row["allocation"].is_string()) {
            throw ParseError("table row needs \"profile\" and \"allocation\"", i);
        }
        Profile p = profile_from_json(row["profile"]);
        Allocation x = parse_allocation(row["allocation"].get<std::string>());
        if (!entries.emplace(std::move(p), std::move(x)).second) {
            throw ParseError("table lists a profile twice", i);
        }
        ++i;
    }
    return table_mechanism(std::move(entries));
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

/// Status and deterministic stats; wall time only when asked for.
inline Json classification_to_json(const Classification& c, bool include_timing = false) {
    Json stats{{"profiles", c.stats.profiles},
               {"profiles_visited", c.stats.profiles_visited},
               {"nodes_expanded", c.stats.nodes_expanded},
               {"revisions", c.stats.revisions}};
    if (include_timing) {
        stats["wall_seconds"] = c.stats.wall_seconds;
    }
    Json out{{"status", to_string(c.status)}, {"stats", std::move(stats)}};
    if (!c.note.empty()) {
        out["note"] = c.note;
    }
    return out;
}

inline Status parse_status(const std::string& s) {
    if (s == "unique_ttc") return Status::UniqueTTC;
    if (s == "multiple") return Status::Multiple;
    if (s == "budget_exceeded") return Status::BudgetExceeded;
    throw ParseError("unknown status '" + s + "'", 0);
}

inline Json corollary_to_json(const CorollaryReport& r) {
    Json rows = Json::array();
    for (const CorollaryRow& row : r.rows) {
        rows.push_back(Json{{"domain", row.name},
                            {"top_two", row.top_two},
                            {"pair", to_string(row.pair)},
                            {"pareto", to_string(row.pareto)},
                            {"inconclusive", row.inconclusive},
                            {"consistent", row.consistent}});
    }
    return Json{{"domains", r.rows.size()},
                {"all_consistent", r.all_consistent()},
                {"inconclusive", r.inconclusive()},
                {"rows", std::move(rows)}};
}

// ---------------------------------------------------------------------------
// Files and the classification cache
// ---------------------------------------------------------------------------

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path);
    }
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what(), e.byte);
    }
}

inline void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path);
    }
    out << j.dump(2) << '\n';
}

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

/// Key for a classification request: per-agent domains, efficiency and limits.
inline std::string classification_key(const ProfileSpace& space, Efficiency e, const ClassifyOptions& o) {
    std::string text = to_string(e) + "|" + std::to_string(o.profile_cap) + "|" + std::to_string(o.node_budget);
    for (const Domain& d : space.domains()) {
        text += "|" + emit_domain(d, TextForm::General);
    }
    return fnv1a_hex(text);
}

/// JSON map from request key to {"classification": ..., "witness": ...}.
class ClassificationCache {
public:
    explicit ClassificationCache(std::string path) : path_(std::move(path)) {
        std::ifstream in(path_);
        if (in) {
            try {
                entries_ = Json::parse(in);
            } catch (const nlohmann::json::parse_error&) {
                entries_ = Json::object();
            }
        }
        if (!entries_.is_object()) {
            entries_ = Json::object();
        }
    }

    const Json* find(const std::string& key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? nullptr : &*it;
    }

    void store(const std::string& key, Json value) {
        entries_[key] = std::move(value);
        write_json_file(path_, entries_);
    }

private:
    std::string path_;
    Json entries_ = Json::object();
};

}  // namespace ttc_lab
