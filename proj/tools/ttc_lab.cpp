// ttc-lab: command-line front end for the ttc_lab library.
//
// Exit codes: 0 success / satisfied / unique TTC, 1 other library error,
// 2 usage or input parse error, 3 a checked property fails,
// 4 multiple mechanisms (verify classify), 5 budget exceeded.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ttc_lab/json.hpp"

using namespace ttc_lab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitFails = 3;
constexpr int kExitMultiple = 4;
constexpr int kExitBudget = 5;

enum class Format { Json, Text };

struct Output {
    Format format = Format::Json;

    void json(const Json& j) const { std::cout << j.dump(2) << '\n'; }
    void text(const std::string& s) const { std::cout << s << '\n'; }
};

/// Thrown for malformed command-line values; mapped to exit 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Domain load_domain(const std::string& path) { return domain_from_json(read_json_file(path)); }

LinearOrderSpec parse_axis(const std::string& text, int n, bool cyclic) {
    if (text.empty()) {
        return LinearOrderSpec::identity(n, cyclic);
    }
    const Preference p = parse_pref(text, n);
    return LinearOrderSpec{std::vector<ObjectId>(p.order().begin(), p.order().end()), cyclic};
}

/// "1>3,2>4" -> {(o1,o3), (o2,o4)}
std::vector<std::pair<ObjectId, ObjectId>> parse_edges(const std::string& text) {
    std::vector<std::pair<ObjectId, ObjectId>> edges;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto gt = item.find('>');
        if (gt == std::string::npos) {
            throw UsageError("edge '" + item + "' is not of the form a>b");
        }
        try {
            auto strip = [](std::string s) {
                s.erase(0, s.find_first_not_of(" o"));
                return std::stoi(s);
            };
            edges.emplace_back(ObjectId{strip(item.substr(0, gt))}, ObjectId{strip(item.substr(gt + 1))});
        } catch (const std::logic_error&) {
            throw UsageError("edge '" + item + "' is not of the form a>b");
        }
    }
    return edges;
}

/// ttc | endowment | table:FILE | diff:DOMAIN_FILE | FILE (a table)
Mechanism load_mechanism(const std::string& spec) {
    if (spec == "ttc") {
        return ttc_mechanism();
    }
    if (spec == "endowment") {
        return endowment_mechanism();
    }
    if (spec.rfind("table:", 0) == 0) {
        return table_from_json(read_json_file(spec.substr(6)));
    }
    if (spec.rfind("diff:", 0) == 0) {
        return build_diff_mechanism(load_domain(spec.substr(5)));
    }
    if (std::filesystem::exists(spec)) {
        return table_from_json(read_json_file(spec));
    }
    throw UsageError("unknown mechanism '" + spec + "' (ttc, endowment, table:FILE, diff:DOMAIN)");
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

void emit_or_write(const Output& out, const std::string& path, const Json& j) {
    if (path.empty()) {
        out.json(j);
    } else {
        write_json_file(path, j);
    }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct DomainGenArgs {
    std::string kind;
    int n = 0;
    std::string axis;
    int peak = 1;
    std::string edges;
    std::string out;
};

int domain_gen(const Output& out, const DomainGenArgs& a) {
    Domain d = [&] {
        if (a.kind == "unrestricted") return unrestricted(a.n);
        if (a.kind == "sp") return single_peaked(a.n, parse_axis(a.axis, a.n, false));
        if (a.kind == "sp2") return single_peaked_two_adjacent(a.n, parse_axis(a.axis, a.n, false), a.peak);
        if (a.kind == "sd") return single_dipped(a.n, parse_axis(a.axis, a.n, false));
        if (a.kind == "circular") return circular(a.n, parse_axis(a.axis, a.n, true));
        return partial_agreement(a.n, PartialOrderSpec(a.n, parse_edges(a.edges)));
    }();
    if (!a.out.empty()) {
        write_json_file(a.out, domain_to_json(d));
    } else if (out.format == Format::Text) {
        out.text(emit_domain(d));
    } else {
        out.json(domain_to_json(d));
    }
    return kExitOk;
}

int domain_check(const Output& out, const std::string& in, int k) {
    const Domain d = load_domain(in);
    bool satisfied = false;
    Json report;
    if (k == 2) {
        const TopTwoReport r = check_top_two(d);
        satisfied = r.satisfied;
        report = top_two_to_json(r);
    } else {
        const TopKReport r = check_top_k(d, k);
        satisfied = r.satisfied;
        report = top_k_to_json(r);
    }
    if (out.format == Format::Text) {
        std::string line = std::string("top-") + std::to_string(k) + (satisfied ? ": satisfied" : ": fails");
        if (!satisfied) {
            line += " (" + std::to_string(report["failures"].size()) + " failures)";
        }
        out.text(line);
    } else {
        out.json(report);
    }
    return satisfied ? kExitOk : kExitFails;
}

int ttc_run(const Output& out, const std::string& profile_text, bool trace) {
    const Profile p = parse_profile(profile_text);
    const TtcTrace t = ttc_trace(p);
    if (out.format == Format::Text) {
        out.text(emit_allocation(t.result));
        if (trace) {
            for (std::size_t r = 0; r < t.rounds.size(); ++r) {
                std::string line = "round " + std::to_string(r + 1) + ":";
                for (const auto& c : t.rounds[r].cycles) {
                    line += " (";
                    for (std::size_t k = 0; k < c.size(); ++k) {
                        line += (k ? " " : "") + std::to_string(c[k].index);
                    }
                    line += ")";
                }
                out.text(line);
            }
        }
        return kExitOk;
    }
    out.json(trace ? trace_to_json(t) : Json{{"allocation", emit_allocation(t.result)}});
    return kExitOk;
}

ProfileSpace load_space(const std::string& domain, const std::vector<std::string>& hetero) {
    if (!hetero.empty()) {
        std::vector<Domain> per_agent;
        for (const std::string& path : hetero) {
            per_agent.push_back(load_domain(path));
        }
        return ProfileSpace(std::move(per_agent));
    }
    if (domain.empty()) {
        throw UsageError("one of --domain or --hetero is required");
    }
    return ProfileSpace::common(load_domain(domain));
}

int axioms_check(const Output& out, const std::string& mech_spec, const std::string& domain,
                 const std::vector<std::string>& hetero, const std::string& axioms) {
    const Mechanism m = load_mechanism(mech_spec);
    const ProfileSpace space = load_space(domain, hetero);
    std::set<Axiom> which;
    for (const std::string& a : split_list(axioms)) {
        try {
            which.insert(parse_axiom(a));
        } catch (const DomainError& e) {
            throw UsageError(e.what());
        }
    }
    if (which.empty()) {
        throw UsageError("--axioms lists no axioms");
    }
    const AxiomReport r = check_mechanism(m, space, which);
    if (out.format == Format::Text) {
        for (const AxiomResult& res : r.results) {
            out.text(to_string(res.axiom) + ": " + (res.passed ? "pass" : "FAIL"));
        }
    } else {
        out.json(axiom_report_to_json(r));
    }
    return r.clean() ? kExitOk : kExitFails;
}

int mech_build_counterexample(const Output& out, const std::string& domain_path, const std::string& out_path) {
    const Domain d = load_domain(domain_path);
    const Counterexample c = build_necessity_counterexample(d);
    Json summary{{"constructed", c.mechanism.has_value()}, {"reason", c.reason}};
    if (c.failing_subset) {
        summary["failing_subset"] = subset_to_json(*c.failing_subset);
    }
    if (!c.mechanism) {
        if (out.format == Format::Text) {
            out.text("no counterexample: " + c.reason);
        } else {
            out.json(summary);
        }
        return kExitFails;
    }
    const Json table = table_to_json(tabulate(*c.mechanism, ProfileSpace::common(d)));
    if (out_path.empty()) {
        summary["mechanism"] = table;
        if (out.format == Format::Text) {
            out.text(c.mechanism->kind() + ": " + c.reason);
        } else {
            out.json(summary);
        }
        return kExitOk;
    }
    write_json_file(out_path, table);
    summary["mechanism"] = out_path;
    if (out.format == Format::Text) {
        out.text(c.mechanism->kind() + ": " + c.reason + " -> " + out_path);
    } else {
        out.json(summary);
    }
    return kExitOk;
}

int mech_eval(const Output& out, const std::string& mech_spec, const std::string& profile_text) {
    const Mechanism m = load_mechanism(mech_spec);
    const Allocation x = m(parse_profile(profile_text));
    if (out.format == Format::Text) {
        out.text(emit_allocation(x));
    } else {
        out.json(Json{{"allocation", emit_allocation(x)}});
    }
    return kExitOk;
}

struct ClassifyArgs {
    std::string domain;
    std::vector<std::string> hetero;
    std::string efficiency;
    std::uint64_t budget = ClassifyOptions{}.node_budget;
    std::uint64_t profile_cap = ClassifyOptions{}.profile_cap;
    std::string out;
    std::string witness;
    std::string cache;
    bool timing = false;
};

int status_exit(Status s) {
    switch (s) {
        case Status::UniqueTTC: return kExitOk;
        case Status::Multiple: return kExitMultiple;
        case Status::BudgetExceeded: return kExitBudget;
    }
    return kExitError;
}

int verify_classify(const Output& out, const ClassifyArgs& a) {
    Efficiency eff;
    try {
        eff = parse_efficiency(a.efficiency);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    const ProfileSpace space = load_space(a.domain, a.hetero);
    const ClassifyOptions options{a.profile_cap, a.budget};

    std::string cache_path = a.cache;
    if (cache_path.empty()) {
        if (const char* env = std::getenv("TTC_LAB_CACHE")) {
            cache_path = env;
        }
    }
    std::optional<ClassificationCache> cache;
    const std::string key = classification_key(space, eff, options);
    Json report;
    Json witness;
    bool hit = false;
    if (!cache_path.empty()) {
        cache.emplace(cache_path);
        if (const Json* entry = cache->find(key)) {
            report = (*entry)["classification"];
            witness = entry->value("witness", Json());
            hit = true;
        }
    }
    if (!hit) {
        const Classification c = classify(space, eff, options);
        report = classification_to_json(c, a.timing);
        if (c.witness) {
            witness = table_to_json(*c.witness);
        }
        if (cache) {
            Json stored{{"classification", classification_to_json(c, false)}};
            if (c.witness) {
                stored["witness"] = witness;
            }
            cache->store(key, std::move(stored));
        }
    }
    const Status status = parse_status(report["status"].get<std::string>());
    report["efficiency"] = to_string(eff);
    if (!witness.is_null()) {
        std::string witness_path = a.witness;
        if (witness_path.empty() && !a.out.empty()) {
            const std::filesystem::path p(a.out);
            witness_path = (p.parent_path() / (p.stem().string() + ".witness.json")).string();
        }
        if (witness_path.empty()) {
            report["witness"] = witness;
        } else {
            write_json_file(witness_path, witness);
            report["witness"] = witness_path;
        }
    }
    if (!a.out.empty()) {
        write_json_file(a.out, report);
    }
    if (out.format == Format::Text) {
        out.text(to_string(status));
    } else if (a.out.empty()) {
        out.json(report);
    }
    return status_exit(status);
}

int verify_corollary_cmd(const Output& out, int n, unsigned jobs, const std::string& out_path) {
    const CorollaryReport r = verify_corollary(n, ClassifyOptions{}, jobs);
    const Json j = corollary_to_json(r);
    if (out.format == Format::Text) {
        for (const CorollaryRow& row : r.rows) {
            out.text(row.name + " top_two=" + (row.top_two ? "yes" : "no") + " pair=" + to_string(row.pair) +
                     " pareto=" + to_string(row.pareto) + (row.consistent ? "" : "  INCONSISTENT"));
        }
        out.text(std::string("all consistent: ") + (r.all_consistent() ? "yes" : "no"));
        if (!out_path.empty()) {
            write_json_file(out_path, j);
        }
    } else {
        emit_or_write(out, out_path, j);
    }
    return r.all_consistent() && r.inconclusive() == 0 ? kExitOk : kExitFails;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ttc-lab: top trading cycles domain laboratory"};
    app.require_subcommand(1);
    app.fallthrough();  // lets --format follow the subcommand
    std::string format = "json";
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "text"}));

    int code = kExitOk;
    Output out;
    std::function<int()> action;

    // domain
    auto* domain = app.add_subcommand("domain", "Generate and check preference domains");
    domain->require_subcommand(1);
    DomainGenArgs gen;
    auto* gen_cmd = domain->add_subcommand("gen", "Generate a catalog domain");
    gen_cmd->add_option("--kind", gen.kind)->required()->check(
        CLI::IsMember({"unrestricted", "sp", "sp2", "sd", "circular", "pa"}));
    gen_cmd->add_option("--n", gen.n)->required()->check(CLI::Range(1, 9));
    gen_cmd->add_option("--axis", gen.axis, "Axis (or cycle) as a permutation, e.g. 2134");
    gen_cmd->add_option("--peak", gen.peak, "Peak index p for sp2 (tops o_p or o_p+1)");
    gen_cmd->add_option("--edges", gen.edges, "Dominance edges for pa, e.g. \"1>3,2>4\"");
    gen_cmd->add_option("--out", gen.out);
    gen_cmd->callback([&] { action = [&] { return domain_gen(out, gen); }; });

    std::string check_in;
    int check_k = 2;
    auto* check_cmd = domain->add_subcommand("check", "Check the top-two (or top-k) condition");
    check_cmd->add_option("--in", check_in)->required();
    check_cmd->add_option("--k", check_k)->check(CLI::Range(2, 32));
    check_cmd->callback([&] { action = [&] { return domain_check(out, check_in, check_k); }; });

    // ttc
    auto* ttc_cmd = app.add_subcommand("ttc", "Run top trading cycles");
    ttc_cmd->require_subcommand(1);
    std::string run_profile;
    bool run_trace = false;
    auto* run_cmd = ttc_cmd->add_subcommand("run", "TTC allocation of a profile");
    run_cmd->add_option("--profile", run_profile, "JSON array of preferences")->required();
    run_cmd->add_flag("--trace", run_trace, "Include the round-by-round cycles");
    run_cmd->callback([&] { action = [&] { return ttc_run(out, run_profile, run_trace); }; });

    // axioms
    auto* axioms_cmd = app.add_subcommand("axioms", "Check mechanism axioms");
    axioms_cmd->require_subcommand(1);
    std::string ax_mech;
    std::string ax_domain;
    std::vector<std::string> ax_hetero;
    std::string ax_list = "ir,pair,pareto,sp";
    auto* ax_check = axioms_cmd->add_subcommand("check", "Exhaustively check axioms over a domain");
    ax_check->add_option("--mech", ax_mech, "ttc | endowment | table:FILE | diff:DOMAIN")->required();
    ax_check->add_option("--domain", ax_domain);
    ax_check->add_option("--hetero", ax_hetero, "One domain file per agent");
    ax_check->add_option("--axioms", ax_list, "Comma list of ir,pair,pareto,sp,gsp");
    ax_check->callback([&] { action = [&] { return axioms_check(out, ax_mech, ax_domain, ax_hetero, ax_list); }; });

    // mech
    auto* mech_cmd = app.add_subcommand("mech", "Build and evaluate mechanisms");
    mech_cmd->require_subcommand(1);
    std::string bc_domain;
    std::string bc_out;
    auto* bc_cmd = mech_cmd->add_subcommand("build-counterexample", "Non-TTC mechanism for a failing domain");
    bc_cmd->add_option("--domain", bc_domain)->required();
    bc_cmd->add_option("--out", bc_out, "Write the table mechanism here");
    bc_cmd->callback([&] { action = [&] { return mech_build_counterexample(out, bc_domain, bc_out); }; });

    std::string ev_mech;
    std::string ev_profile;
    auto* ev_cmd = mech_cmd->add_subcommand("eval", "Evaluate a mechanism at a profile");
    ev_cmd->add_option("--mech", ev_mech, "Table file, or ttc | endowment | table:FILE | diff:DOMAIN")->required();
    ev_cmd->add_option("--profile", ev_profile)->required();
    ev_cmd->callback([&] { action = [&] { return mech_eval(out, ev_mech, ev_profile); }; });

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "Decide whether TTC is the unique mechanism");
    verify_cmd->require_subcommand(1);
    ClassifyArgs cl;
    auto* cl_cmd = verify_cmd->add_subcommand("classify", "Classify one domain (or per-agent domains)");
    cl_cmd->add_option("--domain", cl.domain);
    cl_cmd->add_option("--hetero", cl.hetero, "One domain file per agent");
    cl_cmd->add_option("--efficiency", cl.efficiency)->required()->check(CLI::IsMember({"pair", "pareto"}));
    cl_cmd->add_option("--budget", cl.budget, "Search node budget");
    cl_cmd->add_option("--profile-cap", cl.profile_cap, "Largest profile space attempted");
    cl_cmd->add_option("--out", cl.out, "Report path");
    cl_cmd->add_option("--witness", cl.witness, "Witness table path (default: next to --out)");
    cl_cmd->add_option("--cache", cl.cache, "Results cache file (overrides TTC_LAB_CACHE)");
    cl_cmd->add_flag("--timing", cl.timing, "Include wall time in the report");
    cl_cmd->callback([&] { action = [&] { return verify_classify(out, cl); }; });

    int co_n = 3;
    unsigned co_jobs = 1;
    std::string co_out;
    auto* co_cmd = verify_cmd->add_subcommand("corollary", "Check top-two <=> TTC uniqueness across domains");
    co_cmd->add_option("--n", co_n)->check(CLI::IsMember({3, 4}));
    co_cmd->add_option("--jobs", co_jobs)->check(CLI::Range(1U, 256U));
    co_cmd->add_option("--out", co_out);
    co_cmd->callback([&] { action = [&] { return verify_corollary_cmd(out, co_n, co_jobs, co_out); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }
    out.format = format == "text" ? Format::Text : Format::Json;

    try {
        code = action();
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        code = kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        code = kExitUsage;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << '\n';
        code = kExitUsage;
    } catch (const BudgetError& e) {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        code = kExitBudget;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        code = kExitError;
    }
    return code;
}
