// End-to-end runs of the ttc-lab binary. Every case compares stdout (and any
// files it writes) byte for byte against tests/fixtures/expected; set
// TTC_LAB_UPDATE_FIXTURES=1 to rewrite them.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

const fs::path kFixtures = TTC_LAB_FIXTURES;
const std::string kBinary = TTC_LAB_BINARY;

struct Result {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

/// Fresh scratch directory holding a copy of the input fixtures.
class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        work_ = fs::temp_directory_path() / ("ttc_lab_cli_" + std::string(info->name()));
        fs::remove_all(work_);
        fs::create_directories(work_);
        for (const auto& entry : fs::directory_iterator(kFixtures / "inputs")) {
            fs::copy_file(entry.path(), work_ / entry.path().filename());
        }
    }

    void TearDown() override { fs::remove_all(work_); }

    Result run(const std::string& args, const std::string& env = "") {
        const std::string cmd = "cd '" + work_.string() + "' && " + env + (env.empty() ? "" : " ") + "'" + kBinary +
                                "' " + args + " >stdout.txt 2>stderr.txt";
        const int status = std::system(cmd.c_str());
        Result r;
        r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(work_ / "stdout.txt");
        r.err = slurp(work_ / "stderr.txt");
        return r;
    }

    /// Compare `actual` with expected/<name>, or rewrite it when updating.
    void expect_fixture(const std::string& name, const std::string& actual) {
        const fs::path expected = kFixtures / "expected" / name;
        const char* update = std::getenv("TTC_LAB_UPDATE_FIXTURES");
        if (update != nullptr && std::string(update) == "1") {
            std::ofstream(expected, std::ios::binary) << actual;
            return;
        }
        ASSERT_TRUE(fs::exists(expected)) << "missing fixture " << expected;
        EXPECT_EQ(actual, slurp(expected)) << "fixture " << name;
    }

    /// Run, check the exit code, and pin stdout plus each written file.
    Result pinned(const std::string& name, const std::string& args, int exit_code,
               const std::vector<std::string>& files = {}) {
        Result r = run(args);
        EXPECT_EQ(r.exit_code, exit_code) << args << "\nstderr: " << r.err;
        expect_fixture(name + ".out", r.out);
        for (const std::string& f : files) {
            EXPECT_TRUE(fs::exists(work_ / f)) << f;
            expect_fixture(name + "." + f, slurp(work_ / f));
        }
        return r;
    }

    fs::path work_;
};

void expect_domain_schema(const Json& j) {
    ASSERT_TRUE(j.is_object());
    ASSERT_TRUE(j["n"].is_number_integer());
    ASSERT_TRUE(j["preferences"].is_array());
    for (const Json& p : j["preferences"]) {
        ASSERT_TRUE(p.is_string());
        EXPECT_EQ(p.get<std::string>().size(), j["n"].get<std::size_t>());
    }
}

void expect_subset(const Json& j) {
    ASSERT_TRUE(j.is_array());
    for (const Json& o : j) EXPECT_TRUE(o.is_number_integer());
}

void expect_top_two_schema(const Json& j) {
    ASSERT_TRUE(j["k"].is_number_integer());
    ASSERT_TRUE(j["satisfied"].is_boolean());
    ASSERT_TRUE(j["failures"].is_array());
    EXPECT_EQ(j["satisfied"].get<bool>(), j["failures"].empty());
    for (const Json& f : j["failures"]) {
        expect_subset(f["subset"]);
        EXPECT_TRUE(f.contains("a") || f.contains("tuple"));
    }
}

void expect_table_schema(const Json& j) {
    ASSERT_TRUE(j.is_array());
    for (const Json& row : j) {
        ASSERT_TRUE(row["profile"].is_array());
        ASSERT_TRUE(row["allocation"].is_string());
    }
}

void expect_classification_schema(const Json& j) {
    ASSERT_TRUE(j["status"].is_string());
    const std::string s = j["status"];
    EXPECT_TRUE(s == "unique_ttc" || s == "multiple" || s == "budget_exceeded");
    ASSERT_TRUE(j["stats"].is_object());
    for (const char* key : {"profiles", "profiles_visited", "nodes_expanded", "revisions"}) {
        EXPECT_TRUE(j["stats"][key].is_number_unsigned()) << key;
    }
    EXPECT_TRUE(j["efficiency"].is_string());
    EXPECT_EQ(j.contains("witness"), s == "multiple");
}

void expect_axiom_report_schema(const Json& j) {
    ASSERT_TRUE(j["clean"].is_boolean());
    ASSERT_TRUE(j["results"].is_array());
    bool all = true;
    for (const Json& r : j["results"]) {
        ASSERT_TRUE(r["axiom"].is_string());
        ASSERT_TRUE(r["passed"].is_boolean());
        EXPECT_EQ(r.contains("violation"), !r["passed"].get<bool>());
        all = all && r["passed"].get<bool>();
        if (r.contains("violation")) {
            const Json& v = r["violation"];
            EXPECT_EQ(v["kind"], r["axiom"]);
            EXPECT_TRUE(v["profiles"].is_array() && v["agents"].is_array() && v["allocations"].is_array());
        }
    }
    EXPECT_EQ(all, j["clean"].get<bool>());
}

}  // namespace

TEST_F(Cli, DomainGen) {
    expect_domain_schema(Json::parse(pinned("gen_sd3", "domain gen --kind sd --n 3", 0).out));
    expect_domain_schema(Json::parse(pinned("gen_unrestricted3", "domain gen --kind unrestricted --n 3", 0).out));
    expect_domain_schema(Json::parse(pinned("gen_sp4_axis", "domain gen --kind sp --n 4 --axis 2413", 0).out));
    expect_domain_schema(Json::parse(pinned("gen_sp2_4", "domain gen --kind sp2 --n 4 --peak 2", 0).out));
    expect_domain_schema(Json::parse(pinned("gen_circular4", "domain gen --kind circular --n 4", 0).out));
    expect_domain_schema(Json::parse(pinned("gen_pa3", "domain gen --kind pa --n 3 --edges '1>3'", 0).out));
    pinned("gen_sp3_text", "--format text domain gen --kind sp --n 3", 0);
    pinned("gen_out", "domain gen --kind sd --n 4 --out sd4.json", 0, {"sd4.json"});
}

TEST_F(Cli, DomainCheck) {
    expect_top_two_schema(Json::parse(pinned("check_d1", "domain check --in d1.json", 0).out));
    expect_top_two_schema(Json::parse(pinned("check_d2", "domain check --in d2.json", 3).out));
    expect_top_two_schema(Json::parse(pinned("check_d3", "domain check --in d3.json", 3).out));
    expect_top_two_schema(Json::parse(pinned("check_d3_k3", "domain check --in d3.json --k 3", 0).out));
    pinned("check_d2_text", "domain check --in d2.json --format text", 3);
}

TEST_F(Cli, TtcRun) {
    const Result r = pinned("ttc_cycle", "ttc run --profile '[\"231\",\"312\",\"123\"]'", 0);
    EXPECT_EQ(Json::parse(r.out)["allocation"], "231");
    const Json trace = Json::parse(pinned("ttc_trace", "ttc run --profile '[\"213\",\"213\",\"123\"]' --trace", 0).out);
    EXPECT_EQ(trace["rounds"].size(), 3U);
    pinned("ttc_trace_text", "--format text ttc run --profile '{\"prefs\":[\"213\",\"213\",\"123\"]}' --trace", 0);
}

TEST_F(Cli, AxiomsCheck) {
    expect_axiom_report_schema(
        Json::parse(pinned("axioms_ttc_d2", "axioms check --mech ttc --domain d2.json --axioms ir,pair,pareto,sp,gsp", 0).out));
    expect_axiom_report_schema(Json::parse(
        pinned("axioms_endowment_u3", "axioms check --mech endowment --domain unrestricted3.json --axioms ir,pair,sp", 3).out));
    expect_axiom_report_schema(
        Json::parse(pinned("axioms_diff_d2", "axioms check --mech diff:d2.json --domain d2.json --axioms ir,pareto,sp", 0).out));
    expect_axiom_report_schema(Json::parse(pinned(
        "axioms_hetero",
        "axioms check --mech endowment --hetero hetero1.json hetero2.json hetero3.json --axioms ir,pair,pareto,sp", 3).out));
}

TEST_F(Cli, MechBuildAndEval) {
    const Result built = pinned("mech_build_d2", "mech build-counterexample --domain d2.json --out mech.json", 0, {"mech.json"});
    expect_table_schema(Json::parse(slurp(work_ / "mech.json")));
    EXPECT_EQ(Json::parse(built.out)["constructed"], true);
    const Result eval = pinned("mech_eval_d2", "mech eval --mech mech.json --profile '[\"231\",\"123\",\"123\"]'", 0);
    EXPECT_EQ(Json::parse(eval.out)["allocation"], "312");
    pinned("mech_eval_table_prefix", "mech eval --mech table:mech.json --profile '[\"231\",\"123\",\"132\"]'", 0);
    pinned("axioms_table_d2", "axioms check --mech table:mech.json --domain d2.json --axioms ir,pareto,sp", 0);
    pinned("mech_build_d3", "mech build-counterexample --domain d3.json --out lifted.json", 0, {"lifted.json"});
    pinned("mech_build_d1", "mech build-counterexample --domain d1.json", 3);
}

TEST_F(Cli, VerifyClassify) {
    expect_classification_schema(
        Json::parse(pinned("classify_d1_pair", "verify classify --domain d1.json --efficiency pair", 0).out));
    pinned("classify_d2_pareto", "verify classify --domain d2.json --efficiency pareto --out report.json", 4,
           {"report.json", "report.witness.json"});
    const Json report = Json::parse(slurp(work_ / "report.json"));
    expect_classification_schema(report);
    EXPECT_EQ(report["witness"], "report.witness.json");
    expect_table_schema(Json::parse(slurp(work_ / "report.witness.json")));
    // the witness table replays through the axiom checker
    EXPECT_EQ(run("axioms check --mech table:report.witness.json --domain d2.json --axioms ir,pareto,sp").exit_code, 0);

    expect_classification_schema(Json::parse(pinned(
        "classify_hetero", "verify classify --hetero hetero1.json hetero2.json hetero3.json --efficiency pair", 4).out));
    expect_classification_schema(Json::parse(
        pinned("classify_budget", "verify classify --domain unrestricted3.json --efficiency pair --profile-cap 10", 5).out));
    pinned("classify_text", "--format text verify classify --domain d1.json --efficiency pareto", 0);
}

TEST_F(Cli, VerifyClassifyCache) {
    const Result first = run("verify classify --domain d2.json --efficiency pair --cache cache.json");
    EXPECT_EQ(first.exit_code, 4);
    const Json cache = Json::parse(slurp(work_ / "cache.json"));
    ASSERT_EQ(cache.size(), 1U);
    EXPECT_TRUE(cache.begin().value().contains("witness"));
    const Result second = run("verify classify --domain d2.json --efficiency pair", "TTC_LAB_CACHE=cache.json");
    EXPECT_EQ(second.exit_code, 4);
    EXPECT_EQ(first.out, second.out);
    EXPECT_EQ(Json::parse(slurp(work_ / "cache.json")).size(), 1U);
    run("verify classify --domain d1.json --efficiency pair --cache cache.json");
    EXPECT_EQ(Json::parse(slurp(work_ / "cache.json")).size(), 2U);
}

TEST_F(Cli, VerifyCorollary) {
    pinned("corollary_n3", "verify corollary --n 3 --jobs 4 --out corollary.json", 0, {"corollary.json"});
    const Json j = Json::parse(slurp(work_ / "corollary.json"));
    EXPECT_EQ(j["domains"], 63);
    EXPECT_EQ(j["all_consistent"], true);
    ASSERT_EQ(j["rows"].size(), 63U);
    for (const Json& row : j["rows"]) {
        EXPECT_TRUE(row["domain"].is_string() && row["top_two"].is_boolean() && row["consistent"].is_boolean());
    }
    pinned("corollary_n4", "verify corollary --n 4 --jobs 2 --out corollary4.json", 0, {"corollary4.json"});
}

TEST_F(Cli, Errors) {
    EXPECT_EQ(run("").exit_code, 2);
    EXPECT_EQ(run("domain gen --kind sp --n 3 --bogus").exit_code, 2);
    EXPECT_EQ(run("domain gen --kind nope --n 3").exit_code, 2);
    EXPECT_EQ(run("verify classify --domain d1.json --efficiency strong").exit_code, 2);
    const Result bad_profile = run("ttc run --profile '[\"122\",\"123\",\"123\"]'");
    EXPECT_EQ(bad_profile.exit_code, 2);
    EXPECT_NE(bad_profile.err.find("duplicate"), std::string::npos);
    EXPECT_EQ(run("ttc run --profile 'not json'").exit_code, 2);
    EXPECT_EQ(run("domain check --in duplicate.json").exit_code, 1);
    EXPECT_EQ(run("domain check --in missing.json").exit_code, 1);
    EXPECT_EQ(run("domain gen --kind circular --n 3").exit_code, 1);
    EXPECT_EQ(run("domain gen --kind pa --n 3 --edges '1>2,2>1'").exit_code, 1);
    EXPECT_EQ(run("axioms check --mech ttc --domain d1.json --axioms ir,fairness").exit_code, 2);
    EXPECT_EQ(run("axioms check --mech ttc --domain d1.json --axioms gsp").exit_code, 0);
    EXPECT_EQ(run("mech eval --mech diff:d1.json --profile '[\"123\",\"123\",\"123\"]'").exit_code, 1);
}
