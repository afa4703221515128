#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "smartfilter/cli.hpp"
#include "smartfilter/io.hpp"

using namespace smartfilter;
using namespace smartfilter::testing;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

const fs::path& fixture() {
    static const fs::path dir = [] {
        PlantSpec s;
        s.examples = 300;
        s.duplicates = 3;
        s.anomalous = 15;
        s.easy = 90;
        s.contaminated = 15;
        s.clusters = 6;
        s.models = 5;
        s.dim = 24;
        s.seed = 8;
        auto d = scratch_dir("cli-fixture");
        write_fixture(make_planted(s), d);
        write_text_file(d / "elo.csv", "model,elo\nmodel-01,1100\nmodel-02,1150\nmodel-03,1190\nmodel-04,1230\nmodel-05,1260\n");
        return d;
    }();
    return dir;
}

std::vector<std::string> common(const std::string& cmd, const fs::path& out, const fs::path& data = fixture()) {
    return {cmd,
            "--dataset", (data / "dataset.jsonl").string(),
            "--predictions", (data / "predictions").string(),
            "--embeddings", (data / "embeddings.emb1").string(),
            "--manifest", (data / "manifest.txt").string(),
            "--config", (data / "config.json").string(),
            "--out", out.string(),
            "--seed", "4"};
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_text_file(p)); }

}  // namespace

TEST_CASE("usage errors exit 2") {
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"frobnicate"}).code == kExitUsage);
    CHECK(cli({"filter", "--dataset", "x"}).code == kExitUsage);
    auto args = common("filter", scratch_dir("cli-usage"));
    args.push_back("--threads");
    args.push_back("0");
    CHECK(cli(args).code == kExitUsage);
    CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("validate") {
    auto out = scratch_dir("cli-validate");
    auto r = cli(common("validate", out));
    CHECK(r.code == kExitOk);
    CHECK(read_json(out / "validation.json")["passed"] == true);

    // Remove one candidate row from a copy of the predictions.
    auto broken = scratch_dir("cli-validate-broken");
    fs::copy(fixture(), broken, fs::copy_options::recursive);
    auto set = load_predictions(broken / "predictions" / "model-02_full.jsonl");
    auto victim = set.entries.begin()->first;
    set.entries.erase(victim);
    write_predictions(set, broken / "predictions" / "model-02_full.jsonl");

    r = cli(common("validate", out, broken));
    CHECK(r.code == kExitFailure);
    auto v = read_json(out / "validation.json");
    CHECK(v["passed"] == false);
    REQUIRE(v["failures"].size() == 1);
    CHECK(v["failures"][0]["id"] == victim);
    CHECK(v["failures"][0]["set"] == "model-02:full");
    CHECK(v["failures"][0]["reason"] == "missing");

    // filter refuses and writes nothing
    auto fout = scratch_dir("cli-filter-broken");
    fs::remove(fout);
    r = cli(common("filter", fout, broken));
    CHECK(r.code == kExitFailure);
    CHECK_FALSE(fs::exists(fout / "ledger.jsonl"));
}

TEST_CASE("missing input files exit 2") {
    auto out = scratch_dir("cli-missing");
    auto args = common("filter", out);
    args[2] = (fixture() / "nope.jsonl").string();
    CHECK(cli(args).code == kExitUsage);
    args = common("validate", out);
    args[8] = (fixture() / "nope.txt").string();
    CHECK(cli(args).code == kExitUsage);
    CHECK(read_json(out / "validation.json")["passed"] == false);
}

TEST_CASE("filter, report and ablate") {
    auto out = scratch_dir("cli-filter");
    auto r = cli(common("filter", out));
    REQUIRE(r.code == kExitOk);
    for (const char* f : {"ledger.jsonl", "filtered_dataset.jsonl", "report.json", "similarity.json",
                          "tables/filtering.csv", "tables/agreement_original.csv", "tables/similarity_density.csv"})
        CHECK_MESSAGE(fs::exists(out / f), f);
    auto report = read_json(out / "report.json");
    CHECK_FALSE(report["correlations"].contains("pearson"));
    CHECK(report["run"]["config"]["seed"] == 4);
    CHECK(report["filtering"]["reconciles"] == true);
    CHECK(report["similarity"]["delta"].is_number());

    auto with_elo = common("report", out);
    with_elo.push_back("--elo");
    with_elo.push_back((fixture() / "elo.csv").string());
    r = cli(with_elo);
    CHECK(r.code == kExitOk);
    report = read_json(out / "report.json");
    REQUIRE(report["correlations"].contains("pearson"));
    CHECK(report["correlations"]["pearson"]["original"].is_number());

    auto ablate = common("ablate", out);
    ablate.insert(ablate.end(), {"--subset-size", "5", "--subset-size", "3", "--draws", "4"});
    r = cli(ablate);
    CHECK(r.code == kExitOk);
    auto table = read_json(out / "ablation.json");
    REQUIRE(table.size() == 2);
    CHECK(table[0]["std_percent_filtered"] == 0.0);
    CHECK(table[0]["mean_percent_filtered"] == report["filtering"]["percent_filtered"]);
    CHECK(table[1]["draws"] == 4);

    // report picks up the ablation table
    CHECK(cli(common("report", out)).code == kExitOk);
    CHECK(read_json(out / "report.json").contains("ablation"));

    auto too_many = common("ablate", out);
    too_many.insert(too_many.end(), {"--subset-size", "9"});
    CHECK(cli(too_many).code == kExitUsage);
}

TEST_CASE("report without a ledger exits 2") {
    auto out = scratch_dir("cli-report-empty");
    CHECK(cli(common("report", out)).code == kExitUsage);
}

TEST_CASE("installed binary exit codes") {
    const std::string bin = SMARTFILTER_CLI_PATH;
    auto code = [](const std::string& cmd) {
        int status = std::system((cmd + " >/dev/null 2>&1").c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    CHECK(code(bin + " --help") == 0);
    CHECK(code(bin + " bogus") == 2);
    auto out = scratch_dir("cli-binary");
    std::string cmd = bin;
    for (const auto& a : common("validate", out)) cmd += " '" + a + "'";
    CHECK(code(cmd) == 0);
}
