#include <doctest.h>

#include "helpers.hpp"
#include "smartfilter/io.hpp"
#include "smartfilter/report.hpp"

using namespace smartfilter;
using namespace smartfilter::testing;

namespace {

struct Small {
    Dataset dataset = small_dataset(10);
    Ledger ledger;
    std::vector<PredictionSet> predictions;

    Small() {
        for (const auto& e : dataset.examples()) ledger.push_back(LedgerEntry{.id = e.id});
        ledger[1].easy = true;
        ledger[1].drop_reasons = {DropReason::Easy};
        ledger[2].easy = ledger[2].retained_easy = true;
        ledger[3].contaminated = true;
        ledger[3].easy = true;
        ledger[3].drop_reasons = {DropReason::Easy, DropReason::Contaminated};
        ledger[4].exact_duplicate = true;
        ledger[4].duplicate_of = "q0";
        ledger[4].drop_reasons = {DropReason::ExactDuplicate};
        ledger[5].similar_cluster_id = 0;
        ledger[5].removed_as_similar = true;
        ledger[5].drop_reasons = {DropReason::Similar};
        ledger[6].similar_cluster_id = 0;
        for (int m = 0; m < 3; ++m) {
            PredictionSet s{"m" + std::to_string(m), PromptMode::FullPrompt, {}};
            for (const auto& e : dataset.examples())
                s.entries[e.id] = probs_on((e.id.back() - '0') % (m + 2) == 0 ? 0 : 1, 0.7);
            predictions.push_back(s);
        }
    }

    ReportInputs inputs(const EloTable* elo = nullptr) const {
        ReportInputs in{dataset, ledger, predictions, elo, nullptr, nullptr, {}, {}};
        in.run.out_dir = "out";
        return in;
    }
};

}  // namespace

TEST_CASE("summary counts and reconciliation") {
    Small s;
    auto sum = summarize(s.ledger);
    CHECK(sum.total == 10);
    CHECK(sum.dropped == 4);
    CHECK(sum.kept == 6);
    CHECK(sum.easy == 3);
    CHECK(sum.retained_easy == 1);
    CHECK(sum.dropped_easy == 2);
    CHECK(sum.contaminated == 1);
    CHECK(sum.similar_removed == 1);
    CHECK(sum.similar_clustered == 2);
    CHECK(sum.prefiltered == 1);
    CHECK(sum.attributed_easy == 2);
    CHECK(sum.attributed_contaminated == 0);
    CHECK(sum.attributed_prefilter + sum.attributed_easy + sum.attributed_contaminated + sum.attributed_similar ==
          sum.dropped);
    CHECK(sum.reconciles());
}

TEST_CASE("fixed-point formatting") {
    CHECK(format_fixed(64.41, 2) == "64.41");
    CHECK(format_fixed(3.449999, 2) == "3.45");
    CHECK(format_fixed(0.0, 2) == "0.00");
    CHECK(percent(1, 3) == doctest::Approx(33.333333));
    CHECK(percent(0, 0) == 0.0);
}

TEST_CASE("outputs: filtered file, ledger reasons, byte-identical rewrite") {
    Small s;
    auto dir = scratch_dir("report-outputs");
    auto report = build_report(s.inputs());
    write_outputs(s.dataset, s.ledger, report, dir);

    auto filtered = load_dataset(dir / "filtered_dataset.jsonl");
    CHECK(filtered.size() == 6);
    CHECK(filtered.find("q1") == nullptr);

    auto ledger_text = read_text_file(dir / "ledger.jsonl");
    auto line_start = ledger_text.find("\"id\":\"q1\"");
    REQUIRE(line_start != std::string::npos);
    auto line = ledger_text.substr(line_start, ledger_text.find('\n', line_start) - line_start);
    CHECK(line.find("\"easy\"") != std::string::npos);
    CHECK(line.find("\"drop\"") != std::string::npos);

    std::map<std::string, std::string> first;
    for (const auto& f : fs::recursive_directory_iterator(dir))
        if (f.is_regular_file()) first[f.path().string()] = read_text_file(f.path());
    write_outputs(s.dataset, s.ledger, build_report(s.inputs()), dir);
    for (const auto& [path, text] : first) CHECK(read_text_file(path) == text);
    CHECK(first.count((dir / "tables" / "filtering.csv").string()));
    CHECK(first.count((dir / "tables" / "rankings.csv").string()));
    CHECK(first.count((dir / "tables" / "categories.csv").string()));
}

TEST_CASE("report sections") {
    Small s;
    auto r = build_report(s.inputs());
    CHECK(r["run"]["timestamp"].is_null());
    CHECK(r["run"]["config"]["confidence_threshold"] == 0.8);
    CHECK_FALSE(r["run"]["config"].contains("threads"));
    CHECK(r["filtering"]["percent_filtered"] == 40.0);
    CHECK(r["filtering"]["reconciles"] == true);
    CHECK(r["rankings"]["original"].size() == 3);
    CHECK(r["rankings"]["filtered_examples"] == 6);
    CHECK_FALSE(r["correlations"].contains("pearson"));
    bool noticed = false;
    for (const auto& n : r["notices"]) noticed |= n.get<std::string>().find("Pearson") != std::string::npos;
    CHECK(noticed);
    CHECK(r["agreement"]["original"].size() == 3);

    EloTable elo{{"m0", 1300}, {"m1", 1200}, {"m2", 1100}};
    auto with = build_report(s.inputs(&elo));
    REQUIRE(with["correlations"].contains("pearson"));
    CHECK(with["correlations"]["pearson"]["models"].size() == 3);
}
