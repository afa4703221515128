#include <doctest.h>

#include "helpers.hpp"
#include "oracles.hpp"
#include "smartfilter/contamination_filter.hpp"
#include "smartfilter/easy_filter.hpp"
#include "smartfilter/error.hpp"

using namespace smartfilter;
using namespace smartfilter::testing;

TEST_CASE("contamination needs every model confident on gold without the question") {
    auto ds = small_dataset(2);
    std::vector<PredictionSet> sets;
    for (int m = 0; m < 5; ++m) sets.push_back(uniform_set("m" + std::to_string(m), PromptMode::ChoicesOnly, ds, 0, 0.9));
    auto v = detect_contaminated(ds, sets, 0.8);
    REQUIRE(v.size() == 2);
    CHECK(v[0].is_contaminated);
    CHECK(v[0].min_correct_prob_choices_only == doctest::Approx(0.9));

    // One model picking another option breaks unanimity.
    sets[3].entries["q1"] = probs_on(2, 0.9);
    v = detect_contaminated(ds, sets, 0.8);
    CHECK(v[0].is_contaminated);
    CHECK_FALSE(v[1].is_contaminated);

    sets[3].entries.erase("q0");
    CHECK_THROWS_AS(detect_contaminated(ds, sets, 0.8), CoverageError);
}

TEST_CASE("contamination matches the oracle and the easy rule on the same numbers") {
    Rng rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Example> xs;
        for (std::size_t i = 0; i < 1 + rng.below(100); ++i)
            xs.push_back(make_example("e" + std::to_string(i), rng.below(4)));
        auto ds = Dataset::from_examples(xs);
        std::vector<PredictionSet> choices, full;
        for (std::size_t m = 0; m < 1 + rng.below(7); ++m) {
            PredictionSet s{"m" + std::to_string(m), PromptMode::ChoicesOnly, {}};
            for (const auto& e : ds.examples())
                s.entries[e.id] = probs_on(uniform01(rng) < 0.9 ? e.gold_index : rng.below(4), uniform(rng, 0.7, 1.0));
            choices.push_back(s);
            s.mode = PromptMode::FullPrompt;
            full.push_back(s);
        }
        std::set<std::string> all, contaminated, easy;
        for (const auto& e : ds.examples()) all.insert(e.id);
        for (const auto& v : detect_contaminated(ds, choices, 0.8))
            if (v.is_contaminated) contaminated.insert(v.example_id);
        for (const auto& v : detect_easy(ds, full, 0.8))
            if (v.is_easy) easy.insert(v.example_id);
        CHECK(contaminated == oracle::confident_ids(ds, all, choices, PromptMode::ChoicesOnly, 0.8));
        CHECK(contaminated == easy);
    }
}

TEST_CASE("wrong ground truth diagnostic") {
    auto ds = Dataset::from_examples({make_example("a", 2), make_example("b", 2), make_example("c", 2)});
    std::vector<PredictionSet> sets;
    for (int m = 0; m < 7; ++m) {
        PredictionSet s{"m" + std::to_string(m), PromptMode::FullPrompt, {}};
        s.entries["a"] = probs_on(1, 0.9);                       // all on B, gold C
        s.entries["b"] = m == 6 ? probs_on(2, 0.85) : probs_on(1, 0.9);
        s.entries["c"] = probs_on(m % 2 ? 0 : 3, 0.9);          // wrong, but not the same option
        sets.push_back(s);
    }
    auto suspects = flag_wrong_ground_truth(ds, sets, 0.8);
    CHECK(suspects == std::set<std::string>{"a", "c"});

    // Never both easy and suspect under the same predictions.
    std::set<std::string> easy;
    for (const auto& v : detect_easy(ds, sets, 0.8))
        if (v.is_easy) easy.insert(v.example_id);
    for (const auto& id : suspects) CHECK_FALSE(easy.count(id));

    // Missing coverage: skipped rather than fatal.
    sets[0].entries.erase("a");
    CHECK(flag_wrong_ground_truth(ds, sets, 0.8) == std::set<std::string>{"c"});
}
