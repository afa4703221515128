#pragma once

#include <string>
#include <vector>

#include "fixtures.hpp"
#include "smartfilter/types.hpp"

namespace smartfilter::testing {

inline Example make_example(std::string id, std::size_t gold = 0, std::size_t options = 4,
                            std::optional<std::string> subset = std::nullopt,
                            std::string question = "") {
    Example e;
    e.id = id;
    e.question = question.empty() ? "Question " + id : question;
    for (std::size_t i = 0; i < options; ++i) e.options.push_back("opt " + id + " " + std::to_string(i));
    e.gold_index = gold;
    e.subset = std::move(subset);
    return e;
}

/// Ids "q0".."q{n-1}", gold 0, four options.
inline Dataset small_dataset(std::size_t n) {
    std::vector<Example> xs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(make_example("q" + std::to_string(i)));
    return Dataset::from_examples(std::move(xs));
}

/// `p` on `target`, the rest spread evenly.
inline std::vector<double> probs_on(std::size_t target, double p, std::size_t options = 4) {
    std::vector<double> v(options, (1.0 - p) / static_cast<double>(options - 1));
    v[target] = p;
    return v;
}

inline PredictionSet uniform_set(const std::string& model, PromptMode mode, const Dataset& ds,
                                 std::size_t target, double p) {
    PredictionSet s{model, mode, {}};
    for (const auto& e : ds.examples()) s.entries[e.id] = probs_on(target, p, e.options.size());
    return s;
}

}  // namespace smartfilter::testing
