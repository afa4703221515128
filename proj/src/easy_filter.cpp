#include "smartfilter/easy_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smartfilter/error.hpp"
#include "smartfilter/parallel.hpp"
#include "smartfilter/random.hpp"

namespace smartfilter {

namespace {

std::vector<std::string> all_ids(const Dataset& dataset) {
    std::vector<std::string> ids;
    ids.reserve(dataset.size());
    for (const auto& ex : dataset.examples()) ids.push_back(ex.id);
    return ids;
}

}  // namespace

std::vector<EasyVerdict> detect_easy(const Dataset& dataset,
                                     std::span<const std::string> candidate_ids,
                                     const PredictionRefs& full_prompt_sets, double theta,
                                     unsigned threads) {
    if (full_prompt_sets.empty()) throw Error("easy filtering needs at least one model");
    for (const auto* set : full_prompt_sets)
        if (set->mode != PromptMode::FullPrompt)
            throw Error("model '" + set->model + "' passed to easy filtering is not FullPrompt");

    std::vector<EasyVerdict> verdicts(candidate_ids.size());
    parallel_for(candidate_ids.size(), threads, [&](std::size_t i) {
        const auto& ex = dataset.at(candidate_ids[i]);
        EasyVerdict v{ex.id, std::numeric_limits<double>::infinity(), true};
        for (const auto* set : full_prompt_sets) {
            const auto probs = probabilities_for(*set, ex);
            v.min_correct_prob = std::min(v.min_correct_prob, probs[ex.gold_index]);
            v.is_easy = v.is_easy && confidently_correct(probs, ex.gold_index, theta);
        }
        verdicts[i] = std::move(v);
    });
    return verdicts;
}

std::vector<EasyVerdict> detect_easy(const Dataset& dataset,
                                     std::span<const PredictionSet> full_prompt_sets,
                                     double theta) {
    const auto ids = all_ids(dataset);
    PredictionRefs refs;
    for (const auto& s : full_prompt_sets) refs.push_back(&s);
    return detect_easy(dataset, ids, refs, theta);
}

std::size_t retained_count(std::size_t eligible, double retention_fraction) {
    // The epsilon absorbs representation error in products such as 0.15 * 10.
    const double exact = retention_fraction * static_cast<double>(eligible);
    const auto n = static_cast<std::size_t>(std::floor(exact + 0.5 + 1e-9));
    return std::min(n, eligible);
}

std::set<std::string> sample_retained(std::span<const std::string> eligible_ids,
                                      double retention_fraction, std::uint64_t seed) {
    std::vector<std::string> ids(eligible_ids.begin(), eligible_ids.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    const std::size_t n = retained_count(ids.size(), retention_fraction);
    auto rng = Rng::stream(seed, "retention");
    rng.shuffle(std::span<std::string>(ids));
    return {ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace smartfilter
