#include "smartfilter/contamination_filter.hpp"

#include <algorithm>
#include <limits>

#include "smartfilter/error.hpp"
#include "smartfilter/parallel.hpp"

namespace smartfilter {

namespace {

std::vector<std::string> all_ids(const Dataset& dataset) {
    std::vector<std::string> ids;
    for (const auto& ex : dataset.examples()) ids.push_back(ex.id);
    return ids;
}

PredictionRefs as_refs(std::span<const PredictionSet> sets) {
    PredictionRefs refs;
    for (const auto& s : sets) refs.push_back(&s);
    return refs;
}

void require_mode(const PredictionRefs& sets, PromptMode mode, const char* step) {
    if (sets.empty()) throw Error(std::string(step) + " needs at least one model");
    for (const auto* set : sets)
        if (set->mode != mode)
            throw Error("model '" + set->model + "' passed to " + step + " has mode " +
                        std::string(to_string(set->mode)));
}

}  // namespace

std::vector<ContaminationVerdict> detect_contaminated(const Dataset& dataset,
                                                     std::span<const std::string> candidate_ids,
                                                     const PredictionRefs& choices_only_sets,
                                                     double theta, unsigned threads) {
    require_mode(choices_only_sets, PromptMode::ChoicesOnly, "contamination filtering");
    std::vector<ContaminationVerdict> verdicts(candidate_ids.size());
    parallel_for(candidate_ids.size(), threads, [&](std::size_t i) {
        const auto& ex = dataset.at(candidate_ids[i]);
        ContaminationVerdict v{ex.id, std::numeric_limits<double>::infinity(), true};
        for (const auto* set : choices_only_sets) {
            const auto probs = probabilities_for(*set, ex);
            v.min_correct_prob_choices_only =
                std::min(v.min_correct_prob_choices_only, probs[ex.gold_index]);
            v.is_contaminated = v.is_contaminated && confidently_correct(probs, ex.gold_index, theta);
        }
        verdicts[i] = std::move(v);
    });
    return verdicts;
}

std::vector<ContaminationVerdict> detect_contaminated(
    const Dataset& dataset, std::span<const PredictionSet> choices_only_sets, double theta) {
    const auto ids = all_ids(dataset);
    return detect_contaminated(dataset, ids, as_refs(choices_only_sets), theta);
}

std::set<std::string> flag_wrong_ground_truth(const Dataset& dataset,
                                              std::span<const std::string> candidate_ids,
                                              const PredictionRefs& full_prompt_sets,
                                              double theta) {
    require_mode(full_prompt_sets, PromptMode::FullPrompt, "wrong-ground-truth flagging");
    std::set<std::string> suspects;
    for (const auto& id : candidate_ids) {
        const auto& ex = dataset.at(id);
        bool all_wrong = true;
        for (const auto* set : full_prompt_sets) {
            const auto* probs = set->find(id);
            if (!probs || probs->size() != ex.options.size() ||
                !confidently_wrong(*probs, ex.gold_index, theta)) {
                all_wrong = false;
                break;
            }
        }
        if (all_wrong) suspects.insert(id);
    }
    return suspects;
}

std::set<std::string> flag_wrong_ground_truth(const Dataset& dataset,
                                              std::span<const PredictionSet> full_prompt_sets,
                                              double theta) {
    const auto ids = all_ids(dataset);
    return flag_wrong_ground_truth(dataset, ids, as_refs(full_prompt_sets), theta);
}

}  // namespace smartfilter
