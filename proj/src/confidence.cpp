#include "smartfilter/confidence.hpp"

#include "smartfilter/error.hpp"

namespace smartfilter {

PredictionRefs refs_for_mode(std::span<const PredictionSet> sets, PromptMode mode) {
    PredictionRefs refs;
    for (const auto& s : sets)
        if (s.mode == mode) refs.push_back(&s);
    return refs;
}

TopOption top_option(std::span<const double> probs) {
    TopOption top;
    if (probs.empty()) return top;
    top.prob = probs[0];
    top.unique = true;
    for (std::size_t i = 1; i < probs.size(); ++i) {
        if (probs[i] > top.prob) {
            top = {i, probs[i], true};
        } else if (probs[i] == top.prob) {
            top.unique = false;
        }
    }
    return top;
}

std::span<const double> probabilities_for(const PredictionSet& set, const Example& example) {
    const auto* probs = set.find(example.id);
    if (!probs) throw CoverageError(set.model, example.id);
    if (probs->size() != example.options.size())
        throw Error("model '" + set.model + "' gives " + std::to_string(probs->size()) +
                    " probabilities for example '" + example.id + "' with " +
                    std::to_string(example.options.size()) + " options");
    return *probs;
}

bool confidently_correct(std::span<const double> probs, std::size_t gold, double theta) {
    const auto top = top_option(probs);
    return top.unique && top.index == gold && top.prob > theta;
}

bool confidently_wrong(std::span<const double> probs, std::size_t gold, double theta) {
    const auto top = top_option(probs);
    return top.unique && top.index != gold && top.prob > theta;
}

}  // namespace smartfilter
