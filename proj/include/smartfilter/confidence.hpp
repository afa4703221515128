#pragma once

#include <span>
#include <string>
#include <vector>

#include "smartfilter/types.hpp"

namespace smartfilter {

/// Non-owning view of the prediction sets a filter step consults.
using PredictionRefs = std::vector<const PredictionSet*>;

PredictionRefs refs_for_mode(std::span<const PredictionSet> sets, PromptMode mode);

struct TopOption {
    std::size_t index = 0;
    double prob = 0.0;
    bool unique = false;  // no other option shares the maximum
};

TopOption top_option(std::span<const double> probs);

/// Probability vector of `set` for `example`; throws CoverageError when the
/// row is missing and Error when its length disagrees with the options.
std::span<const double> probabilities_for(const PredictionSet& set, const Example& example);

/// True when the gold option is the unique argmax with probability > theta.
bool confidently_correct(std::span<const double> probs, std::size_t gold, double theta);

/// True when a non-gold option is the unique argmax with probability > theta.
bool confidently_wrong(std::span<const double> probs, std::size_t gold, double theta);

}  // namespace smartfilter
