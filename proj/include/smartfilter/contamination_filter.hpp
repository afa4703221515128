#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "smartfilter/confidence.hpp"
#include "smartfilter/types.hpp"

namespace smartfilter {

struct ContaminationVerdict {
    std::string example_id;
    double min_correct_prob_choices_only = 0.0;
    bool is_contaminated = false;
};

/// Same rule as detect_easy, applied to answer-only (ChoicesOnly) predictions.
std::vector<ContaminationVerdict> detect_contaminated(const Dataset& dataset,
                                                     std::span<const std::string> candidate_ids,
                                                     const PredictionRefs& choices_only_sets,
                                                     double theta, unsigned threads = 1);

std::vector<ContaminationVerdict> detect_contaminated(
    const Dataset& dataset, std::span<const PredictionSet> choices_only_sets, double theta);

/// Diagnostic only: every FullPrompt model uniquely picks some non-gold
/// option with probability > theta. Models need not agree on which.
/// Examples without full coverage are skipped.
std::set<std::string> flag_wrong_ground_truth(const Dataset& dataset,
                                              std::span<const std::string> candidate_ids,
                                              const PredictionRefs& full_prompt_sets,
                                              double theta);

std::set<std::string> flag_wrong_ground_truth(const Dataset& dataset,
                                              std::span<const PredictionSet> full_prompt_sets,
                                              double theta);

}  // namespace smartfilter
