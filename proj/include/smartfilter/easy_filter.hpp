#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "smartfilter/confidence.hpp"
#include "smartfilter/types.hpp"

namespace smartfilter {

struct EasyVerdict {
    std::string example_id;
    /// Minimum over models of the probability on the gold option.
    double min_correct_prob = 0.0;
    bool is_easy = false;
};

/// An example is easy when every FullPrompt model puts its unique maximum
/// on the gold option with probability strictly above theta. Verdicts are
/// returned for `candidate_ids` in the given order.
std::vector<EasyVerdict> detect_easy(const Dataset& dataset,
                                     std::span<const std::string> candidate_ids,
                                     const PredictionRefs& full_prompt_sets, double theta,
                                     unsigned threads = 1);

std::vector<EasyVerdict> detect_easy(const Dataset& dataset,
                                     std::span<const PredictionSet> full_prompt_sets,
                                     double theta);

/// round-half-up(fraction * |eligible|) ids drawn by a seeded shuffle of
/// the sorted eligible ids.
std::set<std::string> sample_retained(std::span<const std::string> eligible_ids,
                                      double retention_fraction, std::uint64_t seed);

std::size_t retained_count(std::size_t eligible, double retention_fraction);

}  // namespace smartfilter
