#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "smartfilter/contamination_filter.hpp"
#include "smartfilter/easy_filter.hpp"
#include "smartfilter/prefilter.hpp"
#include "smartfilter/similarity.hpp"
#include "smartfilter/types.hpp"

namespace smartfilter {

struct PrefilterOutcome {
    std::vector<DuplicateGroup> duplicates;
    AnomalousSelection anomalous;
    std::set<std::string> removed;       // duplicates (non-kept) and anomalous
    std::vector<std::string> candidates;  // everything else, in id order
};

PrefilterOutcome run_prefilter(const Dataset& dataset, const RunConfig& config);

struct SimilarityOutcome {
    std::size_t pair_count = 0;
    std::vector<double> pair_distances;  // kNN pair distances, pair order
    std::optional<KdeResult> kde;
    std::vector<SimilarityCluster> clusters;  // with removals sampled
    std::vector<std::string> warnings;
};

/// kNN pairs over the candidates' embeddings, KDE threshold, clusters and
/// seeded removals. Skipped with a warning for fewer than 2 candidates.
SimilarityOutcome run_similarity(const EmbeddingSet& embeddings,
                                 std::span<const std::string> candidates, const RunConfig& config);

struct ConfidenceOutcome {
    std::vector<EasyVerdict> easy;
    /// Absent when no ChoicesOnly predictions were supplied.
    std::optional<std::vector<ContaminationVerdict>> contamination;
    std::set<std::string> wrong_gt_suspects;
};

/// Easy, contamination and wrong-ground-truth verdicts for the candidates
/// using only the models named in `models` (all models when empty).
ConfidenceOutcome run_confidence_steps(const Dataset& dataset,
                                       std::span<const PredictionSet> predictions,
                                       std::span<const std::string> candidates,
                                       const RunConfig& config,
                                       std::span<const std::string> models = {});

/// Combines step outcomes into per-example flags, samples the retained easy
/// examples from those not removed by another step, and assigns verdicts.
Ledger assemble_ledger(const Dataset& dataset, const PrefilterOutcome& prefilter,
                       const ConfidenceOutcome& confidence, const SimilarityOutcome& similarity,
                       const RunConfig& config);

struct FilterResult {
    Ledger ledger;
    PrefilterOutcome prefilter;
    SimilarityOutcome similarity;
    ConfidenceOutcome confidence;
    std::vector<std::string> warnings;
};

/// Prefilter, then the easy, contamination and similarity steps in
/// config.step_order (the result does not depend on the order), then
/// retention sampling and verdicts.
FilterResult run_filter(const Dataset& dataset, std::span<const PredictionSet> predictions,
                        const EmbeddingSet& embeddings, const RunConfig& config);

/// Model names with FullPrompt predictions, sorted.
std::vector<std::string> model_names(std::span<const PredictionSet> predictions);

double percent_dropped(const Ledger& ledger);

struct AblationResult {
    std::size_t subset_size = 0;
    std::size_t total_subsets = 0;  // C(N, n)
    std::vector<std::vector<std::string>> subsets;
    std::vector<double> percentages;
    double mean = 0.0;
    double stddev = 0.0;  // population
};

/// Re-runs easy and contamination filtering for `draws` distinct model
/// subsets of size n (every subset when C(N, n) <= draws), reusing the
/// model-independent prefilter and similarity outcomes.
AblationResult ablate_model_subsets(const Dataset& dataset,
                                    std::span<const PredictionSet> predictions,
                                    std::size_t subset_size, std::size_t draws,
                                    std::uint64_t seed, const RunConfig& config,
                                    const PrefilterOutcome& prefilter,
                                    const SimilarityOutcome& similarity);

/// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// Distinct index subsets of {0..n-1} of size k, sorted ascending inside.
std::vector<std::vector<std::size_t>> draw_subsets(std::size_t n, std::size_t k,
                                                   std::size_t draws, std::uint64_t seed);

}  // namespace smartfilter
