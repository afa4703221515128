#include "smartfilter/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

#include "smartfilter/error.hpp"
#include "smartfilter/parallel.hpp"
#include "smartfilter/random.hpp"

namespace smartfilter {

PrefilterOutcome run_prefilter(const Dataset& dataset, const RunConfig& config) {
    PrefilterOutcome out;
    out.duplicates = find_exact_duplicates(dataset);
    out.anomalous = remove_anomalous_subsets(dataset, config.anomalous_subsets);
    for (const auto& g : out.duplicates)
        out.removed.insert(g.member_ids.begin() + 1, g.member_ids.end());
    out.removed.insert(out.anomalous.ids.begin(), out.anomalous.ids.end());
    for (const auto& ex : dataset.examples())
        if (!out.removed.count(ex.id)) out.candidates.push_back(ex.id);
    return out;
}

SimilarityOutcome run_similarity(const EmbeddingSet& embeddings,
                                 std::span<const std::string> candidates, const RunConfig& config) {
    SimilarityOutcome out;
    if (candidates.size() < 2) {
        out.warnings.push_back("similarity filtering skipped: fewer than 2 candidate examples");
        return out;
    }
    const auto subset = embeddings.subset(candidates);
    const auto pairs = knn_pairs(subset, config.knn_k, config.threads);
    out.pair_count = pairs.size();
    out.pair_distances.reserve(pairs.size());
    for (const auto& p : pairs) out.pair_distances.push_back(p.distance);

    if (pairs.size() < 2) {
        out.warnings.push_back("similarity filtering skipped: fewer than 2 neighbour pairs");
        return out;
    }
    out.kde = kde_threshold(out.pair_distances, config.kde_bandwidth, config.kde_grid_points,
                            config.threads);
    if (out.kde->warning) out.warnings.push_back(*out.kde->warning);
    out.clusters = sample_cluster_removals(build_clusters(pairs, out.kde->delta), config.seed);
    return out;
}

ConfidenceOutcome run_confidence_steps(const Dataset& dataset,
                                       std::span<const PredictionSet> predictions,
                                       std::span<const std::string> candidates,
                                       const RunConfig& config,
                                       std::span<const std::string> models) {
    auto wanted = [&](const PredictionSet& s) {
        return models.empty() || std::find(models.begin(), models.end(), s.model) != models.end();
    };
    PredictionRefs full, choices;
    for (const auto& s : predictions) {
        if (!wanted(s)) continue;
        (s.mode == PromptMode::FullPrompt ? full : choices).push_back(&s);
    }

    ConfidenceOutcome out;
    const double theta = config.confidence_threshold;
    out.easy = detect_easy(dataset, candidates, full, theta, config.threads);
    if (!choices.empty())
        out.contamination = detect_contaminated(dataset, candidates, choices, theta, config.threads);
    out.wrong_gt_suspects = flag_wrong_ground_truth(dataset, candidates, full, theta);
    return out;
}

Ledger assemble_ledger(const Dataset& dataset, const PrefilterOutcome& prefilter,
                       const ConfidenceOutcome& confidence, const SimilarityOutcome& similarity,
                       const RunConfig& config) {
    Ledger ledger;
    ledger.reserve(dataset.size());
    std::map<std::string, std::size_t> at;
    for (const auto& ex : dataset.examples()) {
        at.emplace(ex.id, ledger.size());
        LedgerEntry e;
        e.id = ex.id;
        ledger.push_back(std::move(e));
    }

    for (const auto& g : prefilter.duplicates) {
        for (const auto& id : g.member_ids) {
            auto& e = ledger[at.at(id)];
            e.gold_conflict = g.gold_conflict;
            if (id != g.kept_id) {
                e.exact_duplicate = true;
                e.duplicate_of = g.kept_id;
            }
        }
    }
    for (const auto& id : prefilter.anomalous.ids) ledger[at.at(id)].anomalous = true;

    for (const auto& v : confidence.easy) {
        auto& e = ledger[at.at(v.example_id)];
        e.easy = v.is_easy;
        e.min_gold_prob_full = v.min_correct_prob;
    }
    if (confidence.contamination) {
        for (const auto& v : *confidence.contamination) {
            auto& e = ledger[at.at(v.example_id)];
            e.contaminated = v.is_contaminated;
            e.min_gold_prob_choices_only = v.min_correct_prob_choices_only;
        }
    }
    for (const auto& id : confidence.wrong_gt_suspects) ledger[at.at(id)].wrong_gt_suspect = true;
    for (const auto& c : similarity.clusters) {
        for (const auto& id : c.member_ids) ledger[at.at(id)].similar_cluster_id = c.cluster_id;
        for (const auto& id : c.removed_ids) ledger[at.at(id)].removed_as_similar = true;
    }

    // Retention draws only from easy examples no other step removes.
    std::vector<std::string> eligible;
    for (const auto& e : ledger)
        if (e.easy && !e.contaminated && !e.removed_as_similar) eligible.push_back(e.id);
    for (const auto& id : sample_retained(eligible, config.retention_fraction, config.seed))
        ledger[at.at(id)].retained_easy = true;

    for (auto& e : ledger) {
        if (e.exact_duplicate) e.drop_reasons.push_back(DropReason::ExactDuplicate);
        if (e.anomalous) e.drop_reasons.push_back(DropReason::Anomalous);
        if (e.easy && !e.retained_easy) e.drop_reasons.push_back(DropReason::Easy);
        if (e.contaminated) e.drop_reasons.push_back(DropReason::Contaminated);
        if (e.removed_as_similar) e.drop_reasons.push_back(DropReason::Similar);
    }
    return ledger;
}

FilterResult run_filter(const Dataset& dataset, std::span<const PredictionSet> predictions,
                        const EmbeddingSet& embeddings, const RunConfig& config) {
    config.validate();
    FilterResult result;
    result.prefilter = run_prefilter(dataset, config);
    result.warnings = result.prefilter.anomalous.warnings;
    for (const auto& g : result.prefilter.duplicates)
        if (g.gold_conflict)
            result.warnings.push_back("duplicate group kept as '" + g.kept_id +
                                      "' has conflicting gold answers");

    const auto& candidates = result.prefilter.candidates;
    PredictionRefs full, choices;
    for (const auto& s : predictions)
        (s.mode == PromptMode::FullPrompt ? full : choices).push_back(&s);
    const double theta = config.confidence_threshold;

    for (auto step : config.step_order) {
        switch (step) {
            case FilterStep::Easy:
                result.confidence.easy = detect_easy(dataset, candidates, full, theta, config.threads);
                result.confidence.wrong_gt_suspects =
                    flag_wrong_ground_truth(dataset, candidates, full, theta);
                break;
            case FilterStep::Contamination:
                if (choices.empty())
                    result.warnings.push_back(
                        "contamination filtering skipped: no choices_only predictions supplied");
                else
                    result.confidence.contamination =
                        detect_contaminated(dataset, candidates, choices, theta, config.threads);
                break;
            case FilterStep::Similarity:
                result.similarity = run_similarity(embeddings, candidates, config);
                break;
        }
    }
    for (const auto& w : result.similarity.warnings) result.warnings.push_back(w);
    result.ledger = assemble_ledger(dataset, result.prefilter, result.confidence, result.similarity, config);
    return result;
}

std::vector<std::string> model_names(std::span<const PredictionSet> predictions) {
    std::vector<std::string> names;
    for (const auto& s : predictions)
        if (s.mode == PromptMode::FullPrompt) names.push_back(s.model);
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    return names;
}

double percent_dropped(const Ledger& ledger) {
    if (ledger.empty()) return 0.0;
    const auto dropped = std::count_if(ledger.begin(), ledger.end(),
                                       [](const LedgerEntry& e) { return e.verdict() == Verdict::Drop; });
    return 100.0 * static_cast<double>(dropped) / static_cast<double>(ledger.size());
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        // r * (n - k + i) / i stays integral at every step.
        const std::uint64_t num = n - k + i;
        if (r > std::numeric_limits<std::uint64_t>::max() / num)
            return std::numeric_limits<std::uint64_t>::max();
        r = r * num / i;
    }
    return r;
}

namespace {

std::vector<std::vector<std::size_t>> all_subsets(std::size_t n, std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> cur(k);
    std::iota(cur.begin(), cur.end(), std::size_t{0});
    while (true) {
        out.push_back(cur);
        std::size_t i = k;
        while (i > 0 && cur[i - 1] == n - k + (i - 1)) --i;
        if (i == 0) break;
        ++cur[i - 1];
        for (std::size_t j = i; j < k; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

constexpr std::uint64_t kEnumerationLimit = 1'000'000;

}  // namespace

std::vector<std::vector<std::size_t>> draw_subsets(std::size_t n, std::size_t k,
                                                   std::size_t draws, std::uint64_t seed) {
    if (k < 1 || k > n) throw Error("subset size must lie in [1, number of models]");
    if (draws < 1) throw Error("ablation needs at least one draw");
    const auto total = binomial(n, k);
    if (total <= draws) return all_subsets(n, k);

    auto rng = Rng::stream(seed, "ablation");
    if (total <= kEnumerationLimit) {
        auto subsets = all_subsets(n, k);
        rng.shuffle(std::span(subsets));
        subsets.resize(draws);
        return subsets;
    }
    // Too many subsets to list: rejection-sample distinct ones.
    std::set<std::vector<std::size_t>> seen;
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> pool(n);
    while (out.size() < draws) {
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        for (std::size_t i = 0; i < k; ++i)
            std::swap(pool[i], pool[i + static_cast<std::size_t>(rng.below(n - i))]);
        std::vector<std::size_t> pick(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
        std::sort(pick.begin(), pick.end());
        if (seen.insert(pick).second) out.push_back(std::move(pick));
    }
    return out;
}

AblationResult ablate_model_subsets(const Dataset& dataset,
                                    std::span<const PredictionSet> predictions,
                                    std::size_t subset_size, std::size_t draws,
                                    std::uint64_t seed, const RunConfig& config,
                                    const PrefilterOutcome& prefilter,
                                    const SimilarityOutcome& similarity) {
    const auto models = model_names(predictions);
    if (subset_size < 1 || subset_size > models.size())
        throw Error("subset size " + std::to_string(subset_size) + " exceeds the " +
                    std::to_string(models.size()) + " available models");

    AblationResult result;
    result.subset_size = subset_size;
    result.total_subsets = binomial(models.size(), subset_size);
    for (const auto& idx : draw_subsets(models.size(), subset_size, draws, seed)) {
        std::vector<std::string> names;
        for (auto i : idx) names.push_back(models[i]);
        result.subsets.push_back(std::move(names));
    }

    RunConfig inner = config;
    inner.threads = 1;
    result.percentages.resize(result.subsets.size());
    parallel_for(result.subsets.size(), config.threads, [&](std::size_t d) {
        const auto confidence =
            run_confidence_steps(dataset, predictions, prefilter.candidates, inner, result.subsets[d]);
        result.percentages[d] =
            percent_dropped(assemble_ledger(dataset, prefilter, confidence, similarity, inner));
    });

    const auto& pct = result.percentages;
    if (std::adjacent_find(pct.begin(), pct.end(), std::not_equal_to<>()) == pct.end()) {
        // Identical draws: report the value itself, free of summation error.
        result.mean = pct.front();
        return result;
    }
    const double n = static_cast<double>(pct.size());
    result.mean = std::accumulate(pct.begin(), pct.end(), 0.0) / n;
    double ss = 0.0;
    for (double p : result.percentages) ss += (p - result.mean) * (p - result.mean);
    result.stddev = std::sqrt(ss / n);
    return result;
}

}  // namespace smartfilter
