#include "smartfilter/types.hpp"

#include <algorithm>
#include <cmath>

#include "smartfilter/error.hpp"

namespace smartfilter {

void validate_example(const Example& example) {
    if (example.id.empty()) throw Error("example with empty id");
    if (example.options.size() < 2)
        throw Error("example '" + example.id + "' has fewer than 2 options");
    for (const auto& option : example.options)
        if (option.empty()) throw Error("example '" + example.id + "' has an empty option");
    if (example.gold_index >= example.options.size())
        throw Error("example '" + example.id + "': gold_index out of range");
}

Dataset Dataset::from_examples(std::vector<Example> examples) {
    for (const auto& ex : examples) validate_example(ex);
    std::sort(examples.begin(), examples.end(),
              [](const Example& a, const Example& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < examples.size(); ++i)
        if (examples[i].id == examples[i - 1].id)
            throw Error("duplicate example id '" + examples[i].id + "'");

    Dataset ds;
    ds.examples_ = std::move(examples);
    ds.index_.reserve(ds.examples_.size());
    for (std::size_t i = 0; i < ds.examples_.size(); ++i) ds.index_.emplace(ds.examples_[i].id, i);
    return ds;
}

const Example* Dataset::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &examples_[it->second];
}

const Example& Dataset::at(std::string_view id) const {
    if (const auto* ex = find(id)) return *ex;
    throw Error("unknown example id '" + std::string(id) + "'");
}

std::string_view to_string(PromptMode mode) {
    switch (mode) {
        case PromptMode::FullPrompt: return "full";
        case PromptMode::ChoicesOnly: return "choices_only";
    }
    return "full";
}

PromptMode parse_prompt_mode(std::string_view text) {
    if (text == "full" || text == "full_prompt") return PromptMode::FullPrompt;
    if (text == "choices_only") return PromptMode::ChoicesOnly;
    throw Error("unknown prediction mode '" + std::string(text) + "'");
}

const std::vector<double>* PredictionSet::find(std::string_view example_id) const {
    auto it = entries.find(std::string(example_id));
    return it == entries.end() ? nullptr : &it->second;
}

void validate_prediction_set(const PredictionSet& set) {
    if (set.model.empty()) throw Error("prediction set without a model name");
    for (const auto& [id, probs] : set.entries) {
        if (probs.empty()) throw Error("empty probability vector for '" + id + "'");
        double sum = 0.0;
        for (double p : probs) {
            if (!(p >= 0.0 && p <= 1.0))
                throw Error("probability outside [0,1] for '" + id + "' in model '" + set.model + "'");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kProbabilitySumTolerance)
            throw Error("probability vector for '" + id + "' in model '" + set.model +
                        "' does not sum to 1 (sum " + std::to_string(sum) + ")");
    }
}

EmbeddingSet::EmbeddingSet(std::size_t dim, std::vector<std::string> ids, std::vector<float> data)
    : dim_(dim), ids_(std::move(ids)), data_(std::move(data)) {
    if (dim_ == 0) throw Error("embedding dimension must be positive");
    if (data_.size() != ids_.size() * dim_)
        throw Error("embedding payload holds " + std::to_string(data_.size()) + " floats, expected " +
                    std::to_string(ids_.size() * dim_));
    index_.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (!index_.emplace(ids_[i], i).second)
            throw Error("duplicate embedding id '" + ids_[i] + "'");
        auto r = row(i);
        if (std::all_of(r.begin(), r.end(), [](float v) { return v == 0.0f; }))
            throw Error("embedding for '" + ids_[i] + "' is an all-zero vector");
        if (!std::all_of(r.begin(), r.end(), [](float v) { return std::isfinite(v); }))
            throw Error("embedding for '" + ids_[i] + "' has a non-finite component");
    }
}

std::optional<std::size_t> EmbeddingSet::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

EmbeddingSet EmbeddingSet::subset(std::span<const std::string> ids) const {
    std::vector<float> data;
    data.reserve(ids.size() * dim_);
    for (const auto& id : ids) {
        auto i = find(id);
        if (!i) throw Error("no embedding for example '" + id + "'");
        auto r = row(*i);
        data.insert(data.end(), r.begin(), r.end());
    }
    return EmbeddingSet(dim_, {ids.begin(), ids.end()}, std::move(data));
}

void RunConfig::validate() const {
    if (!(confidence_threshold > 0.0 && confidence_threshold < 1.0))
        throw Error("confidence_threshold must lie in (0, 1)");
    if (!(retention_fraction >= 0.0 && retention_fraction <= 1.0))
        throw Error("retention_fraction must lie in [0, 1]");
    if (knn_k < 1) throw Error("knn_k must be at least 1");
    if (kde_grid_points < 3) throw Error("kde_grid_points must be at least 3");
    if (kde_bandwidth.fixed && !(*kde_bandwidth.fixed > 0.0))
        throw Error("fixed KDE bandwidth must be positive");
    if (threads < 1) throw Error("threads must be at least 1");
    auto order = step_order;
    std::sort(order.begin(), order.end());
    if (order != std::vector<FilterStep>{FilterStep::Easy, FilterStep::Contamination,
                                         FilterStep::Similarity})
        throw Error("step_order must name each filter step exactly once");
}

std::string_view to_string(DropReason reason) {
    switch (reason) {
        case DropReason::ExactDuplicate: return "exact_duplicate";
        case DropReason::Anomalous: return "anomalous";
        case DropReason::Easy: return "easy";
        case DropReason::Contaminated: return "contaminated";
        case DropReason::Similar: return "similar";
    }
    return "";
}

DropReason parse_drop_reason(std::string_view text) {
    for (auto r : {DropReason::ExactDuplicate, DropReason::Anomalous, DropReason::Easy,
                   DropReason::Contaminated, DropReason::Similar})
        if (to_string(r) == text) return r;
    throw Error("unknown drop reason '" + std::string(text) + "'");
}

void validate_ledger_entry(const LedgerEntry& entry) {
    if (entry.retained_easy && !entry.easy)
        throw Error("ledger entry '" + entry.id + "' is retained_easy but not easy");
    if (entry.removed_as_similar && !entry.similar_cluster_id)
        throw Error("ledger entry '" + entry.id + "' removed as similar without a cluster");
    if (entry.retained_easy && entry.verdict() == Verdict::Drop &&
        std::find(entry.drop_reasons.begin(), entry.drop_reasons.end(), DropReason::Easy) !=
            entry.drop_reasons.end())
        throw Error("ledger entry '" + entry.id + "' is retained_easy but dropped as easy");
}

}  // namespace smartfilter
