#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace smartfilter {

struct Example {
    std::string id;
    std::string question;
    std::vector<std::string> options;
    std::size_t gold_index = 0;
    std::optional<std::string> subset;

    bool operator==(const Example&) const = default;
};

/// Checks the per-example invariants; throws Error naming the example.
void validate_example(const Example& example);

/// Immutable collection of examples, held in lexicographic id order so
/// every downstream step sees the same order regardless of file layout.
class Dataset {
public:
    Dataset() = default;

    /// Validates each example and rejects duplicate ids.
    static Dataset from_examples(std::vector<Example> examples);

    const std::vector<Example>& examples() const { return examples_; }
    std::size_t size() const { return examples_.size(); }
    bool empty() const { return examples_.empty(); }

    const Example* find(std::string_view id) const;
    const Example& at(std::string_view id) const;

    bool operator==(const Dataset& other) const { return examples_ == other.examples_; }

private:
    std::vector<Example> examples_;
    std::unordered_map<std::string, std::size_t> index_;
};

enum class PromptMode { FullPrompt, ChoicesOnly };

std::string_view to_string(PromptMode mode);
/// Accepts "full", "full_prompt", "choices_only".
PromptMode parse_prompt_mode(std::string_view text);

inline constexpr double kProbabilitySumTolerance = 1e-3;

struct PredictionSet {
    std::string model;
    PromptMode mode = PromptMode::FullPrompt;
    std::map<std::string, std::vector<double>> entries;

    const std::vector<double>* find(std::string_view example_id) const;

    bool operator==(const PredictionSet&) const = default;
};

/// Throws Error if any probability vector is outside [0,1] or does not
/// sum to 1 within kProbabilitySumTolerance.
void validate_prediction_set(const PredictionSet& set);

/// Row-major float32 embeddings bound to example ids.
class EmbeddingSet {
public:
    EmbeddingSet() = default;

    /// Throws Error on a size mismatch, duplicate id, or all-zero row.
    EmbeddingSet(std::size_t dim, std::vector<std::string> ids, std::vector<float> data);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<float>& data() const { return data_; }

    std::span<const float> row(std::size_t i) const {
        return {data_.data() + i * dim_, dim_};
    }
    std::optional<std::size_t> find(std::string_view id) const;

    /// Rows for the given ids, in the given order.
    EmbeddingSet subset(std::span<const std::string> ids) const;

    bool operator==(const EmbeddingSet& other) const {
        return dim_ == other.dim_ && ids_ == other.ids_ && data_ == other.data_;
    }

private:
    std::size_t dim_ = 0;
    std::vector<std::string> ids_;
    std::vector<float> data_;
    std::unordered_map<std::string, std::size_t> index_;
};

using EloTable = std::map<std::string, double>;

/// Fixed(h) when set, Silverman's rule otherwise.
struct BandwidthRule {
    std::optional<double> fixed;

    static BandwidthRule silverman() { return {}; }
    static BandwidthRule fixed_width(double h) { return {h}; }
    bool operator==(const BandwidthRule&) const = default;
};

enum class FilterStep { Easy, Contamination, Similarity };

struct RunConfig {
    double confidence_threshold = 0.8;
    double retention_fraction = 0.10;
    std::size_t knn_k = 100;
    std::uint64_t seed = 0;
    std::vector<std::string> anomalous_subsets;
    std::size_t kde_grid_points = 2048;
    BandwidthRule kde_bandwidth;
    unsigned threads = 1;
    /// Execution order of the three independent steps. Results do not
    /// depend on it; exposed so that property can be exercised.
    std::vector<FilterStep> step_order{FilterStep::Easy, FilterStep::Contamination,
                                       FilterStep::Similarity};

    /// Throws Error when a field is outside its documented range.
    void validate() const;
};

enum class DropReason { ExactDuplicate, Anomalous, Easy, Contaminated, Similar };

std::string_view to_string(DropReason reason);
DropReason parse_drop_reason(std::string_view text);

enum class Verdict { Keep, Drop };

struct LedgerEntry {
    std::string id;
    bool exact_duplicate = false;
    std::optional<std::string> duplicate_of;
    /// A duplicate group whose members disagree on the gold option.
    bool gold_conflict = false;
    bool anomalous = false;
    bool easy = false;
    bool retained_easy = false;
    bool contaminated = false;
    std::optional<std::int64_t> similar_cluster_id;
    bool removed_as_similar = false;
    bool wrong_gt_suspect = false;
    std::optional<double> min_gold_prob_full;
    std::optional<double> min_gold_prob_choices_only;
    std::vector<DropReason> drop_reasons;

    Verdict verdict() const { return drop_reasons.empty() ? Verdict::Keep : Verdict::Drop; }

    bool operator==(const LedgerEntry&) const = default;
};

/// One entry per dataset example, in id order.
using Ledger = std::vector<LedgerEntry>;

/// Throws Error when an entry breaks the flag/verdict invariants.
void validate_ledger_entry(const LedgerEntry& entry);

}  // namespace smartfilter
