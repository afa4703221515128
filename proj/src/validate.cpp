#include "smartfilter/validate.hpp"

namespace smartfilter {

std::string_view to_string(AlignmentIssue issue) {
    switch (issue) {
        case AlignmentIssue::Missing: return "missing";
        case AlignmentIssue::LengthMismatch: return "length_mismatch";
        case AlignmentIssue::MissingEmbedding: return "missing_embedding";
    }
    return "";
}

std::string set_label(const PredictionSet& set) {
    return set.model + ":" + std::string(to_string(set.mode));
}

ValidationReport validate_alignment(const Dataset& dataset, std::span<const PredictionSet> sets,
                                    const EmbeddingSet* embeddings,
                                    const std::set<std::string>& exempt) {
    ValidationReport report;
    if (sets.empty()) report.warnings.push_back("no prediction sets supplied");

    for (const auto& set : sets) {
        const auto label = set_label(set);
        for (const auto& ex : dataset.examples()) {
            if (exempt.count(ex.id)) continue;
            const auto* probs = set.find(ex.id);
            if (!probs) {
                report.failures.push_back({label, ex.id, AlignmentIssue::Missing, ""});
            } else if (probs->size() != ex.options.size()) {
                report.failures.push_back(
                    {label, ex.id, AlignmentIssue::LengthMismatch,
                     std::to_string(probs->size()) + " probabilities for " +
                         std::to_string(ex.options.size()) + " options"});
            }
        }
        std::size_t unknown = 0;
        for (const auto& [id, probs] : set.entries)
            if (!dataset.find(id)) ++unknown;
        if (unknown)
            report.warnings.push_back(label + ": " + std::to_string(unknown) +
                                      " rows reference ids absent from the dataset");
    }

    if (embeddings) {
        for (const auto& ex : dataset.examples())
            if (!exempt.count(ex.id) && !embeddings->find(ex.id))
                report.failures.push_back({"embeddings", ex.id, AlignmentIssue::MissingEmbedding, ""});
        std::size_t unknown = 0;
        for (const auto& id : embeddings->ids())
            if (!dataset.find(id)) ++unknown;
        if (unknown)
            report.warnings.push_back("embeddings: " + std::to_string(unknown) +
                                      " rows reference ids absent from the dataset");
    }
    return report;
}

}  // namespace smartfilter
