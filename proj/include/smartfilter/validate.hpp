#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "smartfilter/types.hpp"

namespace smartfilter {

enum class AlignmentIssue { Missing, LengthMismatch, MissingEmbedding };

std::string_view to_string(AlignmentIssue issue);

struct AlignmentFailure {
    std::string set;  // "<model>:<mode>" or "embeddings"
    std::string id;
    AlignmentIssue reason = AlignmentIssue::Missing;
    std::string detail;

    bool operator==(const AlignmentFailure&) const = default;
};

struct ValidationReport {
    std::vector<AlignmentFailure> failures;
    std::vector<std::string> warnings;

    bool passed() const { return failures.empty(); }
};

std::string set_label(const PredictionSet& set);

/// Cross-checks every prediction set and the embeddings against the
/// dataset. Ids in `exempt` (examples dropped before the filter steps)
/// need no coverage. Rows for ids absent from the dataset are warnings.
ValidationReport validate_alignment(const Dataset& dataset, std::span<const PredictionSet> sets,
                                    const EmbeddingSet* embeddings,
                                    const std::set<std::string>& exempt = {});

}  // namespace smartfilter
