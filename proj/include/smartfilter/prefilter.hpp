#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "smartfilter/types.hpp"

namespace smartfilter {

struct DuplicateGroup {
    std::string canonical_key;
    std::vector<std::string> member_ids;  // sorted, size >= 2
    std::string kept_id;                  // member_ids.front()
    bool gold_conflict = false;           // members disagree on gold_index
};

/// Question and options with whitespace runs (including Unicode spaces)
/// collapsed to one ASCII space and trimmed, joined by U+001F. Case and
/// option order are preserved; gold_index is not part of the key.
std::string canonical_key(const Example& example);

/// Collapses whitespace runs in UTF-8 text and trims both ends.
std::string collapse_whitespace(std::string_view text);

/// Groups of examples with equal canonical keys, ordered by kept id.
std::vector<DuplicateGroup> find_exact_duplicates(const Dataset& dataset);

struct AnomalousSelection {
    std::set<std::string> ids;
    std::vector<std::string> warnings;  // configured subsets absent from the data
};

AnomalousSelection remove_anomalous_subsets(const Dataset& dataset,
                                            std::span<const std::string> anomalous_subsets);

}  // namespace smartfilter
