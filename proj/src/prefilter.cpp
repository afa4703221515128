#include "smartfilter/prefilter.hpp"

#include <algorithm>
#include <map>

namespace smartfilter {

namespace {

constexpr char kKeySeparator = '\x1f';

// Byte length of the whitespace code point starting at text[i], or 0.
std::size_t whitespace_length(std::string_view text, std::size_t i) {
    const auto byte = [&](std::size_t k) -> unsigned char {
        return i + k < text.size() ? static_cast<unsigned char>(text[i + k]) : 0;
    };
    const unsigned char c = byte(0);
    if (c == ' ' || (c >= 0x09 && c <= 0x0d)) return 1;
    if (c == 0xc2 && (byte(1) == 0x85 || byte(1) == 0xa0)) return 2;
    if (c == 0xe1 && byte(1) == 0x9a && byte(2) == 0x80) return 3;  // U+1680
    if (c == 0xe2 && byte(1) == 0x80) {
        const unsigned char d = byte(2);
        if ((d >= 0x80 && d <= 0x8a) || d == 0xa8 || d == 0xa9 || d == 0xaf) return 3;
    }
    if (c == 0xe2 && byte(1) == 0x81 && byte(2) == 0x9f) return 3;  // U+205F
    if (c == 0xe3 && byte(1) == 0x80 && byte(2) == 0x80) return 3;  // U+3000
    return 0;
}

}  // namespace

std::string collapse_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (std::size_t i = 0; i < text.size();) {
        if (auto n = whitespace_length(text, i)) {
            pending_space = !out.empty();
            i += n;
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(text[i++]);
    }
    return out;
}

std::string canonical_key(const Example& example) {
    std::string key = collapse_whitespace(example.question);
    for (const auto& option : example.options) {
        key.push_back(kKeySeparator);
        key += collapse_whitespace(option);
    }
    return key;
}

std::vector<DuplicateGroup> find_exact_duplicates(const Dataset& dataset) {
    // Examples arrive in id order, so members are appended sorted.
    std::map<std::string, std::vector<const Example*>> by_key;
    for (const auto& ex : dataset.examples()) by_key[canonical_key(ex)].push_back(&ex);

    std::vector<DuplicateGroup> groups;
    for (auto& [key, members] : by_key) {
        if (members.size() < 2) continue;
        DuplicateGroup g;
        g.canonical_key = key;
        for (const auto* ex : members) {
            g.member_ids.push_back(ex->id);
            if (ex->gold_index != members.front()->gold_index) g.gold_conflict = true;
        }
        g.kept_id = g.member_ids.front();
        groups.push_back(std::move(g));
    }
    std::sort(groups.begin(), groups.end(),
              [](const DuplicateGroup& a, const DuplicateGroup& b) { return a.kept_id < b.kept_id; });
    return groups;
}

AnomalousSelection remove_anomalous_subsets(const Dataset& dataset,
                                            std::span<const std::string> anomalous_subsets) {
    AnomalousSelection result;
    const std::set<std::string> wanted(anomalous_subsets.begin(), anomalous_subsets.end());
    std::set<std::string> seen;
    for (const auto& ex : dataset.examples()) {
        if (ex.subset && wanted.count(*ex.subset)) {
            result.ids.insert(ex.id);
            seen.insert(*ex.subset);
        }
    }
    for (const auto& name : wanted)
        if (!seen.count(name))
            result.warnings.push_back("anomalous subset '" + name + "' does not occur in the dataset");
    return result;
}

}  // namespace smartfilter
