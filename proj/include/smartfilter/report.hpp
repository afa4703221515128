#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "smartfilter/pipeline.hpp"
#include "smartfilter/types.hpp"
#include "smartfilter/validate.hpp"

namespace smartfilter {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.3.0";

/// Counts behind the filtering table. "Flagged" counts treat each step
/// independently; "attributed" counts assign every dropped example to one
/// step (prefilter, then easy > contaminated > similar) so they sum to the
/// number dropped.
struct FilteringSummary {
    std::size_t total = 0;
    std::size_t kept = 0;
    std::size_t dropped = 0;

    std::size_t exact_duplicates = 0;
    std::size_t anomalous = 0;
    std::size_t prefiltered = 0;
    std::size_t easy = 0;
    std::size_t retained_easy = 0;
    std::size_t dropped_easy = 0;
    std::size_t contaminated = 0;
    std::size_t similar_clustered = 0;
    std::size_t similar_removed = 0;
    std::size_t wrong_gt_suspects = 0;

    std::size_t attributed_prefilter = 0;
    std::size_t attributed_easy = 0;
    std::size_t attributed_contaminated = 0;
    std::size_t attributed_similar = 0;

    bool reconciles() const;
};

FilteringSummary summarize(const Ledger& ledger);

double percent(std::size_t part, std::size_t whole);

/// Fixed-point rendering ("64.41") independent of the global locale.
std::string format_fixed(double value, int decimals);

struct PipelineRun {
    RunConfig config;
    std::map<std::string, std::string> inputs;
    std::string out_dir;
    std::optional<std::string> timestamp;
    std::string tool_version = kToolVersion;
};

ordered_json config_json(const RunConfig& config);

/// Threshold, bandwidth, density curve, distance histogram and clusters.
ordered_json similarity_artifact(const SimilarityOutcome& similarity, const RunConfig& config);

ordered_json ablation_json(std::span<const AblationResult> rows);

ordered_json validation_json(const ValidationReport& report);

struct ReportInputs {
    const Dataset& dataset;
    const Ledger& ledger;
    std::span<const PredictionSet> predictions;
    const EloTable* elo = nullptr;
    const ordered_json* similarity = nullptr;
    const ordered_json* ablation = nullptr;
    PipelineRun run;
    std::vector<std::string> warnings;
};

/// Filtering table, rankings, correlations, agreement matrices, category
/// table, similarity threshold and (when supplied) the ablation table.
ordered_json build_report(const ReportInputs& inputs);

/// report.json plus one CSV per table under tables/.
void write_report(const ordered_json& report, const fs::path& out_dir);

/// filtered_dataset.jsonl (Keep only), ledger.jsonl and the report.
void write_outputs(const Dataset& dataset, const Ledger& ledger, const ordered_json& report,
                   const fs::path& out_dir);

}  // namespace smartfilter
