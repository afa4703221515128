#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "smartfilter/confidence.hpp"
#include "smartfilter/types.hpp"

namespace smartfilter {

/// Fraction of `example_ids` whose unique argmax is the gold option.
double accuracy(const PredictionSet& set, const Dataset& dataset,
                std::span<const std::string> example_ids);

inline constexpr double kRankTieTolerance = 1e-9;

struct RankedModel {
    std::string model;
    double accuracy = 0.0;
    std::size_t rank = 0;

    bool operator==(const RankedModel&) const = default;
};

/// Models by descending accuracy with competition ranks ("1, 2, 2, 4").
/// Accuracies within kRankTieTolerance share a rank; ties list by name.
struct Ranking {
    std::vector<RankedModel> entries;

    const RankedModel* find(std::string_view model) const;
};

Ranking rank_models(std::vector<std::pair<std::string, double>> accuracies);

/// Kendall's tau-b between two rankings of the same model set.
double kendall_tau(const Ranking& a, const Ranking& b);

/// Kendall's tau-b of paired observations (Knight's O(n log n) algorithm).
/// Throws Error for fewer than 2 items or when either side is all tied.
double kendall_tau_b(std::span<const double> x, std::span<const double> y);

/// Sample Pearson correlation. Throws Error on length mismatch, fewer than
/// 2 points, or zero variance.
double pearson(std::span<const double> xs, std::span<const double> ys);

struct AgreementMatrix {
    std::vector<std::string> models;
    std::vector<double> values;  // row-major models x models

    double at(std::size_t i, std::size_t j) const { return values[i * models.size() + j]; }
};

/// Entry (i, j): fraction of examples where models i and j have the same
/// argmax (lowest index on ties).
AgreementMatrix agreement_matrix(const PredictionRefs& sets, const Dataset& dataset,
                                 std::span<const std::string> example_ids);

struct CategoryRow {
    std::string subset;  // "(none)" for examples without a subset label
    std::size_t original = 0;
    std::size_t kept = 0;
    double percent_removed = 0.0;
};

std::vector<CategoryRow> category_report(const Dataset& dataset, const Ledger& ledger);

/// Lowest index holding the maximum probability.
std::size_t argmax(std::span<const double> probs);

}  // namespace smartfilter
