#include "smartfilter/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>

#include "smartfilter/error.hpp"

namespace smartfilter {

std::size_t argmax(std::span<const double> probs) {
    return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

double accuracy(const PredictionSet& set, const Dataset& dataset,
                std::span<const std::string> example_ids) {
    if (example_ids.empty()) throw Error("accuracy over an empty example set");
    std::size_t correct = 0;
    for (const auto& id : example_ids) {
        const auto& ex = dataset.at(id);
        const auto top = top_option(probabilities_for(set, ex));
        if (top.unique && top.index == ex.gold_index) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(example_ids.size());
}

const RankedModel* Ranking::find(std::string_view model) const {
    for (const auto& e : entries)
        if (e.model == model) return &e;
    return nullptr;
}

Ranking rank_models(std::vector<std::pair<std::string, double>> accuracies) {
    std::sort(accuracies.begin(), accuracies.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    Ranking r;
    for (std::size_t i = 0; i < accuracies.size(); ++i) {
        std::size_t rank = i + 1;
        if (i > 0 && std::abs(accuracies[i - 1].second - accuracies[i].second) <= kRankTieTolerance)
            rank = r.entries.back().rank;
        r.entries.push_back({accuracies[i].first, accuracies[i].second, rank});
    }
    // Accuracies within tolerance may still differ, so re-sort ties by name.
    std::stable_sort(r.entries.begin(), r.entries.end(), [](const auto& a, const auto& b) {
        if (a.rank != b.rank) return a.rank < b.rank;
        return a.model < b.model;
    });
    return r;
}

double kendall_tau(const Ranking& a, const Ranking& b) {
    if (a.entries.size() != b.entries.size())
        throw Error("kendall_tau: rankings cover different model sets");
    std::vector<double> x, y;
    for (const auto& e : a.entries) {
        const auto* other = b.find(e.model);
        if (!other) throw Error("kendall_tau: model '" + e.model + "' missing from second ranking");
        x.push_back(static_cast<double>(e.rank));
        y.push_back(static_cast<double>(other->rank));
    }
    return kendall_tau_b(x, y);
}

namespace {

// Merge sort on values, returning the number of inversions (swaps).
std::uint64_t sort_counting_swaps(std::vector<double>& v, std::vector<double>& buf,
                                  std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t swaps = sort_counting_swaps(v, buf, lo, mid) + sort_counting_swaps(v, buf, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            swaps += mid - i;
            buf[k++] = v[j++];
        } else {
            buf[k++] = v[i++];
        }
    }
    while (i < mid) buf[k++] = v[i++];
    while (j < hi) buf[k++] = v[j++];
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return swaps;
}

template <typename Eq>
std::uint64_t tied_pairs(std::size_t n, Eq equal_to_previous) {
    std::uint64_t ties = 0, run = 1;
    for (std::size_t i = 1; i <= n; ++i) {
        if (i < n && equal_to_previous(i)) {
            ++run;
        } else {
            ties += run * (run - 1) / 2;
            run = 1;
        }
    }
    return ties;
}

}  // namespace

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error("kendall_tau: length mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw Error("kendall_tau needs at least 2 items");

    std::vector<std::pair<double, double>> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = {x[i], y[i]};
    std::sort(pts.begin(), pts.end());

    const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    const std::uint64_t tx = tied_pairs(n, [&](std::size_t i) { return pts[i].first == pts[i - 1].first; });
    const std::uint64_t txy = tied_pairs(n, [&](std::size_t i) { return pts[i] == pts[i - 1]; });

    std::vector<double> ys(n), buf(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = pts[i].second;
    const std::uint64_t swaps = sort_counting_swaps(ys, buf, 0, n);
    const std::uint64_t ty = tied_pairs(n, [&](std::size_t i) { return ys[i] == ys[i - 1]; });

    if (tx == n0 || ty == n0) throw Error("kendall_tau: a ranking is entirely tied");
    // C - D = n0 - tx - ty + txy - 2 * swaps
    const double numer = static_cast<double>(n0) - static_cast<double>(tx) - static_cast<double>(ty) +
                         static_cast<double>(txy) - 2.0 * static_cast<double>(swaps);
    const double denom = std::sqrt(static_cast<double>(n0 - tx) * static_cast<double>(n0 - ty));
    return std::clamp(numer / denom, -1.0, 1.0);
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw Error("pearson: length mismatch");
    const std::size_t n = xs.size();
    if (n < 2) throw Error("pearson needs at least 2 points");
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw Error("pearson: zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

AgreementMatrix agreement_matrix(const PredictionRefs& sets, const Dataset& dataset,
                                 std::span<const std::string> example_ids) {
    if (example_ids.empty()) throw Error("agreement_matrix over an empty example set");
    const std::size_t m = sets.size();
    std::vector<std::vector<std::size_t>> picks(m, std::vector<std::size_t>(example_ids.size()));
    for (std::size_t s = 0; s < m; ++s)
        for (std::size_t e = 0; e < example_ids.size(); ++e)
            picks[s][e] = argmax(probabilities_for(*sets[s], dataset.at(example_ids[e])));

    AgreementMatrix out;
    for (const auto* s : sets) out.models.push_back(s->model);
    out.values.assign(m * m, 1.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            std::size_t same = 0;
            for (std::size_t e = 0; e < example_ids.size(); ++e) same += picks[i][e] == picks[j][e];
            const double frac = static_cast<double>(same) / static_cast<double>(example_ids.size());
            out.values[i * m + j] = out.values[j * m + i] = frac;
        }
    }
    return out;
}

std::vector<CategoryRow> category_report(const Dataset& dataset, const Ledger& ledger) {
    std::map<std::string, Verdict> verdicts;
    for (const auto& e : ledger) verdicts.emplace(e.id, e.verdict());

    std::map<std::string, CategoryRow> rows;
    for (const auto& ex : dataset.examples()) {
        const std::string name = ex.subset.value_or("(none)");
        auto& row = rows[name];
        row.subset = name;
        ++row.original;
        auto it = verdicts.find(ex.id);
        if (it == verdicts.end()) throw Error("ledger has no entry for example '" + ex.id + "'");
        if (it->second == Verdict::Keep) ++row.kept;
    }
    std::vector<CategoryRow> out;
    for (auto& [name, row] : rows) {
        row.percent_removed = 100.0 * static_cast<double>(row.original - row.kept) /
                              static_cast<double>(row.original);
        out.push_back(row);
    }
    return out;
}

}  // namespace smartfilter
