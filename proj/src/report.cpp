#include "smartfilter/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "smartfilter/error.hpp"
#include "smartfilter/io.hpp"
#include "smartfilter/metrics.hpp"

namespace smartfilter {

namespace {

constexpr std::size_t kHistogramBins = 100;

ordered_json opt(const std::optional<std::string>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json ranking_json(const Ranking& r) {
    auto arr = ordered_json::array();
    for (const auto& e : r.entries)
        arr.push_back({{"model", e.model}, {"accuracy", e.accuracy}, {"rank", e.rank}});
    return arr;
}

ordered_json matrix_json(const AgreementMatrix& m) {
    auto rows = ordered_json::array();
    for (std::size_t i = 0; i < m.models.size(); ++i) {
        auto row = ordered_json::array();
        for (std::size_t j = 0; j < m.models.size(); ++j) row.push_back(m.at(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Ranking rank_on(const PredictionRefs& sets, const Dataset& dataset,
                std::span<const std::string> ids) {
    std::vector<std::pair<std::string, double>> acc;
    for (const auto* s : sets) acc.emplace_back(s->model, accuracy(*s, dataset, ids));
    return rank_models(std::move(acc));
}

// Ids every set covers with a vector of the right length.
std::vector<std::string> covered_ids(const PredictionRefs& sets, const Dataset& dataset) {
    std::vector<std::string> ids;
    for (const auto& ex : dataset.examples()) {
        bool ok = true;
        for (const auto* s : sets) {
            const auto* p = s->find(ex.id);
            if (!p || p->size() != ex.options.size()) {
                ok = false;
                break;
            }
        }
        if (ok) ids.push_back(ex.id);
    }
    return ids;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    return out + "\"";
}

std::string number(const ordered_json& v, int decimals) {
    return v.is_null() ? "" : format_fixed(v.get<double>(), decimals);
}

}  // namespace

bool FilteringSummary::reconciles() const {
    return kept + dropped == total &&
           attributed_prefilter + attributed_easy + attributed_contaminated + attributed_similar ==
               dropped;
}

FilteringSummary summarize(const Ledger& ledger) {
    FilteringSummary s;
    s.total = ledger.size();
    for (const auto& e : ledger) {
        const bool drop = e.verdict() == Verdict::Drop;
        (drop ? s.dropped : s.kept) += 1;
        s.exact_duplicates += e.exact_duplicate;
        s.anomalous += e.anomalous;
        s.prefiltered += e.exact_duplicate || e.anomalous;
        s.easy += e.easy;
        s.retained_easy += e.retained_easy;
        s.dropped_easy += e.easy && !e.retained_easy;
        s.contaminated += e.contaminated;
        s.similar_clustered += e.similar_cluster_id.has_value();
        s.similar_removed += e.removed_as_similar;
        s.wrong_gt_suspects += e.wrong_gt_suspect;
        if (!drop) continue;
        if (e.exact_duplicate || e.anomalous) ++s.attributed_prefilter;
        else if (e.easy && !e.retained_easy) ++s.attributed_easy;
        else if (e.contaminated) ++s.attributed_contaminated;
        else if (e.removed_as_similar) ++s.attributed_similar;
    }
    return s;
}

double percent(std::size_t part, std::size_t whole) {
    return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    return buf;
}

ordered_json config_json(const RunConfig& config) {
    ordered_json j;
    j["confidence_threshold"] = config.confidence_threshold;
    j["retention_fraction"] = config.retention_fraction;
    j["knn_k"] = config.knn_k;
    j["seed"] = config.seed;
    j["anomalous_subsets"] = config.anomalous_subsets;
    j["kde_grid_points"] = config.kde_grid_points;
    j["kde_bandwidth"] = config.kde_bandwidth.fixed ? ordered_json(*config.kde_bandwidth.fixed)
                                                    : ordered_json("silverman");
    j["cluster_removal_rounding"] = "floor";
    auto order = ordered_json::array();
    for (auto s : config.step_order)
        order.push_back(s == FilterStep::Easy ? "easy"
                        : s == FilterStep::Contamination ? "contamination" : "similarity");
    j["step_order"] = order;
    return j;
}

ordered_json similarity_artifact(const SimilarityOutcome& sim, const RunConfig& config) {
    ordered_json j;
    j["pair_count"] = sim.pair_count;
    j["knn_k"] = config.knn_k;
    j["bandwidth_rule"] = config.kde_bandwidth.fixed ? "fixed" : "silverman";
    if (!sim.kde) {
        j["delta"] = nullptr;
        j["warnings"] = sim.warnings;
        j["clusters"] = ordered_json::array();
        return j;
    }
    const auto& kde = *sim.kde;
    j["delta"] = kde.delta;
    j["bandwidth"] = kde.bandwidth;
    j["grid_points"] = kde.grid.size();
    j["sample_count"] = kde.sample_count;
    j["fallback"] = kde.fallback;
    j["warnings"] = sim.warnings;
    j["cluster_count"] = sim.clusters.size();
    std::size_t clustered = 0, removed = 0;
    for (const auto& c : sim.clusters) {
        clustered += c.member_ids.size();
        removed += c.removed_ids.size();
    }
    j["clustered_examples"] = clustered;
    j["removed_examples"] = removed;
    j["density"] = {{"grid", kde.grid}, {"density", kde.density}};

    const double lo = kde.grid.front(), hi = kde.grid.back();
    std::vector<std::size_t> counts(kHistogramBins, 0);
    for (double d : sim.pair_distances) {
        auto bin = static_cast<std::size_t>((d - lo) / (hi - lo) * kHistogramBins);
        ++counts[std::min(bin, kHistogramBins - 1)];
    }
    std::vector<double> edges(kHistogramBins + 1);
    for (std::size_t i = 0; i <= kHistogramBins; ++i)
        edges[i] = lo + (hi - lo) * static_cast<double>(i) / kHistogramBins;
    j["histogram"] = {{"bin_edges", edges}, {"counts", counts}};

    auto clusters = ordered_json::array();
    for (const auto& c : sim.clusters)
        clusters.push_back({{"cluster_id", c.cluster_id}, {"members", c.member_ids}, {"removed", c.removed_ids}});
    j["clusters"] = clusters;
    return j;
}

ordered_json ablation_json(std::span<const AblationResult> rows) {
    auto arr = ordered_json::array();
    for (const auto& r : rows) {
        arr.push_back({{"subset_size", r.subset_size},
                       {"draws", r.subsets.size()},
                       {"total_subsets", r.total_subsets},
                       {"mean_percent_filtered", r.mean},
                       {"std_percent_filtered", r.stddev},
                       {"subsets", r.subsets},
                       {"percent_filtered", r.percentages}});
    }
    return arr;
}

ordered_json validation_json(const ValidationReport& report) {
    ordered_json j;
    j["passed"] = report.passed();
    auto failures = ordered_json::array();
    for (const auto& f : report.failures)
        failures.push_back({{"set", f.set}, {"id", f.id}, {"reason", std::string(to_string(f.reason))},
                            {"detail", f.detail}});
    j["failures"] = failures;
    j["warnings"] = report.warnings;
    return j;
}

ordered_json build_report(const ReportInputs& in) {
    ordered_json report;
    std::vector<std::string> notices;

    ordered_json run;
    run["tool_version"] = in.run.tool_version;
    run["timestamp"] = opt(in.run.timestamp);
    run["config"] = config_json(in.run.config);
    run["inputs"] = in.run.inputs;
    run["out_dir"] = in.run.out_dir;
    run["policies"] = {
        {"retention_eligibility", "easy examples not flagged contaminated or removed as similar"},
        {"duplicate_kept_member", "lexicographically smallest id"},
        {"similar_edge_rule", "distance < delta"},
        {"confidence_rule", "unique argmax on gold option with probability > threshold"}};
    report["run"] = run;

    const auto s = summarize(in.ledger);
    ordered_json filtering;
    filtering["examples"] = s.total;
    filtering["counts"] = {{"exact_duplicates", s.exact_duplicates},
                           {"anomalous", s.anomalous},
                           {"prefiltered", s.prefiltered},
                           {"easy", s.easy},
                           {"retained_easy", s.retained_easy},
                           {"dropped_easy", s.dropped_easy},
                           {"contaminated", s.contaminated},
                           {"similar_clustered", s.similar_clustered},
                           {"similar_removed", s.similar_removed},
                           {"wrong_gt_suspects", s.wrong_gt_suspects},
                           {"dropped", s.dropped},
                           {"kept", s.kept}};
    filtering["flagged_percent"] = {{"easy", percent(s.easy, s.total)},
                                    {"data_contaminated", percent(s.contaminated, s.total)},
                                    {"similar", percent(s.similar_removed, s.total)},
                                    {"prefiltering", percent(s.prefiltered, s.total)}};
    filtering["attributed_percent"] = {{"easy", percent(s.attributed_easy, s.total)},
                                       {"data_contaminated", percent(s.attributed_contaminated, s.total)},
                                       {"similar", percent(s.attributed_similar, s.total)},
                                       {"prefiltering", percent(s.attributed_prefilter, s.total)}};
    filtering["percent_filtered"] = percent(s.dropped, s.total);
    filtering["examples_after"] = s.kept;
    filtering["reconciles"] = s.reconciles();
    report["filtering"] = filtering;

    std::vector<std::string> kept_ids;
    for (const auto& e : in.ledger)
        if (e.verdict() == Verdict::Keep) kept_ids.push_back(e.id);

    const auto full = refs_for_mode(in.predictions, PromptMode::FullPrompt);
    const auto original_ids = covered_ids(full, in.dataset);
    if (original_ids.size() < in.dataset.size())
        notices.push_back(std::to_string(in.dataset.size() - original_ids.size()) +
                          " examples lack full-prompt coverage and are excluded from original accuracies");

    std::optional<Ranking> original, filtered;
    ordered_json rankings;
    rankings["original_examples"] = original_ids.size();
    rankings["filtered_examples"] = kept_ids.size();
    if (!full.empty() && !original_ids.empty()) original = rank_on(full, in.dataset, original_ids);
    if (!full.empty() && !kept_ids.empty()) filtered = rank_on(full, in.dataset, kept_ids);
    rankings["original"] = original ? ranking_json(*original) : ordered_json::array();
    rankings["filtered"] = filtered ? ranking_json(*filtered) : ordered_json::array();
    report["rankings"] = rankings;

    ordered_json corr;
    corr["kendall_tau_b"] = nullptr;
    if (original && filtered) {
        try {
            corr["kendall_tau_b"] = kendall_tau(*original, *filtered);
        } catch (const Error& e) {
            notices.push_back(std::string("kendall tau unavailable: ") + e.what());
        }
    }
    if (!in.elo) {
        notices.push_back("no Elo table supplied; Pearson section omitted");
    } else if (original && filtered) {
        std::vector<std::string> models;
        std::vector<double> elo, acc_orig, acc_filt;
        for (const auto& e : original->entries) {
            auto it = in.elo->find(e.model);
            if (it == in.elo->end()) continue;
            models.push_back(e.model);
            elo.push_back(it->second);
            acc_orig.push_back(e.accuracy);
            acc_filt.push_back(filtered->find(e.model)->accuracy);
        }
        try {
            corr["pearson"] = {{"models", models},
                               {"original", pearson(acc_orig, elo)},
                               {"filtered", pearson(acc_filt, elo)}};
        } catch (const Error& e) {
            notices.push_back(std::string("pearson unavailable: ") + e.what());
        }
    }
    report["correlations"] = corr;

    ordered_json agreement;
    agreement["models"] = ordered_json::array();
    for (const auto* s : full) agreement["models"].push_back(s->model);
    agreement["original"] = !full.empty() && !original_ids.empty()
                                ? matrix_json(agreement_matrix(full, in.dataset, original_ids))
                                : ordered_json::array();
    agreement["filtered"] = !full.empty() && !kept_ids.empty()
                                ? matrix_json(agreement_matrix(full, in.dataset, kept_ids))
                                : ordered_json::array();
    report["agreement"] = agreement;

    auto categories = ordered_json::array();
    for (const auto& row : category_report(in.dataset, in.ledger))
        categories.push_back({{"subset", row.subset},
                              {"original", row.original},
                              {"kept", row.kept},
                              {"percent_removed", row.percent_removed}});
    report["categories"] = categories;

    if (in.similarity) {
        auto sim = *in.similarity;
        sim.erase("clusters");
        report["similarity"] = sim;
    } else {
        notices.push_back("similarity artifact not available");
        report["similarity"] = nullptr;
    }
    if (in.ablation) report["ablation"] = *in.ablation;

    auto warnings = in.warnings;
    warnings.insert(warnings.end(), notices.begin(), notices.end());
    report["notices"] = warnings;
    return report;
}

void write_report(const ordered_json& report, const fs::path& out_dir) {
    write_text_file(out_dir / "report.json", report.dump(2) + "\n");
    const auto tables = out_dir / "tables";
    fs::create_directories(tables);

    {
        const auto& f = report.at("filtering");
        std::ostringstream csv;
        csv << "view,examples,easy,data_contaminated,similar,prefiltering,percent_filtered,examples_after\n";
        for (const char* view : {"flagged_percent", "attributed_percent"}) {
            const auto& p = f.at(view);
            csv << (std::string(view) == "flagged_percent" ? "flagged" : "attributed") << ','
                << f.at("examples").get<std::size_t>() << ',' << number(p.at("easy"), 2) << ','
                << number(p.at("data_contaminated"), 2) << ',' << number(p.at("similar"), 2) << ','
                << number(p.at("prefiltering"), 2) << ',' << number(f.at("percent_filtered"), 2) << ','
                << f.at("examples_after").get<std::size_t>() << '\n';
        }
        write_text_file(tables / "filtering.csv", csv.str());
    }
    {
        const auto& r = report.at("rankings");
        std::ostringstream csv;
        csv << "model,original_accuracy,original_rank,filtered_accuracy,filtered_rank\n";
        for (const auto& o : r.at("original")) {
            const auto model = o.at("model").get<std::string>();
            csv << csv_field(model) << ',' << number(o.at("accuracy"), 4) << ',' << o.at("rank").get<std::size_t>();
            auto it = std::find_if(r.at("filtered").begin(), r.at("filtered").end(),
                                   [&](const ordered_json& f) { return f.at("model") == model; });
            if (it != r.at("filtered").end())
                csv << ',' << number(it->at("accuracy"), 4) << ',' << it->at("rank").get<std::size_t>();
            else
                csv << ",,";
            csv << '\n';
        }
        write_text_file(tables / "rankings.csv", csv.str());
    }
    {
        const auto& c = report.at("correlations");
        std::ostringstream csv;
        csv << "metric,value\n";
        csv << "kendall_tau_b," << number(c.at("kendall_tau_b"), 4) << '\n';
        if (c.contains("pearson")) {
            csv << "pearson_elo_original," << number(c.at("pearson").at("original"), 4) << '\n';
            csv << "pearson_elo_filtered," << number(c.at("pearson").at("filtered"), 4) << '\n';
        }
        write_text_file(tables / "correlations.csv", csv.str());
    }
    for (const char* which : {"original", "filtered"}) {
        const auto& a = report.at("agreement");
        std::ostringstream csv;
        csv << "model";
        for (const auto& m : a.at("models")) csv << ',' << csv_field(m.get<std::string>());
        csv << '\n';
        const auto& rows = a.at(which);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            csv << csv_field(a.at("models")[i].get<std::string>());
            for (const auto& v : rows[i]) csv << ',' << number(v, 4);
            csv << '\n';
        }
        write_text_file(tables / ("agreement_" + std::string(which) + ".csv"), csv.str());
    }
    {
        std::ostringstream csv;
        csv << "subset,original,kept,percent_removed\n";
        for (const auto& row : report.at("categories"))
            csv << csv_field(row.at("subset").get<std::string>()) << ',' << row.at("original").get<std::size_t>()
                << ',' << row.at("kept").get<std::size_t>() << ',' << number(row.at("percent_removed"), 2) << '\n';
        write_text_file(tables / "categories.csv", csv.str());
    }
    if (const auto& sim = report.at("similarity"); !sim.is_null() && sim.contains("density")) {
        std::ostringstream dens;
        dens << "distance,density\n";
        const auto& grid = sim.at("density").at("grid");
        const auto& values = sim.at("density").at("density");
        for (std::size_t i = 0; i < grid.size(); ++i)
            dens << number(grid[i], 6) << ',' << number(values[i], 6) << '\n';
        write_text_file(tables / "similarity_density.csv", dens.str());

        std::ostringstream hist;
        hist << "bin_low,bin_high,count\n";
        const auto& edges = sim.at("histogram").at("bin_edges");
        const auto& counts = sim.at("histogram").at("counts");
        for (std::size_t i = 0; i < counts.size(); ++i)
            hist << number(edges[i], 6) << ',' << number(edges[i + 1], 6) << ','
                 << counts[i].get<std::size_t>() << '\n';
        hist << "delta," << number(sim.at("delta"), 6) << ",\n";
        write_text_file(tables / "similarity_histogram.csv", hist.str());
    }
    if (report.contains("ablation")) {
        std::ostringstream csv;
        csv << "subset_size,draws,total_subsets,mean_percent_filtered,std_percent_filtered\n";
        for (const auto& row : report.at("ablation"))
            csv << row.at("subset_size").get<std::size_t>() << ',' << row.at("draws").get<std::size_t>() << ','
                << row.at("total_subsets").get<std::uint64_t>() << ','
                << number(row.at("mean_percent_filtered"), 2) << ','
                << number(row.at("std_percent_filtered"), 2) << '\n';
        write_text_file(tables / "ablation.csv", csv.str());
    }
}

void write_outputs(const Dataset& dataset, const Ledger& ledger, const ordered_json& report,
                   const fs::path& out_dir) {
    fs::create_directories(out_dir);
    std::vector<Example> kept;
    for (const auto& e : ledger)
        if (e.verdict() == Verdict::Keep) kept.push_back(dataset.at(e.id));
    write_examples(kept, out_dir / "filtered_dataset.jsonl");
    write_ledger(ledger, out_dir / "ledger.jsonl");
    write_report(report, out_dir);
}

}  // namespace smartfilter
