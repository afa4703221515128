#include "smartfilter/cli.hpp"

#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "smartfilter/error.hpp"
#include "smartfilter/io.hpp"
#include "smartfilter/pipeline.hpp"
#include "smartfilter/report.hpp"
#include "smartfilter/validate.hpp"

namespace smartfilter {

namespace {

struct Options {
    std::string dataset;
    std::string predictions;
    std::string embeddings;
    std::string manifest;
    std::string elo;
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::optional<std::string> timestamp;
    std::vector<std::size_t> subset_sizes;
    std::size_t draws = 10;
};

void add_common(CLI::App& cmd, Options& o, bool needs_embeddings) {
    cmd.add_option("--dataset", o.dataset, "Dataset (JSON lines)")->required();
    cmd.add_option("--predictions", o.predictions, "Directory of prediction files")->required();
    auto* emb = cmd.add_option("--embeddings", o.embeddings, "Embeddings (EMB1 or JSON float lines)");
    auto* man = cmd.add_option("--manifest", o.manifest, "Embedding manifest, one id per line");
    if (needs_embeddings) {
        emb->required();
        man->required();
    }
    cmd.add_option("--elo", o.elo, "Elo table (model,elo)");
    cmd.add_option("--config", o.config, "Run configuration (JSON)");
    cmd.add_option("--out", o.out, "Output directory")->required();
    cmd.add_option("--seed", o.seed, "Seed; overrides the config file");
    cmd.add_option("--threads", o.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
}

RunConfig resolve_config(const Options& o) {
    RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    cfg.threads = o.threads;
    cfg.validate();
    return cfg;
}

PipelineRun describe_run(const Options& o, const RunConfig& cfg) {
    PipelineRun run;
    run.config = cfg;
    run.inputs["dataset"] = o.dataset;
    run.inputs["predictions"] = o.predictions;
    if (!o.embeddings.empty()) run.inputs["embeddings"] = o.embeddings;
    if (!o.manifest.empty()) run.inputs["manifest"] = o.manifest;
    if (!o.elo.empty()) run.inputs["elo"] = o.elo;
    if (!o.config.empty()) run.inputs["config"] = o.config;
    run.out_dir = o.out;
    run.timestamp = o.timestamp;
    return run;
}

std::set<std::string> prefilter_exempt(const Dataset& dataset, const RunConfig& cfg) {
    return run_prefilter(dataset, cfg).removed;
}

void print_failures(const ValidationReport& report, std::ostream& err) {
    for (const auto& f : report.failures)
        err << "validation: " << f.set << ": " << f.id << ": " << to_string(f.reason)
            << (f.detail.empty() ? "" : " (" + f.detail + ")") << '\n';
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
    const fs::path out_dir(o.out);
    try {
        const auto cfg = resolve_config(o);
        const auto dataset = load_dataset(o.dataset);
        const auto predictions = load_prediction_dir(o.predictions);
        const auto embeddings = load_embeddings(o.embeddings, o.manifest);
        const auto report =
            validate_alignment(dataset, predictions, &embeddings, prefilter_exempt(dataset, cfg));
        write_text_file(out_dir / "validation.json", validation_json(report).dump(2) + "\n");
        for (const auto& w : report.warnings) err << "warning: " << w << '\n';
        print_failures(report, err);
        out << (report.passed() ? "validation passed" : "validation failed") << " ("
            << report.failures.size() << " failures)\n";
        return report.passed() ? kExitOk : kExitFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        try {
            ordered_json j{{"passed", false}, {"error", e.what()}};
            write_text_file(out_dir / "validation.json", j.dump(2) + "\n");
        } catch (const std::exception&) {
        }
        return kExitUsage;
    }
}

int cmd_filter(const Options& o, std::ostream& out, std::ostream& err) {
    const auto cfg = resolve_config(o);
    const auto dataset = load_dataset(o.dataset);
    const auto predictions = load_prediction_dir(o.predictions);
    const auto embeddings = load_embeddings(o.embeddings, o.manifest);
    std::optional<EloTable> elo;
    if (!o.elo.empty()) elo = load_elo(o.elo);

    const auto validation =
        validate_alignment(dataset, predictions, &embeddings, prefilter_exempt(dataset, cfg));
    if (!validation.passed()) {
        print_failures(validation, err);
        err << "error: inputs failed validation; no outputs written\n";
        return kExitFailure;
    }

    const auto result = run_filter(dataset, predictions, embeddings, cfg);
    const fs::path out_dir(o.out);
    fs::create_directories(out_dir);
    const auto similarity = similarity_artifact(result.similarity, cfg);
    write_text_file(out_dir / "similarity.json", similarity.dump(2) + "\n");

    ReportInputs in{dataset, result.ledger, predictions, nullptr, nullptr, nullptr, {}, {}};
    in.elo = elo ? &*elo : nullptr;
    in.similarity = &similarity;
    in.run = describe_run(o, cfg);
    in.warnings = validation.warnings;
    in.warnings.insert(in.warnings.end(), result.warnings.begin(), result.warnings.end());
    const auto report = build_report(in);
    write_outputs(dataset, result.ledger, report, out_dir);

    for (const auto& w : in.warnings) err << "warning: " << w << '\n';
    const auto s = summarize(result.ledger);
    out << "kept " << s.kept << " of " << s.total << " examples (" << format_fixed(percent(s.dropped, s.total), 2)
        << "% filtered)\n";
    return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out, std::ostream& err) {
    const auto cfg = resolve_config(o);
    const fs::path out_dir(o.out);
    const auto dataset = load_dataset(o.dataset);
    const auto predictions = load_prediction_dir(o.predictions);
    const auto ledger = load_ledger(out_dir / "ledger.jsonl");
    if (ledger.size() != dataset.size())
        throw Error("ledger has " + std::to_string(ledger.size()) + " entries for a dataset of " +
                    std::to_string(dataset.size()));
    for (const auto& e : ledger) dataset.at(e.id);

    std::optional<EloTable> elo;
    if (!o.elo.empty()) elo = load_elo(o.elo);
    std::optional<ordered_json> similarity, ablation;
    if (fs::exists(out_dir / "similarity.json"))
        similarity = ordered_json::parse(read_text_file(out_dir / "similarity.json"));
    if (fs::exists(out_dir / "ablation.json"))
        ablation = ordered_json::parse(read_text_file(out_dir / "ablation.json"));

    ReportInputs in{dataset, ledger, predictions, nullptr, nullptr, nullptr, {}, {}};
    in.elo = elo ? &*elo : nullptr;
    in.similarity = similarity ? &*similarity : nullptr;
    in.ablation = ablation ? &*ablation : nullptr;
    in.run = describe_run(o, cfg);
    const auto report = build_report(in);
    write_report(report, out_dir);
    if (!elo) err << "notice: no Elo table supplied; Pearson section omitted\n";
    out << "report written to " << (out_dir / "report.json").string() << '\n';
    return kExitOk;
}

int cmd_ablate(const Options& o, std::ostream& out, std::ostream& err) {
    const auto cfg = resolve_config(o);
    const auto dataset = load_dataset(o.dataset);
    const auto predictions = load_prediction_dir(o.predictions);
    const auto embeddings = load_embeddings(o.embeddings, o.manifest);
    const auto models = model_names(predictions);

    auto sizes = o.subset_sizes;
    if (sizes.empty())
        for (std::size_t n = models.size() > 3 ? models.size() - 3 : 1; n < models.size(); ++n)
            sizes.push_back(n);
    if (sizes.empty()) sizes.push_back(models.size());
    for (auto n : sizes) {
        if (n < 1 || n > models.size()) {
            err << "error: subset size " << n << " exceeds the " << models.size() << " available models\n";
            return kExitUsage;
        }
    }

    const auto validation =
        validate_alignment(dataset, predictions, &embeddings, prefilter_exempt(dataset, cfg));
    if (!validation.passed()) {
        print_failures(validation, err);
        return kExitFailure;
    }

    const auto prefilter = run_prefilter(dataset, cfg);
    const auto similarity = run_similarity(embeddings, prefilter.candidates, cfg);
    std::vector<AblationResult> rows;
    for (auto n : sizes)
        rows.push_back(ablate_model_subsets(dataset, predictions, n, o.draws, cfg.seed, cfg, prefilter, similarity));

    const fs::path out_dir(o.out);
    const auto table = ablation_json(rows);
    write_text_file(out_dir / "ablation.json", table.dump(2) + "\n");
    std::ostringstream csv;
    csv << "subset_size,draws,total_subsets,mean_percent_filtered,std_percent_filtered\n";
    out << "models  draws  mean%   std%\n";
    for (const auto& r : rows) {
        csv << r.subset_size << ',' << r.subsets.size() << ',' << r.total_subsets << ','
            << format_fixed(r.mean, 2) << ',' << format_fixed(r.stddev, 2) << '\n';
        out << r.subset_size << "       " << r.subsets.size() << "      " << format_fixed(r.mean, 2)
            << "  " << format_fixed(r.stddev, 2) << '\n';
    }
    fs::create_directories(out_dir / "tables");
    write_text_file(out_dir / "tables" / "ablation.csv", csv.str());
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Benchmark curation: removes easy, contaminated and near-duplicate examples", "smartfilter"};
    app.require_subcommand(1);
    Options o;

    auto* validate = app.add_subcommand("validate", "Check that predictions and embeddings cover the dataset");
    add_common(*validate, o, true);
    auto* filter = app.add_subcommand("filter", "Run the filtering pipeline and write all outputs");
    add_common(*filter, o, true);
    auto* report = app.add_subcommand("report", "Rebuild the report from an existing ledger");
    add_common(*report, o, false);
    report->add_option("--timestamp", o.timestamp, "Timestamp recorded in the report");
    filter->add_option("--timestamp", o.timestamp, "Timestamp recorded in the report");
    auto* ablate = app.add_subcommand("ablate", "Model-subset ablation of the filtered percentage");
    add_common(*ablate, o, true);
    ablate->add_option("--subset-size", o.subset_sizes, "Models per subset (repeatable)");
    ablate->add_option("--draws", o.draws, "Subsets drawn per size")->check(CLI::PositiveNumber);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*validate) return cmd_validate(o, out, err);
        if (*filter) return cmd_filter(o, out, err);
        if (*report) return cmd_report(o, out, err);
        if (*ablate) return cmd_ablate(o, out, err);
    } catch (const CoverageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace smartfilter
