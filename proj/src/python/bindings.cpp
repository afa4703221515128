#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "smartfilter/cli.hpp"
#include "smartfilter/error.hpp"
#include "smartfilter/io.hpp"
#include "smartfilter/metrics.hpp"
#include "smartfilter/pipeline.hpp"
#include "smartfilter/similarity.hpp"

namespace py = pybind11;
using namespace smartfilter;

namespace {

EmbeddingSet to_embeddings(const std::vector<std::string>& ids,
                           const std::vector<std::vector<float>>& rows) {
    if (ids.size() != rows.size()) throw Error("ids and rows differ in length");
    const std::size_t dim = rows.empty() ? 0 : rows.front().size();
    std::vector<float> data;
    data.reserve(dim * rows.size());
    for (const auto& r : rows) {
        if (r.size() != dim) throw Error("rows have different lengths");
        data.insert(data.end(), r.begin(), r.end());
    }
    return EmbeddingSet(dim, ids, std::move(data));
}

py::dict entry_dict(const LedgerEntry& e) {
    py::dict d;
    d["id"] = e.id;
    d["verdict"] = e.verdict() == Verdict::Keep ? "keep" : "drop";
    d["exact_duplicate"] = e.exact_duplicate;
    d["duplicate_of"] = e.duplicate_of;
    d["anomalous"] = e.anomalous;
    d["easy"] = e.easy;
    d["retained_easy"] = e.retained_easy;
    d["contaminated"] = e.contaminated;
    d["similar_cluster_id"] = e.similar_cluster_id;
    d["removed_as_similar"] = e.removed_as_similar;
    d["wrong_gt_suspect"] = e.wrong_gt_suspect;
    py::list reasons;
    for (auto r : e.drop_reasons) reasons.append(std::string(to_string(r)));
    d["drop_reasons"] = reasons;
    return d;
}

}  // namespace

PYBIND11_MODULE(_smartfilter, m) {
    m.doc() = "Benchmark filtering engine";
    py::register_exception<Error>(m, "SmartFilterError", PyExc_ValueError);

    m.def("cosine_distance", [](const std::vector<float>& u, const std::vector<float>& v) {
        return cosine_distance(u, v);
    });

    m.def(
        "knn_pairs",
        [](const std::vector<std::string>& ids, const std::vector<std::vector<float>>& rows,
           std::size_t k, unsigned threads) {
            auto pairs = knn_pairs(to_embeddings(ids, rows), k, threads);
            std::vector<std::tuple<std::string, std::string, double>> out;
            out.reserve(pairs.size());
            for (auto& p : pairs) out.emplace_back(p.id_a, p.id_b, p.distance);
            return out;
        },
        py::arg("ids"), py::arg("rows"), py::arg("k"), py::arg("threads") = 1);

    m.def("silverman_bandwidth",
          [](const std::vector<double>& xs) { return silverman_bandwidth(xs); });

    m.def(
        "kde_threshold",
        [](const std::vector<double>& xs, std::size_t grid_points, std::optional<double> bandwidth) {
            auto rule = bandwidth ? BandwidthRule::fixed_width(*bandwidth) : BandwidthRule::silverman();
            auto r = kde_threshold(xs, rule, grid_points);
            py::dict d;
            d["delta"] = r.delta;
            d["bandwidth"] = r.bandwidth;
            d["peak_index"] = r.peak_index;
            d["fallback"] = r.fallback;
            d["warning"] = r.warning;
            d["grid"] = r.grid;
            d["density"] = r.density;
            return d;
        },
        py::arg("distances"), py::arg("grid_points") = 2048, py::arg("bandwidth") = py::none());

    m.def(
        "build_clusters",
        [](const std::vector<std::tuple<std::string, std::string, double>>& pairs, double delta) {
            std::vector<NeighborPair> ps;
            for (const auto& [a, b, d] : pairs)
                ps.push_back(a < b ? NeighborPair{a, b, d} : NeighborPair{b, a, d});
            std::vector<std::vector<std::string>> out;
            for (auto& c : build_clusters(ps, delta)) out.push_back(std::move(c.member_ids));
            return out;
        },
        py::arg("pairs"), py::arg("delta"));

    m.def("kendall_tau_b", [](const std::vector<double>& x, const std::vector<double>& y) {
        return kendall_tau_b(x, y);
    });
    m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) {
        return pearson(x, y);
    });

    m.def(
        "run_filter",
        [](const std::string& dataset, const std::string& predictions, const std::string& embeddings,
           const std::string& manifest, std::optional<std::string> config, std::optional<std::uint64_t> seed) {
            RunConfig cfg = config ? load_config(*config) : RunConfig{};
            if (seed) cfg.seed = *seed;
            cfg.validate();
            auto ds = load_dataset(dataset);
            auto preds = load_prediction_dir(predictions);
            auto emb = load_embeddings(embeddings, manifest);
            FilterResult result;
            {
                py::gil_scoped_release release;
                result = run_filter(ds, preds, emb, cfg);
            }
            py::list out;
            for (const auto& e : result.ledger) out.append(entry_dict(e));
            return out;
        },
        py::arg("dataset"), py::arg("predictions"), py::arg("embeddings"), py::arg("manifest"),
        py::arg("config") = py::none(), py::arg("seed") = py::none());

    m.def("run_cli", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
            py::gil_scoped_release release;
            code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
    });
}
