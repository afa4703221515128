#include "smartfilter/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "smartfilter/error.hpp"

namespace smartfilter {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::ifstream open_input(const fs::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw Error("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_output(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw Error("write to '" + path.string() + "' failed");
}

std::string where(const fs::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line) + ": ";
}

bool is_blank(const std::string& line) {
    return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

json parse_line(const std::string& line, const fs::path& path, std::size_t lineno) {
    try {
        return json::parse(line);
    } catch (const json::parse_error& e) {
        throw Error(where(path, lineno) + "parse error: " + e.what());
    }
}

template <typename T>
T field(const json& obj, const char* key, const fs::path& path, std::size_t lineno) {
    auto it = obj.find(key);
    if (it == obj.end()) throw Error(where(path, lineno) + "missing key '" + key + "'");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw Error(where(path, lineno) + "key '" + key + "' has the wrong type");
    }
}

ordered_json to_json(const Example& ex) {
    ordered_json obj;
    obj["id"] = ex.id;
    obj["question"] = ex.question;
    obj["options"] = ex.options;
    obj["answer_index"] = ex.gold_index;
    obj["subset"] = ex.subset ? ordered_json(*ex.subset) : ordered_json(nullptr);
    return obj;
}

std::uint32_t read_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void append_u32le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::vector<std::string> read_manifest(const fs::path& path) {
    auto in = open_input(path);
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        strip_cr(line);
        ids.push_back(line);
    }
    // A trailing newline is not an extra row.
    while (!ids.empty() && ids.back().empty()) ids.pop_back();
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (ids[i].empty()) throw Error(where(path, i + 1) + "empty example id in manifest");
    return ids;
}

EmbeddingSet parse_emb1(const std::string& bytes, const fs::path& path,
                        std::vector<std::string> ids) {
    constexpr std::size_t magic_len = sizeof(kEmb1Magic) - 1;
    constexpr std::size_t header_len = magic_len + 8;
    if (bytes.size() < header_len) throw Error(path.string() + ": truncated EMB1 header");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint32_t count = read_u32le(p + magic_len);
    const std::uint32_t dim = read_u32le(p + magic_len + 4);
    const std::uint64_t expected = static_cast<std::uint64_t>(count) * dim * 4u;
    if (bytes.size() - header_len != expected)
        throw Error(path.string() + ": EMB1 header declares count=" + std::to_string(count) +
                    " dim=" + std::to_string(dim) + " but payload holds " +
                    std::to_string(bytes.size() - header_len) + " bytes");
    if (ids.size() != count)
        throw Error(path.string() + ": manifest has " + std::to_string(ids.size()) +
                    " ids but EMB1 header declares " + std::to_string(count) + " rows");

    std::vector<float> data(static_cast<std::size_t>(count) * dim);
    const unsigned char* payload = p + header_len;
    for (std::size_t i = 0; i < data.size(); ++i)
        data[i] = std::bit_cast<float>(read_u32le(payload + 4 * i));
    return EmbeddingSet(dim, std::move(ids), std::move(data));
}

EmbeddingSet parse_float_lines(const fs::path& path, std::vector<std::string> ids) {
    auto in = open_input(path);
    std::vector<float> data;
    std::size_t dim = 0, rows = 0, lineno = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (is_blank(line)) continue;
        auto arr = parse_line(line, path, lineno);
        if (!arr.is_array()) throw Error(where(path, lineno) + "expected a JSON array of floats");
        if (rows == 0) dim = arr.size();
        if (arr.size() != dim)
            throw Error(where(path, lineno) + "row has " + std::to_string(arr.size()) +
                        " values, expected " + std::to_string(dim));
        for (const auto& v : arr) {
            if (!v.is_number()) throw Error(where(path, lineno) + "non-numeric embedding value");
            data.push_back(v.get<float>());
        }
        ++rows;
    }
    if (ids.size() != rows)
        throw Error(path.string() + ": manifest has " + std::to_string(ids.size()) +
                    " ids but the file holds " + std::to_string(rows) + " rows");
    return EmbeddingSet(dim, std::move(ids), std::move(data));
}

}  // namespace

std::string read_text_file(const fs::path& path) {
    auto in = open_input(path, std::ios::in | std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
    auto out = open_output(path, std::ios::out | std::ios::binary);
    out << text;
    finish(out, path);
}

Dataset load_dataset(const fs::path& path) {
    auto in = open_input(path);
    std::vector<Example> examples;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (is_blank(line)) continue;
        auto obj = parse_line(line, path, lineno);
        if (!obj.is_object()) throw Error(where(path, lineno) + "expected a JSON object");

        Example ex;
        ex.id = field<std::string>(obj, "id", path, lineno);
        ex.question = field<std::string>(obj, "question", path, lineno);
        ex.options = field<std::vector<std::string>>(obj, "options", path, lineno);
        auto gold = field<long long>(obj, "answer_index", path, lineno);
        if (gold < 0 || static_cast<std::size_t>(gold) >= ex.options.size())
            throw Error(where(path, lineno) + "gold_index out of range");
        ex.gold_index = static_cast<std::size_t>(gold);
        if (auto it = obj.find("subset"); it != obj.end() && !it->is_null()) {
            if (!it->is_string()) throw Error(where(path, lineno) + "key 'subset' has the wrong type");
            ex.subset = it->get<std::string>();
        }
        try {
            validate_example(ex);
        } catch (const Error& e) {
            throw Error(where(path, lineno) + e.what());
        }
        if (!seen.insert(ex.id).second)
            throw Error(where(path, lineno) + "duplicate example id '" + ex.id + "'");
        examples.push_back(std::move(ex));
    }
    return Dataset::from_examples(std::move(examples));
}

void write_examples(const std::vector<Example>& examples, const fs::path& path) {
    auto out = open_output(path);
    for (const auto& ex : examples) out << to_json(ex).dump() << '\n';
    finish(out, path);
}

void write_dataset(const Dataset& dataset, const fs::path& path) {
    write_examples(dataset.examples(), path);
}

PredictionSet load_predictions(const fs::path& path) {
    auto in = open_input(path);
    PredictionSet set;
    bool have_header = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (is_blank(line)) continue;
        auto obj = parse_line(line, path, lineno);
        if (!obj.is_object()) throw Error(where(path, lineno) + "expected a JSON object");
        if (!have_header) {
            set.model = field<std::string>(obj, "model", path, lineno);
            try {
                set.mode = parse_prompt_mode(field<std::string>(obj, "mode", path, lineno));
            } catch (const Error& e) {
                throw Error(where(path, lineno) + e.what());
            }
            have_header = true;
            continue;
        }
        auto id = field<std::string>(obj, "example_id", path, lineno);
        auto probs = field<std::vector<double>>(obj, "probs", path, lineno);
        if (!set.entries.emplace(id, std::move(probs)).second)
            throw Error(where(path, lineno) + "duplicate prediction row for '" + id + "'");
    }
    if (!have_header) throw Error(path.string() + ": missing prediction header");
    try {
        validate_prediction_set(set);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
    return set;
}

void write_predictions(const PredictionSet& set, const fs::path& path) {
    auto out = open_output(path);
    ordered_json header;
    header["model"] = set.model;
    header["mode"] = std::string(to_string(set.mode));
    out << header.dump() << '\n';
    for (const auto& [id, probs] : set.entries) {
        ordered_json row;
        row["example_id"] = id;
        row["probs"] = probs;
        out << row.dump() << '\n';
    }
    finish(out, path);
}

std::vector<PredictionSet> load_prediction_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error("'" + dir.string() + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::vector<PredictionSet> sets;
    std::set<std::pair<std::string, PromptMode>> seen;
    for (const auto& f : files) {
        auto set = load_predictions(f);
        if (!seen.emplace(set.model, set.mode).second)
            throw Error(f.string() + ": second prediction file for model '" + set.model +
                        "' in mode " + std::string(to_string(set.mode)));
        sets.push_back(std::move(set));
    }
    return sets;
}

EmbeddingSet load_embeddings(const fs::path& path, const fs::path& manifest_path) {
    auto ids = read_manifest(manifest_path);
    auto bytes = read_text_file(path);
    constexpr std::string_view magic(kEmb1Magic, sizeof(kEmb1Magic) - 1);
    if (bytes.compare(0, magic.size(), magic) == 0) return parse_emb1(bytes, path, std::move(ids));

    auto first = std::find_if(bytes.begin(), bytes.end(),
                              [](unsigned char c) { return !std::isspace(c); });
    if (first != bytes.end() && *first == '[') return parse_float_lines(path, std::move(ids));
    throw Error(path.string() + ": EMB1 magic mismatch");
}

void write_embeddings(const EmbeddingSet& embeddings, const fs::path& path,
                      const fs::path& manifest_path) {
    std::string bytes(kEmb1Magic, sizeof(kEmb1Magic) - 1);
    append_u32le(bytes, static_cast<std::uint32_t>(embeddings.size()));
    append_u32le(bytes, static_cast<std::uint32_t>(embeddings.dim()));
    bytes.reserve(bytes.size() + embeddings.data().size() * 4);
    for (float v : embeddings.data()) append_u32le(bytes, std::bit_cast<std::uint32_t>(v));
    write_text_file(path, bytes);

    std::string manifest;
    for (const auto& id : embeddings.ids()) manifest += id + '\n';
    write_text_file(manifest_path, manifest);
}

EloTable load_elo(const fs::path& path) {
    auto in = open_input(path);
    EloTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (is_blank(line)) continue;
        auto comma = line.rfind(',');
        if (comma == std::string::npos) throw Error(where(path, lineno) + "expected 'model,elo'");
        std::string model = line.substr(0, comma);
        std::string value = line.substr(comma + 1);
        double elo = 0.0;
        try {
            std::size_t used = 0;
            elo = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            if (table.empty() && lineno == 1) continue;  // header
            throw Error(where(path, lineno) + "non-numeric Elo value '" + value + "'");
        }
        if (!table.emplace(model, elo).second)
            throw Error(where(path, lineno) + "duplicate model '" + model + "' in Elo table");
    }
    return table;
}

RunConfig load_config(const fs::path& path) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw Error(path.string() + ": parse error: " + e.what());
    }
    if (!doc.is_object()) throw Error(path.string() + ": config must be a JSON object");

    RunConfig cfg;
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "confidence_threshold") cfg.confidence_threshold = value.get<double>();
            else if (key == "retention_fraction") cfg.retention_fraction = value.get<double>();
            else if (key == "knn_k") cfg.knn_k = value.get<std::size_t>();
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "anomalous_subsets") cfg.anomalous_subsets = value.get<std::vector<std::string>>();
            else if (key == "kde_grid_points") cfg.kde_grid_points = value.get<std::size_t>();
            else if (key == "threads") cfg.threads = value.get<unsigned>();
            else if (key == "kde_bandwidth") {
                if (value.is_string() && value.get<std::string>() == "silverman")
                    cfg.kde_bandwidth = BandwidthRule::silverman();
                else if (value.is_number())
                    cfg.kde_bandwidth = BandwidthRule::fixed_width(value.get<double>());
                else
                    throw Error(path.string() + ": kde_bandwidth must be \"silverman\" or a number");
            } else if (key == "cluster_removal_rounding") {
                if (value.get<std::string>() != "floor")
                    throw Error(path.string() + ": cluster_removal_rounding only supports \"floor\"");
            } else if (key == "step_order") {
                cfg.step_order.clear();
                for (const auto& s : value) {
                    auto name = s.get<std::string>();
                    if (name == "easy") cfg.step_order.push_back(FilterStep::Easy);
                    else if (name == "contamination") cfg.step_order.push_back(FilterStep::Contamination);
                    else if (name == "similarity") cfg.step_order.push_back(FilterStep::Similarity);
                    else throw Error(path.string() + ": unknown step '" + name + "'");
                }
            } else {
                throw Error(path.string() + ": unknown config key '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw Error(path.string() + ": bad config value: " + e.what());
    }
    cfg.validate();
    return cfg;
}

void write_ledger(const Ledger& ledger, const fs::path& path) {
    auto out = open_output(path);
    for (const auto& e : ledger) {
        ordered_json row;
        row["id"] = e.id;
        row["verdict"] = e.verdict() == Verdict::Keep ? "keep" : "drop";
        auto reasons = ordered_json::array();
        for (auto r : e.drop_reasons) reasons.push_back(std::string(to_string(r)));
        row["drop_reasons"] = reasons;
        row["exact_duplicate"] = e.exact_duplicate;
        row["duplicate_of"] = e.duplicate_of ? ordered_json(*e.duplicate_of) : ordered_json(nullptr);
        row["gold_conflict"] = e.gold_conflict;
        row["anomalous"] = e.anomalous;
        row["easy"] = e.easy;
        row["retained_easy"] = e.retained_easy;
        row["contaminated"] = e.contaminated;
        row["similar_cluster_id"] =
            e.similar_cluster_id ? ordered_json(*e.similar_cluster_id) : ordered_json(nullptr);
        row["removed_as_similar"] = e.removed_as_similar;
        row["wrong_gt_suspect"] = e.wrong_gt_suspect;
        row["min_gold_prob_full"] =
            e.min_gold_prob_full ? ordered_json(*e.min_gold_prob_full) : ordered_json(nullptr);
        row["min_gold_prob_choices_only"] = e.min_gold_prob_choices_only
                                                ? ordered_json(*e.min_gold_prob_choices_only)
                                                : ordered_json(nullptr);
        out << row.dump() << '\n';
    }
    finish(out, path);
}

Ledger load_ledger(const fs::path& path) {
    auto in = open_input(path);
    Ledger ledger;
    std::string line;
    std::size_t lineno = 0;
    auto opt_string = [](const json& v) -> std::optional<std::string> {
        return v.is_null() ? std::nullopt : std::optional(v.get<std::string>());
    };
    auto opt_double = [](const json& v) -> std::optional<double> {
        return v.is_null() ? std::nullopt : std::optional(v.get<double>());
    };
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (is_blank(line)) continue;
        auto row = parse_line(line, path, lineno);
        LedgerEntry e;
        try {
            e.id = row.at("id").get<std::string>();
            for (const auto& r : row.at("drop_reasons")) e.drop_reasons.push_back(parse_drop_reason(r.get<std::string>()));
            e.exact_duplicate = row.at("exact_duplicate").get<bool>();
            e.duplicate_of = opt_string(row.at("duplicate_of"));
            e.gold_conflict = row.at("gold_conflict").get<bool>();
            e.anomalous = row.at("anomalous").get<bool>();
            e.easy = row.at("easy").get<bool>();
            e.retained_easy = row.at("retained_easy").get<bool>();
            e.contaminated = row.at("contaminated").get<bool>();
            const auto& cid = row.at("similar_cluster_id");
            if (!cid.is_null()) e.similar_cluster_id = cid.get<std::int64_t>();
            e.removed_as_similar = row.at("removed_as_similar").get<bool>();
            e.wrong_gt_suspect = row.at("wrong_gt_suspect").get<bool>();
            e.min_gold_prob_full = opt_double(row.at("min_gold_prob_full"));
            e.min_gold_prob_choices_only = opt_double(row.at("min_gold_prob_choices_only"));
            const bool drop = row.at("verdict").get<std::string>() == "drop";
            if (drop != (e.verdict() == Verdict::Drop))
                throw Error("verdict disagrees with drop_reasons");
            validate_ledger_entry(e);
        } catch (const json::exception& ex) {
            throw Error(where(path, lineno) + "malformed ledger row: " + ex.what());
        } catch (const Error& ex) {
            throw Error(where(path, lineno) + ex.what());
        }
        ledger.push_back(std::move(e));
    }
    return ledger;
}

}  // namespace smartfilter
