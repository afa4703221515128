#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "smartfilter/error.hpp"
#include "smartfilter/io.hpp"
#include "smartfilter/report.hpp"

namespace smartfilter::testing {

double uniform01(Rng& rng) { return static_cast<double>(rng.next() >> 11) * 0x1.0p-53; }

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

double normal(Rng& rng) {
    // Box-Muller; std::normal_distribution is not portable across libraries.
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::vector<float> random_unit_vector(Rng& rng, std::size_t dim) {
    std::vector<double> v(dim);
    double norm = 0.0;
    do {
        norm = 0.0;
        for (auto& x : v) {
            x = normal(rng);
            norm += x * x;
        }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    std::vector<float> out(dim);
    for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / norm);
    return out;
}

namespace {

constexpr std::size_t kOptions = 4;

enum class Role { Plain, Anomalous, Easy, Contaminated, Clustered };

// `target` gets probability p; the remainder is spread over the others.
std::vector<double> peaked(Rng& rng, std::size_t target, double p) {
    std::vector<double> w(kOptions);
    double total = 0.0;
    for (std::size_t i = 0; i < kOptions; ++i) {
        if (i == target) continue;
        w[i] = uniform(rng, 0.1, 1.0);
        total += w[i];
    }
    for (std::size_t i = 0; i < kOptions; ++i) w[i] = i == target ? p : (1.0 - p) * w[i] / total;
    return w;
}

std::vector<double> confident_gold(Rng& rng, std::size_t gold) {
    return peaked(rng, gold, uniform(rng, 0.82, 0.99));
}

// Ordinary behaviour: right with probability `skill`, otherwise a wrong
// option wins. Confidence may exceed the threshold either way.
std::vector<double> ordinary(Rng& rng, std::size_t gold, double skill) {
    if (uniform01(rng) < skill) return peaked(rng, gold, uniform(rng, 0.5, 0.99));
    std::size_t wrong = (gold + 1 + rng.below(kOptions - 1)) % kOptions;
    return peaked(rng, wrong, uniform(rng, 0.5, 0.95));
}

// Gold never above 0.6: this model alone keeps the example below threshold.
std::vector<double> breaker(Rng& rng, std::size_t gold) {
    return peaked(rng, gold, uniform(rng, 0.05, 0.6));
}

std::string example_id(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "ex%05zu", i);
    return buf;
}

std::string model_name(std::size_t m) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "model-%02zu", m + 1);
    return buf;
}

const char* const kSubsets[] = {"algebra", "biology", "history", "law", "physics"};

}  // namespace

Planted make_planted(const PlantSpec& spec) {
    const std::size_t clustered_n = spec.clusters * spec.cluster_size;
    const std::size_t base = spec.examples - spec.duplicates;
    if (spec.duplicates > spec.examples ||
        spec.anomalous + spec.easy + spec.contaminated + clustered_n + spec.duplicates > base)
        throw Error("plant spec does not fit");
    if (spec.cluster_size >= spec.dim) throw Error("cluster size must be below dim");

    Planted p;
    p.spec = spec;
    Rng rng(spec.seed);

    std::vector<Role> roles(base, Role::Plain);
    {
        std::size_t at = 0;
        auto fill = [&](std::size_t n, Role r) {
            for (std::size_t i = 0; i < n; ++i) roles[at++] = r;
        };
        fill(spec.anomalous, Role::Anomalous);
        fill(spec.easy, Role::Easy);
        fill(spec.contaminated, Role::Contaminated);
        fill(clustered_n, Role::Clustered);
        rng.shuffle(std::span<Role>(roles));
    }

    std::vector<Example> examples;
    for (std::size_t i = 0; i < base; ++i) {
        Example e;
        e.id = example_id(i);
        e.question = "Synthetic question " + std::to_string(i) + ": which statement holds?";
        for (std::size_t k = 0; k < kOptions; ++k)
            e.options.push_back("statement " + std::to_string(i) + "." + std::to_string(k));
        e.gold_index = rng.below(kOptions);
        e.subset = roles[i] == Role::Anomalous ? "moral_scenarios" : kSubsets[i % 5];
        examples.push_back(std::move(e));
    }

    // Duplicates copy a plain record and take the next ids, so the
    // original (smaller id) is the kept member.
    std::vector<std::size_t> plain;
    for (std::size_t i = 0; i < base; ++i)
        if (roles[i] == Role::Plain) plain.push_back(i);
    rng.shuffle(std::span<std::size_t>(plain));
    std::vector<std::size_t> dup_source(spec.duplicates);
    for (std::size_t d = 0; d < spec.duplicates; ++d) {
        dup_source[d] = plain[d];
        Example e = examples[plain[d]];
        e.id = example_id(base + d);
        p.duplicates.insert(e.id);
        examples.push_back(std::move(e));
    }
    // A few plain records sit exactly on the threshold in both modes.
    std::set<std::size_t> on_threshold(plain.begin() + spec.duplicates,
                                       plain.begin() + std::min(plain.size(), spec.duplicates + 10));

    for (std::size_t i = 0; i < base; ++i) {
        const auto& id = examples[i].id;
        switch (roles[i]) {
            case Role::Anomalous: p.anomalous.insert(id); break;
            case Role::Easy: p.easy.insert(id); break;
            case Role::Contaminated: p.contaminated.insert(id); break;
            case Role::Clustered: p.clustered.insert(id); break;
            case Role::Plain: break;
        }
    }

    // Predictions.
    for (std::size_t m = 0; m < spec.models; ++m) {
        PredictionSet full{model_name(m), PromptMode::FullPrompt, {}};
        PredictionSet choices{model_name(m), PromptMode::ChoicesOnly, {}};
        p.predictions.push_back(std::move(full));
        p.predictions.push_back(std::move(choices));
    }
    for (std::size_t i = 0; i < base; ++i) {
        if (roles[i] == Role::Anomalous) continue;
        const auto& e = examples[i];
        const std::size_t breaker_full = rng.below(spec.models);
        const std::size_t breaker_choices = rng.below(spec.models);
        for (std::size_t m = 0; m < spec.models; ++m) {
            const double skill = 0.45 + 0.07 * static_cast<double>(m);
            std::vector<double> full, choices;
            if (on_threshold.count(i)) {
                full = peaked(rng, e.gold_index, 0.8);
                choices = peaked(rng, e.gold_index, 0.8);
            } else {
                full = roles[i] == Role::Easy ? confident_gold(rng, e.gold_index)
                       : m == breaker_full    ? breaker(rng, e.gold_index)
                                              : ordinary(rng, e.gold_index, skill);
                choices = roles[i] == Role::Contaminated ? confident_gold(rng, e.gold_index)
                          : m == breaker_choices         ? breaker(rng, e.gold_index)
                                                         : ordinary(rng, e.gold_index, skill * 0.6);
            }
            p.predictions[2 * m].entries[e.id] = std::move(full);
            p.predictions[2 * m + 1].entries[e.id] = std::move(choices);
        }
    }
    for (std::size_t d = 0; d < spec.duplicates; ++d) {
        const auto& src = examples[dup_source[d]].id;
        const auto& id = examples[base + d].id;
        for (auto& set : p.predictions) set.entries[id] = set.entries.at(src);
    }

    // Embeddings: isotropic background, clusters as stars around a centre.
    std::vector<std::vector<float>> rows(examples.size());
    for (std::size_t i = 0; i < base; ++i)
        if (roles[i] != Role::Clustered) rows[i] = random_unit_vector(rng, spec.dim);
    for (std::size_t d = 0; d < spec.duplicates; ++d) rows[base + d] = rows[dup_source[d]];

    std::vector<std::size_t> clustered_idx;
    for (std::size_t i = 0; i < base; ++i)
        if (roles[i] == Role::Clustered) clustered_idx.push_back(i);
    // cos(centre, leaf) = 1 / sqrt(1 + t^2) = 1 - a
    const double t = std::sqrt(1.0 / ((1.0 - spec.star_distance) * (1.0 - spec.star_distance)) - 1.0);
    for (std::size_t c = 0; c < spec.clusters; ++c) {
        // Gram-Schmidt on random vectors: centre plus orthonormal directions.
        std::vector<std::vector<double>> basis;
        while (basis.size() < spec.cluster_size) {
            auto r = random_unit_vector(rng, spec.dim);
            std::vector<double> v(r.begin(), r.end());
            for (const auto& b : basis) {
                double dot = 0.0;
                for (std::size_t j = 0; j < spec.dim; ++j) dot += v[j] * b[j];
                for (std::size_t j = 0; j < spec.dim; ++j) v[j] -= dot * b[j];
            }
            double norm = 0.0;
            for (double x : v) norm += x * x;
            norm = std::sqrt(norm);
            if (norm < 1e-6) continue;
            for (double& x : v) x /= norm;
            basis.push_back(std::move(v));
        }
        std::vector<std::string> members;
        for (std::size_t s = 0; s < spec.cluster_size; ++s) {
            const std::size_t idx = clustered_idx[c * spec.cluster_size + s];
            std::vector<float> row(spec.dim);
            for (std::size_t j = 0; j < spec.dim; ++j) {
                const double x = s == 0 ? basis[0][j] : basis[0][j] + t * basis[s][j];
                row[j] = static_cast<float>(x);
            }
            rows[idx] = std::move(row);
            members.push_back(examples[idx].id);
        }
        std::sort(members.begin(), members.end());
        p.clusters.push_back(std::move(members));
    }
    std::sort(p.clusters.begin(), p.clusters.end());

    std::vector<std::string> ids;
    std::vector<float> data;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        ids.push_back(examples[i].id);
        data.insert(data.end(), rows[i].begin(), rows[i].end());
    }
    p.embeddings = EmbeddingSet(spec.dim, std::move(ids), std::move(data));
    p.dataset = Dataset::from_examples(std::move(examples));

    p.config.seed = spec.seed;
    p.config.anomalous_subsets = {"moral_scenarios"};
    return p;
}

void write_fixture(const Planted& planted, const fs::path& dir) {
    fs::create_directories(dir / "predictions");
    write_dataset(planted.dataset, dir / "dataset.jsonl");
    for (const auto& set : planted.predictions)
        write_predictions(set, dir / "predictions" /
                                   (set.model + "_" + std::string(to_string(set.mode)) + ".jsonl"));
    write_embeddings(planted.embeddings, dir / "embeddings.emb1", dir / "manifest.txt");
    write_text_file(dir / "config.json", config_json(planted.config).dump(2) + "\n");
}

fs::path scratch_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("smartfilter-test-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace smartfilter::testing
